use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use super::nonce::RECEIVER_NONCE_MAX;
use super::{MsgA, MsgChoice, MsgReply, MsgSecrets, NonceSource, ProtocolError, SessionParams};
use crate::costs::ExpTally;
use crate::group::{mod_exp, mod_inv};
use crate::sealing::{self, SealError, Secret};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverPhase {
    Init,
    SentChoice,
    Recovered,
}

impl ReceiverPhase {
    fn name(self) -> &'static str {
        match self {
            ReceiverPhase::Init => "Init",
            ReceiverPhase::SentChoice => "SentChoice",
            ReceiverPhase::Recovered => "Recovered",
        }
    }
}

impl fmt::Display for ReceiverPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-choice verification results, in choice order.
pub type Opened = Vec<(usize, Result<Secret, SealError>)>;

/// Receiver side of one session.
///
/// Nonces satisfy `N_B3 = factor * N_B2` and `factor | N_B1` as integer
/// equations, so the blinding exponent `N_B1 N_B2 / N_B3 = N_B1 / factor`
/// and the unblinding exponent `N_B3 / N_B2 = factor` are both exact.
pub struct Receiver {
    session: SessionParams,
    phase: ReceiverPhase,
    choices: Vec<usize>,
    factor: BigUint,
    nonce_b1: BigUint,
    nonce_b2: BigUint,
    nonce_b3: BigUint,
    keys: Vec<BigUint>,
    tally: ExpTally,
}

impl fmt::Debug for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Receiver")
            .field("phase", &self.phase)
            .field("n", &self.session.n())
            .field("k", &self.session.k())
            .finish_non_exhaustive()
    }
}

impl Receiver {
    /// Validates 1-based `choices` (distinct, in `[1, n]`, exactly `k` of
    /// them) and stores them sorted ascending.
    pub fn new(session: SessionParams, choices: &[usize]) -> Result<Self, ProtocolError> {
        if choices.len() != session.k() {
            return Err(ProtocolError::Choice(format!(
                "{} choices given, session transfers {}",
                choices.len(),
                session.k()
            )));
        }
        let mut sorted = BTreeSet::new();
        for &c in choices {
            if c == 0 || c > session.n() {
                return Err(ProtocolError::Choice(format!(
                    "index {c} outside [1, {}]",
                    session.n()
                )));
            }
            if !sorted.insert(c) {
                return Err(ProtocolError::Choice(format!("index {c} chosen twice")));
            }
        }
        let factor = BigUint::from(session.k().max(2));
        Ok(Self {
            session,
            phase: ReceiverPhase::Init,
            choices: sorted.into_iter().collect(),
            factor,
            nonce_b1: BigUint::default(),
            nonce_b2: BigUint::default(),
            nonce_b3: BigUint::default(),
            keys: Vec::new(),
            tally: ExpTally::default(),
        })
    }

    /// Overrides the nonce factor (default `max(k, 2)`).
    pub fn with_factor(mut self, factor: u64) -> Result<Self, ProtocolError> {
        if factor == 0 {
            return Err(ProtocolError::Choice(
                "nonce factor must be positive".into(),
            ));
        }
        if self.phase != ReceiverPhase::Init {
            return Err(ProtocolError::Phase {
                operation: "with_factor",
                phase: self.phase.name(),
            });
        }
        self.factor = BigUint::from(factor);
        Ok(self)
    }

    pub fn session(&self) -> &SessionParams {
        &self.session
    }

    pub fn phase(&self) -> ReceiverPhase {
        self.phase
    }

    /// Sorted 1-based choices; wire order of `M_j` and of recovered keys.
    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn factor(&self) -> &BigUint {
        &self.factor
    }

    /// `(N_B1, N_B2, N_B3)`; zero before [`Receiver::choose`].
    pub fn nonces(&self) -> (&BigUint, &BigUint, &BigUint) {
        (&self.nonce_b1, &self.nonce_b2, &self.nonce_b3)
    }

    /// `K_B1..K_Bk` aligned with [`Receiver::choices`].
    pub fn keys(&self) -> &[BigUint] {
        &self.keys
    }

    pub fn tally(&self) -> ExpTally {
        self.tally
    }

    fn expect_phase(
        &self,
        want: ReceiverPhase,
        operation: &'static str,
    ) -> Result<(), ProtocolError> {
        if self.phase == want {
            Ok(())
        } else {
            Err(ProtocolError::Phase {
                operation,
                phase: self.phase.name(),
            })
        }
    }

    /// Draws `m` and `N_B2` from `[1, 2^64]`, sets `N_B1 = factor * m` and
    /// `N_B3 = factor * N_B2`, then blinds each chosen index.
    pub fn choose<N: NonceSource + ?Sized>(
        &mut self,
        msg_a: &MsgA,
        rng: &mut N,
    ) -> Result<MsgChoice, ProtocolError> {
        self.expect_phase(ReceiverPhase::Init, "choose")?;
        let group = self.session.group().clone();
        if !group.contains(&msg_a.ma) {
            return Err(ProtocolError::OutOfRange("M_A"));
        }

        let one = BigUint::from(1u32);
        let max = BigUint::from(RECEIVER_NONCE_MAX);
        let m = rng.draw(&one, &max);
        self.nonce_b1 = &self.factor * &m;
        self.nonce_b2 = rng.draw(&one, &max);
        self.nonce_b3 = &self.factor * &self.nonce_b2;
        debug_assert!(self.nonce_b1.is_multiple_of(&self.factor));

        // N_B1 * N_B2 / N_B3, exact
        let (blind, rem) = (&self.nonce_b1 * &self.nonce_b2).div_rem(&self.nonce_b3);
        assert!(rem.is_zero(), "N_B3 does not divide N_B1 * N_B2");

        let mjs = self
            .choices
            .iter()
            .map(|&c| {
                let gx = group.pow_g(self.session.x(c));
                self.tally.setup += 1;
                let base = group.mul(&msg_a.ma, &mod_inv(&gx, &group)?);
                self.tally.accounted += 1;
                mod_exp(&base, &blind, &group)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mb = group.pow_g(&self.nonce_b1);
        self.tally.setup += 1;

        self.phase = ReceiverPhase::SentChoice;
        Ok(MsgChoice { mjs, mb })
    }

    /// `K_Bj = reply_j^(N_B3 / N_B2)`.
    pub fn recover(&mut self, reply: &MsgReply) -> Result<Vec<BigUint>, ProtocolError> {
        self.expect_phase(ReceiverPhase::SentChoice, "recover")?;
        ProtocolError::arity("MsgReply", self.choices.len(), reply.replies.len())?;
        let group = self.session.group();
        if !reply.replies.iter().all(|r| group.contains(r)) {
            return Err(ProtocolError::OutOfRange("reply"));
        }
        let (unblind, rem) = self.nonce_b3.div_rem(&self.nonce_b2);
        assert!(rem.is_zero(), "N_B2 does not divide N_B3");

        let keys = reply
            .replies
            .iter()
            .map(|r| {
                self.tally.accounted += 1;
                mod_exp(r, &unblind, group)
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.keys = keys.clone();
        self.phase = ReceiverPhase::Recovered;
        Ok(keys)
    }

    /// Checks that all `n` commitments are distinct, then decrypts and
    /// verifies the chosen secrets. Returns `(index, secret)` pairs.
    pub fn open(&self, secrets: &MsgSecrets) -> Result<Vec<(usize, Secret)>, ProtocolError> {
        self.open_each(secrets)?
            .into_iter()
            .map(|(c, result)| Ok((c, result?)))
            .collect()
    }

    /// Like [`Receiver::open`] but reports the verification result of every
    /// chosen index separately. Duplicate commitments still fail the whole
    /// call.
    pub fn open_each(&self, secrets: &MsgSecrets) -> Result<Opened, ProtocolError> {
        self.expect_phase(ReceiverPhase::Recovered, "open")?;
        ProtocolError::arity("MsgSecrets", self.session.n(), secrets.sealed.len())?;
        if let Some((first, second)) = sealing::first_duplicate(&secrets.commitments()) {
            return Err(SealError::SameMessage { first, second }.into());
        }
        let group = self.session.group();
        Ok(self
            .choices
            .iter()
            .zip(&self.keys)
            .map(|(&c, key)| {
                let sym = sealing::derive_key(key, group, c as u32);
                (c, sealing::unseal(&secrets.sealed[c - 1], &sym, c))
            })
            .collect())
    }
}

/// Creates a receiver and answers `msg_a` in one step.
pub fn receiver_choose<N: NonceSource + ?Sized>(
    session: SessionParams,
    msg_a: &MsgA,
    choices: &[usize],
    rng: &mut N,
) -> Result<(Receiver, MsgChoice), ProtocolError> {
    let mut receiver = Receiver::new(session, choices)?;
    let msg = receiver.choose(msg_a, rng)?;
    Ok((receiver, msg))
}
