use std::fmt;

use num_bigint::BigUint;

use super::{MsgA, MsgChoice, MsgReply, MsgSecrets, NonceSource, ProtocolError, SessionParams};
use crate::costs::ExpTally;
use crate::group::mod_exp;
use crate::sealing::{self, Secret};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderPhase {
    Init,
    SentMa,
    Responded,
    Sealed,
}

impl SenderPhase {
    fn name(self) -> &'static str {
        match self {
            SenderPhase::Init => "Init",
            SenderPhase::SentMa => "SentMa",
            SenderPhase::Responded => "Responded",
            SenderPhase::Sealed => "Sealed",
        }
    }
}

impl fmt::Display for SenderPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sender side of one session. Phases only move forward:
/// `Init -> SentMa -> Responded -> Sealed`.
pub struct Sender {
    session: SessionParams,
    phase: SenderPhase,
    pub(super) nonce_a1: BigUint,
    nonce_a2: BigUint,
    // N_A1 + sum x_i
    exp_sum: BigUint,
    keys: Vec<BigUint>,
    tally: ExpTally,
}

impl fmt::Debug for Sender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sender")
            .field("phase", &self.phase)
            .field("n", &self.session.n())
            .field("k", &self.session.k())
            .finish_non_exhaustive()
    }
}

impl Sender {
    pub fn new(session: SessionParams) -> Self {
        Self {
            session,
            phase: SenderPhase::Init,
            nonce_a1: BigUint::default(),
            nonce_a2: BigUint::default(),
            exp_sum: BigUint::default(),
            keys: Vec::new(),
            tally: ExpTally::default(),
        }
    }

    pub fn session(&self) -> &SessionParams {
        &self.session
    }

    pub fn phase(&self) -> SenderPhase {
        self.phase
    }

    /// Exponentiations performed so far.
    pub fn tally(&self) -> ExpTally {
        self.tally
    }

    /// `K_A1..K_An`; empty before [`Sender::respond`].
    pub fn keys(&self) -> &[BigUint] {
        &self.keys
    }

    fn expect_phase(
        &self,
        want: SenderPhase,
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

    /// Draws `N_A1` from `[1, p-2]` and emits `M_A = g^(N_A1 + sum x_i)`.
    pub fn start<N: NonceSource + ?Sized>(&mut self, rng: &mut N) -> Result<MsgA, ProtocolError> {
        self.expect_phase(SenderPhase::Init, "start")?;
        let group = self.session.group();
        self.nonce_a1 = rng.draw(&BigUint::from(1u32), &(group.p() - 2u32));
        self.exp_sum = &self.nonce_a1 + self.session.exponent_sum();
        let ma = group.pow_g(&self.exp_sum);
        self.tally.setup += 1;
        self.phase = SenderPhase::SentMa;
        Ok(MsgA { ma })
    }

    /// Draws `N_A2`, derives every key `K_Aj = M_B^((N_A1 + sum x_i - x_j) N_A2)`
    /// and raises each received `M_j` to `N_A2`.
    pub fn respond<N: NonceSource + ?Sized>(
        &mut self,
        choice: &MsgChoice,
        rng: &mut N,
    ) -> Result<MsgReply, ProtocolError> {
        self.expect_phase(SenderPhase::SentMa, "respond")?;
        ProtocolError::arity("MsgChoice", self.session.k(), choice.mjs.len())?;
        let group = self.session.group().clone();
        if !group.contains(&choice.mb) {
            return Err(ProtocolError::OutOfRange("M_B"));
        }
        if !choice.mjs.iter().all(|m| group.contains(m)) {
            return Err(ProtocolError::OutOfRange("M_j"));
        }

        self.nonce_a2 = rng.draw(&BigUint::from(1u32), &(group.p() - 2u32));
        let mut keys = Vec::with_capacity(self.session.n());
        for x in self.session.xs() {
            // x is one of the summands, so this never drops below N_A1
            let exponent = &self.exp_sum - x;
            assert!(exponent >= self.nonce_a1, "key exponent below N_A1");
            let exponent = (exponent * &self.nonce_a2) % group.order();
            keys.push(mod_exp(&choice.mb, &exponent, &group)?);
            self.tally.accounted += 1;
        }
        let replies = choice
            .mjs
            .iter()
            .map(|m| {
                self.tally.accounted += 1;
                mod_exp(m, &self.nonce_a2, &group)
            })
            .collect::<Result<Vec<_>, _>>()?;

        self.keys = keys;
        self.phase = SenderPhase::Responded;
        Ok(MsgReply { replies })
    }

    /// Seals `S_i` under a key derived from `K_Ai` and commits to it.
    pub fn seal(&mut self, secrets: &[Secret]) -> Result<MsgSecrets, ProtocolError> {
        self.expect_phase(SenderPhase::Responded, "seal")?;
        ProtocolError::arity("secret list", self.session.n(), secrets.len())?;
        let group = self.session.group();
        let sealed = secrets
            .iter()
            .zip(&self.keys)
            .enumerate()
            .map(|(i, (secret, key))| {
                let sym = sealing::derive_key(key, group, (i + 1) as u32);
                sealing::seal(secret, &sym)
            })
            .collect();
        self.phase = SenderPhase::Sealed;
        Ok(MsgSecrets { sealed })
    }
}

/// Creates a sender and emits `M_A` in one step.
pub fn sender_init<N: NonceSource + ?Sized>(
    session: SessionParams,
    rng: &mut N,
) -> Result<(Sender, MsgA), ProtocolError> {
    let mut sender = Sender::new(session);
    let msg = sender.start(rng)?;
    Ok((sender, msg))
}
