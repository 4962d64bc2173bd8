//! Complete sender and receiver sessions over a framed byte stream.

use std::io::{Read, Write};

use num_bigint::BigUint;

use crate::costs::ExpTally;
use crate::group::GroupParams;
use crate::protocol::{NonceSource, ProtocolError, Receiver, Sender, SessionParams};
use crate::sealing::{SealError, Secret};
use crate::wire::{
    abort, memory_pipe, Direction, ErrorFrame, Framed, Hello, Message, Transcript, TransportError,
};

#[derive(Debug, thiserror::Error)]
pub enum EndpointError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("expected {expected}, received {got}")]
    Unexpected {
        expected: &'static str,
        got: &'static str,
    },
    #[error("peer aborted (code {code:#04x}): {reason}")]
    PeerAbort { code: u8, reason: String },
    #[error("session parameters differ from the local configuration: {0}")]
    Mismatch(String),
}

impl EndpointError {
    /// True for the duplicate-commitment detection.
    pub fn is_same_message(&self) -> bool {
        matches!(
            self,
            EndpointError::Protocol(ProtocolError::Seal(SealError::SameMessage { .. }))
        )
    }
}

fn expect<T>(
    message: Message,
    expected: &'static str,
    pick: impl FnOnce(Message) -> Result<T, Message>,
) -> Result<T, EndpointError> {
    pick(message).map_err(|other| match other {
        Message::Error(ErrorFrame { code, reason }) => EndpointError::PeerAbort { code, reason },
        other => EndpointError::Unexpected {
            expected,
            got: other.name(),
        },
    })
}

/// Best-effort abort notice; the original error is what matters.
fn abort_with<S: Read + Write>(
    conn: &mut Framed<S>,
    code: u8,
    err: EndpointError,
) -> EndpointError {
    let _ = conn.send(&Message::Error(ErrorFrame {
        code,
        reason: err.to_string(),
    }));
    err
}

#[derive(Debug)]
pub struct SenderOutcome {
    pub transcript: Transcript,
    pub tally: ExpTally,
}

/// Runs the sender: Hello, MsgA, then MsgReply and MsgSecrets in answer to
/// the receiver's MsgChoice.
pub fn run_sender<S, N>(
    conn: &mut Framed<S>,
    session: &SessionParams,
    secrets: &[Secret],
    rng: &mut N,
) -> Result<SenderOutcome, EndpointError>
where
    S: Read + Write,
    N: NonceSource + ?Sized,
{
    if secrets.len() != session.n() {
        return Err(ProtocolError::Arity {
            message: "secret list",
            expected: session.n(),
            got: secrets.len(),
        }
        .into());
    }
    let mut sender = Sender::new(session.clone());
    conn.send(&Message::Hello(Hello::from_session(session)))?;
    let msg_a = sender.start(rng)?;
    conn.send(&Message::A(msg_a))?;

    let choice = expect(conn.recv()?, "MsgChoice", |m| match m {
        Message::Choice(c) => Ok(c),
        other => Err(other),
    })?;
    let reply = match sender.respond(&choice, rng) {
        Ok(reply) => reply,
        Err(e) => return Err(abort_with(conn, abort::PROTOCOL, e.into())),
    };
    conn.send(&Message::Reply(reply))?;
    let sealed = sender.seal(secrets)?;
    conn.send(&Message::Secrets(sealed))?;

    Ok(SenderOutcome {
        transcript: conn.transcript().clone(),
        tally: sender.tally(),
    })
}

/// What the receiver expects the sender to propose.
#[derive(Debug, Clone)]
pub struct ReceiverConfig {
    pub group: GroupParams,
    /// `None` means the default index set `{1..n}`.
    pub xs: Option<Vec<BigUint>>,
    pub k: usize,
    pub choices: Vec<usize>,
    /// Nonce factor override; `None` uses `max(k, 2)`.
    pub factor: Option<u64>,
}

impl ReceiverConfig {
    fn check(&self, session: &SessionParams) -> Result<(), String> {
        if session.group() != &self.group {
            return Err("group differs".into());
        }
        if session.k() != self.k {
            return Err(format!(
                "k = {} proposed, {} configured",
                session.k(),
                self.k
            ));
        }
        let expected: Vec<BigUint> = match &self.xs {
            Some(xs) => xs.clone(),
            None => (1..=session.n() as u64).map(BigUint::from).collect(),
        };
        if session.xs() != expected.as_slice() {
            return Err("index set differs".into());
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct ReceiverOutcome {
    pub session: SessionParams,
    /// Sorted choices with their verification result.
    pub results: Vec<(usize, Result<Secret, SealError>)>,
    pub keys: Vec<BigUint>,
    pub transcript: Transcript,
    pub tally: ExpTally,
}

impl ReceiverOutcome {
    pub fn all_verified(&self) -> bool {
        self.results.iter().all(|(_, r)| r.is_ok())
    }

    /// First verification failure, or all recovered secrets.
    pub fn secrets(&self) -> Result<Vec<(usize, Secret)>, SealError> {
        self.results
            .iter()
            .map(|(c, r)| r.clone().map(|s| (*c, s)))
            .collect()
    }
}

/// Runs the receiver: validates Hello against `config`, answers MsgA and
/// opens the chosen secrets.
pub fn run_receiver<S, N>(
    conn: &mut Framed<S>,
    config: &ReceiverConfig,
    rng: &mut N,
) -> Result<ReceiverOutcome, EndpointError>
where
    S: Read + Write,
    N: NonceSource + ?Sized,
{
    let hello = expect(conn.recv()?, "Hello", |m| match m {
        Message::Hello(h) => Ok(h),
        other => Err(other),
    })?;
    let session = match hello.to_session() {
        Ok(s) => s,
        Err(e) => return Err(abort_with(conn, abort::PARAMS_MISMATCH, e.into())),
    };
    if let Err(why) = config.check(&session) {
        return Err(abort_with(
            conn,
            abort::PARAMS_MISMATCH,
            EndpointError::Mismatch(why),
        ));
    }
    let mut receiver = match Receiver::new(session.clone(), &config.choices) {
        Ok(r) => r,
        Err(e) => return Err(abort_with(conn, abort::PROTOCOL, e.into())),
    };
    if let Some(factor) = config.factor {
        receiver = receiver.with_factor(factor)?;
    }

    let msg_a = expect(conn.recv()?, "MsgA", |m| match m {
        Message::A(a) => Ok(a),
        other => Err(other),
    })?;
    let choice = match receiver.choose(&msg_a, rng) {
        Ok(c) => c,
        Err(e) => return Err(abort_with(conn, abort::PROTOCOL, e.into())),
    };
    conn.send(&Message::Choice(choice))?;

    let reply = expect(conn.recv()?, "MsgReply", |m| match m {
        Message::Reply(r) => Ok(r),
        other => Err(other),
    })?;
    receiver.recover(&reply)?;
    let sealed = expect(conn.recv()?, "MsgSecrets", |m| match m {
        Message::Secrets(s) => Ok(s),
        other => Err(other),
    })?;
    let results = receiver.open_each(&sealed)?;

    Ok(ReceiverOutcome {
        session,
        results,
        keys: receiver.keys().to_vec(),
        transcript: conn.transcript().clone(),
        tally: receiver.tally(),
    })
}

#[derive(Debug)]
pub struct LocalRun {
    pub sender: SenderOutcome,
    pub receiver: ReceiverOutcome,
}

/// Runs both endpoints on two threads joined by an in-memory pipe.
pub fn run_local<SN, RN>(
    session: &SessionParams,
    secrets: &[Secret],
    config: &ReceiverConfig,
    sender_rng: &mut SN,
    receiver_rng: &mut RN,
) -> Result<LocalRun, EndpointError>
where
    SN: NonceSource + Send + ?Sized,
    RN: NonceSource + ?Sized,
{
    let (sender_end, receiver_end) = memory_pipe();
    std::thread::scope(|scope| {
        let sender = scope.spawn(move || {
            let mut conn = Framed::new(sender_end, Direction::SenderToReceiver);
            run_sender(&mut conn, session, secrets, sender_rng)
        });
        let mut conn = Framed::new(receiver_end, Direction::ReceiverToSender);
        let receiver = run_receiver(&mut conn, config, receiver_rng);
        // release the pipe so a blocked sender sees EOF
        drop(conn);
        let sender = sender.join().expect("sender thread panicked");
        let receiver = receiver?;
        Ok(LocalRun {
            sender: sender?,
            receiver,
        })
    })
}
