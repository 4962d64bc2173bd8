//! Sender and receiver state machines for k-out-of-n oblivious transfer.
//!
//! Message flow after both sides hold the same [`SessionParams`]:
//!
//! ```text
//!    Sender                                          Receiver
//!      | -- MsgA       { M_A = g^(N_A1 + sum x_i) } -----> |
//!      | <- MsgChoice  { M_j = (M_A / g^x_cj)^e, M_B } --- |
//!      | -- MsgReply   { M_j^N_A2 } ---------------------> |
//!      | -- MsgSecrets { seal(S_i, K_Ai), Hash(S_i) } ---> |
//! ```
//!
//! The receiver's exponent `e` is the exact integer `N_B1 / factor`, and it
//! later raises each reply to `factor = N_B3 / N_B2`, so its recovered key is
//! `(M_A / g^x_cj)^(N_B1 N_A2) = K_A(c_j)`. The 1-out-of-n protocol is the
//! `k = 1` configuration.

mod exchange;
mod messages;
mod nonce;
mod receiver;
mod sender;
mod session;

pub use exchange::{run_1_of_n, run_k_of_n, Exchange};
pub use messages::{MsgA, MsgChoice, MsgReply, MsgSecrets};
pub use nonce::{NonceSource, ScriptedNonces, RECEIVER_NONCE_MAX};
pub use receiver::{receiver_choose, Receiver, ReceiverPhase};
pub use sender::{sender_init, Sender, SenderPhase};
pub use session::SessionParams;

use crate::group::GroupError;
use crate::sealing::SealError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid session: {0}")]
    Session(String),
    #[error("invalid choice: {0}")]
    Choice(String),
    #[error("{operation} not allowed in phase {phase}")]
    Phase {
        operation: &'static str,
        phase: &'static str,
    },
    #[error("{message} carries {got} elements, expected {expected}")]
    Arity {
        message: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0} is outside [1, p-1]")]
    OutOfRange(&'static str),
    #[error(transparent)]
    Seal(#[from] SealError),
}

impl ProtocolError {
    fn arity(message: &'static str, expected: usize, got: usize) -> Result<(), Self> {
        if expected == got {
            Ok(())
        } else {
            Err(Self::Arity {
                message,
                expected,
                got,
            })
        }
    }
}
