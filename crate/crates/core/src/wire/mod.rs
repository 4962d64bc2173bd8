//! Bit-exact framing of the protocol messages.
//!
//! Every frame is
//!
//! ```text
//! +--------+---------+----------+--------------+-----------------+
//! | "KNOT" | version | msg_type | body_len u32 | body            |
//! | 4      | 1       | 1        | 4 (BE)       | body_len bytes  |
//! +--------+---------+----------+--------------+-----------------+
//! ```
//!
//! Integers inside bodies are a 4-byte big-endian length followed by the
//! minimal big-endian magnitude (zero is the empty string). Lists carry a
//! 4-byte count. Decoding rejects non-minimal integers and trailing bytes, so
//! every valid message has exactly one encoding.

mod codec;
mod transcript;
mod transport;

pub use codec::{decode, encode};
pub use transcript::{session_transcript, Direction, Transcript, TranscriptEntry};
pub use transport::{memory_pipe, Framed, MemoryPipe, TransportError, MAX_BODY_LEN};

use num_bigint::BigUint;

use crate::group::GroupParams;
use crate::protocol::{MsgA, MsgChoice, MsgReply, MsgSecrets, ProtocolError, SessionParams};
use crate::sealing::SUITE_SHA256_CTR;

pub const MAGIC: [u8; 4] = *b"KNOT";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 10;

pub const TYPE_HELLO: u8 = 0x01;
pub const TYPE_MSG_A: u8 = 0x02;
pub const TYPE_MSG_CHOICE: u8 = 0x03;
pub const TYPE_MSG_REPLY: u8 = 0x04;
pub const TYPE_MSG_SECRETS: u8 = 0x05;
pub const TYPE_ERROR: u8 = 0x7F;

/// Codes carried in [`ErrorFrame`].
pub mod abort {
    pub const PROTOCOL: u8 = 0x01;
    pub const PARAMS_MISMATCH: u8 = 0x02;
    pub const DECODE: u8 = 0x03;
}

/// Session agreement, sent by the sender before anything else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hello {
    pub suite: u8,
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
    pub k: u32,
    pub xs: Vec<BigUint>,
}

impl Hello {
    pub fn from_session(session: &SessionParams) -> Self {
        let group = session.group();
        Self {
            suite: SUITE_SHA256_CTR,
            p: group.p().clone(),
            q: group.q().clone(),
            g: group.g().clone(),
            k: session.k() as u32,
            xs: session.xs().to_vec(),
        }
    }

    /// Validates the advertised parameters.
    pub fn to_session(&self) -> Result<SessionParams, ProtocolError> {
        if self.suite != SUITE_SHA256_CTR {
            return Err(ProtocolError::Session(format!(
                "unsupported suite {:#04x}",
                self.suite
            )));
        }
        let group = GroupParams::new(self.p.clone(), self.q.clone(), self.g.clone())?;
        SessionParams::new(group, self.xs.clone(), self.k as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorFrame {
    pub code: u8,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Hello(Hello),
    A(MsgA),
    Choice(MsgChoice),
    Reply(MsgReply),
    Secrets(MsgSecrets),
    Error(ErrorFrame),
}

impl Message {
    pub fn type_byte(&self) -> u8 {
        match self {
            Message::Hello(_) => TYPE_HELLO,
            Message::A(_) => TYPE_MSG_A,
            Message::Choice(_) => TYPE_MSG_CHOICE,
            Message::Reply(_) => TYPE_MSG_REPLY,
            Message::Secrets(_) => TYPE_MSG_SECRETS,
            Message::Error(_) => TYPE_ERROR,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Message::Hello(_) => "Hello",
            Message::A(_) => "MsgA",
            Message::Choice(_) => "MsgChoice",
            Message::Reply(_) => "MsgReply",
            Message::Secrets(_) => "MsgSecrets",
            Message::Error(_) => "Error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("input truncated")]
    Truncated,
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    #[error("non-canonical integer encoding")]
    NonCanonical,
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("body of {0} bytes exceeds the frame limit")]
    Oversized(u64),
    #[error("malformed body: {0}")]
    Malformed(&'static str),
}
