use std::process::ExitCode;

use knot::endpoint::EndpointError;
use knot::protocol::ProtocolError;
use knot::sealing::SealError;
use knot::wire::TransportError;

/// Every failure the tool reports, one exit code per class.
///
/// | code | class |
/// |------|-------|
/// | 0 | success |
/// | 2 | usage (bad arguments, bad files) |
/// | 3 | I/O or connection failure |
/// | 4 | protocol failure (framing, phase, parameter mismatch, peer abort) |
/// | 5 | a chosen secret failed verification |
/// | 6 | duplicate commitments (same-message attack) |
/// | 7 | demo value mismatch |
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("verification: {0}")]
    Verification(String),
    #[error("same-message attack detected: {0}")]
    SameMessage(String),
    #[error("demo mismatch:\n{0}")]
    DemoMismatch(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Protocol(_) => 4,
            Failure::Verification(_) => 5,
            Failure::SameMessage(_) => 6,
            Failure::DemoMismatch(_) => 7,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<SealError> for Failure {
    fn from(e: SealError) -> Self {
        match e {
            SealError::SameMessage { .. } => Failure::SameMessage(e.to_string()),
            SealError::Verification { .. } => Failure::Verification(e.to_string()),
            SealError::EmptySecret | SealError::SecretTooLarge(_) => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Seal(seal) => seal.into(),
            other => Failure::Protocol(other.to_string()),
        }
    }
}

impl From<EndpointError> for Failure {
    fn from(e: EndpointError) -> Self {
        match e {
            EndpointError::Transport(TransportError::Io(io)) => Failure::Io(io.to_string()),
            EndpointError::Transport(TransportError::Closed) => {
                Failure::Io("peer closed the connection".into())
            }
            EndpointError::Protocol(p) => p.into(),
            other => Failure::Protocol(other.to_string()),
        }
    }
}
