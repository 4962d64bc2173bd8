//! Diffie-Hellman based k-out-of-n oblivious transfer.
//!
//! A sender holding `n` secrets and a receiver who wants `k` of them
//! obliviously agree on `n` Diffie-Hellman keys: the sender derives all of
//! them, the receiver can only reconstruct the ones it asked for, and the
//! sender never learns which. Secrets then travel sealed under those keys,
//! each with a hash commitment so the receiver can detect a sender who
//! offers the same secret under every index.
//!
//! * [`group`]: safe-prime groups, parameter generation and validation.
//! * [`protocol`]: sender/receiver state machines.
//! * [`sealing`]: key derivation, sealing and commitments.
//! * [`wire`]: frame codec, transports and transcripts.
//! * [`endpoint`]: full sessions over a transport.
//! * [`costs`]: exponentiation and transfer accounting.
//! * [`oracle`]: table-based brute-force checks for tiny groups.

pub mod costs;
pub mod endpoint;
pub mod group;
pub mod oracle;
pub mod protocol;
pub mod sealing;
pub mod wire;

pub use group::{GroupError, GroupParams};
pub use protocol::{ProtocolError, Receiver, Sender, SessionParams};
pub use sealing::{SealError, Secret};
