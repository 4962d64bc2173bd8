//! Symmetric sealing of secrets under keys derived from group elements, and
//! hash commitments that let the receiver detect a sender who hands out the
//! same secret under every index.
//!
//! The cipher is a SHA-256 counter keystream XORed onto the payload. Integrity
//! comes only from the commitment `SHA-256(COMMIT_TAG || payload)`, which the
//! receiver recomputes after decryption.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use sha2::{Digest as _, Sha256};

use crate::group::GroupParams;

/// Suite byte carried in the handshake: SHA-256 with a hash-counter keystream.
pub const SUITE_SHA256_CTR: u8 = 0x01;

const KEY_TAG: &[u8] = b"KNOT/v1/key";
const COMMIT_TAG: &[u8] = b"KNOT/v1/commit";

/// Largest payload accepted by [`Secret::new`].
pub const MAX_SECRET_LEN: usize = u32::MAX as usize;

pub type Digest = [u8; 32];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SealError {
    #[error("secrets must not be empty")]
    EmptySecret,
    #[error("secret of {0} bytes exceeds the 2^32 - 1 limit")]
    SecretTooLarge(usize),
    #[error("commitment mismatch for secret {index}: wrong key or dishonest sender")]
    Verification { index: usize },
    #[error("secrets {first} and {second} carry identical commitments")]
    SameMessage { first: usize, second: usize },
}

/// A non-empty secret payload.
#[derive(Clone, PartialEq, Eq)]
pub struct Secret(Vec<u8>);

impl Secret {
    pub fn new(payload: impl Into<Vec<u8>>) -> Result<Self, SealError> {
        let payload = payload.into();
        if payload.is_empty() {
            return Err(SealError::EmptySecret);
        }
        if payload.len() > MAX_SECRET_LEN {
            return Err(SealError::SecretTooLarge(payload.len()));
        }
        Ok(Self(payload))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

// Secrets stay out of logs.
impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Secret({} bytes)", self.0.len())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SymmetricKey([u8; 32]);

impl SymmetricKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

/// Ciphertext plus the unkeyed commitment to the plaintext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedSecret {
    pub ciphertext: Vec<u8>,
    pub commitment: Digest,
}

/// `SHA-256(KEY_TAG || be(p) || be(element) || be32(index_tag))`, where both
/// integers are left-padded to the byte length of `p`.
pub fn derive_key(element: &BigUint, group: &GroupParams, index_tag: u32) -> SymmetricKey {
    let width = group.byte_len();
    let mut hasher = Sha256::new();
    hasher.update(KEY_TAG);
    hasher.update(padded(group.p(), width));
    hasher.update(padded(element, width));
    hasher.update(index_tag.to_be_bytes());
    SymmetricKey(hasher.finalize().into())
}

fn padded(value: &BigUint, width: usize) -> Vec<u8> {
    let bytes = value.to_bytes_be();
    let mut out = vec![0u8; width.saturating_sub(bytes.len())];
    out.extend_from_slice(&bytes);
    out
}

/// Hash commitment to a payload.
pub fn commit(payload: &[u8]) -> Digest {
    let mut hasher = Sha256::new();
    hasher.update(COMMIT_TAG);
    hasher.update(payload);
    hasher.finalize().into()
}

/// XORs the keystream `SHA-256(key || be64(i))`, `i = 0, 1, ...`, onto `data`.
fn apply_keystream(key: &SymmetricKey, data: &mut [u8]) {
    for (counter, chunk) in data.chunks_mut(32).enumerate() {
        let mut hasher = Sha256::new();
        hasher.update(key.0);
        hasher.update((counter as u64).to_be_bytes());
        let block: [u8; 32] = hasher.finalize().into();
        for (byte, ks) in chunk.iter_mut().zip(block) {
            *byte ^= ks;
        }
    }
}

pub fn seal(secret: &Secret, key: &SymmetricKey) -> SealedSecret {
    let mut ciphertext = secret.0.clone();
    apply_keystream(key, &mut ciphertext);
    SealedSecret {
        ciphertext,
        commitment: commit(&secret.0),
    }
}

/// Decrypts and checks the commitment. `index` only labels the error.
pub fn unseal(
    sealed: &SealedSecret,
    key: &SymmetricKey,
    index: usize,
) -> Result<Secret, SealError> {
    let mut plain = sealed.ciphertext.clone();
    apply_keystream(key, &mut plain);
    if plain.is_empty() || commit(&plain) != sealed.commitment {
        return Err(SealError::Verification { index });
    }
    Ok(Secret(plain))
}

/// True iff no two commitments are byte-equal.
pub fn check_distinct(commitments: &[Digest]) -> bool {
    first_duplicate(commitments).is_none()
}

/// 1-based indices of the first pair of equal commitments.
pub fn first_duplicate(commitments: &[Digest]) -> Option<(usize, usize)> {
    let mut seen = HashMap::with_capacity(commitments.len());
    for (i, c) in commitments.iter().enumerate() {
        if let Some(first) = seen.insert(c, i) {
            return Some((first + 1, i + 1));
        }
    }
    None
}
