use num_bigint::BigUint;

use crate::sealing::SealedSecret;

/// `M_A = g^(N_A1 + sum x_i) mod p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsgA {
    pub ma: BigUint,
}

/// The receiver's blinded choices `M_1..M_k` and `M_B = g^N_B1 mod p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsgChoice {
    pub mjs: Vec<BigUint>,
    pub mb: BigUint,
}

/// `M_j^N_A2 mod p` for each received `M_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsgReply {
    pub replies: Vec<BigUint>,
}

/// All `n` sealed secrets in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsgSecrets {
    pub sealed: Vec<SealedSecret>,
}

impl MsgSecrets {
    pub fn commitments(&self) -> Vec<crate::sealing::Digest> {
        self.sealed.iter().map(|s| s.commitment).collect()
    }
}
