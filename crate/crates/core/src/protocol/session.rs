use std::collections::HashSet;

use num_bigint::BigUint;

use super::ProtocolError;
use crate::group::GroupParams;

/// The mutually agreed parameters of one transfer: the group, the public
/// index set `x_1..x_n` and the number `k` of secrets to transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionParams {
    group: GroupParams,
    xs: Vec<BigUint>,
    k: usize,
    exponent_sum: BigUint,
}

impl SessionParams {
    pub fn new(group: GroupParams, xs: Vec<BigUint>, k: usize) -> Result<Self, ProtocolError> {
        if xs.is_empty() {
            return Err(ProtocolError::Session("index set is empty".into()));
        }
        if k == 0 || k > xs.len() {
            return Err(ProtocolError::Session(format!(
                "k = {k} outside [1, {}]",
                xs.len()
            )));
        }
        if xs.len() > u32::MAX as usize {
            return Err(ProtocolError::Session("too many secrets".into()));
        }
        let upper = group.p() - 2u32;
        let mut seen = HashSet::with_capacity(xs.len());
        for x in &xs {
            if *x < BigUint::from(1u32) || *x > upper {
                return Err(ProtocolError::Session(format!(
                    "index value {x} outside [1, p-2]"
                )));
            }
            if !seen.insert(x) {
                return Err(ProtocolError::Session(format!("index value {x} repeated")));
            }
        }
        let exponent_sum = xs.iter().sum();
        Ok(Self {
            group,
            xs,
            k,
            exponent_sum,
        })
    }

    /// Uses the index set `{1, 2, ..., n}`.
    pub fn with_default_indices(
        group: GroupParams,
        n: usize,
        k: usize,
    ) -> Result<Self, ProtocolError> {
        let xs = (1..=n as u64).map(BigUint::from).collect();
        Self::new(group, xs, k)
    }

    /// Demo session: `p = 23, g = 5, xs = {1..5}, k = 2`.
    pub fn toy() -> Self {
        Self::with_default_indices(GroupParams::toy(), 5, 2).expect("valid example session")
    }

    pub fn group(&self) -> &GroupParams {
        &self.group
    }

    pub fn xs(&self) -> &[BigUint] {
        &self.xs
    }

    /// `x_index` for a 1-based index.
    pub fn x(&self, index: usize) -> &BigUint {
        &self.xs[index - 1]
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `x_1 + ... + x_n` as an integer (not reduced).
    pub fn exponent_sum(&self) -> &BigUint {
        &self.exponent_sum
    }

    /// Same group and index set with a different transfer count.
    pub fn with_k(&self, k: usize) -> Result<Self, ProtocolError> {
        Self::new(self.group.clone(), self.xs.clone(), k)
    }
}
