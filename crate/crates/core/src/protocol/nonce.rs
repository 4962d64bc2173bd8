use std::collections::VecDeque;

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::{CryptoRng, RngCore};

/// Upper bound (inclusive) for the receiver's `m` and `N_B2` draws: 2^64.
pub const RECEIVER_NONCE_MAX: u128 = 1 << 64;

/// Source of protocol nonces. Every cryptographic RNG is one; tests and the
/// demo script exact values with [`ScriptedNonces`].
pub trait NonceSource {
    /// Uniform draw from `[low, high]`.
    fn draw(&mut self, low: &BigUint, high: &BigUint) -> BigUint;
}

impl<R: RngCore + CryptoRng> NonceSource for R {
    fn draw(&mut self, low: &BigUint, high: &BigUint) -> BigUint {
        self.gen_biguint_range(low, &(high + BigUint::one()))
    }
}

/// Replays a fixed list of nonces in draw order. Deterministic nonces remove
/// every privacy guarantee, so this exists only for tests and the demo.
///
/// Draw order: the sender draws `N_A1` then `N_A2`; the receiver draws `m`
/// (with `N_B1 = factor * m`) then `N_B2`.
#[derive(Debug, Clone, Default)]
pub struct ScriptedNonces {
    queue: VecDeque<BigUint>,
}

impl ScriptedNonces {
    pub fn new<I, T>(values: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigUint>,
    {
        Self {
            queue: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.queue.len()
    }
}

impl NonceSource for ScriptedNonces {
    /// # Panics
    /// When the script is exhausted or the scripted value is out of range.
    fn draw(&mut self, low: &BigUint, high: &BigUint) -> BigUint {
        let value = self.queue.pop_front().expect("nonce script exhausted");
        assert!(
            &value >= low && &value <= high,
            "scripted nonce {value} outside [{low}, {high}]"
        );
        value
    }
}
