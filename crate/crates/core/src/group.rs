//! Safe-prime multiplicative groups `Z_p*`.
//!
//! All protocol arithmetic happens modulo a safe prime `p = 2q + 1` with a
//! generator `g` of the full group of order `p - 1`. Exponents are reduced
//! modulo `p - 1` before exponentiation.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::{CryptoRng, RngCore};

/// Miller-Rabin rounds used by [`is_probable_prime`].
pub const MILLER_RABIN_ROUNDS: usize = 40;

/// Trial division runs over every prime below this bound.
pub const TRIAL_DIVISION_BOUND: u32 = 10_000;

/// Smallest accepted modulus.
pub const MIN_MODULUS: u32 = 23;

/// Accepted range for [`generate_safe_prime`].
pub const MIN_BITS: u64 = 5;
pub const MAX_BITS: u64 = 4096;

/// Default modulus size for freshly generated parameters.
pub const DEFAULT_BITS: u64 = 512;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("invalid group parameters: {0}")]
    InvalidParams(&'static str),
    #[error("element out of range [1, p-1]")]
    ElementOutOfRange,
    #[error("zero has no inverse")]
    NoInverse,
    #[error("bit size {0} outside [{MIN_BITS}, {MAX_BITS}]")]
    BitSize(u64),
    #[error("malformed parameter file: {0}")]
    ParamsFile(String),
}

/// Safe prime `p`, its Sophie-Germain prime `q = (p-1)/2` and a generator `g`
/// of `Z_p*`. Only constructed through validation.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupParams {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    order: BigUint,
}

impl GroupParams {
    /// Validates the triple and wraps it.
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self, GroupError> {
        check_params(&p, &q, &g)?;
        let order = &p - 1u32;
        Ok(Self { p, q, g, order })
    }

    /// Demo group `p = 23, q = 11, g = 5`.
    pub fn toy() -> Self {
        Self::new(23u32.into(), 11u32.into(), 5u32.into()).expect("23/11/5 is a valid group")
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    /// Group order `p - 1`.
    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn bits(&self) -> u64 {
        self.p.bits()
    }

    /// Number of bytes in the big-endian encoding of `p`.
    pub fn byte_len(&self) -> usize {
        self.bits().div_ceil(8) as usize
    }

    pub fn contains(&self, element: &BigUint) -> bool {
        !element.is_zero() && element < &self.p
    }

    /// `g^exponent mod p`.
    pub fn pow_g(&self, exponent: &BigUint) -> BigUint {
        self.g.modpow(&(exponent % &self.order), &self.p)
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    /// Renders the three-line parameter file.
    pub fn to_params_file(&self) -> String {
        format!("p={}\nq={}\ng={}\n", self.p, self.q, self.g)
    }
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("p", &self.p.to_string())
            .field("q", &self.q.to_string())
            .field("g", &self.g.to_string())
            .finish()
    }
}

/// `base^(exponent mod (p-1)) mod p`.
pub fn mod_exp(
    base: &BigUint,
    exponent: &BigUint,
    params: &GroupParams,
) -> Result<BigUint, GroupError> {
    if !params.contains(base) {
        return Err(GroupError::ElementOutOfRange);
    }
    Ok(base.modpow(&(exponent % params.order()), params.p()))
}

/// Multiplicative inverse modulo `p`.
pub fn mod_inv(a: &BigUint, params: &GroupParams) -> Result<BigUint, GroupError> {
    if a.is_zero() {
        return Err(GroupError::NoInverse);
    }
    if a >= params.p() {
        return Err(GroupError::ElementOutOfRange);
    }
    // p is prime, so a^(p-2) is the inverse.
    let exp = params.p() - 2u32;
    Ok(a.modpow(&exp, params.p()))
}

/// True iff `(p, q, g)` satisfies every [`GroupParams`] invariant.
pub fn validate_params(p: &BigUint, q: &BigUint, g: &BigUint) -> bool {
    check_params(p, q, g).is_ok()
}

fn check_params(p: &BigUint, q: &BigUint, g: &BigUint) -> Result<(), GroupError> {
    if *p < BigUint::from(MIN_MODULUS) {
        return Err(GroupError::InvalidParams("p below 23"));
    }
    if *p != (q << 1u32) + 1u32 {
        return Err(GroupError::InvalidParams("p != 2q + 1"));
    }
    let two = BigUint::from(2u32);
    if *g < two || *g > p - 2u32 {
        return Err(GroupError::InvalidParams("g outside [2, p-2]"));
    }
    if !is_probable_prime(q) {
        return Err(GroupError::InvalidParams("q is not prime"));
    }
    if !is_probable_prime(p) {
        return Err(GroupError::InvalidParams("p is not prime"));
    }
    if !is_generator(g, p, q) {
        return Err(GroupError::InvalidParams("g does not generate Z_p*"));
    }
    Ok(())
}

/// Full-group test for a safe prime: `g^2 != 1` and `g^q != 1`.
fn is_generator(g: &BigUint, p: &BigUint, q: &BigUint) -> bool {
    let one = BigUint::one();
    g.modpow(&BigUint::from(2u32), p) != one && g.modpow(q, p) != one
}

/// Primes below [`TRIAL_DIVISION_BOUND`].
pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let bound = TRIAL_DIVISION_BOUND as usize;
        let mut composite = vec![false; bound];
        let mut primes = Vec::new();
        for i in 2..bound {
            if !composite[i] {
                primes.push(i as u32);
                for j in (i * i..bound).step_by(i) {
                    composite[j] = true;
                }
            }
        }
        primes
    })
}

/// Trial division below 10^4 followed by 40 Miller-Rabin rounds with random
/// bases. Conclusive for `n < 10^8`.
pub fn is_probable_prime(n: &BigUint) -> bool {
    is_probable_prime_with(n, &mut rand::thread_rng())
}

pub fn is_probable_prime_with<R: RngCore + ?Sized>(n: &BigUint, rng: &mut R) -> bool {
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
    }
    for &sp in small_primes() {
        let sp_big = BigUint::from(sp);
        if *n == sp_big {
            return true;
        }
        if (n % sp).is_zero() {
            return false;
        }
    }
    let bound = u64::from(TRIAL_DIVISION_BOUND);
    if n.to_u64().is_some_and(|v| v < bound * bound) {
        return true;
    }
    miller_rabin(n, MILLER_RABIN_ROUNDS, rng)
}

fn miller_rabin<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let low = BigUint::from(2u32);
    let high = n - 1u32; // exclusive, so bases lie in [2, n-2]

    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&low, &high);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Generates a safe prime of exactly `bits` bits and the first generator in
/// the sequence 2, 3, 5, 7, ... that passes the full-group test.
pub fn generate_safe_prime<R: RngCore + CryptoRng>(
    bits: u64,
    rng: &mut R,
) -> Result<GroupParams, GroupError> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(GroupError::BitSize(bits));
    }
    let (p, q) = if bits <= 32 {
        small_safe_prime(bits, rng)
    } else {
        sieved_safe_prime(bits, rng)
    };
    let g = small_primes()
        .iter()
        .map(|&c| BigUint::from(c))
        .find(|c| is_generator(c, &p, &q))
        .expect("a small generator exists for every safe prime");
    GroupParams::new(p, q, g)
}

/// Returns the q-range `[2^(bits-2), 2^(bits-1))` so that `2q + 1` has
/// exactly `bits` bits.
fn q_range(bits: u64) -> (BigUint, BigUint) {
    (BigUint::one() << (bits - 2), BigUint::one() << (bits - 1))
}

fn small_safe_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> (BigUint, BigUint) {
    let (low, high) = q_range(bits);
    loop {
        let q = rng.gen_biguint_range(&low, &high);
        if is_probable_prime_with(&q, rng) {
            let p = (&q << 1u32) + 1u32;
            if is_probable_prime_with(&p, rng) {
                return (p, q);
            }
        }
    }
}

/// Incremental search from a random odd start, sieving both `q` and
/// `2q + 1` by the small primes before any modular exponentiation.
fn sieved_safe_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> (BigUint, BigUint) {
    const WINDOW: u32 = 1 << 16;
    let (low, high) = q_range(bits);
    let primes = small_primes();
    let two = BigUint::from(2u32);
    loop {
        let mut start = rng.gen_biguint_range(&low, &high);
        start |= BigUint::one();
        let residues: Vec<u32> = primes
            .iter()
            .map(|&sp| (&start % sp).to_u32().expect("residue below u32"))
            .collect();
        for delta in (0..WINDOW).step_by(2) {
            let sieved = primes.iter().zip(&residues).any(|(&sp, &r)| {
                let q_res = ((u64::from(r) + u64::from(delta)) % u64::from(sp)) as u32;
                let p_res = ((2 * u64::from(q_res)) + 1) % u64::from(sp);
                q_res == 0 || p_res == 0
            });
            if sieved {
                continue;
            }
            let q = &start + delta;
            if q >= high {
                break;
            }
            let p = (&q << 1u32) + 1u32;
            // Cheap Fermat filter on p before the full tests.
            if two.modpow(&(&p - 1u32), &p) != BigUint::one() {
                continue;
            }
            if miller_rabin(&q, MILLER_RABIN_ROUNDS, rng)
                && miller_rabin(&p, MILLER_RABIN_ROUNDS, rng)
            {
                return (p, q);
            }
        }
    }
}

impl FromStr for GroupParams {
    type Err = GroupError;

    /// Parses the `p=`, `q=`, `g=` lines of a parameter file. Other keys
    /// are ignored here (see [`ParamsFile`]).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(ParamsFile::from_str(s)?.group)
    }
}

/// Contents of a parameter file: the group plus an optional public index
/// set (`xs=1,2,3`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamsFile {
    pub group: GroupParams,
    pub xs: Option<Vec<BigUint>>,
}

impl ParamsFile {
    pub fn render(&self) -> String {
        let mut out = self.group.to_params_file();
        if let Some(xs) = &self.xs {
            let joined: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("xs={}\n", joined.join(",")));
        }
        out
    }
}

impl FromStr for ParamsFile {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = None;
        let mut q = None;
        let mut g = None;
        let mut xs = None;
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                GroupError::ParamsFile(format!("line {}: expected key=value", lineno + 1))
            })?;
            let parse = |v: &str| {
                BigUint::from_str(v.trim()).map_err(|_| {
                    GroupError::ParamsFile(format!("line {}: bad integer {:?}", lineno + 1, v))
                })
            };
            match key.trim() {
                "p" => p = Some(parse(value)?),
                "q" => q = Some(parse(value)?),
                "g" => g = Some(parse(value)?),
                "xs" => xs = Some(value.split(',').map(parse).collect::<Result<Vec<_>, _>>()?),
                other => {
                    return Err(GroupError::ParamsFile(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let missing = |name| GroupError::ParamsFile(format!("missing {name}="));
        let group = GroupParams::new(
            p.ok_or_else(|| missing("p"))?,
            q.ok_or_else(|| missing("q"))?,
            g.ok_or_else(|| missing("g"))?,
        )?;
        Ok(ParamsFile { group, xs })
    }
}
