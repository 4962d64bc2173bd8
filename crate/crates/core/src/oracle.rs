//! Brute-force oracles for enumerable groups (`p <= 10^4`).
//!
//! Everything here works on `u64`/`u128` through a full power table and its
//! inverse (discrete-log) table, and shares no arithmetic with the protocol
//! module: exponentiation is a table lookup on `log(base) * e mod (p-1)`.

use std::collections::HashSet;

/// Largest modulus the oracle accepts.
pub const MAX_TINY_P: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("p = {0} is too large or too small for a table")]
    Size(u64),
    #[error("{g} does not generate Z_{p}*")]
    NotGenerator { g: u64, p: u64 },
    #[error("{0} is not a group element")]
    NotInGroup(u64),
}

/// `g^e mod p` for every `e` in `[0, p-2]`, plus the inverse map.
#[derive(Debug, Clone)]
pub struct TinyGroupTable {
    p: u64,
    g: u64,
    powers: Vec<u64>,
    logs: Vec<Option<u64>>,
}

impl TinyGroupTable {
    pub fn new(p: u64, g: u64) -> Result<Self, OracleError> {
        if !(3..=MAX_TINY_P).contains(&p) {
            return Err(OracleError::Size(p));
        }
        let order = p - 1;
        let mut powers = Vec::with_capacity(order as usize);
        let mut logs = vec![None; p as usize];
        let mut acc = 1u64;
        for e in 0..order {
            let slot = logs
                .get_mut(acc as usize)
                .ok_or(OracleError::NotGenerator { g, p })?;
            if slot.is_some() {
                return Err(OracleError::NotGenerator { g, p });
            }
            *slot = Some(e);
            powers.push(acc);
            acc = acc * (g % p) % p;
        }
        Ok(Self { p, g, powers, logs })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    /// Group order `p - 1`.
    pub fn order(&self) -> u64 {
        self.p - 1
    }

    pub fn powers(&self) -> &[u64] {
        &self.powers
    }

    /// `g^e`, any `e`.
    pub fn pow_g(&self, e: u128) -> u64 {
        self.powers[(e % u128::from(self.order())) as usize]
    }

    pub fn log(&self, y: u64) -> Result<u64, OracleError> {
        self.logs
            .get(y as usize)
            .copied()
            .flatten()
            .ok_or(OracleError::NotInGroup(y))
    }

    /// `y^e` via `g^(log(y) * e)`.
    pub fn pow(&self, y: u64, e: u128) -> Result<u64, OracleError> {
        let l = u128::from(self.log(y)?);
        let order = u128::from(self.order());
        Ok(self.pow_g(l * (e % order)))
    }

    /// `a / b` via `g^(log a - log b)`.
    pub fn div(&self, a: u64, b: u64) -> Result<u64, OracleError> {
        let order = self.order();
        let e = (self.log(a)? + order - self.log(b)?) % order;
        Ok(self.powers[e as usize])
    }
}

/// Unique `e` in `[0, p-2]` with `g^e = y`.
pub fn brute_dlog(y: u64, table: &TinyGroupTable) -> Result<u64, OracleError> {
    table
        .powers
        .iter()
        .position(|&v| v == y)
        .map(|e| e as u64)
        .ok_or(OracleError::NotInGroup(y))
}

/// All five nonces of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TinyNonces {
    pub a1: u128,
    pub a2: u128,
    pub b1: u128,
    pub b2: u128,
    pub b3: u128,
}

/// Every value of a run, recomputed from first principles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTrace {
    pub ma: u64,
    pub mjs: Vec<u64>,
    pub mb: u64,
    pub replies: Vec<u64>,
    pub sender_keys: Vec<u64>,
    pub receiver_keys: Vec<u64>,
}

/// Recomputes a run. `choices` are 1-based indices into `xs`, in wire order.
/// Returns `None` when the nonces break `N_B2 | N_B3` or `N_B3/N_B2 | N_B1`.
pub fn trace(
    table: &TinyGroupTable,
    xs: &[u64],
    nonces: &TinyNonces,
    choices: &[usize],
) -> Option<OracleTrace> {
    if nonces.b2 == 0 || !nonces.b3.is_multiple_of(nonces.b2) {
        return None;
    }
    let factor = nonces.b3 / nonces.b2;
    if factor == 0 || !nonces.b1.is_multiple_of(factor) {
        return None;
    }
    let blind = nonces.b1 / factor;
    let order = u128::from(table.order());
    let sum: u128 = xs.iter().map(|&x| u128::from(x)).sum();

    let ma = table.pow_g(nonces.a1 + sum);
    let mb = table.pow_g(nonces.b1);
    let sender_keys = xs
        .iter()
        .map(|&x| {
            let e = ((nonces.a1 + sum - u128::from(x)) % order) * (nonces.a2 % order);
            table.pow(mb, e).ok()
        })
        .collect::<Option<Vec<_>>>()?;
    let mut mjs = Vec::with_capacity(choices.len());
    let mut replies = Vec::with_capacity(choices.len());
    let mut receiver_keys = Vec::with_capacity(choices.len());
    for &c in choices {
        let x = *xs.get(c.checked_sub(1)?)?;
        let base = table.div(ma, table.pow_g(u128::from(x))).ok()?;
        let mj = table.pow(base, blind).ok()?;
        let reply = table.pow(mj, nonces.a2).ok()?;
        mjs.push(mj);
        replies.push(reply);
        receiver_keys.push(table.pow(reply, factor).ok()?);
    }
    Some(OracleTrace {
        ma,
        mjs,
        mb,
        replies,
        sender_keys,
        receiver_keys,
    })
}

/// True iff both parties' keys agree at every chosen index and equal the
/// closed form `g^((N_A1 + sum x_i - x_j) * N_B1 * N_A2)`.
pub fn verify_key_equation(
    table: &TinyGroupTable,
    xs: &[u64],
    nonces: &TinyNonces,
    choices: &[usize],
) -> bool {
    let Some(t) = trace(table, xs, nonces, choices) else {
        return false;
    };
    let order = u128::from(table.order());
    let sum: u128 = xs.iter().map(|&x| u128::from(x)).sum();
    choices.iter().zip(&t.receiver_keys).all(|(&c, &kb)| {
        let x = u128::from(xs[c - 1]);
        let closed =
            ((nonces.a1 + sum - x) % order) * (nonces.b1 % order) % order * (nonces.a2 % order);
        kb == t.sender_keys[c - 1] && kb == table.pow_g(closed)
    })
}

/// A value the sender sees that rules out at least one candidate choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityViolation {
    pub ma: u64,
    pub actual_choice: usize,
    pub mj: u64,
    pub unreachable_under: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReachabilityReport {
    /// Distinct `(M_A, choice, M_j)` observations enumerated.
    pub observations: u64,
    pub violations: u64,
    /// Violations where no base `M_A / g^x` is `1` or `p-1`.
    pub violations_without_degenerate_base: u64,
    /// Violations where the observed `M_j` is a quadratic non-residue.
    pub violations_on_non_residue: u64,
    pub first: Option<ReachabilityViolation>,
}

/// Enumerates every `M_A` (all `N_A1` in `[1, p-2]`), every choice and every
/// receiver exponent `e` in `[1, p-1]`, and checks that the resulting `M_j`
/// is also `(M_A / g^x)^e'` for some `e'` under every other index `x`.
pub fn transcript_reachability(table: &TinyGroupTable, xs: &[u64]) -> ReachabilityReport {
    let p = table.p();
    let sum: u128 = xs.iter().map(|&x| u128::from(x)).sum();
    let mut report = ReachabilityReport::default();
    let mut seen_ma = HashSet::new();
    for a1 in 1..=p - 2 {
        let ma = table.pow_g(u128::from(a1) + sum);
        if !seen_ma.insert(ma) {
            continue;
        }
        let bases: Vec<u64> = xs
            .iter()
            .map(|&x| {
                table
                    .div(ma, table.pow_g(u128::from(x)))
                    .expect("group element")
            })
            .collect();
        let reach: Vec<HashSet<u64>> = bases
            .iter()
            .map(|&b| {
                (1..=p - 1)
                    .map(|e| table.pow(b, u128::from(e)).expect("group element"))
                    .collect()
            })
            .collect();
        let degenerate = bases.iter().any(|&b| b == 1 || b == p - 1);
        for (c, reachable_from_choice) in reach.iter().enumerate() {
            let mut observed: Vec<u64> = reachable_from_choice.iter().copied().collect();
            observed.sort_unstable();
            for mj in observed {
                report.observations += 1;
                if let Some(x) = reach.iter().position(|r| !r.contains(&mj)) {
                    report.violations += 1;
                    if !degenerate {
                        report.violations_without_degenerate_base += 1;
                    }
                    if table.log(mj).expect("group element") % 2 == 1 {
                        report.violations_on_non_residue += 1;
                    }
                    report.first.get_or_insert(ReachabilityViolation {
                        ma,
                        actual_choice: c + 1,
                        mj,
                        unreachable_under: x + 1,
                    });
                }
            }
        }
    }
    report
}

/// Safe primes `p` with `lo <= p < hi`, by trial division.
pub fn safe_primes_in(lo: u64, hi: u64) -> Vec<u64> {
    fn is_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }
    (lo..hi)
        .filter(|&p| p % 2 == 1 && is_prime(p) && is_prime((p - 1) / 2))
        .collect()
}

/// Every generator of `Z_p*`, ascending: the powers `h^e` of the first
/// table-verified generator `h` with `gcd(e, p-1) = 1`.
pub fn generators(p: u64) -> Vec<u64> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let Some(table) = (2..p.saturating_sub(1)).find_map(|h| TinyGroupTable::new(p, h).ok()) else {
        return Vec::new();
    };
    let order = table.order();
    let mut found: Vec<u64> = (1..order)
        .filter(|&e| gcd(e, order) == 1)
        .map(|e| table.powers()[e as usize])
        .collect();
    found.sort_unstable();
    found
}
