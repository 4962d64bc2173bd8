//! Exponentiation and transfer accounting.
//!
//! Convention: the one-time exponentiations producing `M_A` and `M_B` (and
//! the receiver's `g^x` denominators, which depend only on public values)
//! are setup work and are tallied separately. Every key `K_Aj`, every reply
//! `M_j^N_A2`, every `M_j` and every `K_Bj` costs exactly one exponentiation,
//! since exponent products are reduced before a single `modpow`. Under this
//! convention a k-out-of-n run costs `n + k` at the sender, `2k` at the
//! receiver and moves `n + 2k + 2` elements; with `k = 1` that is `n + 1`,
//! `2` and `n + 4`.
//!
//! A sealed secret counts as one transferred element regardless of size;
//! the byte total is reported separately.

use std::fmt;

use crate::protocol::SessionParams;
use crate::wire::{Message, Transcript};

/// Exponentiations performed by one party.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ExpTally {
    /// Counted against the cost formulas.
    pub accounted: u64,
    /// `M_A`, `M_B` and other setup exponentiations.
    pub setup: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMode {
    OneOfN,
    KOfN,
    NaiveKFold,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::OneOfN => "1-of-n",
            CostMode::KOfN => "k-of-n",
            CostMode::NaiveKFold => "naive-k-fold",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub mode: CostMode,
    pub n: u64,
    pub k: u64,
    pub sender_exps: u64,
    pub receiver_exps: u64,
    /// Group elements plus sealed secrets.
    pub elements: u64,
    /// Total frame bytes, when derived from a real transcript.
    pub wire_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AccountingError {
    #[error("transcript incomplete: missing {0}")]
    Incomplete(&'static str),
    #[error("transcript frame {index} does not decode")]
    Undecodable { index: usize },
    #[error("transcript frame {index} out of order")]
    OutOfOrder { index: usize },
    #[error("transcript sizes disagree with session: {0}")]
    SizeMismatch(&'static str),
    #[error("invalid sizes n = {n}, k = {k}")]
    InvalidSizes { n: u64, k: u64 },
}

fn mode_for(k: u64) -> CostMode {
    if k == 1 {
        CostMode::OneOfN
    } else {
        CostMode::KOfN
    }
}

/// Closed-form costs of the direct protocol.
pub fn formula(n: u64, k: u64) -> Result<CostReport, AccountingError> {
    if k == 0 || k > n {
        return Err(AccountingError::InvalidSizes { n, k });
    }
    Ok(CostReport {
        mode: mode_for(k),
        n,
        k,
        sender_exps: n + k,
        receiver_exps: 2 * k,
        elements: n + 2 * k + 2,
        wire_bytes: None,
    })
}

/// Costs of running the 1-out-of-n protocol `k` separate times.
pub fn naive_baseline(n: u64, k: u64) -> Result<CostReport, AccountingError> {
    if k == 0 || k > n {
        return Err(AccountingError::InvalidSizes { n, k });
    }
    Ok(CostReport {
        mode: if k == 1 {
            CostMode::OneOfN
        } else {
            CostMode::NaiveKFold
        },
        n,
        k,
        sender_exps: k * (n + 1),
        receiver_exps: 2 * k,
        elements: k * (n + 4),
        wire_bytes: None,
    })
}

/// Replays a transcript and derives the report from the frames alone.
///
/// The sender computes one key per index plus one reply per received `M_j`;
/// the receiver one `M_j` per choice plus one key per reply.
pub fn account_run(
    transcript: &Transcript,
    session: &SessionParams,
) -> Result<CostReport, AccountingError> {
    // position in MsgA -> MsgChoice -> MsgReply -> MsgSecrets
    let mut stage = 0usize;
    let mut hello_seen = false;
    let mut elements = 0u64;
    let mut mjs = 0u64;
    let mut replies = 0u64;
    let mut sealed = 0u64;
    let mut wire_bytes = 0u64;
    for (index, entry) in transcript.entries().iter().enumerate() {
        wire_bytes += entry.bytes.len() as u64;
        let message = entry
            .decode()
            .map_err(|_| AccountingError::Undecodable { index })?;
        let position = match &message {
            Message::Hello(_) => {
                if hello_seen || stage > 0 {
                    return Err(AccountingError::OutOfOrder { index });
                }
                hello_seen = true;
                continue;
            }
            Message::Error(_) => continue,
            Message::A(_) => 0,
            Message::Choice(_) => 1,
            Message::Reply(_) => 2,
            Message::Secrets(_) => 3,
        };
        if position != stage {
            return Err(AccountingError::OutOfOrder { index });
        }
        stage += 1;
        match &message {
            Message::A(_) => elements += 1,
            Message::Choice(c) => {
                mjs = c.mjs.len() as u64;
                elements += mjs + 1;
            }
            Message::Reply(r) => {
                replies = r.replies.len() as u64;
                elements += replies;
            }
            Message::Secrets(s) => {
                sealed = s.sealed.len() as u64;
                elements += sealed;
            }
            _ => unreachable!(),
        }
    }
    match stage {
        0 => return Err(AccountingError::Incomplete("MsgA")),
        1 => return Err(AccountingError::Incomplete("MsgChoice")),
        2 => return Err(AccountingError::Incomplete("MsgReply")),
        3 => return Err(AccountingError::Incomplete("MsgSecrets")),
        _ => {}
    }
    let n = session.n() as u64;
    let k = session.k() as u64;
    if mjs != k || replies != k {
        return Err(AccountingError::SizeMismatch("choice count differs from k"));
    }
    if sealed != n {
        return Err(AccountingError::SizeMismatch("sealed count differs from n"));
    }
    Ok(CostReport {
        mode: mode_for(k),
        n,
        k,
        sender_exps: n + replies,
        receiver_exps: mjs + replies,
        elements,
        wire_bytes: Some(wire_bytes),
    })
}

impl CostReport {
    /// `mode=k-of-n n=5 k=2 sender_exps=7 receiver_exps=4 elements=11 ...`
    pub fn key_values(&self) -> String {
        let mut line = format!(
            "mode={} n={} k={} sender_exps={} receiver_exps={} elements={}",
            self.mode, self.n, self.k, self.sender_exps, self.receiver_exps, self.elements
        );
        if let Some(bytes) = self.wire_bytes {
            line.push_str(&format!(" wire_bytes={bytes}"));
        }
        line
    }
}

/// Renders reports as an aligned table, one row per report.
pub fn render_table(rows: &[(&str, &CostReport)]) -> String {
    let mut out = format!(
        "{:<10} {:<13} {:>6} {:>6} {:>12} {:>14} {:>9} {:>11}\n",
        "protocol", "mode", "n", "k", "sender_exps", "receiver_exps", "elements", "wire_bytes"
    );
    for (label, r) in rows {
        let bytes = r
            .wire_bytes
            .map_or_else(|| "-".to_string(), |b| b.to_string());
        out.push_str(&format!(
            "{:<10} {:<13} {:>6} {:>6} {:>12} {:>14} {:>9} {:>11}\n",
            label,
            r.mode.to_string(),
            r.n,
            r.k,
            r.sender_exps,
            r.receiver_exps,
            r.elements,
            bytes
        ));
    }
    out
}
