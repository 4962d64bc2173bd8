//! Fixed-nonce walk-through over the 23-element group.

use std::fmt::Write as _;

use knot::costs;
use knot::protocol::{run_k_of_n, Receiver, ScriptedNonces, SessionParams};
use knot::sealing::Secret;
use num_bigint::BigUint;

use crate::failure::Failure;

const SENDER_NONCES: [u32; 2] = [4, 8];
// N_B1 = 2 * 5, N_B2 = 6, N_B3 = 2 * 6
const RECEIVER_NONCES: [u32; 2] = [5, 6];
const CHOICES: [usize; 2] = [3, 5];

fn list(values: &[BigUint]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Runs the demo and returns its output, or the mismatching lines.
pub fn run() -> Result<String, Failure> {
    let session = SessionParams::toy();
    let secrets: Vec<Secret> = (1..=5)
        .map(|i| Secret::new(format!("secret {i}").into_bytes()).expect("non-empty"))
        .collect();
    let receiver = Receiver::new(session.clone(), &CHOICES)?;
    let ex = run_k_of_n(
        &session,
        &secrets,
        receiver,
        &mut ScriptedNonces::new(SENDER_NONCES),
        &mut ScriptedNonces::new(RECEIVER_NONCES),
    )?;
    let (b1, b2, b3) = ex.receiver.nonces();
    let group = session.group();

    let checks = [
        ("N_B1", b1.to_string(), "10"),
        ("N_B2", b2.to_string(), "6"),
        ("N_B3", b3.to_string(), "12"),
        ("M_A", ex.msg_a.ma.to_string(), "7"),
        ("M_j", list(&ex.msg_choice.mjs), "[13, 4]"),
        ("M_B", ex.msg_choice.mb.to_string(), "9"),
        ("K_A", list(ex.sender.keys()), "[9, 6, 4, 18, 12]"),
        ("replies", list(&ex.msg_reply.replies), "[2, 9]"),
        ("K_B", list(ex.receiver.keys()), "[4, 12]"),
    ];

    let mut out = String::new();
    let _ = writeln!(
        out,
        "group: p={} q={} g={}",
        group.p(),
        group.q(),
        group.g()
    );
    let _ = writeln!(out, "x = {}", list(session.xs()));
    let _ = writeln!(out, "choices = {:?}", CHOICES);
    let _ = writeln!(
        out,
        "N_A1 = {}  N_A2 = {}",
        SENDER_NONCES[0], SENDER_NONCES[1]
    );
    let mut mismatches = String::new();
    for (label, got, want) in &checks {
        let _ = writeln!(out, "{label} = {got}");
        if got != want {
            let _ = writeln!(mismatches, "{label}: expected {want}, got {got}");
        }
    }

    let opened = ex.open()?;
    for (index, secret) in &opened {
        let _ = writeln!(
            out,
            "secret {index}: verified ({})",
            String::from_utf8_lossy(secret.as_bytes())
        );
    }
    let opened_at: Vec<usize> = opened.iter().map(|(i, _)| *i).collect();
    if opened_at != CHOICES {
        let _ = writeln!(
            mismatches,
            "opened: expected {CHOICES:?}, got {opened_at:?}"
        );
    }
    let report = costs::formula(5, 2).expect("valid sizes");
    let _ = writeln!(out, "cost: {}", report.key_values());

    if mismatches.is_empty() {
        out.push_str("demo: all values match\n");
        Ok(out)
    } else {
        Err(Failure::DemoMismatch(mismatches))
    }
}
