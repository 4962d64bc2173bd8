use std::net::{TcpListener, TcpStream};
use std::thread;

use knot::costs::{account_run, formula};
use knot::endpoint::{run_local, run_receiver, run_sender, EndpointError, ReceiverConfig};
use knot::group::GroupParams;
use knot::protocol::{MsgA, ScriptedNonces, SessionParams};
use knot::sealing::{derive_key, unseal, SealError, Secret};
use knot::wire::{abort, Direction, Framed, Message};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn secrets(n: usize) -> Vec<Secret> {
    (1..=n)
        .map(|i| Secret::new(format!("payload {i}").into_bytes()).unwrap())
        .collect()
}

fn config(k: usize, choices: &[usize]) -> ReceiverConfig {
    ReceiverConfig {
        group: GroupParams::toy(),
        xs: None,
        k,
        choices: choices.to_vec(),
        factor: None,
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[test]
fn local_run_exchanges_five_frames() {
    let session = SessionParams::toy();
    let run = run_local(
        &session,
        &secrets(5),
        &config(2, &[5, 3]),
        &mut rng(1),
        &mut rng(2),
    )
    .unwrap();
    let names = ["Hello", "MsgA", "MsgChoice", "MsgReply", "MsgSecrets"];
    assert_eq!(run.sender.transcript.message_names(), names);
    assert_eq!(run.receiver.transcript.message_names(), names);
    assert_eq!(run.sender.transcript, run.receiver.transcript);
    let directions: Vec<Direction> = run
        .receiver
        .transcript
        .entries()
        .iter()
        .map(|e| e.direction)
        .collect();
    assert_eq!(directions[2], Direction::ReceiverToSender);
    assert!(directions
        .iter()
        .enumerate()
        .all(|(i, d)| (i == 2) == (*d == Direction::ReceiverToSender)));

    let recovered = run.receiver.secrets().unwrap();
    assert_eq!(recovered.len(), 2);
    assert_eq!(recovered[0].0, 3);
    assert_eq!(recovered[0].1.as_bytes(), b"payload 3");
    assert_eq!(recovered[1].1.as_bytes(), b"payload 5");
}

#[test]
fn replayed_transcript_matches_formula() {
    for (n, k) in [(1, 1), (5, 1), (5, 2), (9, 9), (16, 7)] {
        let session = SessionParams::with_default_indices(GroupParams::toy(), n, k).unwrap();
        let choices: Vec<usize> = (1..=k).collect();
        let run = run_local(
            &session,
            &secrets(n),
            &config(k, &choices),
            &mut rng(3),
            &mut rng(4),
        )
        .unwrap();
        let report = account_run(&run.sender.transcript, &session).unwrap();
        let expected = formula(n as u64, k as u64).unwrap();
        assert_eq!(
            (
                report.mode,
                report.sender_exps,
                report.receiver_exps,
                report.elements
            ),
            (
                expected.mode,
                expected.sender_exps,
                expected.receiver_exps,
                expected.elements
            )
        );
        let total: usize = run
            .sender
            .transcript
            .entries()
            .iter()
            .map(|e| e.bytes.len())
            .sum();
        assert_eq!(report.wire_bytes, Some(total as u64));
        assert_eq!(run.sender.tally.accounted, expected.sender_exps);
        assert_eq!(run.receiver.tally.accounted, expected.receiver_exps);
    }
}

#[test]
fn keys_unseal_only_their_own_index() {
    let session = SessionParams::toy();
    let run = run_local(
        &session,
        &secrets(5),
        &config(2, &[2, 4]),
        &mut rng(5),
        &mut rng(6),
    )
    .unwrap();
    let sealed = match run.receiver.transcript.entries()[4].decode().unwrap() {
        Message::Secrets(s) => s.sealed,
        other => panic!("expected MsgSecrets, got {}", other.name()),
    };
    let group = GroupParams::toy();
    for (&choice, key) in [2usize, 4].iter().zip(&run.receiver.keys) {
        for index in 1..=5 {
            let sym = derive_key(key, &group, index as u32);
            let opened = unseal(&sealed[index - 1], &sym, index);
            if index == choice {
                assert_eq!(
                    opened.unwrap().as_bytes(),
                    format!("payload {index}").as_bytes()
                );
            } else {
                assert_eq!(opened, Err(SealError::Verification { index }));
            }
        }
    }
}

#[test]
fn identical_secrets_are_reported() {
    let session = SessionParams::toy();
    let same: Vec<Secret> = (0..5)
        .map(|_| Secret::new(b"hunter2".to_vec()).unwrap())
        .collect();
    let err = run_local(
        &session,
        &same,
        &config(2, &[1, 2]),
        &mut rng(7),
        &mut rng(8),
    )
    .unwrap_err();
    assert!(err.is_same_message(), "{err}");
}

#[test]
fn fixed_nonces_over_the_wire() {
    let session = SessionParams::toy();
    let run = run_local(
        &session,
        &secrets(5),
        &config(2, &[3, 5]),
        &mut ScriptedNonces::new([4u32, 8]),
        &mut ScriptedNonces::new([5u32, 6]),
    )
    .unwrap();
    let big = |v: u64| BigUint::from(v);
    assert_eq!(run.receiver.keys, vec![big(4), big(12)]);
    match run.receiver.transcript.entries()[1].decode().unwrap() {
        Message::A(MsgA { ma }) => assert_eq!(ma, big(7)),
        other => panic!("expected MsgA, got {}", other.name()),
    }
}

#[test]
fn mismatched_k_aborts_both_sides() {
    let session = SessionParams::toy();
    let err = run_local(
        &session,
        &secrets(5),
        &config(3, &[1, 2, 3]),
        &mut rng(9),
        &mut rng(10),
    )
    .unwrap_err();
    assert!(matches!(err, EndpointError::Mismatch(_)), "{err}");
}

#[test]
fn sender_sees_receiver_abort() {
    let (a, b) = knot::wire::memory_pipe();
    let session = SessionParams::toy();
    let handle = thread::spawn(move || {
        let mut conn = Framed::new(a, Direction::SenderToReceiver);
        run_sender(&mut conn, &session, &secrets(5), &mut rng(11))
    });
    let mut conn = Framed::new(b, Direction::ReceiverToSender);
    let err = run_receiver(&mut conn, &config(2, &[1, 6]), &mut rng(12)).unwrap_err();
    assert!(matches!(err, EndpointError::Protocol(_)), "{err}");
    drop(conn);
    match handle.join().unwrap().unwrap_err() {
        EndpointError::PeerAbort { code, .. } => assert_eq!(code, abort::PROTOCOL),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn tcp_loopback_session() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let session = SessionParams::toy();
    let sender = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut conn = Framed::new(stream, Direction::SenderToReceiver);
        run_sender(&mut conn, &session, &secrets(5), &mut rng(13)).unwrap()
    });
    let stream = TcpStream::connect(addr).unwrap();
    let mut conn = Framed::new(stream, Direction::ReceiverToSender);
    let outcome = run_receiver(&mut conn, &config(2, &[1, 5]), &mut rng(14)).unwrap();
    let sent = sender.join().unwrap();
    assert!(outcome.all_verified());
    assert_eq!(sent.transcript, outcome.transcript);
    assert_eq!(outcome.secrets().unwrap()[1].1.as_bytes(), b"payload 5");
}
