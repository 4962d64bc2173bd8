//! `knot`: k-out-of-n oblivious transfer from the command line.

mod demo;
mod failure;
mod records;

use std::fs;
use std::io::Write;
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::thread;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use knot::costs::{self, account_run, CostReport};
use knot::endpoint::{run_local, run_receiver, run_sender, ReceiverConfig};
use knot::group::{generate_safe_prime, ParamsFile};
use knot::protocol::SessionParams;
use knot::sealing::{SealError, Secret};
use knot::wire::{Direction, Framed, Transcript};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use failure::Failure;

#[derive(Parser)]
#[command(
    name = "knot",
    version,
    about = "k-out-of-n oblivious transfer over Diffie-Hellman"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a safe-prime group and write it to a params file.
    Params {
        #[arg(long, default_value_t = knot::group::DEFAULT_BITS,
              value_parser = clap::value_parser!(u64).range(5..=4096))]
        bits: u64,
        #[arg(long)]
        out: PathBuf,
        /// Seed the generator (reproducible parameters).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Offer secrets to receivers connecting to HOST:PORT.
    Send {
        #[command(flatten)]
        common: SenderArgs,
        #[arg(long, value_name = "HOST:PORT")]
        listen: String,
        /// Number of sessions to serve, one after another.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        sessions: u64,
        #[command(flatten)]
        seed: NetworkSeed,
    },
    /// Fetch the chosen secrets from a sender.
    Recv(RecvArgs),
    /// Run sender and receiver in one process.
    Local {
        #[command(flatten)]
        common: SenderArgs,
        #[command(flatten)]
        choice: ChoiceArgs,
        /// Where the recovered secrets are written; omitted means not at all.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Deterministic nonces (testing only).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay the 5-secret example over p = 23 and check every value.
    Demo,
    /// Compare the direct protocol with k independent 1-out-of-n runs.
    Costs {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
}

#[derive(Args)]
struct RecvArgs {
    #[arg(long)]
    params: PathBuf,
    #[command(flatten)]
    choice: ChoiceArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, value_name = "HOST:PORT")]
    connect: String,
    /// Where the recovered secrets are written.
    #[arg(long)]
    out: PathBuf,
    /// Write the output one secret per line instead of length-prefixed records.
    #[arg(long)]
    text: bool,
    /// Seconds to keep retrying the connection.
    #[arg(long, default_value_t = 10)]
    connect_timeout: u64,
    #[command(flatten)]
    seed: NetworkSeed,
}

#[derive(Args)]
struct SenderArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    secrets: PathBuf,
    /// Read and write secrets one per line instead of length-prefixed records.
    #[arg(long)]
    text: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
}

#[derive(Args)]
struct ChoiceArgs {
    /// 1-based indices, comma separated.
    #[arg(long, value_delimiter = ',', required = true,
          value_parser = clap::value_parser!(u64).range(1..))]
    choices: Vec<u64>,
}

#[derive(Args)]
struct NetworkSeed {
    /// Deterministic nonces. Breaks privacy; needs --insecure-deterministic.
    #[arg(long, requires = "insecure_deterministic")]
    seed: Option<u64>,
    #[arg(long)]
    insecure_deterministic: bool,
}

#[derive(Clone, Copy)]
enum Role {
    Sender,
    Receiver,
}

fn rng_for(seed: Option<u64>, role: Role) -> ChaCha20Rng {
    match (seed, role) {
        (Some(s), Role::Sender) => ChaCha20Rng::seed_from_u64(s),
        (Some(s), Role::Receiver) => ChaCha20Rng::seed_from_u64(s ^ 0x5EED_0000_0000_0001),
        (None, _) => ChaCha20Rng::from_entropy(),
    }
}

fn read_params(path: &Path) -> Result<ParamsFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    ParamsFile::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sender_session(args: &SenderArgs) -> Result<(SessionParams, Vec<Secret>), Failure> {
    let params = read_params(&args.params)?;
    let secrets = records::read(&args.secrets, args.text)?;
    let n = secrets.len();
    let xs = match params.xs {
        Some(xs) if xs.len() != n => {
            return Err(Failure::Usage(format!(
                "params list {} indices for {n} secrets",
                xs.len()
            )))
        }
        Some(xs) => xs,
        None => (1..=n as u64).map(BigUint::from).collect(),
    };
    let session = SessionParams::new(params.group, xs, args.k as usize)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((session, secrets))
}

fn checked_choices(choice: &ChoiceArgs, k: u64, n: Option<usize>) -> Result<Vec<usize>, Failure> {
    let choices: Vec<usize> = choice.choices.iter().map(|&c| c as usize).collect();
    if choices.len() as u64 != k {
        return Err(Failure::Usage(format!(
            "{} choices given for k = {k}",
            choices.len()
        )));
    }
    let mut sorted = choices.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Failure::Usage("choices must be distinct".into()));
    }
    if let Some(n) = n {
        if let Some(&c) = sorted.iter().find(|&&c| c > n) {
            return Err(Failure::Usage(format!("choice {c} outside [1, {n}]")));
        }
    }
    Ok(choices)
}

fn cost_line(transcript: &Transcript, session: &SessionParams) -> String {
    match account_run(transcript, session) {
        Ok(report) => format!("cost: {}", report.key_values()),
        Err(e) => format!("cost: unavailable ({e})"),
    }
}

/// Prints per-choice verification and returns the verified secrets, or the
/// first failure.
fn report_results(results: &[(usize, Result<Secret, SealError>)]) -> Result<Vec<&[u8]>, Failure> {
    for (index, result) in results {
        match result {
            Ok(_) => println!("commitment {index}: verified"),
            Err(e) => println!("commitment {index}: FAILED ({e})"),
        }
    }
    results
        .iter()
        .map(|(_, r)| {
            r.as_ref()
                .map(Secret::as_bytes)
                .map_err(|e| e.clone().into())
        })
        .collect()
}

fn cmd_params(bits: u64, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let mut rng = rng_for(seed, Role::Sender);
    let group = generate_safe_prime(bits, &mut rng).map_err(|e| Failure::Usage(e.to_string()))?;
    let file = ParamsFile { group, xs: None };
    fs::write(out, file.render()).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    println!("wrote {}-bit group to {}", file.group.bits(), out.display());
    Ok(())
}

fn cmd_send(
    common: &SenderArgs,
    listen: &str,
    sessions: u64,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let (session, secrets) = sender_session(common)?;
    let listener = TcpListener::bind(listen).map_err(|e| Failure::Io(format!("{listen}: {e}")))?;
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;
    let mut rng = rng_for(seed, Role::Sender);
    for i in 1..=sessions {
        let (stream, peer) = listener.accept()?;
        let mut conn = Framed::new(stream, Direction::SenderToReceiver);
        let outcome = run_sender(&mut conn, &session, &secrets, &mut rng)?;
        println!("session {i} with {peer}: complete");
        println!("{}", cost_line(&outcome.transcript, &session));
    }
    Ok(())
}

fn connect(addr: &str, timeout: Duration) -> Result<TcpStream, Failure> {
    let start = Instant::now();
    loop {
        match TcpStream::connect(addr) {
            Ok(stream) => return Ok(stream),
            Err(e) if start.elapsed() >= timeout => {
                return Err(Failure::Io(format!("{addr}: {e}")))
            }
            Err(_) => thread::sleep(Duration::from_millis(100)),
        }
    }
}

fn cmd_recv(args: &RecvArgs) -> Result<(), Failure> {
    let params = read_params(&args.params)?;
    let choices = checked_choices(&args.choice, args.k, params.xs.as_ref().map(Vec::len))?;
    let config = ReceiverConfig {
        group: params.group,
        xs: params.xs,
        k: args.k as usize,
        choices,
        factor: None,
    };
    let stream = connect(&args.connect, Duration::from_secs(args.connect_timeout))?;
    let mut conn = Framed::new(stream, Direction::ReceiverToSender);
    let outcome = run_receiver(
        &mut conn,
        &config,
        &mut rng_for(args.seed.seed, Role::Receiver),
    )?;
    let verified = report_results(&outcome.results);
    println!("{}", cost_line(&outcome.transcript, &outcome.session));
    records::write(&args.out, verified?, args.text)?;
    println!(
        "wrote {} secrets to {}",
        outcome.results.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_local(
    common: &SenderArgs,
    choice: &ChoiceArgs,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let (session, secrets) = sender_session(common)?;
    let choices = checked_choices(choice, common.k, Some(session.n()))?;
    let config = ReceiverConfig {
        group: session.group().clone(),
        xs: Some(session.xs().to_vec()),
        k: session.k(),
        choices,
        factor: None,
    };
    let run = run_local(
        &session,
        &secrets,
        &config,
        &mut rng_for(seed, Role::Sender),
        &mut rng_for(seed, Role::Receiver),
    )?;
    let verified = report_results(&run.receiver.results);
    println!("{}", cost_line(&run.receiver.transcript, &session));
    let verified = verified?;
    if let Some(out) = out {
        records::write(out, verified, common.text)?;
        println!(
            "wrote {} secrets to {}",
            run.receiver.results.len(),
            out.display()
        );
    }
    Ok(())
}

fn cmd_costs(n: u64, k: u64) -> Result<(), Failure> {
    let usage = |e: costs::AccountingError| Failure::Usage(e.to_string());
    let direct: CostReport = costs::formula(n, k).map_err(usage)?;
    let naive = costs::naive_baseline(n, k).map_err(usage)?;
    print!(
        "{}",
        costs::render_table(&[("direct", &direct), ("naive", &naive)])
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Params { bits, out, seed } => cmd_params(bits, &out, seed),
        Command::Send {
            common,
            listen,
            sessions,
            seed,
        } => cmd_send(&common, &listen, sessions, seed.seed),
        Command::Recv(args) => cmd_recv(&args),
        Command::Local {
            common,
            choice,
            out,
            seed,
        } => cmd_local(&common, &choice, out.as_deref(), seed),
        Command::Demo => {
            print!("{}", demo::run()?);
            Ok(())
        }
        Command::Costs { n, k } => cmd_costs(n, k),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("knot: {failure}");
            failure.exit_code()
        }
    }
}
