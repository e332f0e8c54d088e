//! Command-line harness: generate parameters, run the three roles as
//! processes, execute scripted scenarios and produce the benchmark CSVs.

use std::error::Error;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use ark_bls12_381::Bls12_381 as E;
use clap::{Parser, Subcommand};

use offline_euro::bls12_381_params;
use offline_euro::crs;
use offline_euro::parties::{BankState, TtpState, UserState};
use offline_euro::schnorr::keygen;
use offline_euro::token::{predicted_size, SizeModel};
use offline_euro_wire::session;
use offline_euro_wire::transport::{tcp_dial, tcp_listen, Connection};

use offline_euro_cli::bench;
use offline_euro_cli::keyfiles;
use offline_euro_cli::report::{growth_csv, per_index_stats, verify_csv, write_out};
use offline_euro_cli::scenario::{self, ScenarioConfig, Transport};
use offline_euro_cli::sim::rng_for;

#[derive(Parser)]
#[command(
    name = "offline-euro",
    about = "Offline transferable e-cash: roles, scenarios and benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// System parameter management.
    Params {
        #[command(subcommand)]
        cmd: ParamsCmd,
    },
    /// Trusted-third-party role.
    Ttp {
        #[command(subcommand)]
        cmd: TtpCmd,
    },
    /// Bank role.
    Bank {
        #[command(subcommand)]
        cmd: BankCmd,
    },
    /// User role.
    User {
        #[command(subcommand)]
        cmd: UserCmd,
    },
    /// Scripted multi-party scenarios.
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// Measurements.
    Bench {
        #[command(subcommand)]
        cmd: BenchCmd,
    },
}

#[derive(Subcommand)]
enum ParamsCmd {
    /// Generates the reference string and trapdoor.
    Init {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for crs.bin and trapdoor.bin.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum TtpCmd {
    /// Serves registration, parameter fetch and revocation requests.
    Serve {
        /// Directory holding crs.bin and trapdoor.bin.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        listen: String,
        /// Registrants with this identity become the published bank key.
        #[arg(long, default_value = "bank")]
        bank_identity: String,
        /// Serve this many connections, then exit (default: forever).
        #[arg(long)]
        sessions: Option<usize>,
    },
}

#[derive(Subcommand)]
enum BankCmd {
    /// Serves registrations, withdrawals and deposits.
    Serve {
        /// TTP address for parameter fetch, registration and revocations.
        #[arg(long)]
        ttp: String,
        #[arg(long)]
        listen: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bank")]
        identity: String,
        #[arg(long)]
        sessions: Option<usize>,
    },
}

#[derive(Subcommand)]
enum UserCmd {
    /// Registers, then performs the requested wallet actions in order:
    /// withdraw, collect payments, serve payments, deposit.
    Run {
        #[arg(long)]
        ttp: String,
        #[arg(long)]
        bank: String,
        #[arg(long)]
        identity: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Withdraw this many euros from the bank.
        #[arg(long, default_value_t = 0)]
        withdraw: usize,
        /// Collect one payment from each payer address (the payer must be
        /// serving payments there).
        #[arg(long = "collect")]
        collect: Vec<String>,
        /// Address to serve outgoing payments on.
        #[arg(long)]
        listen: Option<String>,
        /// How many payment requests to serve before moving on.
        #[arg(long, default_value_t = 1)]
        serve_payments: usize,
        /// Deposit every unspent euro at the bank afterwards.
        #[arg(long, default_value_t = false)]
        deposit: bool,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Withdraw, transfer along distinct users, deposit; everything must be
    /// accepted.
    Honest {
        #[arg(long, default_value_t = 10)]
        transfers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "inproc")]
        transport: Transport,
        /// Write the step report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fork the chain (or duplicate the final deposit) and prove the double
    /// spender is named.
    DoubleSpend {
        #[arg(long, default_value_t = 6)]
        transfers: usize,
        /// Hop at which the holder spends twice; omit for the
        /// duplicate-deposit variant.
        #[arg(long)]
        fork_at: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "inproc")]
        transport: Transport,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Serialized euro size after each transaction.
    Growth {
        #[arg(long, default_value_t = 50)]
        transfers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full verification time at each chain length.
    Verify {
        #[arg(long, default_value_t = 50)]
        transfers: usize,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<(), Box<dyn Error>> {
    match Cli::parse().cmd {
        Cmd::Params { cmd } => run_params(cmd),
        Cmd::Ttp { cmd } => run_ttp(cmd),
        Cmd::Bank { cmd } => run_bank(cmd),
        Cmd::User { cmd } => run_user(cmd),
        Cmd::Scenario { cmd } => run_scenario(cmd),
        Cmd::Bench { cmd } => run_bench(cmd),
    }
}

fn run_params(cmd: ParamsCmd) -> Result<(), Box<dyn Error>> {
    match cmd {
        ParamsCmd::Init { seed, out } => {
            let params = bls12_381_params();
            let mut rng = rng_for(seed, "params-init");
            let (crs, trapdoor) = crs::generate(params.clone(), &mut rng);
            keyfiles::save_params(&out, &crs, &trapdoor)?;
            println!(
                "wrote {} and {} (backend {}, order {} bits)",
                out.join(keyfiles::CRS_FILE).display(),
                out.join(keyfiles::TRAPDOOR_FILE).display(),
                params.id(),
                params.order_bits()
            );
            Ok(())
        }
    }
}

fn run_ttp(cmd: TtpCmd) -> Result<(), Box<dyn Error>> {
    match cmd {
        TtpCmd::Serve {
            params: dir,
            listen,
            bank_identity,
            sessions,
        } => {
            let params = bls12_381_params();
            let crs = keyfiles::load_crs(&dir, &params)?;
            let trapdoor = keyfiles::load_trapdoor(&dir)?;
            let state = Arc::new(Mutex::new(TtpState::from_parts(
                crs,
                trapdoor,
                &bank_identity,
            )));
            let listener = tcp_listen(&listen)?;
            println!("ttp serving on {listen}");
            session::serve_ttp(listener, state, params, sessions);
            Ok(())
        }
    }
}

fn run_bank(cmd: BankCmd) -> Result<(), Box<dyn Error>> {
    match cmd {
        BankCmd::Serve {
            ttp,
            listen,
            seed,
            identity,
            sessions,
        } => {
            let params = bls12_381_params();
            let keys = keygen(&params, &mut rng_for(seed, "bank-keys"));
            let bank = BankState::<E>::with_keys(keys);
            let bank_pk = bank.pk();

            let mut conn = Connection::new(tcp_dial(&ttp)?);
            let (crs, _) = session::fetch_params(&mut conn, &params)?;
            session::register(&mut conn, &params, &identity, bank_pk)?;
            drop(conn);
            println!("bank registered at ttp {ttp}");

            let state = Arc::new(Mutex::new(bank));
            let rng = Arc::new(Mutex::new(rng_for(seed, "bank-rng")));
            let ttp_addr = ttp.clone();
            let dial = Arc::new(move || tcp_dial(&ttp_addr).map(Connection::new));
            let listener = tcp_listen(&listen)?;
            println!("bank serving on {listen}");
            session::serve_bank(listener, state, crs, rng, dial, sessions);
            Ok(())
        }
    }
}

fn run_user(cmd: UserCmd) -> Result<(), Box<dyn Error>> {
    match cmd {
        UserCmd::Run {
            ttp,
            bank,
            identity,
            seed,
            withdraw,
            collect,
            listen,
            serve_payments,
            deposit,
        } => {
            let params = bls12_381_params();
            let label = format!("user-{identity}");
            let mut rng = rng_for(seed, &label);
            let mut user = UserState::<E>::new(&identity, &params, &mut rng);

            let mut conn = Connection::new(tcp_dial(&ttp)?);
            let (crs, bank_pk) = session::fetch_params(&mut conn, &params)?;
            let bank_pk = bank_pk.ok_or("bank key not yet published at the ttp")?;
            session::register(&mut conn, &params, &identity, user.pk())?;
            drop(conn);
            let mut conn = Connection::new(tcp_dial(&bank)?);
            session::register(&mut conn, &params, &identity, user.pk())?;
            drop(conn);
            println!("{identity}: registered");

            for _ in 0..withdraw {
                let mut conn = Connection::new(tcp_dial(&bank)?);
                let idx = session::withdraw(&mut conn, &mut user, &bank_pk, &params, &mut rng)?;
                println!(
                    "{identity}: withdrew euro #{idx} ({} bytes)",
                    user.wallet()[idx].euro.to_bytes().len()
                );
            }

            for payer in &collect {
                let mut conn = Connection::new(tcp_dial(payer)?);
                let idx = session::request_payment(&mut conn, &mut user, &crs, &bank_pk, &mut rng)?;
                println!(
                    "{identity}: collected euro #{idx} with {} prior transactions",
                    user.wallet()[idx].euro.proofs.len()
                );
            }

            if let Some(addr) = listen {
                let listener = tcp_listen(&addr)?;
                println!("{identity}: serving {serve_payments} payment(s) on {addr}");
                let shared = Arc::new(Mutex::new(user));
                let shared_rng = Arc::new(Mutex::new(rng));
                session::serve_payments(
                    listener,
                    shared.clone(),
                    crs.clone(),
                    shared_rng.clone(),
                    serve_payments,
                );
                user = Arc::try_unwrap(shared)
                    .map_err(|_| "payment server still holds the wallet")?
                    .into_inner()
                    .unwrap();
                rng = Arc::try_unwrap(shared_rng)
                    .map_err(|_| "payment server still holds the rng")?
                    .into_inner()
                    .unwrap();
            }

            if deposit {
                while let Some(idx) = user.first_unspent() {
                    let mut conn = Connection::new(tcp_dial(&bank)?);
                    let verdict =
                        session::deposit(&mut conn, &mut user, idx, &crs, &mut rng, false)?;
                    println!("{identity}: deposit of euro #{idx}: {verdict:?}");
                }
            }

            let spent = user.wallet().iter().filter(|e| e.is_spent()).count();
            println!(
                "{identity}: done ({} wallet entries, {} spent)",
                user.wallet().len(),
                spent
            );
            Ok(())
        }
    }
}

fn run_scenario(cmd: ScenarioCmd) -> Result<(), Box<dyn Error>> {
    let (outcome, out, title) = match cmd {
        ScenarioCmd::Honest {
            transfers,
            seed,
            transport,
            out,
        } => {
            let cfg = ScenarioConfig {
                transfers,
                seed,
                transport,
                fork_at: None,
            };
            (
                scenario::run_honest(&cfg)?,
                out,
                format!("honest chain of {transfers} transfer(s)"),
            )
        }
        ScenarioCmd::DoubleSpend {
            transfers,
            fork_at,
            seed,
            transport,
            out,
        } => {
            let cfg = ScenarioConfig {
                transfers,
                seed,
                transport,
                fork_at,
            };
            let title = match fork_at {
                Some(i) => format!("double spend forked at hop {i} of {transfers}"),
                None => format!("duplicate deposit after {transfers} transfer(s)"),
            };
            (scenario::run_double_spend(&cfg)?, out, title)
        }
    };

    println!("scenario: {title}");
    for step in &outcome.steps {
        println!("  {step}");
    }
    println!("final verdict: {:?}", outcome.final_verdict);
    println!(
        "sessions on the wire: {}",
        outcome.transcript.sessions().len()
    );
    if let Some(path) = out {
        let mut text = format!("{title}\n");
        for step in &outcome.steps {
            text.push_str(step);
            text.push('\n');
        }
        write_out(&path, &text)?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn run_bench(cmd: BenchCmd) -> Result<(), Box<dyn Error>> {
    match cmd {
        BenchCmd::Growth {
            transfers,
            seed,
            out,
        } => {
            let report = bench::growth(transfers, seed);
            let csv = growth_csv(&report.rows);
            match &out {
                Some(path) => write_out(path, &csv)?,
                None => print!("{csv}"),
            }
            let model = SizeModel::for_backend::<E>();
            println!("initial euro: {} bytes", report.initial_bytes);
            println!(
                "per-transaction growth: {} bytes (predicted {} + {} framing)",
                report.per_entry_bytes,
                report.predicted_per_entry,
                report.per_entry_bytes as i64 - report.predicted_per_entry as i64
            );
            println!(
                "constant overhead over prediction: {} bytes",
                report.framing_overhead
            );
            println!(
                "size after {} transactions: {} bytes (predicted base {})",
                transfers,
                report.rows.last().map_or(report.initial_bytes, |r| r.bytes),
                predicted_size(transfers, &model)
            );
            println!(
                "reference: a symmetric 128-byte-element setting grows ~1.2 kB per \
                 transaction (informative, not asserted)"
            );
            if let Some(path) = out {
                println!("csv written to {}", path.display());
            }
            Ok(())
        }
        BenchCmd::Verify {
            transfers,
            repeats,
            seed,
            out,
        } => {
            let report = bench::verify(transfers, repeats, seed);
            let csv = verify_csv(&report.rows);
            match &out {
                Some(path) => write_out(path, &csv)?,
                None => print!("{csv}"),
            }
            println!("chain-length  min(ms)  mean(ms)  max(ms)");
            for (i, min, mean, max) in per_index_stats(&report.rows, transfers) {
                println!(
                    "{i:>12}  {:>7.1}  {:>8.1}  {:>7.1}",
                    min as f64 / 1e6,
                    mean / 1e6,
                    max as f64 / 1e6
                );
            }
            println!(
                "least-squares fit: {:.2} ms per transaction, intercept {:.2} ms, R^2 {:.4}",
                report.slope_ns_per_tx / 1e6,
                report.intercept_ns / 1e6,
                report.r_squared
            );
            println!(
                "reference: a JPBC type-A desktop prototype reports 165 ms at length 1, \
                 4545 ms at length 50, ~91 ms per transaction (informative, not asserted)"
            );
            if let Some(path) = out {
                println!("csv written to {}", path.display());
            }
            Ok(())
        }
    }
}
