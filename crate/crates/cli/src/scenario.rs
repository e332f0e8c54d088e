//! Scripted multi-party scenarios over a real transport binding: the honest
//! chain and the double-spend forks. Every exchange crosses the wire; the
//! per-session transcripts come back for inspection.

use std::fmt;
use std::sync::{Arc, Mutex};
use std::thread;

use ark_bls12_381::Bls12_381 as E;
use rand_chacha::ChaCha20Rng;

use offline_euro::bls12_381_params;
use offline_euro::parties::{BankState, TtpState, UserState};
use offline_euro_wire::session::{self, DepositVerdict};
use offline_euro_wire::transport::{Connection, Network, Transcript};
use offline_euro_wire::{InprocNetwork, TcpNetwork};

use crate::sim::rng_for;

/// Which transport binding carries the protocol bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transport {
    Inproc,
    Socket,
}

impl std::str::FromStr for Transport {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inproc" => Ok(Self::Inproc),
            "socket" => Ok(Self::Socket),
            other => Err(format!("unknown transport {other:?} (inproc|socket)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub transfers: usize,
    pub seed: u64,
    pub transport: Transport,
    /// For the double-spend scenario: fork the chain at this hop. Absent
    /// means the duplicate-deposit variant.
    pub fork_at: Option<usize>,
}

#[derive(Debug)]
pub struct ScenarioError(pub String);

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario failed: {}", self.0)
    }
}

impl std::error::Error for ScenarioError {}

impl ScenarioError {
    fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

pub struct ScenarioOutcome {
    pub transcript: Transcript,
    pub steps: Vec<String>,
    /// Verdict of the final (detection-relevant) deposit.
    pub final_verdict: DepositVerdict,
}

fn make_network(transport: Transport) -> Arc<dyn Network> {
    match transport {
        Transport::Inproc => Arc::new(InprocNetwork::new()),
        Transport::Socket => Arc::new(TcpNetwork::new()),
    }
}

struct Rig {
    net: Arc<dyn Network>,
    transcript: Transcript,
    bank_pk: offline_euro::pairing::G1<E>,
    crs: offline_euro::crs::Crs<E>,
    users: Vec<Arc<Mutex<UserState<E>>>>,
    user_rngs: Vec<Arc<Mutex<ChaCha20Rng>>>,
    threads: Vec<thread::JoinHandle<()>>,
    steps: Vec<String>,
}

impl Rig {
    /// Boots TTP, bank and `user_count` users; registers everyone and fetches
    /// parameters over the wire. Servers are sized for the planned session
    /// counts.
    fn boot(
        cfg: &ScenarioConfig,
        user_count: usize,
        ttp_sessions: usize,
        bank_sessions: usize,
        payment_sessions: &[usize],
    ) -> Result<Self, ScenarioError> {
        let params = bls12_381_params();
        let net = make_network(cfg.transport);
        let transcript = Transcript::new();
        let seed = cfg.seed;

        let mut ttp_rng = rng_for(seed, "ttp");
        let ttp = Arc::new(Mutex::new(TtpState::<E>::new(
            params.clone(),
            "bank",
            &mut ttp_rng,
        )));
        let crs = ttp.lock().unwrap().crs().clone();
        let bank = Arc::new(Mutex::new(BankState::<E>::new(
            &params,
            &mut rng_for(seed, "bank"),
        )));
        let bank_pk = bank.lock().unwrap().pk();
        let bank_rng = Arc::new(Mutex::new(rng_for(seed, "bank-rng")));

        let users: Vec<Arc<Mutex<UserState<E>>>> = (0..user_count)
            .map(|i| {
                let mut rng = rng_for(seed, &format!("user{i}"));
                Arc::new(Mutex::new(UserState::new(
                    &format!("user{i}"),
                    &params,
                    &mut rng,
                )))
            })
            .collect();
        let user_rngs: Vec<Arc<Mutex<ChaCha20Rng>>> = (0..user_count)
            .map(|i| Arc::new(Mutex::new(rng_for(seed, &format!("user{i}-rng")))))
            .collect();

        let mut threads = Vec::new();

        let ttp_listener = net
            .listen("ttp")
            .map_err(|e| ScenarioError::new(e.to_string()))?;
        {
            let ttp = ttp.clone();
            let params = params.clone();
            threads.push(thread::spawn(move || {
                session::serve_ttp(ttp_listener, ttp, params, Some(ttp_sessions))
            }));
        }

        let bank_listener = net
            .listen("bank")
            .map_err(|e| ScenarioError::new(e.to_string()))?;
        {
            let bank = bank.clone();
            let crs = crs.clone();
            let net = net.clone();
            let transcript = transcript.clone();
            let dial = Arc::new(move || {
                let stream = net.connect("ttp")?;
                Ok(Connection::with_tap(
                    stream,
                    "revoke:bank->ttp",
                    transcript.clone(),
                ))
            });
            threads.push(thread::spawn(move || {
                session::serve_bank(
                    bank_listener,
                    bank,
                    crs,
                    bank_rng,
                    dial,
                    Some(bank_sessions),
                )
            }));
        }

        for (i, &sessions) in payment_sessions.iter().enumerate() {
            if sessions == 0 {
                continue;
            }
            let listener = net
                .listen(&format!("payments:user{i}"))
                .map_err(|e| ScenarioError::new(e.to_string()))?;
            let user = users[i].clone();
            let crs = crs.clone();
            let rng = user_rngs[i].clone();
            threads.push(thread::spawn(move || {
                session::serve_payments(listener, user, crs, rng, sessions)
            }));
        }

        let mut rig = Rig {
            net,
            transcript,
            bank_pk,
            crs,
            users,
            user_rngs,
            threads,
            steps: Vec::new(),
        };

        // Registrations and parameter fetch, all over the wire.
        {
            let mut conn = rig.dial("register:bank->ttp", "ttp")?;
            session::register(&mut conn, &params, "bank", bank_pk)
                .map_err(|e| ScenarioError::new(e.to_string()))?;
            rig.steps.push("registered the bank at ttp".into());
        }
        for i in 0..user_count {
            let pk = rig.users[i].lock().unwrap().pk();
            let identity = format!("user{i}");
            // The servers handle one connection at a time; each exchange gets
            // its own short-lived connection, closed before the next dial.
            {
                let mut conn = rig.dial(&format!("register:user{i}->ttp"), "ttp")?;
                session::register(&mut conn, &params, &identity, pk)
                    .map_err(|e| ScenarioError::new(e.to_string()))?;
            }
            rig.steps.push(format!("registered user{i} at ttp"));
            {
                let mut conn = rig.dial(&format!("params:user{i}->ttp"), "ttp")?;
                let (fetched, fetched_bank) = session::fetch_params(&mut conn, &params)
                    .map_err(|e| ScenarioError::new(e.to_string()))?;
                if fetched != rig.crs || fetched_bank != Some(bank_pk) {
                    return Err(ScenarioError::new("fetched parameters differ"));
                }
            }
            {
                let mut conn = rig.dial(&format!("register:user{i}->bank"), "bank")?;
                session::register(&mut conn, &params, &identity, pk)
                    .map_err(|e| ScenarioError::new(e.to_string()))?;
            }
            rig.steps.push(format!("registered user{i} at bank"));
        }
        Ok(rig)
    }

    fn dial(&self, label: &str, endpoint: &str) -> Result<Connection, ScenarioError> {
        let stream = self
            .net
            .connect(endpoint)
            .map_err(|e| ScenarioError::new(e.to_string()))?;
        Ok(Connection::with_tap(stream, label, self.transcript.clone()))
    }

    fn withdraw(&mut self, user: usize) -> Result<usize, ScenarioError> {
        let mut conn = self.dial(&format!("withdraw:user{user}->bank"), "bank")?;
        let mut state = self.users[user].lock().unwrap();
        let mut rng = self.user_rngs[user].lock().unwrap();
        let idx = session::withdraw(
            &mut conn,
            &mut state,
            &self.bank_pk,
            self.crs.params(),
            &mut *rng,
        )
        .map_err(|e| ScenarioError::new(e.to_string()))?;
        drop(state);
        drop(rng);
        self.steps.push(format!("user{user} withdrew a euro"));
        Ok(idx)
    }

    /// Receiver `to` collects a payment from spender `from` (who must be
    /// serving payments).
    fn pay(&mut self, from: usize, to: usize, hop: usize) -> Result<usize, ScenarioError> {
        let mut conn = self.dial(
            &format!("transfer:hop{hop:03}:user{from}->user{to}"),
            &format!("payments:user{from}"),
        )?;
        let mut state = self.users[to].lock().unwrap();
        let mut rng = self.user_rngs[to].lock().unwrap();
        let idx =
            session::request_payment(&mut conn, &mut state, &self.crs, &self.bank_pk, &mut *rng)
                .map_err(|e| ScenarioError::new(e.to_string()))?;
        drop(state);
        drop(rng);
        self.steps
            .push(format!("hop {hop}: user{from} paid user{to}"));
        Ok(idx)
    }

    fn deposit(
        &mut self,
        user: usize,
        idx: usize,
        double: bool,
    ) -> Result<DepositVerdict, ScenarioError> {
        let mut conn = self.dial(&format!("deposit:user{user}->bank"), "bank")?;
        let mut state = self.users[user].lock().unwrap();
        let mut rng = self.user_rngs[user].lock().unwrap();
        let verdict = session::deposit(&mut conn, &mut state, idx, &self.crs, &mut *rng, double)
            .map_err(|e| ScenarioError::new(e.to_string()))?;
        drop(state);
        drop(rng);
        self.steps
            .push(format!("user{user} deposited: {verdict:?}"));
        Ok(verdict)
    }

    fn finish(self) -> (Transcript, Vec<String>) {
        for handle in self.threads {
            let _ = handle.join();
        }
        (self.transcript, self.steps)
    }
}

/// Withdraw with user0, pay the euro along `transfers` hops across distinct
/// users, deposit with the last holder. Every step must be accepted.
pub fn run_honest(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, ScenarioError> {
    let n = cfg.transfers;
    if n == 0 {
        return Err(ScenarioError::new("transfers must be >= 1"));
    }
    let user_count = n + 1;
    // Sessions: ttp serves one registration per user + one params fetch per
    // user + the bank registration; bank serves one registration per user +
    // one withdrawal + one deposit; user i<n serves one payment.
    let ttp_sessions = 2 * user_count + 1;
    let bank_sessions = user_count + 2;
    let mut payment_sessions = vec![0usize; user_count];
    for s in payment_sessions.iter_mut().take(n) {
        *s = 1;
    }
    let mut rig = Rig::boot(
        cfg,
        user_count,
        ttp_sessions,
        bank_sessions,
        &payment_sessions,
    )?;

    let mut idx = rig.withdraw(0)?;
    for hop in 1..=n {
        idx = rig.pay(hop - 1, hop, hop)?;
    }
    let verdict = rig.deposit(n, idx, false)?;
    if verdict != DepositVerdict::Accepted {
        return Err(ScenarioError::new(format!(
            "honest deposit not accepted: {verdict:?}"
        )));
    }
    let (transcript, steps) = rig.finish();
    Ok(ScenarioOutcome {
        transcript,
        steps,
        final_verdict: verdict,
    })
}

/// Double-spend scenario. With `fork_at = Some(i)` the holder at hop `i`
/// spends the euro twice (once along the honest chain, once to a shadow
/// receiver) and both branch ends deposit; the expected verdict names
/// `user{i}`. With `fork_at = None` the final holder deposits the same euro
/// twice and is named directly.
pub fn run_double_spend(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, ScenarioError> {
    let n = cfg.transfers;
    if n == 0 {
        return Err(ScenarioError::new("transfers must be >= 1"));
    }
    if let Some(fork) = cfg.fork_at {
        if fork >= n {
            return Err(ScenarioError::new("fork-at must be < transfers"));
        }
    }
    match cfg.fork_at {
        None => run_duplicate_deposit(cfg, n),
        Some(fork) => run_fork(cfg, n, fork),
    }
}

fn run_duplicate_deposit(cfg: &ScenarioConfig, n: usize) -> Result<ScenarioOutcome, ScenarioError> {
    let user_count = n + 1;
    let ttp_sessions = 2 * user_count + 1;
    // One extra deposit session at the bank.
    let bank_sessions = user_count + 3;
    let mut payment_sessions = vec![0usize; user_count];
    for s in payment_sessions.iter_mut().take(n) {
        *s = 1;
    }
    let mut rig = Rig::boot(
        cfg,
        user_count,
        ttp_sessions,
        bank_sessions,
        &payment_sessions,
    )?;

    let mut idx = rig.withdraw(0)?;
    for hop in 1..=n {
        idx = rig.pay(hop - 1, hop, hop)?;
    }
    let first = rig.deposit(n, idx, false)?;
    if first != DepositVerdict::Accepted {
        return Err(ScenarioError::new(format!(
            "first deposit not accepted: {first:?}"
        )));
    }
    let verdict = rig.deposit(n, idx, true)?;
    let expected = DepositVerdict::DoubleSpend {
        identity: format!("user{n}"),
    };
    if verdict != expected {
        return Err(ScenarioError::new(format!(
            "expected {expected:?}, got {verdict:?}"
        )));
    }
    // The trivial duplicate must be settled without consulting the TTP.
    if rig.transcript.sessions().contains_key("revoke:bank->ttp") {
        return Err(ScenarioError::new(
            "duplicate deposit should not reach the TTP",
        ));
    }
    let (transcript, steps) = rig.finish();
    Ok(ScenarioOutcome {
        transcript,
        steps,
        final_verdict: verdict,
    })
}

fn run_fork(
    cfg: &ScenarioConfig,
    n: usize,
    fork_at: usize,
) -> Result<ScenarioOutcome, ScenarioError> {
    // Honest users 0..=n plus the shadow receiver as the last user index.
    let user_count = n + 2;
    let shadow = n + 1;
    let ttp_sessions = 2 * user_count + 1 + 1; // + revocation dial
    let bank_sessions = user_count + 3; // registrations + withdraw + 2 deposits
    let mut payment_sessions = vec![0usize; user_count];
    for s in payment_sessions.iter_mut().take(n) {
        *s = 1;
    }
    let mut rig = Rig::boot(
        cfg,
        user_count,
        ttp_sessions,
        bank_sessions,
        &payment_sessions,
    )?;

    let mut idx = rig.withdraw(0)?;
    for hop in 1..=fork_at {
        idx = rig.pay(hop - 1, hop, hop)?;
    }

    // Branch B first half: the forking holder double-spends to the shadow.
    // The dishonest spend is a local wallet action (the honest payment server
    // refuses spent entries), but the shadow's deposit goes over the wire.
    let fork_entry_idx = idx;
    let shadow_received = {
        let crs = rig.crs.clone();
        let elements = {
            let mut state = rig.users[shadow].lock().unwrap();
            let mut rng = rig.user_rngs[shadow].lock().unwrap();
            state.prepare_receive(&crs, &mut *rng)
        };
        // Branch A continues honestly after the fork, so the fork itself uses
        // the double-spend override before the honest chain marks it spent.
        let bundle = {
            let state = rig.users[fork_at].lock().unwrap();
            let mut rng = rig.user_rngs[fork_at].lock().unwrap();
            state
                .prepare_double_spend(fork_entry_idx, &elements, &crs, &mut *rng)
                .map_err(|e| ScenarioError::new(e.to_string()))?
                .bundle
        };
        let mut state = rig.users[shadow].lock().unwrap();
        state
            .complete_receive(&bundle, &crs, &rig.bank_pk)
            .map_err(|e| ScenarioError::new(e.to_string()))?
    };
    rig.steps
        .push(format!("user{fork_at} double-spent to user{shadow}"));

    // Branch A: continue the honest chain to the end and deposit.
    for hop in fork_at + 1..=n {
        idx = rig.pay(hop - 1, hop, hop)?;
    }
    let first = rig.deposit(n, idx, false)?;
    if first != DepositVerdict::Accepted {
        return Err(ScenarioError::new(format!(
            "branch-A deposit not accepted: {first:?}"
        )));
    }

    // Branch B deposit exposes the forking holder.
    let verdict = rig.deposit(shadow, shadow_received, false)?;
    let expected = DepositVerdict::DoubleSpend {
        identity: format!("user{fork_at}"),
    };
    if verdict != expected {
        return Err(ScenarioError::new(format!(
            "expected {expected:?}, got {verdict:?}"
        )));
    }
    let (transcript, steps) = rig.finish();
    Ok(ScenarioOutcome {
        transcript,
        steps,
        final_verdict: verdict,
    })
}
