//! Acceptance suite: one test per criterion, each printing a pass line and
//! enforcing its tolerances and runtime budget. The tests share a lock so the
//! timing-sensitive measurements never contend with each other.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use ark_bls12_381::Bls12_381 as E;
use ark_ff::{Field, UniformRand};
use ark_std::rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use offline_euro::crs::{extract_committed_g1, extract_committed_g2};
use offline_euro::gsproof::{
    self, derive_randomization, next_target, verify_link, TransactionProof,
};
use offline_euro::pairing::{
    bls12_381_params, domain, g1_exp, g2_exp, gt_to_scalar, nonzero_scalar, pair, Scalar,
};
use offline_euro::parties::{DepositOutcome, RevocationAuthority, RevocationOutcome, TtpState};
use offline_euro::schnorr::{
    self, blind_round1_signer, blind_round2_with_factors, blind_round3_signer, keygen, unblind,
};
use offline_euro::token::{self, predicted_size, withdraw_message, SizeModel};

use offline_euro_cli::bench;
use offline_euro_cli::scenario::{run_double_spend, run_honest, ScenarioConfig, Transport};
use offline_euro_cli::sim::SimWorld;
use offline_euro_wire::frame::tag;

static SEQUENTIAL: Mutex<()> = Mutex::new(());

fn run_criterion(budget: Duration, body: impl FnOnce()) -> Duration {
    let _guard = SEQUENTIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    body();
    let elapsed = start.elapsed();
    assert!(
        elapsed < budget,
        "runtime {elapsed:?} exceeded the {budget:?} budget"
    );
    elapsed
}

#[test]
fn criterion_1_blind_signature_completeness() {
    let elapsed = run_criterion(Duration::from_secs(10), || {
        let params = bls12_381_params();
        let mut rng = ChaCha20Rng::seed_from_u64(0xAC01);
        let bank = keygen(&params, &mut rng);

        // 100 seeded withdrawals; every unblinded signature verifies over
        // SN || theta1 under the bank key.
        for _ in 0..100 {
            let prep = token::withdrawal_prepare(&params, &mut rng);
            let nonce = blind_round1_signer(&params, &mut rng);
            let (session, c_prime) = schnorr::blind_round2_client(
                domain::WITHDRAW_MSG,
                &nonce.r,
                &prep.message,
                &bank.pk,
                &params,
                &mut rng,
            )
            .unwrap();
            let sigma_prime = blind_round3_signer(nonce, &c_prime, &bank.secret());
            let sig = unblind(session, &sigma_prime);
            let msg = withdraw_message::<E>(&prep.serial_number, &prep.theta1_w);
            assert!(schnorr::verify(
                domain::WITHDRAW_MSG,
                &msg,
                &sig,
                &bank.pk,
                &params
            ));
        }

        // Zero blinding factors reproduce the signer transcript exactly.
        let prep = token::withdrawal_prepare(&params, &mut rng);
        let nonce = blind_round1_signer(&params, &mut rng);
        let r = nonce.r;
        let (session, c_prime) = blind_round2_with_factors(
            domain::WITHDRAW_MSG,
            &r,
            &prep.message,
            &bank.pk,
            &params,
            Scalar::<E>::from(0u64),
            Scalar::<E>::from(0u64),
        )
        .unwrap();
        assert_eq!(session.challenge(), c_prime);
        let sigma_prime = blind_round3_signer(nonce, &c_prime, &bank.secret());
        let sig = unblind(session, &sigma_prime);
        assert_eq!((sig.sigma, sig.c), (sigma_prime, c_prime));
        assert!(schnorr::verify(
            domain::WITHDRAW_MSG,
            &prep.message,
            &sig,
            &bank.pk,
            &params
        ));
    });
    println!("[acceptance] criterion 1 (blind-signature completeness): PASS in {elapsed:?}");
}

#[test]
fn criterion_2_gs_proof_suite() {
    let elapsed = run_criterion(Duration::from_secs(60), || {
        let mut rng = ChaCha20Rng::seed_from_u64(0xAC02);
        let params = bls12_381_params();
        let (crs, trapdoor) = offline_euro::crs::generate(params.clone(), &mut rng);

        let mut proofs: Vec<(TransactionProof<E>, Scalar<E>, Scalar<E>)> = Vec::new();
        for _ in 0..100 {
            let x = nonzero_scalar::<E, _>(&mut rng);
            let y = Scalar::<E>::rand(&mut rng);
            let s = nonzero_scalar::<E, _>(&mut rng);
            let secret = derive_randomization(&crs, &mut rng);
            let (elements, _) =
                gsproof::prove(&x, &y, &s, secret.elements(), &crs, &mut rng).unwrap();
            let target = pair::<E>(g1_exp::<E>(params.g1(), x), g2_exp::<E>(params.g2(), y));
            let proof = elements.into_proof(target);
            assert!(gsproof::verify(&proof, &crs), "honest proof must verify");
            proofs.push((proof, x, y));
        }

        // Single-element corruption flips verification, 100/100 per position.
        for (i, (proof, _, _)) in proofs.iter().enumerate() {
            let rand_g1 = g1_exp::<E>(params.g1(), Scalar::<E>::rand(&mut rng));
            let rand_g2 = g2_exp::<E>(params.g2(), Scalar::<E>::rand(&mut rng));
            let mutations = [
                TransactionProof {
                    c1: rand_g1,
                    ..*proof
                },
                TransactionProof {
                    c2: rand_g1,
                    ..*proof
                },
                TransactionProof {
                    d1: rand_g2,
                    ..*proof
                },
                TransactionProof {
                    d2: rand_g2,
                    ..*proof
                },
                TransactionProof {
                    theta1: rand_g1,
                    ..*proof
                },
                TransactionProof {
                    theta2: rand_g1,
                    ..*proof
                },
                TransactionProof {
                    pi1: rand_g2,
                    ..*proof
                },
                TransactionProof {
                    pi2: rand_g2,
                    ..*proof
                },
            ];
            for (pos, broken) in mutations.iter().enumerate() {
                assert!(
                    !gsproof::verify(broken, &crs),
                    "corruption at position {pos} of proof {i} went unnoticed"
                );
            }
        }

        // Trapdoor extraction recovers the exact committed values.
        for (proof, x, y) in &proofs {
            assert_eq!(
                extract_committed_g1::<E>(&proof.c1, &proof.c2, &trapdoor.alpha),
                g1_exp::<E>(params.g1(), *x)
            );
            assert_eq!(
                extract_committed_g2::<E>(&proof.d1, &proof.d2, &trapdoor.beta),
                g2_exp::<E>(params.g2(), *y)
            );
        }
    });
    println!("[acceptance] criterion 2 (GS proof suite): PASS in {elapsed:?}");
}

#[test]
fn criterion_3_chain_correctness() {
    let elapsed = run_criterion(Duration::from_secs(120), || {
        // Honest chains of every required length pass full verification.
        for (seed, hops) in [(0xA31u64, 1usize), (0xA32, 2), (0xA33, 10), (0xA34, 50)] {
            let mut world = SimWorld::new(seed);
            let mut holder = world.user("user0");
            let mut idx = world.withdraw(&mut holder);
            for i in 1..=hops {
                let mut next = world.user(&format!("user{i}"));
                idx = world.transfer(&mut holder, idx, &mut next);
                holder = next;
            }
            assert_eq!(holder.wallet()[idx].euro.proofs.len(), hops);
        }

        // A spender who replaces s by a random scalar fails the link check.
        let mut world = SimWorld::new(0xA35);
        let params = world.crs().params().clone();
        let crs = world.crs();
        let mut alice = world.user("alice");
        let mut bob = world.user("bob");
        let idx = world.withdraw(&mut alice);
        world.transfer(&mut alice, idx, &mut bob);
        let prev = *bob.wallet()[0].euro.proofs.last().unwrap();

        let mut rng = ChaCha20Rng::seed_from_u64(0xA36);
        let mut failures = 0usize;
        for _ in 0..100 {
            let spender = keygen(&params, &mut rng);
            let receiver = derive_randomization(&crs, &mut rng);
            let k = gt_to_scalar::<E>(&prev.target);
            let y = k * spender.secret().inverse().unwrap();
            let s_random = nonzero_scalar::<E, _>(&mut rng);
            let (elements, _) = gsproof::prove(
                &spender.secret(),
                &y,
                &s_random,
                receiver.elements(),
                &crs,
                &mut rng,
            )
            .unwrap();
            let forged = elements.into_proof(next_target::<E>(&prev.target, &params));
            if !verify_link(&prev, &forged, &params) {
                failures += 1;
            }
        }
        assert!(failures >= 99, "only {failures}/100 random-s chains failed");

        // A tampered target chain fails the recomputation check.
        let honest_secret = derive_randomization(&crs, &mut rng);
        let spender = keygen(&params, &mut rng);
        let k = gt_to_scalar::<E>(&prev.target);
        let y = k * spender.secret().inverse().unwrap();
        let s = (-bob.wallet()[0].t_secret()).inverse().unwrap();
        let (elements, _) = gsproof::prove(
            &spender.secret(),
            &y,
            &s,
            honest_secret.elements(),
            &crs,
            &mut rng,
        )
        .unwrap();
        let mut cur = elements.into_proof(next_target::<E>(&prev.target, &params));
        assert!(verify_link(&prev, &cur, &params));
        cur.target += params.gt_generator();
        assert!(!verify_link(&prev, &cur, &params));
    });
    println!("[acceptance] criterion 3 (chain correctness): PASS in {elapsed:?}");
}

struct CountingTtp<'a> {
    inner: &'a TtpState<E>,
    calls: usize,
}

impl RevocationAuthority<E> for CountingTtp<'_> {
    fn revoke(&mut self, a: &TransactionProof<E>, b: &TransactionProof<E>) -> RevocationOutcome {
        self.calls += 1;
        self.inner.revoke(a, b)
    }
}

#[test]
fn criterion_4_double_spend_detection() {
    let elapsed = run_criterion(Duration::from_secs(60), || {
        // Fork at every required index of a 6-transfer chain.
        let total = 6usize;
        for (case, fork_at) in [0usize, 1, 3, total - 1].into_iter().enumerate() {
            let mut world = SimWorld::new(0xA40 + case as u64);
            let mut holders: Vec<_> = (0..=total)
                .map(|i| world.user(&format!("user{i}")))
                .collect();
            let mut idx = world.withdraw(&mut holders[0]);
            for i in 1..=fork_at {
                let (left, right) = holders.split_at_mut(i);
                idx = world.transfer(&mut left[i - 1], idx, &mut right[0]);
            }
            // Fork: the holder double-spends to a shadow receiver.
            let mut shadow = world.user("shadow");
            let crs = world.crs();
            let elements = shadow.prepare_receive(&crs, &mut world.rng);
            let forged = holders[fork_at]
                .prepare_double_spend(idx, &elements, &crs, &mut world.rng)
                .unwrap();
            shadow
                .complete_receive(&forged.bundle, &crs, &world.bank.pk())
                .unwrap();
            // Honest continuation and both deposits.
            let mut branch = idx;
            for i in fork_at + 1..=total {
                let (left, right) = holders.split_at_mut(i);
                branch = world.transfer(&mut left[i - 1], branch, &mut right[0]);
            }
            assert_eq!(
                world.deposit(&mut holders[total], branch, false),
                DepositOutcome::Accepted
            );
            assert_eq!(
                world.deposit(&mut shadow, 0, false),
                DepositOutcome::DoubleSpend {
                    identity: format!("user{fork_at}")
                },
                "fork at {fork_at}"
            );
        }

        // 50 honest runs produce zero false positives.
        let mut world = SimWorld::new(0xA4F);
        for i in 0..50 {
            let mut payer = world.user(&format!("payer{i}"));
            let mut payee = world.user(&format!("payee{i}"));
            let idx = world.withdraw(&mut payer);
            let j = world.transfer(&mut payer, idx, &mut payee);
            assert_eq!(
                world.deposit(&mut payee, j, false),
                DepositOutcome::Accepted,
                "false positive on run {i}"
            );
        }
        assert!(world.bank.anomalies().is_empty());

        // Duplicate self-deposit: depositor identified without a TTP call.
        let mut world = SimWorld::new(0xA50);
        let mut alice = world.user("alice");
        let mut bob = world.user("bob");
        let idx = world.withdraw(&mut alice);
        world.transfer(&mut alice, idx, &mut bob);
        let crs = world.crs();
        let mut counting = CountingTtp {
            inner: &world.ttp,
            calls: 0,
        };
        for double in [false, true] {
            let elements = world
                .bank
                .begin_deposit(&bob.pk(), &crs, &mut world.rng)
                .unwrap();
            let prepared = if double {
                bob.prepare_double_spend(0, &elements, &crs, &mut world.rng)
            } else {
                bob.prepare_spend(0, &elements, &crs, &mut world.rng)
            }
            .unwrap();
            let bundle = prepared.bundle.clone();
            bob.commit_spend(0, prepared).unwrap();
            let outcome = world
                .bank
                .complete_deposit(&bob.pk(), &bundle, &crs, &mut counting);
            if double {
                assert_eq!(
                    outcome,
                    DepositOutcome::DoubleSpend {
                        identity: "bob".into()
                    }
                );
            } else {
                assert_eq!(outcome, DepositOutcome::Accepted);
            }
        }
        assert_eq!(counting.calls, 0, "trivial case must not consult the TTP");
    });
    println!("[acceptance] criterion 4 (double-spend detection): PASS in {elapsed:?}");
}

#[test]
fn criterion_5_revocation_locality() {
    let elapsed = run_criterion(Duration::from_secs(120), || {
        let cfg = ScenarioConfig {
            transfers: 4,
            seed: 0xA51,
            transport: Transport::Inproc,
            fork_at: Some(2),
        };
        let outcome = run_double_spend(&cfg).unwrap();
        assert!(matches!(
            outcome.final_verdict,
            offline_euro_wire::DepositVerdict::DoubleSpend { .. }
        ));

        // Exactly one request frame with exactly two proofs and one reply
        // with a single identity cross the revocation interface.
        let sessions = outcome.transcript.sessions();
        let revoke = sessions
            .get("revoke:bank->ttp")
            .expect("revocation session");
        assert_eq!(revoke.len(), 2, "exactly one request and one reply");
        assert_eq!(revoke[0].tag, tag::REVOKE_REQ);
        let proof_len = TransactionProof::<E>::encoded_len();
        assert_eq!(
            revoke[0].bytes.len(),
            5 + 2 * proof_len,
            "request is exactly two proofs, nothing else"
        );
        assert_eq!(revoke[1].tag, tag::REVOKE_REP);
        // outcome byte + length-prefixed identity string.
        assert_eq!(revoke[1].bytes.len(), 5 + 1 + 4 + "user2".len());
        // No other session carries revocation frames.
        for (label, records) in &sessions {
            if label == "revoke:bank->ttp" {
                continue;
            }
            for record in records {
                assert_ne!(record.tag, tag::REVOKE_REQ, "stray revocation in {label}");
                assert_ne!(record.tag, tag::REVOKE_REP, "stray revocation in {label}");
            }
        }
    });
    println!("[acceptance] criterion 5 (revocation locality): PASS in {elapsed:?}");
}

#[test]
fn criterion_6_growth_linearity() {
    let elapsed = run_criterion(Duration::from_secs(300), || {
        let report = bench::growth(50, 0xA60);
        assert_eq!(report.rows.len(), 50);

        // Constant increment for n >= 2 (zero variance).
        let increments: Vec<usize> = report
            .rows
            .windows(2)
            .map(|w| w[1].bytes - w[0].bytes)
            .collect();
        assert!(
            increments.iter().all(|&d| d == increments[0]),
            "growth increments vary: {increments:?}"
        );

        // The increment is the predicted per-entry term plus a constant
        // framing overhead below 300 bytes.
        let model = SizeModel::for_backend::<E>();
        let per_entry_overhead = increments[0] as i64 - model.proof_len() as i64;
        assert!(
            (0..300).contains(&per_entry_overhead),
            "per-entry overhead {per_entry_overhead} out of range"
        );
        let base_overhead = report.initial_bytes as i64 - predicted_size(0, &model) as i64;
        assert!(
            (0..300).contains(&base_overhead),
            "base overhead {base_overhead} out of range"
        );
        // First-transaction one-time overhead is also bounded.
        let first_increment = report.rows[0].bytes as i64 - report.initial_bytes as i64;
        let one_time = first_increment - model.proof_len() as i64;
        assert!(
            (-300..300).contains(&one_time),
            "one-time list overhead {one_time} out of range"
        );
    });
    println!("[acceptance] criterion 6 (growth linearity): PASS in {elapsed:?}");
}

#[test]
fn criterion_7_verification_time_linearity() {
    let elapsed = run_criterion(Duration::from_secs(600), || {
        let report = bench::verify(50, 10, 0xA70);
        assert_eq!(report.rows.len(), 50 * 10);
        assert!(
            report.slope_ns_per_tx > 0.0,
            "slope {} not positive",
            report.slope_ns_per_tx
        );
        assert!(
            report.r_squared >= 0.95,
            "linear fit R^2 {} below 0.95",
            report.r_squared
        );
        // Absolute times are reported, not asserted.
        println!(
            "[acceptance]   verification: {:.2} ms/transaction, R^2 {:.4}, length-50 mean {:.1} ms",
            report.slope_ns_per_tx / 1e6,
            report.r_squared,
            report
                .rows
                .iter()
                .filter(|r| r.index == 50)
                .map(|r| r.nanos as f64 / 1e6)
                .sum::<f64>()
                / 10.0
        );
    });
    println!("[acceptance] criterion 7 (verification-time linearity): PASS in {elapsed:?}");
}

#[test]
fn criterion_8_transport_equivalence() {
    let elapsed = run_criterion(Duration::from_secs(300), || {
        let mk = |transport| ScenarioConfig {
            transfers: 10,
            seed: 0xA80,
            transport,
            fork_at: None,
        };
        let inproc = run_honest(&mk(Transport::Inproc)).unwrap();
        let socket = run_honest(&mk(Transport::Socket)).unwrap();

        // Byte-identical protocol payloads per session across bindings.
        let a = inproc.transcript.flattened();
        let b = socket.transcript.flattened();
        assert_eq!(
            a.keys().collect::<Vec<_>>(),
            b.keys().collect::<Vec<_>>(),
            "session sets differ"
        );
        for (label, bytes) in &a {
            assert_eq!(bytes, &b[label], "payload bytes differ in session {label}");
        }

        // No transfer-phase frame touches a bank or TTP endpoint.
        for (label, records) in inproc.transcript.sessions() {
            if label.starts_with("transfer:") {
                assert!(
                    !label.contains("bank") && !label.contains("ttp"),
                    "transfer session {label} touches an institution"
                );
            } else {
                for record in records {
                    assert_ne!(
                        record.tag,
                        tag::TRANSFER_PAYLOAD,
                        "transfer payload crossed an institutional session {label}"
                    );
                }
            }
        }
    });
    println!("[acceptance] criterion 8 (transport equivalence): PASS in {elapsed:?}");
}
