//! The two measurements behind the benchmark commands: serialized euro growth
//! per transaction, and full-chain verification time per chain length.

use std::time::Instant;

use ark_bls12_381::Bls12_381 as E;

use offline_euro::crs::Crs;
use offline_euro::gsproof::derive_randomization;
use offline_euro::pairing::G1;
use offline_euro::schnorr::{keygen, KeyPair};
use offline_euro::token::{self, predicted_size, SizeModel, WalletEntry};

use crate::report::{linear_fit, GrowthRow, VerifyRow};
use crate::sim::{rng_for, SimWorld};

pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub initial_bytes: usize,
    pub per_entry_bytes: usize,
    pub predicted_per_entry: usize,
    pub framing_overhead: usize,
}

/// Builds an honest chain of `transfers` hops and records the serialized euro
/// size after every transaction.
pub fn growth(transfers: usize, seed: u64) -> GrowthReport {
    let mut world = SimWorld::new(seed);
    let mut holder = world.user("user0");
    let idx = world.withdraw(&mut holder);
    let initial_bytes = holder.wallet()[idx].euro.to_bytes().len();

    let mut rows = Vec::with_capacity(transfers);
    let mut current = idx;
    for i in 1..=transfers {
        let mut next = world.user(&format!("user{i}"));
        let received = world.transfer(&mut holder, current, &mut next);
        rows.push(GrowthRow {
            index: i,
            bytes: next.wallet()[received].euro.to_bytes().len(),
        });
        holder = next;
        current = received;
    }

    let model = SizeModel::for_backend::<E>();
    let per_entry_bytes = if transfers >= 2 {
        rows[1].bytes - rows[0].bytes
    } else {
        model.proof_len()
    };
    GrowthReport {
        framing_overhead: initial_bytes - predicted_size(0, &model),
        predicted_per_entry: model.proof_len(),
        per_entry_bytes,
        initial_bytes,
        rows,
    }
}

pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub slope_ns_per_tx: f64,
    pub intercept_ns: f64,
    pub r_squared: f64,
}

/// Measures full receive-side verification at every chain length 1..=n,
/// repeated over fresh chains. The clock runs around the verification call
/// only; building the next hop is excluded.
pub fn verify(transfers: usize, repeats: usize, seed: u64) -> VerifyReport {
    let mut rows = Vec::with_capacity(transfers * repeats);
    for repeat in 0..repeats {
        let mut world = SimWorld::new(seed.wrapping_add(repeat as u64));
        let mut rng = rng_for(seed, &format!("bench-verify-{repeat}"));
        let crs: Crs<E> = world.crs();
        let bank_pk: G1<E> = world.bank.pk();

        let mut holder = world.user("user0");
        let idx = world.withdraw(&mut holder);
        let mut entry: WalletEntry<E> = holder.wallet()[idx].clone();
        let mut keys: KeyPair<E> = holder.keys().clone();

        for i in 1..=transfers {
            let receiver_keys = keygen(crs.params(), &mut rng);
            let secret = derive_randomization(&crs, &mut rng);
            let prepared = token::spend(&entry, &keys, secret.elements(), &crs, &mut rng).unwrap();

            let start = Instant::now();
            let verified = token::receive_verify(&prepared.bundle, &secret, &crs, &bank_pk);
            let nanos = start.elapsed().as_nanos();

            entry = verified.unwrap();
            keys = receiver_keys;
            rows.push(VerifyRow {
                index: i,
                repeat,
                nanos,
            });
        }
    }

    let xs: Vec<f64> = (1..=transfers).map(|i| i as f64).collect();
    let ys: Vec<f64> = (1..=transfers)
        .map(|i| {
            let samples: Vec<u128> = rows
                .iter()
                .filter(|r| r.index == i)
                .map(|r| r.nanos)
                .collect();
            samples.iter().sum::<u128>() as f64 / samples.len() as f64
        })
        .collect();
    let (slope_ns_per_tx, intercept_ns, r_squared) = linear_fit(&xs, &ys);
    VerifyReport {
        rows,
        slope_ns_per_tx,
        intercept_ns,
        r_squared,
    }
}
