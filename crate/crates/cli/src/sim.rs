//! In-memory protocol world on the default backend: all parties in one
//! process, no transport. Benchmarks and scenario assertions build on this.

use ark_bls12_381::Bls12_381 as E;
use ark_std::rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use offline_euro::bls12_381_params;
use offline_euro::crs::Crs;
use offline_euro::parties::{BankState, DepositOutcome, TtpState, UserState};

/// Derives a party-specific RNG from the scenario seed, so runs are
/// reproducible and party randomness is independent of scheduling.
pub fn rng_for(seed: u64, label: &str) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_be_bytes());
    hasher.update(label.as_bytes());
    ChaCha20Rng::from_seed(hasher.finalize().into())
}

pub struct SimWorld {
    pub ttp: TtpState<E>,
    pub bank: BankState<E>,
    pub rng: ChaCha20Rng,
}

impl SimWorld {
    pub fn new(seed: u64) -> Self {
        let params = bls12_381_params();
        let mut ttp_rng = rng_for(seed, "ttp");
        let ttp = TtpState::new(params.clone(), "bank", &mut ttp_rng);
        let bank = BankState::new(&params, &mut rng_for(seed, "bank"));
        let bank_pk = bank.pk();
        let mut world = SimWorld {
            ttp,
            bank,
            rng: rng_for(seed, "world"),
        };
        world.ttp.register("bank", bank_pk).unwrap();
        world.bank.register("bank", &bank_pk).unwrap();
        world
    }

    pub fn crs(&self) -> Crs<E> {
        self.ttp.crs().clone()
    }

    pub fn user(&mut self, name: &str) -> UserState<E> {
        let user = UserState::new(name, self.ttp.crs().params(), &mut self.rng);
        self.ttp.register(name, user.pk()).unwrap();
        self.bank.register(name, &user.pk()).unwrap();
        user
    }

    pub fn withdraw(&mut self, user: &mut UserState<E>) -> usize {
        let params = self.ttp.crs().params().clone();
        let r = self
            .bank
            .withdraw_round1(&user.pk(), &params, &mut self.rng)
            .unwrap();
        let c_prime = user
            .begin_withdrawal(&r, &self.bank.pk(), &params, &mut self.rng)
            .unwrap();
        let sigma_prime = self.bank.withdraw_round3(&user.pk(), &c_prime).unwrap();
        user.finish_withdrawal(&sigma_prime, &self.bank.pk(), &params)
            .unwrap()
    }

    pub fn transfer(
        &mut self,
        spender: &mut UserState<E>,
        idx: usize,
        receiver: &mut UserState<E>,
    ) -> usize {
        let crs = self.crs();
        let elements = receiver.prepare_receive(&crs, &mut self.rng);
        let bundle = spender
            .spend_now(idx, &elements, &crs, &mut self.rng)
            .unwrap();
        receiver
            .complete_receive(&bundle, &crs, &self.bank.pk())
            .unwrap()
    }

    pub fn deposit(&mut self, user: &mut UserState<E>, idx: usize, double: bool) -> DepositOutcome {
        let crs = self.crs();
        let elements = self
            .bank
            .begin_deposit(&user.pk(), &crs, &mut self.rng)
            .unwrap();
        let prepared = if double {
            user.prepare_double_spend(idx, &elements, &crs, &mut self.rng)
        } else {
            user.prepare_spend(idx, &elements, &crs, &mut self.rng)
        }
        .unwrap();
        let bundle = prepared.bundle.clone();
        user.commit_spend(idx, prepared).unwrap();
        self.bank
            .complete_deposit(&user.pk(), &bundle, &crs, &mut self.ttp)
    }
}
