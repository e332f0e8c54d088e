//! Fixtures for wire tests: an in-memory world plus one funded user.
#![allow(dead_code)] // not every test target uses every helper

use ark_bls12_381::Bls12_381 as E;
use ark_std::rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use offline_euro::bls12_381_params;
use offline_euro::crs::Crs;
use offline_euro::parties::{BankState, TtpState, UserState};
use offline_euro::token::TransferBundle;

pub struct Fixture {
    pub ttp: TtpState<E>,
    pub bank: BankState<E>,
    pub rng: ChaCha20Rng,
}

impl Fixture {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = bls12_381_params();
        let ttp = TtpState::new(params.clone(), "bank", &mut rng);
        let mut fixture = Fixture {
            bank: BankState::new(&params, &mut rng),
            ttp,
            rng,
        };
        let bank_pk = fixture.bank.pk();
        fixture.ttp.register("bank", bank_pk).unwrap();
        fixture.bank.register("bank", &bank_pk).unwrap();
        fixture
    }

    pub fn crs(&self) -> Crs<E> {
        self.ttp.crs().clone()
    }

    pub fn funded_user(&mut self, name: &str) -> UserState<E> {
        let params = self.ttp.crs().params().clone();
        let mut user = UserState::new(name, &params, &mut self.rng);
        self.ttp.register(name, user.pk()).unwrap();
        self.bank.register(name, &user.pk()).unwrap();
        let r = self
            .bank
            .withdraw_round1(&user.pk(), &params, &mut self.rng)
            .unwrap();
        let c_prime = user
            .begin_withdrawal(&r, &self.bank.pk(), &params, &mut self.rng)
            .unwrap();
        let sigma_prime = self.bank.withdraw_round3(&user.pk(), &c_prime).unwrap();
        user.finish_withdrawal(&sigma_prime, &self.bank.pk(), &params)
            .unwrap();
        user
    }

    /// One spend from `user` towards a fresh receiver; returns the bundle.
    pub fn sample_bundle(&mut self, user: &mut UserState<E>) -> TransferBundle<E> {
        let crs = self.crs();
        let mut receiver = UserState::new("rx", crs.params(), &mut self.rng);
        let elements = receiver.prepare_receive(&crs, &mut self.rng);
        user.spend_now(0, &elements, &crs, &mut self.rng).unwrap()
    }
}
