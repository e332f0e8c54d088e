//! Shared in-memory harness driving full protocol runs over any backend.
#![allow(dead_code)] // not every test target uses every helper

use ark_ec::pairing::Pairing;
use ark_std::rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use offline_euro::crs::Crs;
use offline_euro::parties::{BankState, DepositOutcome, TtpState, UserState};
use offline_euro::GroupParams;

pub struct World<E: Pairing> {
    pub ttp: TtpState<E>,
    pub bank: BankState<E>,
    pub rng: ChaCha20Rng,
}

impl<E: Pairing> World<E> {
    pub fn new(params: GroupParams<E>, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let ttp = TtpState::new(params.clone(), "bank", &mut rng);
        let bank = BankState::new(&params, &mut rng);
        let bank_pk = bank.pk();
        let mut world = World { ttp, bank, rng };
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

    /// One honest hop; the receiver ends up holding the euro.
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

    /// Withdraws with `holders[0]` and moves the euro along the whole list.
    /// Returns the wallet index at the final holder (always 0 for fresh
    /// receivers).
    pub fn run_chain(&mut self, holders: &mut [UserState<E>]) -> usize {
        let idx = self.withdraw(&mut holders[0]);
        let mut current = idx;
        for i in 1..holders.len() {
            let (left, right) = holders.split_at_mut(i);
            current = self.transfer(&mut left[i - 1], current, &mut right[0]);
        }
        current
    }
}
