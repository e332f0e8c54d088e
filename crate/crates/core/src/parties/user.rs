//! A user: key material, the wallet, one optional open withdrawal session and
//! one optional pending receive session.

use ark_ec::pairing::Pairing;
use ark_std::rand::RngCore;
use thiserror::Error;

use crate::crs::Crs;
use crate::gsproof::{derive_randomization, RandomizationElements, ReceiverSecret};
use crate::pairing::{domain, GroupParams, Scalar, G1};
use crate::schnorr::{blind_round2_client, keygen, unblind, BlindSession, KeyPair, SchnorrError};
use crate::token::{
    self, withdrawal_prepare, PreparedSpend, RejectReason, SpendError, TransferBundle, WalletEntry,
    WithdrawalPrep,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UserError {
    #[error("no withdrawal in progress")]
    NoOpenWithdrawal,
    #[error("no receive session in progress")]
    NoPendingReceive,
    #[error("no wallet entry at index {0}")]
    NoSuchEntry(usize),
    #[error("issued signature failed verification")]
    BadIssuedSignature,
    #[error(transparent)]
    Spend(#[from] SpendError),
    #[error("incoming bundle rejected: {0}")]
    Rejected(RejectReason),
    #[error(transparent)]
    Schnorr(#[from] SchnorrError),
}

struct PendingWithdrawal<E: Pairing> {
    prep: WithdrawalPrep<E>,
    session: BlindSession<E>,
}

pub struct UserState<E: Pairing> {
    identity: String,
    keys: KeyPair<E>,
    wallet: Vec<WalletEntry<E>>,
    open_withdrawal: Option<PendingWithdrawal<E>>,
    pending_receive: Option<ReceiverSecret<E>>,
}

impl<E: Pairing> UserState<E> {
    pub fn new<R: RngCore + ?Sized>(identity: &str, params: &GroupParams<E>, rng: &mut R) -> Self {
        Self {
            identity: identity.to_string(),
            keys: keygen(params, rng),
            wallet: Vec::new(),
            open_withdrawal: None,
            pending_receive: None,
        }
    }

    pub fn identity(&self) -> &str {
        &self.identity
    }

    pub fn pk(&self) -> G1<E> {
        self.keys.pk
    }

    pub fn keys(&self) -> &KeyPair<E> {
        &self.keys
    }

    pub fn wallet(&self) -> &[WalletEntry<E>] {
        &self.wallet
    }

    pub fn entry(&self, idx: usize) -> Result<&WalletEntry<E>, UserError> {
        self.wallet.get(idx).ok_or(UserError::NoSuchEntry(idx))
    }

    pub fn first_unspent(&self) -> Option<usize> {
        self.wallet.iter().position(|e| !e.is_spent())
    }

    // ---- withdrawal ------------------------------------------------------

    /// Answers the bank's signing nonce with the blinded challenge. Starting
    /// a new withdrawal aborts any session still open.
    pub fn begin_withdrawal<R: RngCore + ?Sized>(
        &mut self,
        bank_nonce: &G1<E>,
        bank_pk: &G1<E>,
        params: &GroupParams<E>,
        rng: &mut R,
    ) -> Result<Scalar<E>, UserError> {
        let prep = withdrawal_prepare::<E, R>(params, rng);
        let (session, c_prime) = blind_round2_client(
            domain::WITHDRAW_MSG,
            bank_nonce,
            &prep.message,
            bank_pk,
            params,
            rng,
        )?;
        self.open_withdrawal = Some(PendingWithdrawal { prep, session });
        Ok(c_prime)
    }

    /// Unblinds the bank's response and, if the signature verifies, stores the
    /// fresh euro. Returns the wallet index.
    pub fn finish_withdrawal(
        &mut self,
        sigma_prime: &Scalar<E>,
        bank_pk: &G1<E>,
        params: &GroupParams<E>,
    ) -> Result<usize, UserError> {
        let pending = self
            .open_withdrawal
            .take()
            .ok_or(UserError::NoOpenWithdrawal)?;
        let sig = unblind(pending.session, sigma_prime);
        let entry = pending
            .prep
            .into_wallet_entry(sig, bank_pk, params)
            .map_err(|_| UserError::BadIssuedSignature)?;
        self.wallet.push(entry);
        Ok(self.wallet.len() - 1)
    }

    // ---- spending --------------------------------------------------------

    /// Builds a transfer from the wallet entry towards whoever supplied the
    /// randomization elements. Nothing is marked spent until
    /// [`UserState::commit_spend`].
    pub fn prepare_spend<R: RngCore + ?Sized>(
        &self,
        idx: usize,
        rand_elements: &RandomizationElements<E>,
        crs: &Crs<E>,
        rng: &mut R,
    ) -> Result<PreparedSpend<E>, UserError> {
        let entry = self.entry(idx)?;
        Ok(token::spend(entry, &self.keys, rand_elements, crs, rng)?)
    }

    /// Dishonest variant for the detection experiments: ignores the spent
    /// flag.
    pub fn prepare_double_spend<R: RngCore + ?Sized>(
        &self,
        idx: usize,
        rand_elements: &RandomizationElements<E>,
        crs: &Crs<E>,
        rng: &mut R,
    ) -> Result<PreparedSpend<E>, UserError> {
        let entry = self.entry(idx)?;
        Ok(token::double_spend(
            entry,
            &self.keys,
            rand_elements,
            crs,
            rng,
        )?)
    }

    /// Marks the entry spent. Call once the receiver acknowledged the payload.
    pub fn commit_spend(
        &mut self,
        idx: usize,
        prepared: PreparedSpend<E>,
    ) -> Result<(), UserError> {
        let entry = self
            .wallet
            .get_mut(idx)
            .ok_or(UserError::NoSuchEntry(idx))?;
        prepared.commit(entry);
        Ok(())
    }

    /// Prepare and commit in one step, for in-memory flows without a
    /// transport between the two halves.
    pub fn spend_now<R: RngCore + ?Sized>(
        &mut self,
        idx: usize,
        rand_elements: &RandomizationElements<E>,
        crs: &Crs<E>,
        rng: &mut R,
    ) -> Result<TransferBundle<E>, UserError> {
        let prepared = self.prepare_spend(idx, rand_elements, crs, rng)?;
        let bundle = prepared.bundle.clone();
        self.commit_spend(idx, prepared)?;
        Ok(bundle)
    }

    // ---- receiving -------------------------------------------------------

    /// Opens a receive session: draws `t`, keeps it, and hands out the
    /// randomization elements for the spender. A new session replaces any
    /// stale one.
    pub fn prepare_receive<R: RngCore + ?Sized>(
        &mut self,
        crs: &Crs<E>,
        rng: &mut R,
    ) -> RandomizationElements<E> {
        let secret = derive_randomization(crs, rng);
        let elements = *secret.elements();
        self.pending_receive = Some(secret);
        elements
    }

    /// Verifies an incoming bundle against the pending receive session and
    /// stores the euro. Returns the wallet index.
    pub fn complete_receive(
        &mut self,
        bundle: &TransferBundle<E>,
        crs: &Crs<E>,
        bank_pk: &G1<E>,
    ) -> Result<usize, UserError> {
        let secret = self
            .pending_receive
            .take()
            .ok_or(UserError::NoPendingReceive)?;
        let entry =
            token::receive_verify(bundle, &secret, crs, bank_pk).map_err(UserError::Rejected)?;
        self.wallet.push(entry);
        Ok(self.wallet.len() - 1)
    }
}
