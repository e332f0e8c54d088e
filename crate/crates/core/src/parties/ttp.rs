//! The trusted third party: generates the reference string, keeps the
//! pubkey-to-identity registry, and extracts the committed spender key from
//! exactly two diverging proofs when the bank reports a suspected double
//! spend.

use std::collections::BTreeMap;

use ark_ec::pairing::Pairing;
use ark_ec::AffineRepr;
use ark_std::rand::RngCore;
use thiserror::Error;

use crate::crs::{self, extract_committed_g1, Crs, Trapdoor};
use crate::gsproof::TransactionProof;
use crate::pairing::{g1_to_bytes, GroupParams, G1};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TtpError {
    #[error("public key already registered")]
    AlreadyRegistered,
    #[error("public key must not be the identity element")]
    IdentityKey,
}

/// Result of a revocation request over two proofs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RevocationOutcome {
    /// Both proofs commit the same registered key: its owner double-spent.
    DoubleSpender { identity: String },
    /// Both proofs commit the same key, but nobody registered it.
    UnknownKey,
    /// The proofs commit different keys; not a double spend.
    NotDoubleSpend,
}

/// Anything able to answer a revocation request. The bank depends on this
/// trait rather than on [`TtpState`] directly, so a remote third party can be
/// plugged in behind a wire connection. The interface deliberately carries
/// exactly two proofs and returns at most one identity.
pub trait RevocationAuthority<E: Pairing> {
    fn revoke(&mut self, a: &TransactionProof<E>, b: &TransactionProof<E>) -> RevocationOutcome;
}

pub struct TtpState<E: Pairing> {
    crs: Crs<E>,
    trapdoor: Trapdoor<E>,
    registry: BTreeMap<Vec<u8>, String>,
    bank_identity: String,
    bank_pk: Option<G1<E>>,
}

impl<E: Pairing> TtpState<E> {
    /// Generates fresh system parameters. Registrants whose identity equals
    /// `bank_identity` have their key served to clients as the bank key.
    pub fn new<R: RngCore + ?Sized>(
        params: GroupParams<E>,
        bank_identity: &str,
        rng: &mut R,
    ) -> Self {
        let (crs, trapdoor) = crs::generate(params, rng);
        Self::from_parts(crs, trapdoor, bank_identity)
    }

    /// Rebuilds the party from previously generated parameters.
    pub fn from_parts(crs: Crs<E>, trapdoor: Trapdoor<E>, bank_identity: &str) -> Self {
        Self {
            crs,
            trapdoor,
            registry: BTreeMap::new(),
            bank_identity: bank_identity.to_string(),
            bank_pk: None,
        }
    }

    pub fn crs(&self) -> &Crs<E> {
        &self.crs
    }

    /// The trapdoor never leaves the party on any wire; this accessor exists
    /// for persistence and for test oracles.
    pub fn trapdoor(&self) -> &Trapdoor<E> {
        &self.trapdoor
    }

    pub fn bank_pk(&self) -> Option<G1<E>> {
        self.bank_pk
    }

    /// Registers a legal identity under a public key.
    pub fn register(&mut self, identity: &str, pubkey: G1<E>) -> Result<(), TtpError> {
        if pubkey.is_zero() {
            return Err(TtpError::IdentityKey);
        }
        let key = g1_to_bytes::<E>(&pubkey);
        if self.registry.contains_key(&key) {
            return Err(TtpError::AlreadyRegistered);
        }
        self.registry.insert(key, identity.to_string());
        if identity == self.bank_identity {
            self.bank_pk = Some(pubkey);
        }
        Ok(())
    }

    pub fn lookup(&self, pubkey: &G1<E>) -> Option<&str> {
        self.registry
            .get(&g1_to_bytes::<E>(pubkey))
            .map(String::as_str)
    }

    /// Opens the spender commitments of both proofs with the trapdoor and
    /// compares. Only the keys extracted from these two proofs are examined;
    /// nothing else about the transactions is learned or needed.
    pub fn revoke(&self, a: &TransactionProof<E>, b: &TransactionProof<E>) -> RevocationOutcome {
        let x_a = extract_committed_g1::<E>(&a.c1, &a.c2, &self.trapdoor.alpha);
        let x_b = extract_committed_g1::<E>(&b.c1, &b.c2, &self.trapdoor.alpha);
        if x_a != x_b {
            return RevocationOutcome::NotDoubleSpend;
        }
        match self.lookup(&x_a) {
            Some(identity) => RevocationOutcome::DoubleSpender {
                identity: identity.to_string(),
            },
            None => RevocationOutcome::UnknownKey,
        }
    }
}

impl<E: Pairing> RevocationAuthority<E> for TtpState<E> {
    fn revoke(&mut self, a: &TransactionProof<E>, b: &TransactionProof<E>) -> RevocationOutcome {
        TtpState::revoke(self, a, b)
    }
}
