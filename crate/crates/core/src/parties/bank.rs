//! The bank: blind-signs withdrawals, receives deposits (a deposit is a
//! transfer with the bank as receiver), and detects double spending by
//! comparing the proof lists of euros that share a deduplication key.

use std::collections::BTreeMap;

use ark_ec::pairing::Pairing;
use ark_std::rand::RngCore;
use thiserror::Error;

use crate::crs::Crs;
use crate::gsproof::{derive_randomization, RandomizationElements, ReceiverSecret};
use crate::pairing::{g1_to_bytes, GroupParams, Scalar, G1};
use crate::schnorr::{blind_round1_signer, blind_round3_signer, keygen, KeyPair, SignerNonce};
use crate::token::{receive_verify, DigitalEuro, RejectReason, TransferBundle};

use super::{find_divergence, RevocationAuthority, RevocationOutcome};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BankError {
    #[error("user is not registered with the bank")]
    NotRegistered,
    #[error("public key already registered under a different identity")]
    IdentityMismatch,
    #[error("no open session for this user")]
    NoSession,
}

/// Verdict of a deposit attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DepositOutcome {
    Accepted,
    /// Detection fired; the named identity is the double spender.
    DoubleSpend {
        identity: String,
    },
    Rejected {
        reason: DepositRejection,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DepositRejection {
    #[error("bundle failed verification: {0}")]
    Verification(RejectReason),
    #[error("no deposit session open for this user")]
    NoPendingSession,
    #[error("depositor is not registered")]
    NotRegistered,
    #[error("revocation anomaly: {0}")]
    RevocationAnomaly(String),
}

struct DepositRecord<E: Pairing> {
    euro: DigitalEuro<E>,
    depositor_identity: String,
}

pub struct BankState<E: Pairing> {
    keys: KeyPair<E>,
    registered: BTreeMap<Vec<u8>, String>,
    withdraw_sessions: BTreeMap<Vec<u8>, SignerNonce<E>>,
    deposit_sessions: BTreeMap<Vec<u8>, ReceiverSecret<E>>,
    ledger: BTreeMap<[u8; 32], Vec<DepositRecord<E>>>,
    anomalies: Vec<String>,
}

impl<E: Pairing> BankState<E> {
    pub fn new<R: RngCore + ?Sized>(params: &GroupParams<E>, rng: &mut R) -> Self {
        Self::with_keys(keygen(params, rng))
    }

    pub fn with_keys(keys: KeyPair<E>) -> Self {
        Self {
            keys,
            registered: BTreeMap::new(),
            withdraw_sessions: BTreeMap::new(),
            deposit_sessions: BTreeMap::new(),
            ledger: BTreeMap::new(),
            anomalies: Vec::new(),
        }
    }

    pub fn pk(&self) -> G1<E> {
        self.keys.pk
    }

    pub fn keys(&self) -> &KeyPair<E> {
        &self.keys
    }

    /// Records (or re-confirms) an account holder. Idempotent for a matching
    /// identity; a key may not change identity.
    pub fn register(&mut self, identity: &str, pubkey: &G1<E>) -> Result<(), BankError> {
        let key = g1_to_bytes::<E>(pubkey);
        match self.registered.get(&key) {
            Some(existing) if existing != identity => Err(BankError::IdentityMismatch),
            _ => {
                self.registered.insert(key, identity.to_string());
                Ok(())
            }
        }
    }

    pub fn is_registered(&self, pubkey: &G1<E>) -> bool {
        self.registered.contains_key(&g1_to_bytes::<E>(pubkey))
    }

    /// Withdrawal round 1: issue a fresh signing nonce for a registered user.
    /// A second request for the same user replaces (aborts) the open session.
    pub fn withdraw_round1<R: RngCore + ?Sized>(
        &mut self,
        user_pk: &G1<E>,
        params: &GroupParams<E>,
        rng: &mut R,
    ) -> Result<G1<E>, BankError> {
        if !self.is_registered(user_pk) {
            return Err(BankError::NotRegistered);
        }
        let nonce = blind_round1_signer(params, rng);
        let r = nonce.r;
        self.withdraw_sessions
            .insert(g1_to_bytes::<E>(user_pk), nonce);
        Ok(r)
    }

    /// Withdrawal round 3: sign the blinded challenge. The nonce is consumed;
    /// a replayed challenge finds no session.
    pub fn withdraw_round3(
        &mut self,
        user_pk: &G1<E>,
        c_prime: &Scalar<E>,
    ) -> Result<Scalar<E>, BankError> {
        let nonce = self
            .withdraw_sessions
            .remove(&g1_to_bytes::<E>(user_pk))
            .ok_or(BankError::NoSession)?;
        Ok(blind_round3_signer(nonce, c_prime, &self.keys.secret()))
    }

    /// Opens a deposit: the bank, as receiver, draws the randomization
    /// elements for this depositor's transfer.
    pub fn begin_deposit<R: RngCore + ?Sized>(
        &mut self,
        depositor_pk: &G1<E>,
        crs: &Crs<E>,
        rng: &mut R,
    ) -> Result<RandomizationElements<E>, BankError> {
        if !self.is_registered(depositor_pk) {
            return Err(BankError::NotRegistered);
        }
        let secret = derive_randomization(crs, rng);
        let elements = *secret.elements();
        self.deposit_sessions
            .insert(g1_to_bytes::<E>(depositor_pk), secret);
        Ok(elements)
    }

    /// Verifies the deposited bundle and runs double-spend detection against
    /// the ledger. `ttp` is consulted only when two deposits of one euro carry
    /// diverging proof lists.
    pub fn complete_deposit(
        &mut self,
        depositor_pk: &G1<E>,
        bundle: &TransferBundle<E>,
        crs: &Crs<E>,
        ttp: &mut dyn RevocationAuthority<E>,
    ) -> DepositOutcome {
        let pk_bytes = g1_to_bytes::<E>(depositor_pk);
        let depositor_identity = match self.registered.get(&pk_bytes) {
            Some(identity) => identity.clone(),
            None => {
                return DepositOutcome::Rejected {
                    reason: DepositRejection::NotRegistered,
                }
            }
        };
        let secret = match self.deposit_sessions.remove(&pk_bytes) {
            Some(secret) => secret,
            None => {
                return DepositOutcome::Rejected {
                    reason: DepositRejection::NoPendingSession,
                }
            }
        };
        if let Err(reason) = receive_verify(bundle, &secret, crs, &self.keys.pk) {
            return DepositOutcome::Rejected {
                reason: DepositRejection::Verification(reason),
            };
        }

        let key = bundle.euro.dedup_key();
        let (outcome, anomaly) = match self.ledger.get(&key) {
            None => (DepositOutcome::Accepted, None),
            Some(records) => Self::detect(&records[0], &bundle.euro, &depositor_identity, ttp),
        };
        if let Some(note) = anomaly {
            self.anomalies.push(note);
        }
        self.ledger.entry(key).or_default().push(DepositRecord {
            euro: bundle.euro.clone(),
            depositor_identity,
        });
        outcome
    }

    /// Double-spend detection between a previously deposited euro and a new
    /// arrival with the same deduplication key. Returns the verdict plus an
    /// anomaly note for the log when attribution is impossible.
    fn detect(
        prior: &DepositRecord<E>,
        euro: &DigitalEuro<E>,
        depositor_identity: &str,
        ttp: &mut dyn RevocationAuthority<E>,
    ) -> (DepositOutcome, Option<String>) {
        // Each deposit's own final proof is the bank-facing one; the chains
        // the holders actually shared are the prefixes before it.
        let prior_prefix = &prior.euro.proofs[..prior.euro.proofs.len() - 1];
        let new_prefix = &euro.proofs[..euro.proofs.len() - 1];

        if prior_prefix == new_prefix && prior.depositor_identity == depositor_identity {
            // Same user deposited the same euro twice: the deposit identity
            // already names the double spender, no third party needed.
            return (
                DepositOutcome::DoubleSpend {
                    identity: depositor_identity.to_string(),
                },
                None,
            );
        }

        let divergence = match find_divergence::<E>(&prior.euro.proofs, &euro.proofs) {
            Some(i) => i,
            None => {
                // Byte-identical deposits cannot arise from two honest bank
                // sessions; refuse without naming anyone.
                let note = "identical proof lists on two deposits".to_string();
                return (
                    DepositOutcome::Rejected {
                        reason: DepositRejection::RevocationAnomaly(note.clone()),
                    },
                    Some(note),
                );
            }
        };
        if divergence >= prior.euro.proofs.len() || divergence >= euro.proofs.len() {
            // One list is a prefix of the other; there is no proof pair to
            // hand to the third party.
            let note = format!("proof list is a prefix of a prior deposit at {divergence}");
            return (
                DepositOutcome::Rejected {
                    reason: DepositRejection::RevocationAnomaly(note.clone()),
                },
                Some(note),
            );
        }

        match ttp.revoke(&prior.euro.proofs[divergence], &euro.proofs[divergence]) {
            RevocationOutcome::DoubleSpender { identity } => {
                (DepositOutcome::DoubleSpend { identity }, None)
            }
            RevocationOutcome::UnknownKey => {
                let note = format!("revocation at index {divergence} hit an unregistered key");
                (
                    DepositOutcome::Rejected {
                        reason: DepositRejection::RevocationAnomaly(note.clone()),
                    },
                    Some(note),
                )
            }
            RevocationOutcome::NotDoubleSpend => {
                let note =
                    format!("proofs diverge at index {divergence} but commit different spenders");
                (
                    DepositOutcome::Rejected {
                        reason: DepositRejection::RevocationAnomaly(note.clone()),
                    },
                    Some(note),
                )
            }
        }
    }

    /// Number of euro instances deposited so far (duplicates included).
    pub fn deposited_count(&self) -> usize {
        self.ledger.values().map(Vec::len).sum()
    }

    pub fn anomalies(&self) -> &[String] {
        &self.anomalies
    }
}
