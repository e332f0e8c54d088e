//! The digital euro itself: the withdrawn token, the transfer bundle exchanged
//! between spender and receiver, full-chain verification, serialization and
//! size accounting.
//!
//! A euro is `(SN, theta1_w, bank signature, ordered proof list)` and grows by
//! one transaction proof per transfer. Verification walks the whole chain:
//! bank signature, every proof, every link, and the bundle-local checks tying
//! the newest proof to this receiver's own randomness.

use ark_ec::pairing::Pairing;
use ark_ff::Field;
use ark_std::rand::Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crs::Crs;
use crate::error::CodecError;
use crate::gsproof::{
    self, initial_target, next_target, verify_link, RandomizationElements, ReceiverSecret,
    TransactionProof,
};
use crate::pairing::{
    self, domain, g1_exp, g1_from_bytes, g1_len, g1_to_bytes, g2_exp, g2_from_bytes, g2_len,
    g2_mul, g2_to_bytes, gt_len, gt_to_scalar, GroupParams, Scalar, G1, G2,
};
use crate::schnorr::{self, KeyPair, Signature};

/// Serial numbers are 32 random bytes; uniqueness of the pair with `theta1_w`
/// is what matters, not the serial alone.
pub const SERIAL_NUMBER_LEN: usize = 32;

/// Why a received bundle was rejected. Every check has its own reason so
/// adversarial tests can assert the precise failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RejectReason {
    #[error("transfer bundle carries no proofs")]
    EmptyProofChain,
    #[error("bank signature does not verify")]
    BadBankSig,
    #[error("proof {0} fails verification")]
    BadProof(usize),
    #[error("link into proof {0} is broken")]
    BrokenLink(usize),
    #[error("last proof was not built from this receiver's randomization")]
    ForeignRandomization,
    #[error("d2 is not the product of v^s and Y")]
    BadD2,
    #[error("theta signature of the current transaction does not verify")]
    BadThetaSig,
    #[error("theta signature of the previous transaction does not verify")]
    BadPrevThetaSig,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpendError {
    #[error("wallet entry already spent")]
    AlreadySpent,
    #[error("randomization elements are inconsistent")]
    MalformedRandomization,
    #[error(transparent)]
    Prove(#[from] gsproof::ProveError),
}

/// The token: serial number, withdrawal randomizer, the bank's blind
/// signature over both, and one proof per transaction so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitalEuro<E: Pairing> {
    pub serial_number: [u8; SERIAL_NUMBER_LEN],
    pub theta1_w: G1<E>,
    pub bank_sig: Signature<E>,
    pub proofs: Vec<TransactionProof<E>>,
}

/// Everything the spender hands over in one transfer: the euro with the new
/// proof already appended, the commitment openers `Y = g2^y` and `v^s`, the
/// theta signature received in the previous transaction (absent on the first
/// transfer) and the theta signature of the current one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferBundle<E: Pairing> {
    pub euro: DigitalEuro<E>,
    pub y_commit: G2<E>,
    pub vs_commit: G2<E>,
    pub prev_theta_sig: Option<Signature<E>>,
    pub cur_theta_sig: Signature<E>,
}

/// A euro at rest in a wallet, together with the spend secrets of its holder.
#[derive(Clone, Debug)]
pub struct WalletEntry<E: Pairing> {
    pub euro: DigitalEuro<E>,
    t_secret: Scalar<E>,
    r_used: Option<Scalar<E>>,
    theta_sig_held: Option<Signature<E>>,
    spent: bool,
}

impl<E: Pairing> WalletEntry<E> {
    pub fn t_secret(&self) -> Scalar<E> {
        self.t_secret
    }

    pub fn theta_sig_held(&self) -> Option<&Signature<E>> {
        self.theta_sig_held.as_ref()
    }

    pub fn is_spent(&self) -> bool {
        self.spent
    }

    pub fn r_used(&self) -> Option<Scalar<E>> {
        self.r_used
    }
}

/// A built transfer that has not yet been committed to the wallet. The wallet
/// entry is only marked spent once the receiver acknowledged the payload, so
/// an aborted session leaves the wallet unchanged.
#[derive(Clone, Debug)]
pub struct PreparedSpend<E: Pairing> {
    pub bundle: TransferBundle<E>,
    r: Scalar<E>,
}

impl<E: Pairing> PreparedSpend<E> {
    /// Marks the entry spent and records the commitment randomness. The entry
    /// keeps the euro as it was received; the extended euro travels in the
    /// bundle.
    pub fn commit(self, entry: &mut WalletEntry<E>) {
        entry.spent = true;
        entry.r_used = Some(self.r);
    }
}

/// Withdrawal-side material: the serial number, the secret `t0` behind
/// `theta1_w = g1^-t0`, and the message the bank signs blindly.
#[derive(Clone, Debug)]
pub struct WithdrawalPrep<E: Pairing> {
    pub serial_number: [u8; SERIAL_NUMBER_LEN],
    t0: Scalar<E>,
    pub theta1_w: G1<E>,
    pub message: Vec<u8>,
}

impl<E: Pairing> WithdrawalPrep<E> {
    pub fn t0(&self) -> Scalar<E> {
        self.t0
    }

    /// Assembles the withdrawn euro once the blind signature is unblinded.
    /// Fails if the signature does not verify under the bank key.
    pub fn into_wallet_entry(
        self,
        bank_sig: Signature<E>,
        bank_pk: &G1<E>,
        params: &GroupParams<E>,
    ) -> Result<WalletEntry<E>, RejectReason> {
        if !schnorr::verify(
            domain::WITHDRAW_MSG,
            &self.message,
            &bank_sig,
            bank_pk,
            params,
        ) {
            return Err(RejectReason::BadBankSig);
        }
        Ok(WalletEntry {
            euro: DigitalEuro {
                serial_number: self.serial_number,
                theta1_w: self.theta1_w,
                bank_sig,
                proofs: Vec::new(),
            },
            t_secret: self.t0,
            r_used: None,
            theta_sig_held: None,
            spent: false,
        })
    }
}

/// The blindly signed withdrawal message: serial number followed by the
/// canonical bytes of `theta1_w`.
pub fn withdraw_message<E: Pairing>(
    serial_number: &[u8; SERIAL_NUMBER_LEN],
    theta1_w: &G1<E>,
) -> Vec<u8> {
    let mut msg = Vec::with_capacity(SERIAL_NUMBER_LEN + g1_len::<E>());
    msg.extend_from_slice(serial_number);
    msg.extend_from_slice(&g1_to_bytes::<E>(theta1_w));
    msg
}

/// The message under a theta signature: the canonical bytes of the signed
/// randomization element `g1^-t`.
pub fn theta_message<E: Pairing>(theta1: &G1<E>) -> Vec<u8> {
    g1_to_bytes::<E>(theta1)
}

/// Draws the serial number and withdrawal randomizer for a fresh euro.
pub fn withdrawal_prepare<E: Pairing, R: Rng + ?Sized>(
    params: &GroupParams<E>,
    rng: &mut R,
) -> WithdrawalPrep<E> {
    let mut serial_number = [0u8; SERIAL_NUMBER_LEN];
    rng.fill_bytes(&mut serial_number);
    let t0 = pairing::nonzero_scalar::<E, R>(rng);
    let theta1_w = g1_exp::<E>(params.g1(), -t0);
    let message = withdraw_message::<E>(&serial_number, &theta1_w);
    WithdrawalPrep {
        serial_number,
        t0,
        theta1_w,
        message,
    }
}

/// Builds the transfer bundle for spending `entry` towards the receiver who
/// supplied `rand_elements`. Refuses already-spent entries; see
/// [`double_spend`] for the detection experiments.
pub fn spend<E: Pairing, R: Rng + ?Sized>(
    entry: &WalletEntry<E>,
    keys: &KeyPair<E>,
    rand_elements: &RandomizationElements<E>,
    crs: &Crs<E>,
    rng: &mut R,
) -> Result<PreparedSpend<E>, SpendError> {
    if entry.spent {
        return Err(SpendError::AlreadySpent);
    }
    build_transfer(entry, keys, rand_elements, crs, rng)
}

/// Spends an entry regardless of its spent flag. This is the dishonest-wallet
/// path that the double-spend scenarios exercise; the protocol's job is to
/// catch it at deposit time.
pub fn double_spend<E: Pairing, R: Rng + ?Sized>(
    entry: &WalletEntry<E>,
    keys: &KeyPair<E>,
    rand_elements: &RandomizationElements<E>,
    crs: &Crs<E>,
    rng: &mut R,
) -> Result<PreparedSpend<E>, SpendError> {
    build_transfer(entry, keys, rand_elements, crs, rng)
}

fn build_transfer<E: Pairing, R: Rng + ?Sized>(
    entry: &WalletEntry<E>,
    keys: &KeyPair<E>,
    rand_elements: &RandomizationElements<E>,
    crs: &Crs<E>,
    rng: &mut R,
) -> Result<PreparedSpend<E>, SpendError> {
    if !rand_elements.is_consistent(crs) {
        return Err(SpendError::MalformedRandomization);
    }
    let params = crs.params();
    let euro = &entry.euro;

    // k = sigma on the first transaction, the embedded previous target after.
    let (k, target) = match euro.proofs.last() {
        None => (
            euro.bank_sig.sigma,
            initial_target::<E>(&euro.bank_sig.sigma, params),
        ),
        Some(prev) => (
            gt_to_scalar::<E>(&prev.target),
            next_target::<E>(&prev.target, params),
        ),
    };
    let x = keys.secret();
    let y = k * x.inverse().expect("keygen forbids zero keys");
    let s = (-entry.t_secret)
        .inverse()
        .expect("receiver randomness is nonzero");

    let (elements, r) = gsproof::prove(&x, &y, &s, rand_elements, crs, rng)?;
    let proof = elements.into_proof(target);

    let cur_theta_sig = schnorr::sign(
        domain::THETA_SIG,
        &theta_message::<E>(&rand_elements.g1_neg_t),
        &r,
        params,
        rng,
    );

    let mut spent_euro = euro.clone();
    spent_euro.proofs.push(proof);

    Ok(PreparedSpend {
        bundle: TransferBundle {
            euro: spent_euro,
            y_commit: g2_exp::<E>(params.g2(), y),
            vs_commit: g2_exp::<E>(crs.v, s),
            prev_theta_sig: entry.theta_sig_held,
            cur_theta_sig,
        },
        r,
    })
}

/// Full receiver-side verification of a transfer bundle. On success the euro
/// enters the receiver's wallet along with the secrets needed to spend it on.
pub fn receive_verify<E: Pairing>(
    bundle: &TransferBundle<E>,
    secret: &ReceiverSecret<E>,
    crs: &Crs<E>,
    bank_pk: &G1<E>,
) -> Result<WalletEntry<E>, RejectReason> {
    let params = crs.params();
    let euro = &bundle.euro;
    let n = euro.proofs.len();
    if n == 0 {
        return Err(RejectReason::EmptyProofChain);
    }

    // (a) The bank signed SN || theta1_w.
    let msg = withdraw_message::<E>(&euro.serial_number, &euro.theta1_w);
    if !schnorr::verify(domain::WITHDRAW_MSG, &msg, &euro.bank_sig, bank_pk, params) {
        return Err(RejectReason::BadBankSig);
    }

    // (b) Every proof satisfies the pairing equations.
    for (i, proof) in euro.proofs.iter().enumerate() {
        if !gsproof::verify(proof, crs) {
            return Err(RejectReason::BadProof(i));
        }
    }

    // (c) The first proof links to the withdrawal: target chain starts at
    // e(g1,g2)^sigma and the withdrawal randomizer was consumed.
    let first = &euro.proofs[0];
    if first.target != initial_target::<E>(&euro.bank_sig.sigma, params)
        || E::pairing(euro.theta1_w, first.d1) != params.gt_generator()
    {
        return Err(RejectReason::BrokenLink(0));
    }

    // (d) Consecutive proofs chain together.
    for i in 1..n {
        if !verify_link(&euro.proofs[i - 1], &euro.proofs[i], params) {
            return Err(RejectReason::BrokenLink(i));
        }
    }

    // (e) The newest proof was built from this receiver's own randomness.
    let last = &euro.proofs[n - 1];
    if last.theta1 != secret.elements().g1_neg_t {
        return Err(RejectReason::ForeignRandomization);
    }

    // (f) d2 opens as v^s * Y.
    if last.d2 != g2_mul::<E>(bundle.vs_commit, bundle.y_commit) {
        return Err(RejectReason::BadD2);
    }

    // (g) The spender signed this transaction's randomization element under
    // the proof randomness r (public key c1 = g1^r).
    if !schnorr::verify(
        domain::THETA_SIG,
        &theta_message::<E>(&last.theta1),
        &bundle.cur_theta_sig,
        &last.c1,
        params,
    ) {
        return Err(RejectReason::BadThetaSig);
    }

    // (h) For a second-or-later transfer, the spender must also present the
    // theta signature they received in the previous transaction.
    if n >= 2 {
        let prev = &euro.proofs[n - 2];
        let valid = bundle.prev_theta_sig.as_ref().is_some_and(|sig| {
            schnorr::verify(
                domain::THETA_SIG,
                &theta_message::<E>(&prev.theta1),
                sig,
                &prev.c1,
                params,
            )
        });
        if !valid {
            return Err(RejectReason::BadPrevThetaSig);
        }
    } else if bundle.prev_theta_sig.is_some() {
        // The first transfer is authenticated by the bank signature alone.
        return Err(RejectReason::BadPrevThetaSig);
    }

    Ok(WalletEntry {
        euro: euro.clone(),
        t_secret: secret.t(),
        r_used: None,
        theta_sig_held: Some(bundle.cur_theta_sig),
        spent: false,
    })
}

impl<E: Pairing> DigitalEuro<E> {
    /// Wire layout: SN || theta1_w || sigma || c || count (u32 BE) || proofs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(Self::encoded_len(self.proofs.len()));
        buf.extend_from_slice(&self.serial_number);
        buf.extend_from_slice(&g1_to_bytes::<E>(&self.theta1_w));
        buf.extend_from_slice(&self.bank_sig.to_bytes());
        buf.extend_from_slice(&(self.proofs.len() as u32).to_be_bytes());
        for proof in &self.proofs {
            buf.extend_from_slice(&proof.to_bytes());
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let header = SERIAL_NUMBER_LEN + g1_len::<E>() + Signature::<E>::encoded_len() + 4;
        if bytes.len() < header {
            return Err(CodecError::Truncated);
        }
        let mut pos = 0usize;
        let mut serial_number = [0u8; SERIAL_NUMBER_LEN];
        serial_number.copy_from_slice(&bytes[..SERIAL_NUMBER_LEN]);
        pos += SERIAL_NUMBER_LEN;
        let theta1_w = g1_from_bytes::<E>(&bytes[pos..pos + g1_len::<E>()])?;
        pos += g1_len::<E>();
        let sig_len = Signature::<E>::encoded_len();
        let bank_sig = Signature::<E>::from_bytes(&bytes[pos..pos + sig_len])?;
        pos += sig_len;
        let count = u32::from_be_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        pos += 4;
        let entry = TransactionProof::<E>::encoded_len();
        let expected = pos + count * entry;
        if bytes.len() < expected {
            return Err(CodecError::Truncated);
        }
        if bytes.len() > expected {
            return Err(CodecError::TrailingBytes);
        }
        let mut proofs = Vec::with_capacity(count);
        for _ in 0..count {
            proofs.push(TransactionProof::<E>::from_bytes(&bytes[pos..pos + entry])?);
            pos += entry;
        }
        Ok(Self {
            serial_number,
            theta1_w,
            bank_sig,
            proofs,
        })
    }

    /// Exact serialized size for a chain of `n` proofs.
    pub fn encoded_len(n: usize) -> usize {
        SERIAL_NUMBER_LEN
            + g1_len::<E>()
            + Signature::<E>::encoded_len()
            + 4
            + n * TransactionProof::<E>::encoded_len()
    }

    /// Ledger deduplication key: a hash over SN, theta1_w and the bank
    /// signature, so distinct euros never collide on the signature scalar
    /// alone.
    pub fn dedup_key(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(domain::DEPOSIT_KEY);
        hasher.update(self.serial_number);
        hasher.update(g1_to_bytes::<E>(&self.theta1_w));
        hasher.update(self.bank_sig.to_bytes());
        hasher.finalize().into()
    }
}

impl<E: Pairing> TransferBundle<E> {
    /// Euro bytes, then `Y`, `v^s`, a presence flag plus the previous theta
    /// signature, and the current theta signature.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = self.euro.to_bytes();
        buf.extend_from_slice(&g2_to_bytes::<E>(&self.y_commit));
        buf.extend_from_slice(&g2_to_bytes::<E>(&self.vs_commit));
        match &self.prev_theta_sig {
            Some(sig) => {
                buf.push(1);
                buf.extend_from_slice(&sig.to_bytes());
            }
            None => buf.push(0),
        }
        buf.extend_from_slice(&self.cur_theta_sig.to_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let sig_len = Signature::<E>::encoded_len();
        let tail_min = 2 * g2_len::<E>() + 1 + sig_len;
        if bytes.len() < tail_min {
            return Err(CodecError::Truncated);
        }
        // The euro length is self-describing; probe the proof count.
        let header = SERIAL_NUMBER_LEN + g1_len::<E>() + sig_len;
        if bytes.len() < header + 4 {
            return Err(CodecError::Truncated);
        }
        let count = u32::from_be_bytes(bytes[header..header + 4].try_into().unwrap()) as usize;
        let euro_len = DigitalEuro::<E>::encoded_len(count);
        if bytes.len() < euro_len + tail_min {
            return Err(CodecError::Truncated);
        }
        let euro = DigitalEuro::<E>::from_bytes(&bytes[..euro_len])?;
        let mut pos = euro_len;
        let y_commit = g2_from_bytes::<E>(&bytes[pos..pos + g2_len::<E>()])?;
        pos += g2_len::<E>();
        let vs_commit = g2_from_bytes::<E>(&bytes[pos..pos + g2_len::<E>()])?;
        pos += g2_len::<E>();
        let flag = bytes[pos];
        pos += 1;
        let prev_theta_sig = match flag {
            0 => None,
            1 => {
                if bytes.len() < pos + sig_len {
                    return Err(CodecError::Truncated);
                }
                let sig = Signature::<E>::from_bytes(&bytes[pos..pos + sig_len])?;
                pos += sig_len;
                Some(sig)
            }
            _ => return Err(CodecError::InvalidElement { group: "flag" }),
        };
        if bytes.len() < pos + sig_len {
            return Err(CodecError::Truncated);
        }
        let cur_theta_sig = Signature::<E>::from_bytes(&bytes[pos..pos + sig_len])?;
        pos += sig_len;
        if pos != bytes.len() {
            return Err(CodecError::TrailingBytes);
        }
        Ok(Self {
            euro,
            y_commit,
            vs_commit,
            prev_theta_sig,
            cur_theta_sig,
        })
    }
}

/// Per-backend element sizes feeding the size prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeModel {
    pub sn_len: usize,
    pub g1_len: usize,
    pub g2_len: usize,
    pub gt_len: usize,
    pub sig_len: usize,
}

impl SizeModel {
    pub fn for_backend<E: Pairing>() -> Self {
        Self {
            sn_len: SERIAL_NUMBER_LEN,
            g1_len: g1_len::<E>(),
            g2_len: g2_len::<E>(),
            gt_len: gt_len::<E>(),
            sig_len: Signature::<E>::encoded_len(),
        }
    }

    /// Size of a single proof entry under the stored-target layout:
    /// `4|G1| + 4|G2| + |GT|`.
    pub fn proof_len(&self) -> usize {
        4 * self.g1_len + 4 * self.g2_len + self.gt_len
    }
}

/// Predicted serialized euro size after `n` transactions:
/// `|SN| + |G1| + |sig| + n * (4|G1| + 4|G2| + |GT|)`.
pub fn predicted_size(n: usize, model: &SizeModel) -> usize {
    model.sn_len + model.g1_len + model.sig_len + n * model.proof_len()
}
