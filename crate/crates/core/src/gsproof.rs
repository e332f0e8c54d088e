//! The commit-and-prove instance carried by every transaction: a Groth-Sahai
//! proof of `e(X, Y) = T` hiding the spender key `X = g1^x` and the derived
//! `Y = g2^y`, plus the target chain linking consecutive transactions.
//!
//! Commitments and proof elements, with `r` fresh prover randomness, `s` the
//! inverse of `-t_prev`, and `t` chosen by the receiver:
//!
//! ```text
//! c1 = g1^r        d1 = g2^s         theta1 = g1^-t      pi1 = d1^r g2^t
//! c2 = u^r X       d2 = v^s Y        theta2 = X^s u^-t   pi2 = d2^r v^t
//! ```
//!
//! The verifier checks the four pairing equations obtained by expanding the
//! extended bilinear map form elementwise:
//!
//! ```text
//! e(c1,d1) = e(g1,pi1) e(theta1,g2)
//! e(c1,d2) = e(g1,pi2) e(theta1,v)
//! e(c2,d1) = e(u,pi1)  e(theta2,g2)
//! e(c2,d2) = e(u,pi2)  e(theta2,v) T
//! ```
//!
//! The receiver supplies `(g2^t, v^t, g1^-t, u^-t)` and keeps `t` secret, so
//! the spender never controls all of the proof randomness.

use ark_ec::pairing::Pairing;
use ark_ff::Zero;
use ark_std::rand::Rng;
use thiserror::Error;

use crate::crs::Crs;
use crate::error::CodecError;
use crate::pairing::{
    g1_exp, g1_from_bytes, g1_inv, g1_len, g1_mul, g1_to_bytes, g2_exp, g2_from_bytes, g2_len,
    g2_mul, g2_to_bytes, gt_from_bytes, gt_len, gt_to_bytes, gt_to_scalar, nonzero_scalar,
    GroupParams, Gt, Scalar, G1, G2,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProveError {
    #[error("spender key must be nonzero")]
    ZeroKey,
    #[error("randomization elements are inconsistent")]
    MalformedRandomization,
}

/// The receiver-chosen blinding tuple `(g2^t, v^t, g1^-t, u^-t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomizationElements<E: Pairing> {
    pub g2_t: G2<E>,
    pub v_t: G2<E>,
    pub g1_neg_t: G1<E>,
    pub u_neg_t: G1<E>,
}

impl<E: Pairing> RandomizationElements<E> {
    /// Checks that all four elements share one exponent `t` against the CRS:
    ///
    /// ```text
    /// e(g1^-t, g2) e(g1, g2^t) = 1     pins g1_neg_t to g2_t
    /// e(u^-t, g2)  e(u, g2^t)  = 1     pins u_neg_t
    /// e(g1^-t, v)  e(g1, v^t)  = 1     pins v_t
    /// ```
    ///
    /// A spender must reject tuples that fail this; proving with them would
    /// emit a proof nobody can verify.
    pub fn is_consistent(&self, crs: &Crs<E>) -> bool {
        let params = crs.params();
        let id = Gt::<E>::default();
        E::multi_pairing([self.g1_neg_t, params.g1()], [params.g2(), self.g2_t]) == id
            && E::multi_pairing([self.u_neg_t, crs.u], [params.g2(), self.g2_t]) == id
            && E::multi_pairing([self.g1_neg_t, params.g1()], [crs.v, self.v_t]) == id
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(2 * g2_len::<E>() + 2 * g1_len::<E>());
        buf.extend_from_slice(&g2_to_bytes::<E>(&self.g2_t));
        buf.extend_from_slice(&g2_to_bytes::<E>(&self.v_t));
        buf.extend_from_slice(&g1_to_bytes::<E>(&self.g1_neg_t));
        buf.extend_from_slice(&g1_to_bytes::<E>(&self.u_neg_t));
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() != Self::encoded_len() {
            return Err(CodecError::WrongLength {
                expected: Self::encoded_len(),
                got: bytes.len(),
            });
        }
        let (w1, w2) = (g1_len::<E>(), g2_len::<E>());
        let mut pos = 0;
        let g2_t = g2_from_bytes::<E>(&bytes[pos..pos + w2])?;
        pos += w2;
        let v_t = g2_from_bytes::<E>(&bytes[pos..pos + w2])?;
        pos += w2;
        let g1_neg_t = g1_from_bytes::<E>(&bytes[pos..pos + w1])?;
        pos += w1;
        let u_neg_t = g1_from_bytes::<E>(&bytes[pos..pos + w1])?;
        Ok(Self {
            g2_t,
            v_t,
            g1_neg_t,
            u_neg_t,
        })
    }

    pub fn encoded_len() -> usize {
        2 * g2_len::<E>() + 2 * g1_len::<E>()
    }
}

/// The receiver's secret exponent together with the elements derived from it.
#[derive(Clone, Debug)]
pub struct ReceiverSecret<E: Pairing> {
    t: Scalar<E>,
    elements: RandomizationElements<E>,
}

impl<E: Pairing> ReceiverSecret<E> {
    pub fn t(&self) -> Scalar<E> {
        self.t
    }

    pub fn elements(&self) -> &RandomizationElements<E> {
        &self.elements
    }
}

/// One transaction proof: commitments, proof elements and the stored target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransactionProof<E: Pairing> {
    pub c1: G1<E>,
    pub c2: G1<E>,
    pub d1: G2<E>,
    pub d2: G2<E>,
    pub theta1: G1<E>,
    pub theta2: G1<E>,
    pub pi1: G2<E>,
    pub pi2: G2<E>,
    pub target: Gt<E>,
}

/// The eight proof elements before the target is attached.
#[derive(Clone, Copy, Debug)]
pub struct ProofElements<E: Pairing> {
    pub c1: G1<E>,
    pub c2: G1<E>,
    pub d1: G2<E>,
    pub d2: G2<E>,
    pub theta1: G1<E>,
    pub theta2: G1<E>,
    pub pi1: G2<E>,
    pub pi2: G2<E>,
}

impl<E: Pairing> ProofElements<E> {
    pub fn into_proof(self, target: Gt<E>) -> TransactionProof<E> {
        TransactionProof {
            c1: self.c1,
            c2: self.c2,
            d1: self.d1,
            d2: self.d2,
            theta1: self.theta1,
            theta2: self.theta2,
            pi1: self.pi1,
            pi2: self.pi2,
            target,
        }
    }
}

impl<E: Pairing> TransactionProof<E> {
    /// Serialization order: c1, c2, d1, d2, theta1, theta2, pi1, pi2, target.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(Self::encoded_len());
        buf.extend_from_slice(&g1_to_bytes::<E>(&self.c1));
        buf.extend_from_slice(&g1_to_bytes::<E>(&self.c2));
        buf.extend_from_slice(&g2_to_bytes::<E>(&self.d1));
        buf.extend_from_slice(&g2_to_bytes::<E>(&self.d2));
        buf.extend_from_slice(&g1_to_bytes::<E>(&self.theta1));
        buf.extend_from_slice(&g1_to_bytes::<E>(&self.theta2));
        buf.extend_from_slice(&g2_to_bytes::<E>(&self.pi1));
        buf.extend_from_slice(&g2_to_bytes::<E>(&self.pi2));
        buf.extend_from_slice(&gt_to_bytes::<E>(&self.target));
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() != Self::encoded_len() {
            return Err(CodecError::WrongLength {
                expected: Self::encoded_len(),
                got: bytes.len(),
            });
        }
        let (w1, w2) = (g1_len::<E>(), g2_len::<E>());
        let mut pos = 0usize;
        let g1 = |pos: &mut usize| {
            let e = g1_from_bytes::<E>(&bytes[*pos..*pos + w1]);
            *pos += w1;
            e
        };
        let c1 = g1(&mut pos)?;
        let c2 = g1(&mut pos)?;
        let g2 = |pos: &mut usize| {
            let e = g2_from_bytes::<E>(&bytes[*pos..*pos + w2]);
            *pos += w2;
            e
        };
        let d1 = g2(&mut pos)?;
        let d2 = g2(&mut pos)?;
        let theta1 = g1_from_bytes::<E>(&bytes[pos..pos + w1])?;
        pos += w1;
        let theta2 = g1_from_bytes::<E>(&bytes[pos..pos + w1])?;
        pos += w1;
        let pi1 = g2_from_bytes::<E>(&bytes[pos..pos + w2])?;
        pos += w2;
        let pi2 = g2_from_bytes::<E>(&bytes[pos..pos + w2])?;
        pos += w2;
        let target = gt_from_bytes::<E>(&bytes[pos..pos + gt_len::<E>()])?;
        Ok(Self {
            c1,
            c2,
            d1,
            d2,
            theta1,
            theta2,
            pi1,
            pi2,
            target,
        })
    }

    /// 4 G1 + 4 G2 elements plus the stored target.
    pub fn encoded_len() -> usize {
        4 * g1_len::<E>() + 4 * g2_len::<E>() + gt_len::<E>()
    }
}

/// Receiver side of a transaction: draw `t` and derive the blinding tuple.
pub fn derive_randomization<E: Pairing, R: Rng + ?Sized>(
    crs: &Crs<E>,
    rng: &mut R,
) -> ReceiverSecret<E> {
    let params = crs.params();
    let t = nonzero_scalar::<E, R>(rng);
    let neg_t = -t;
    ReceiverSecret {
        t,
        elements: RandomizationElements {
            g2_t: g2_exp::<E>(params.g2(), t),
            v_t: g2_exp::<E>(crs.v, t),
            g1_neg_t: g1_exp::<E>(params.g1(), neg_t),
            u_neg_t: g1_exp::<E>(crs.u, neg_t),
        },
    }
}

/// Spender side: commit to `X = g1^x` and `Y = g2^y` and derive the proof
/// elements from the receiver's randomization tuple. Returns the elements
/// (target still to be attached) and the fresh commitment randomness `r`,
/// which doubles as the signing key for the theta signature.
pub fn prove<E: Pairing, R: Rng + ?Sized>(
    x: &Scalar<E>,
    y: &Scalar<E>,
    s: &Scalar<E>,
    rand_elements: &RandomizationElements<E>,
    crs: &Crs<E>,
    rng: &mut R,
) -> Result<(ProofElements<E>, Scalar<E>), ProveError> {
    if x.is_zero() {
        return Err(ProveError::ZeroKey);
    }
    let params = crs.params();
    let r = nonzero_scalar::<E, R>(rng);
    let big_x = g1_exp::<E>(params.g1(), *x);
    let big_y = g2_exp::<E>(params.g2(), *y);

    let c1 = g1_exp::<E>(params.g1(), r);
    let c2 = g1_mul::<E>(g1_exp::<E>(crs.u, r), big_x);
    let d1 = g2_exp::<E>(params.g2(), *s);
    let d2 = g2_mul::<E>(g2_exp::<E>(crs.v, *s), big_y);

    let theta1 = rand_elements.g1_neg_t;
    let theta2 = g1_mul::<E>(g1_exp::<E>(big_x, *s), rand_elements.u_neg_t);
    let pi1 = g2_mul::<E>(g2_exp::<E>(d1, r), rand_elements.g2_t);
    let pi2 = g2_mul::<E>(g2_exp::<E>(d2, r), rand_elements.v_t);

    Ok((
        ProofElements {
            c1,
            c2,
            d1,
            d2,
            theta1,
            theta2,
            pi1,
            pi2,
        },
        r,
    ))
}

/// Verifies the four pairing equations. Each is checked as one product of
/// pairings against the identity (or the target), which is the elementwise
/// expansion of the extended-map form.
pub fn verify<E: Pairing>(proof: &TransactionProof<E>, crs: &Crs<E>) -> bool {
    let params = crs.params();
    let id = Gt::<E>::default();
    let neg_g1 = g1_inv::<E>(params.g1());
    let neg_u = g1_inv::<E>(crs.u);
    let neg_theta1 = g1_inv::<E>(proof.theta1);
    let neg_theta2 = g1_inv::<E>(proof.theta2);

    E::multi_pairing(
        [proof.c1, neg_g1, neg_theta1],
        [proof.d1, proof.pi1, params.g2()],
    ) == id
        && E::multi_pairing([proof.c1, neg_g1, neg_theta1], [proof.d2, proof.pi2, crs.v]) == id
        && E::multi_pairing(
            [proof.c2, neg_u, neg_theta2],
            [proof.d1, proof.pi1, params.g2()],
        ) == id
        && E::multi_pairing([proof.c2, neg_u, neg_theta2], [proof.d2, proof.pi2, crs.v])
            == proof.target
}

/// Target of a euro's first transaction: `T_0 = e(g1, g2)^sigma`.
pub fn initial_target<E: Pairing>(sigma: &Scalar<E>, params: &GroupParams<E>) -> Gt<E> {
    params.gt_generator() * sigma
}

/// Target of every later transaction: `T_i = e(g1, g2)^embed(T_i-1)`.
pub fn next_target<E: Pairing>(prev: &Gt<E>, params: &GroupParams<E>) -> Gt<E> {
    params.gt_generator() * gt_to_scalar::<E>(prev)
}

/// Link check between consecutive proofs: the target chain must continue and
/// `e(theta1_prev, d1_cur) = e(g1, g2)`, i.e. the spender used
/// `s = (-t_prev)^-1` and therefore knew the previous `t`.
pub fn verify_link<E: Pairing>(
    prev: &TransactionProof<E>,
    cur: &TransactionProof<E>,
    params: &GroupParams<E>,
) -> bool {
    cur.target == next_target::<E>(&prev.target, params)
        && E::pairing(prev.theta1, cur.d1) == params.gt_generator()
}
