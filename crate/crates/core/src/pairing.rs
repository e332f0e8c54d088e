//! Bilinear-group abstraction: two source groups, a target group, scalars
//! modulo the group order, the pairing map and its 2x2 extension, hashing into
//! the scalar field, and canonical fixed-width element encodings.
//!
//! All protocol code is generic over an [`ark_ec::pairing::Pairing`] backend;
//! [`bls12_381_params`] supplies the bundled default.

use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{BigInteger, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use ark_std::rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::CodecError;

/// Scalar in `[0, p)` where `p` is the order of the pairing groups.
pub type Scalar<E> = <E as Pairing>::ScalarField;
/// Element of the first source group.
pub type G1<E> = <E as Pairing>::G1Affine;
/// Element of the second source group.
pub type G2<E> = <E as Pairing>::G2Affine;
/// Element of the target group.
pub type Gt<E> = PairingOutput<E>;

/// Domain tags prepended to hash inputs so the same hash serves several
/// contexts without cross-protocol collisions.
pub mod domain {
    /// Schnorr challenge over a withdrawal message (SN || theta1 bytes).
    pub const WITHDRAW_MSG: &[u8] = b"oe/withdraw-msg/v1";
    /// Schnorr challenge over a transaction randomization element.
    pub const THETA_SIG: &[u8] = b"oe/theta-sig/v1";
    /// Embedding of a target-group element into the exponent ring.
    pub const GT_EMBED: &[u8] = b"oe/gt-embed/v1";
    /// Deposit ledger deduplication key.
    pub const DEPOSIT_KEY: &[u8] = b"oe/deposit-key/v1";
}

/// Description of a bilinear pairing setting: the two source-group generators,
/// the (cached) target-group generator `e(g1, g2)`, and a short identifier
/// naming the backend on the wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams<E: Pairing> {
    id: String,
    symmetric: bool,
    g1: G1<E>,
    g2: G2<E>,
    gt: Gt<E>,
}

impl<E: Pairing> GroupParams<E> {
    /// Builds the parameter set from the backend's fixed generators.
    ///
    /// `symmetric` records whether G1 and G2 are the same group; none of the
    /// arkworks backends are, but the protocol itself does not care.
    pub fn new(id: impl Into<String>, symmetric: bool) -> Self {
        let g1 = G1::<E>::generator();
        let g2 = G2::<E>::generator();
        let gt = E::pairing(g1, g2);
        Self {
            id: id.into(),
            symmetric,
            g1,
            g2,
            gt,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn g1(&self) -> G1<E> {
        self.g1
    }

    pub fn g2(&self) -> G2<E> {
        self.g2
    }

    /// `e(g1, g2)`, the generator of the target group.
    pub fn gt_generator(&self) -> Gt<E> {
        self.gt
    }

    /// Bit length of the group order.
    pub fn order_bits(&self) -> u32 {
        Scalar::<E>::MODULUS_BIT_SIZE
    }
}

/// The bundled default backend.
pub fn bls12_381_params() -> GroupParams<ark_bls12_381::Bls12_381> {
    GroupParams::new("bls12-381", false)
}

/// The bilinear map `e: G1 x G2 -> GT`.
pub fn pair<E: Pairing>(a: G1<E>, b: G2<E>) -> Gt<E> {
    E::pairing(a, b)
}

/// The extended bilinear map: entry `(i, j)` is `e(col_i, row_j)`.
pub fn extended_pair<E: Pairing>(col: (G1<E>, G1<E>), row: (G2<E>, G2<E>)) -> [[Gt<E>; 2]; 2] {
    [
        [E::pairing(col.0, row.0), E::pairing(col.0, row.1)],
        [E::pairing(col.1, row.0), E::pairing(col.1, row.1)],
    ]
}

/// Hashes arbitrary bytes to a scalar: SHA-256, reduced modulo the group order.
pub fn hash_to_scalar<E: Pairing>(message: &[u8]) -> Scalar<E> {
    let digest = Sha256::digest(message);
    Scalar::<E>::from_be_bytes_mod_order(&digest)
}

/// Deterministically embeds a target-group element into the exponent ring by
/// hashing its canonical encoding under a dedicated domain tag.
pub fn gt_to_scalar<E: Pairing>(t: &Gt<E>) -> Scalar<E> {
    let mut buf = Vec::with_capacity(domain::GT_EMBED.len() + gt_len::<E>());
    buf.extend_from_slice(domain::GT_EMBED);
    buf.extend_from_slice(&gt_to_bytes(t));
    hash_to_scalar::<E>(&buf)
}

/// Draws a uniformly random nonzero scalar.
pub fn nonzero_scalar<E: Pairing, R: Rng + ?Sized>(rng: &mut R) -> Scalar<E> {
    loop {
        let s = Scalar::<E>::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

/// `base^k` written multiplicatively, i.e. scalar multiplication.
pub fn g1_exp<E: Pairing>(base: G1<E>, k: Scalar<E>) -> G1<E> {
    (base * k).into_affine()
}

pub fn g2_exp<E: Pairing>(base: G2<E>, k: Scalar<E>) -> G2<E> {
    (base * k).into_affine()
}

/// Group operation in G1 (product in multiplicative notation).
pub fn g1_mul<E: Pairing>(a: G1<E>, b: G1<E>) -> G1<E> {
    (a + b).into_affine()
}

pub fn g2_mul<E: Pairing>(a: G2<E>, b: G2<E>) -> G2<E> {
    (a + b).into_affine()
}

/// Inverse in G1 (point negation).
pub fn g1_inv<E: Pairing>(a: G1<E>) -> G1<E> {
    (-a.into_group()).into_affine()
}

pub fn g2_inv<E: Pairing>(a: G2<E>) -> G2<E> {
    (-a.into_group()).into_affine()
}

// ---- canonical encodings -------------------------------------------------
//
// Group elements use the backend's compressed canonical form; scalars are
// fixed-width big-endian integers of ceil(bits(p)/8) bytes. Every encoding is
// fixed-width for a given backend, and decoding rejects non-canonical input.

/// Encoded length of a G1 element.
pub fn g1_len<E: Pairing>() -> usize {
    G1::<E>::generator().compressed_size()
}

/// Encoded length of a G2 element.
pub fn g2_len<E: Pairing>() -> usize {
    G2::<E>::generator().compressed_size()
}

/// Encoded length of a target-group element.
pub fn gt_len<E: Pairing>() -> usize {
    Gt::<E>::zero().compressed_size()
}

/// Encoded length of a scalar.
pub fn scalar_len<E: Pairing>() -> usize {
    (Scalar::<E>::MODULUS_BIT_SIZE as usize).div_ceil(8)
}

pub fn g1_to_bytes<E: Pairing>(e: &G1<E>) -> Vec<u8> {
    let mut buf = Vec::with_capacity(g1_len::<E>());
    e.serialize_compressed(&mut buf).expect("infallible write");
    buf
}

pub fn g2_to_bytes<E: Pairing>(e: &G2<E>) -> Vec<u8> {
    let mut buf = Vec::with_capacity(g2_len::<E>());
    e.serialize_compressed(&mut buf).expect("infallible write");
    buf
}

pub fn gt_to_bytes<E: Pairing>(e: &Gt<E>) -> Vec<u8> {
    let mut buf = Vec::with_capacity(gt_len::<E>());
    e.serialize_compressed(&mut buf).expect("infallible write");
    buf
}

/// Fixed-width big-endian scalar encoding.
pub fn scalar_to_bytes<E: Pairing>(s: &Scalar<E>) -> Vec<u8> {
    let full = s.into_bigint().to_bytes_be();
    let width = scalar_len::<E>();
    full[full.len() - width..].to_vec()
}

pub fn g1_from_bytes<E: Pairing>(bytes: &[u8]) -> Result<G1<E>, CodecError> {
    expect_len(bytes, g1_len::<E>())?;
    G1::<E>::deserialize_compressed(bytes).map_err(|_| CodecError::InvalidElement { group: "G1" })
}

pub fn g2_from_bytes<E: Pairing>(bytes: &[u8]) -> Result<G2<E>, CodecError> {
    expect_len(bytes, g2_len::<E>())?;
    G2::<E>::deserialize_compressed(bytes).map_err(|_| CodecError::InvalidElement { group: "G2" })
}

pub fn gt_from_bytes<E: Pairing>(bytes: &[u8]) -> Result<Gt<E>, CodecError> {
    expect_len(bytes, gt_len::<E>())?;
    Gt::<E>::deserialize_compressed(bytes).map_err(|_| CodecError::InvalidElement { group: "GT" })
}

pub fn scalar_from_bytes<E: Pairing>(bytes: &[u8]) -> Result<Scalar<E>, CodecError> {
    expect_len(bytes, scalar_len::<E>())?;
    let s = Scalar::<E>::from_be_bytes_mod_order(bytes);
    // Reject values >= p: a canonical encoding survives the roundtrip.
    if scalar_to_bytes::<E>(&s) != bytes {
        return Err(CodecError::NonCanonicalScalar);
    }
    Ok(s)
}

fn expect_len(bytes: &[u8], expected: usize) -> Result<(), CodecError> {
    if bytes.len() != expected {
        return Err(CodecError::WrongLength {
            expected,
            got: bytes.len(),
        });
    }
    Ok(())
}
