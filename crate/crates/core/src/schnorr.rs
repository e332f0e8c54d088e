//! Schnorr signatures over G1, in two flavours: plain signing (used for the
//! per-transaction theta signature) and the three-round blind issuance used at
//! withdrawal. One verification routine serves both.
//!
//! Blind issuance, with `y` the signer key and `H` the challenge hash:
//!
//! 1. signer picks nonce `k`, sends `r = g1^k`
//! 2. client picks blinding `alpha, beta`, computes `r' = r g1^-alpha y^-beta`,
//!    `c = H(r' || M)` and sends `c' = c + beta`
//! 3. signer returns `sigma' = k - c' x`
//! 4. client unblinds `sigma = sigma' - alpha`; the signature is `(sigma, c)`
//!
//! Verification recomputes `r_v = g1^sigma y^c` and checks `c = H(r_v || M)`.

use ark_ec::pairing::Pairing;
use ark_ec::AffineRepr;
use ark_std::rand::Rng;
use thiserror::Error;

use crate::error::CodecError;
use crate::pairing::{
    g1_exp, g1_inv, g1_mul, g1_to_bytes, hash_to_scalar, nonzero_scalar, scalar_from_bytes,
    scalar_len, scalar_to_bytes, GroupParams, Scalar, G1,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchnorrError {
    #[error("signer nonce is the identity element")]
    IdentityNonce,
}

/// Signing key and the matching public key `pk = g1^sk`.
#[derive(Clone, Debug)]
pub struct KeyPair<E: Pairing> {
    sk: Scalar<E>,
    pub pk: G1<E>,
}

impl<E: Pairing> KeyPair<E> {
    pub fn from_secret(sk: Scalar<E>, params: &GroupParams<E>) -> Self {
        Self {
            sk,
            pk: g1_exp::<E>(params.g1(), sk),
        }
    }

    pub fn secret(&self) -> Scalar<E> {
        self.sk
    }
}

/// A Schnorr signature `(sigma, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature<E: Pairing> {
    pub sigma: Scalar<E>,
    pub c: Scalar<E>,
}

impl<E: Pairing> Signature<E> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(2 * scalar_len::<E>());
        buf.extend_from_slice(&scalar_to_bytes::<E>(&self.sigma));
        buf.extend_from_slice(&scalar_to_bytes::<E>(&self.c));
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let w = scalar_len::<E>();
        if bytes.len() != 2 * w {
            return Err(CodecError::WrongLength {
                expected: 2 * w,
                got: bytes.len(),
            });
        }
        Ok(Self {
            sigma: scalar_from_bytes::<E>(&bytes[..w])?,
            c: scalar_from_bytes::<E>(&bytes[w..])?,
        })
    }

    pub fn encoded_len() -> usize {
        2 * scalar_len::<E>()
    }
}

/// Single-use signer state for one blind issuance session.
#[derive(Debug)]
pub struct SignerNonce<E: Pairing> {
    k: Scalar<E>,
    pub r: G1<E>,
}

/// Single-use client state for one blind issuance session.
#[derive(Debug)]
pub struct BlindSession<E: Pairing> {
    alpha: Scalar<E>,
    c: Scalar<E>,
    message: Vec<u8>,
}

impl<E: Pairing> BlindSession<E> {
    pub fn message(&self) -> &[u8] {
        &self.message
    }

    pub fn challenge(&self) -> Scalar<E> {
        self.c
    }
}

/// Fresh random keypair with a nonzero secret.
pub fn keygen<E: Pairing, R: Rng + ?Sized>(params: &GroupParams<E>, rng: &mut R) -> KeyPair<E> {
    KeyPair::from_secret(nonzero_scalar::<E, R>(rng), params)
}

fn challenge<E: Pairing>(domain: &[u8], commitment: &G1<E>, message: &[u8]) -> Scalar<E> {
    let point = g1_to_bytes::<E>(commitment);
    let mut buf = Vec::with_capacity(domain.len() + point.len() + message.len());
    buf.extend_from_slice(domain);
    buf.extend_from_slice(&point);
    buf.extend_from_slice(message);
    hash_to_scalar::<E>(&buf)
}

/// Plain Schnorr signature under `sk` over `message`, challenge-hashed in the
/// given domain.
pub fn sign<E: Pairing, R: Rng + ?Sized>(
    domain: &'static [u8],
    message: &[u8],
    sk: &Scalar<E>,
    params: &GroupParams<E>,
    rng: &mut R,
) -> Signature<E> {
    let k = nonzero_scalar::<E, R>(rng);
    let r = g1_exp::<E>(params.g1(), k);
    let c = challenge::<E>(domain, &r, message);
    Signature {
        sigma: k - c * sk,
        c,
    }
}

/// Verifies either a plain or a blind-issued signature.
pub fn verify<E: Pairing>(
    domain: &'static [u8],
    message: &[u8],
    sig: &Signature<E>,
    pk: &G1<E>,
    params: &GroupParams<E>,
) -> bool {
    let r_v = g1_mul::<E>(g1_exp::<E>(params.g1(), sig.sigma), g1_exp::<E>(*pk, sig.c));
    sig.c == challenge::<E>(domain, &r_v, message)
}

/// Round 1 (signer): draw a fresh nonce and publish `r = g1^k`.
pub fn blind_round1_signer<E: Pairing, R: Rng + ?Sized>(
    params: &GroupParams<E>,
    rng: &mut R,
) -> SignerNonce<E> {
    let k = nonzero_scalar::<E, R>(rng);
    SignerNonce {
        k,
        r: g1_exp::<E>(params.g1(), k),
    }
}

/// Round 2 (client): blind the signer nonce with random factors and produce
/// the blinded challenge `c'`.
pub fn blind_round2_client<E: Pairing, R: Rng + ?Sized>(
    domain: &'static [u8],
    r: &G1<E>,
    message: &[u8],
    signer_pk: &G1<E>,
    params: &GroupParams<E>,
    rng: &mut R,
) -> Result<(BlindSession<E>, Scalar<E>), SchnorrError> {
    let alpha = nonzero_scalar::<E, R>(rng);
    let beta = nonzero_scalar::<E, R>(rng);
    blind_round2_with_factors(domain, r, message, signer_pk, params, alpha, beta)
}

/// Deterministic-blinding variant of round 2. Zero factors reproduce the
/// signer's view exactly, which the degenerate-case tests rely on.
pub fn blind_round2_with_factors<E: Pairing>(
    domain: &'static [u8],
    r: &G1<E>,
    message: &[u8],
    signer_pk: &G1<E>,
    params: &GroupParams<E>,
    alpha: Scalar<E>,
    beta: Scalar<E>,
) -> Result<(BlindSession<E>, Scalar<E>), SchnorrError> {
    if r.is_zero() {
        return Err(SchnorrError::IdentityNonce);
    }
    let r_prime = g1_mul::<E>(
        *r,
        g1_mul::<E>(
            g1_inv::<E>(g1_exp::<E>(params.g1(), alpha)),
            g1_inv::<E>(g1_exp::<E>(*signer_pk, beta)),
        ),
    );
    let c = challenge::<E>(domain, &r_prime, message);
    let c_prime = c + beta;
    Ok((
        BlindSession {
            alpha,
            c,
            message: message.to_vec(),
        },
        c_prime,
    ))
}

/// Round 3 (signer): sign the blinded challenge. Consuming the nonce makes
/// reuse a compile-time impossibility; session-level replay is rejected one
/// layer up in the bank state.
pub fn blind_round3_signer<E: Pairing>(
    nonce: SignerNonce<E>,
    c_prime: &Scalar<E>,
    sk: &Scalar<E>,
) -> Scalar<E> {
    nonce.k - *c_prime * sk
}

/// Final client step: strip the blinding from `sigma'`.
pub fn unblind<E: Pairing>(session: BlindSession<E>, sigma_prime: &Scalar<E>) -> Signature<E> {
    Signature {
        sigma: *sigma_prime - session.alpha,
        c: session.c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{bls12_381_params, domain};
    use ark_bls12_381::Bls12_381 as E;
    use ark_ff::{UniformRand, Zero};
    use ark_std::rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    const TEST_DOMAIN: &[u8] = domain::WITHDRAW_MSG;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0x5c400)
    }

    #[test]
    fn keygen_invariants() {
        let params = bls12_381_params();
        let mut rng = rng();
        let kp1 = keygen(&params, &mut rng);
        let kp2 = keygen(&params, &mut rng);
        assert_eq!(g1_exp::<E>(params.g1(), kp1.secret()), kp1.pk);
        assert!(!kp1.secret().is_zero());
        assert_ne!(kp1.secret(), kp2.secret());
    }

    #[test]
    fn sign_verify_roundtrip() {
        let params = bls12_381_params();
        let mut rng = rng();
        let kp = keygen(&params, &mut rng);
        for i in 0..100u32 {
            let mut msg = vec![0u8; 40];
            rng.fill_bytes(&mut msg);
            msg.extend_from_slice(&i.to_be_bytes());
            let sig = sign(TEST_DOMAIN, &msg, &kp.secret(), &params, &mut rng);
            assert!(verify(TEST_DOMAIN, &msg, &sig, &kp.pk, &params));

            let mut tampered = msg.clone();
            tampered[0] ^= 1;
            assert!(!verify(TEST_DOMAIN, &tampered, &sig, &kp.pk, &params));
        }
    }

    #[test]
    fn verify_rejects_wrong_key_and_degenerate_input() {
        let params = bls12_381_params();
        let mut rng = rng();
        let kp = keygen(&params, &mut rng);
        let other = keygen(&params, &mut rng);
        let sig = sign(TEST_DOMAIN, b"msg", &kp.secret(), &params, &mut rng);
        assert!(!verify(TEST_DOMAIN, b"msg", &sig, &other.pk, &params));

        let zero_sig = Signature::<E> {
            sigma: Scalar::<E>::zero(),
            c: Scalar::<E>::zero(),
        };
        assert!(!verify(
            TEST_DOMAIN,
            b"anything",
            &zero_sig,
            &G1::<E>::zero(),
            &params
        ));
    }

    #[test]
    fn verify_in_wrong_domain_fails() {
        let params = bls12_381_params();
        let mut rng = rng();
        let kp = keygen(&params, &mut rng);
        let sig = sign(
            domain::WITHDRAW_MSG,
            b"msg",
            &kp.secret(),
            &params,
            &mut rng,
        );
        assert!(!verify(domain::THETA_SIG, b"msg", &sig, &kp.pk, &params));
    }

    #[test]
    fn blind_issuance_end_to_end() {
        let params = bls12_381_params();
        let mut rng = rng();
        let bank = keygen(&params, &mut rng);
        for _ in 0..100 {
            let mut msg = vec![0u8; 64];
            rng.fill_bytes(&mut msg);
            let nonce = blind_round1_signer(&params, &mut rng);
            assert_eq!(g1_exp::<E>(params.g1(), nonce.k), nonce.r);
            let (session, c_prime) =
                blind_round2_client(TEST_DOMAIN, &nonce.r, &msg, &bank.pk, &params, &mut rng)
                    .unwrap();
            // c' - beta = c is the session's stored challenge.
            let sigma_prime = blind_round3_signer(nonce, &c_prime, &bank.secret());
            let sig = unblind(session, &sigma_prime);
            assert!(verify(TEST_DOMAIN, &msg, &sig, &bank.pk, &params));
            // Blinding separates the signer transcript from the final signature.
            assert_ne!((sig.sigma, sig.c), (sigma_prime, c_prime));
        }
    }

    #[test]
    fn blind_round3_algebra() {
        let params = bls12_381_params();
        let mut rng = rng();
        let bank = keygen(&params, &mut rng);
        let nonce = blind_round1_signer(&params, &mut rng);
        let r = nonce.r;
        let c_prime = Scalar::<E>::rand(&mut rng);
        let sigma_prime = blind_round3_signer(nonce, &c_prime, &bank.secret());
        // g1^sigma' pk^c' = r.
        assert_eq!(
            g1_mul::<E>(
                g1_exp::<E>(params.g1(), sigma_prime),
                g1_exp::<E>(bank.pk, c_prime)
            ),
            r
        );
        let nonce2 = blind_round1_signer(&params, &mut rng);
        let k2 = nonce2.k;
        assert_eq!(
            blind_round3_signer(nonce2, &Scalar::<E>::zero(), &bank.secret()),
            k2
        );
    }

    #[test]
    fn zero_blinding_reproduces_signer_view() {
        let params = bls12_381_params();
        let mut rng = rng();
        let bank = keygen(&params, &mut rng);
        let msg = b"degenerate transparency";
        let nonce = blind_round1_signer(&params, &mut rng);
        let r = nonce.r;
        let (session, c_prime) = blind_round2_with_factors(
            TEST_DOMAIN,
            &r,
            msg,
            &bank.pk,
            &params,
            Scalar::<E>::zero(),
            Scalar::<E>::zero(),
        )
        .unwrap();
        // With alpha = beta = 0: c' = H(r || M), sigma = sigma', c = c'.
        assert_eq!(c_prime, challenge::<E>(TEST_DOMAIN, &r, msg));
        let sigma_prime = blind_round3_signer(nonce, &c_prime, &bank.secret());
        let sig = unblind(session, &sigma_prime);
        assert_eq!(sig.sigma, sigma_prime);
        assert_eq!(sig.c, c_prime);
        assert!(verify(TEST_DOMAIN, msg, &sig, &bank.pk, &params));
    }

    #[test]
    fn round2_rejects_identity_nonce() {
        let params = bls12_381_params();
        let mut rng = rng();
        let bank = keygen(&params, &mut rng);
        let err = blind_round2_client(
            TEST_DOMAIN,
            &G1::<E>::zero(),
            b"msg",
            &bank.pk,
            &params,
            &mut rng,
        )
        .unwrap_err();
        assert_eq!(err, SchnorrError::IdentityNonce);
    }

    #[test]
    fn signature_bytes_roundtrip() {
        let params = bls12_381_params();
        let mut rng = rng();
        let kp = keygen(&params, &mut rng);
        let sig = sign(TEST_DOMAIN, b"bytes", &kp.secret(), &params, &mut rng);
        let bytes = sig.to_bytes();
        assert_eq!(bytes.len(), Signature::<E>::encoded_len());
        assert_eq!(Signature::<E>::from_bytes(&bytes).unwrap(), sig);
        assert!(Signature::<E>::from_bytes(&bytes[1..]).is_err());
    }
}
