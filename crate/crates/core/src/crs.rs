//! The common reference string parameterizing the transaction proofs, its
//! trapdoor, and trapdoor-based extraction of committed values.
//!
//! The trapdoor exponents satisfy `u = g1^alpha` and `v = g2^beta`; whoever
//! holds them can open the commitments inside any transaction proof. The four
//! primed elements are published for structural completeness but no operation
//! consumes them.

use ark_ec::pairing::Pairing;
use ark_std::rand::Rng;

use crate::error::CodecError;
use crate::pairing::{
    g1_exp, g1_from_bytes, g1_inv, g1_len, g1_mul, g1_to_bytes, g2_exp, g2_from_bytes, g2_inv,
    g2_len, g2_mul, g2_to_bytes, nonzero_scalar, GroupParams, Scalar, G1, G2,
};

/// Public reference string: four G1 elements and four G2 elements, with the
/// convention `g = g1` and `h = g2` from the group parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crs<E: Pairing> {
    params: GroupParams<E>,
    pub g: G1<E>,
    pub u: G1<E>,
    pub g_prime: G1<E>,
    pub u_prime: G1<E>,
    pub h: G2<E>,
    pub v: G2<E>,
    pub h_prime: G2<E>,
    pub v_prime: G2<E>,
}

/// The exponents behind `u` and `v`. Held only by the trusted third party;
/// never serialized onto the wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trapdoor<E: Pairing> {
    pub alpha: Scalar<E>,
    pub beta: Scalar<E>,
}

impl<E: Pairing> Crs<E> {
    pub fn params(&self) -> &GroupParams<E> {
        &self.params
    }

    /// Serializes as the params identifier followed by the eight canonical
    /// element encodings in declaration order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let id = self.params.id().as_bytes();
        let mut buf = Vec::with_capacity(4 + id.len() + 4 * g1_len::<E>() + 4 * g2_len::<E>());
        buf.extend_from_slice(&(id.len() as u32).to_be_bytes());
        buf.extend_from_slice(id);
        for e in [&self.g, &self.u, &self.g_prime, &self.u_prime] {
            buf.extend_from_slice(&g1_to_bytes::<E>(e));
        }
        for e in [&self.h, &self.v, &self.h_prime, &self.v_prime] {
            buf.extend_from_slice(&g2_to_bytes::<E>(e));
        }
        buf
    }

    /// Decodes and checks the embedded identifier and generator convention
    /// against the caller's parameter set.
    pub fn from_bytes(bytes: &[u8], params: &GroupParams<E>) -> Result<Self, CodecError> {
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8], CodecError> {
            if *pos + n > bytes.len() {
                return Err(CodecError::Truncated);
            }
            let out = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(out)
        };
        let id_len = u32::from_be_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let id = String::from_utf8(take(&mut pos, id_len)?.to_vec())
            .map_err(|_| CodecError::InvalidElement { group: "params-id" })?;
        if id != params.id() {
            return Err(CodecError::ParamsMismatch {
                expected: params.id().to_string(),
                got: id,
            });
        }
        let mut g1s = [G1::<E>::default(); 4];
        for slot in &mut g1s {
            *slot = g1_from_bytes::<E>(take(&mut pos, g1_len::<E>())?)?;
        }
        let mut g2s = [G2::<E>::default(); 4];
        for slot in &mut g2s {
            *slot = g2_from_bytes::<E>(take(&mut pos, g2_len::<E>())?)?;
        }
        if pos != bytes.len() {
            return Err(CodecError::TrailingBytes);
        }
        if g1s[0] != params.g1() || g2s[0] != params.g2() {
            return Err(CodecError::InvalidElement { group: "crs" });
        }
        Ok(Self {
            params: params.clone(),
            g: g1s[0],
            u: g1s[1],
            g_prime: g1s[2],
            u_prime: g1s[3],
            h: g2s[0],
            v: g2s[1],
            h_prime: g2s[2],
            v_prime: g2s[3],
        })
    }
}

/// Draws a fresh reference string together with its trapdoor.
pub fn generate<E: Pairing, R: Rng + ?Sized>(
    params: GroupParams<E>,
    rng: &mut R,
) -> (Crs<E>, Trapdoor<E>) {
    let alpha = nonzero_scalar::<E, R>(rng);
    let beta = nonzero_scalar::<E, R>(rng);
    let crs = Crs {
        g: params.g1(),
        u: g1_exp::<E>(params.g1(), alpha),
        g_prime: g1_exp::<E>(params.g1(), nonzero_scalar::<E, R>(rng)),
        u_prime: g1_exp::<E>(params.g1(), nonzero_scalar::<E, R>(rng)),
        h: params.g2(),
        v: g2_exp::<E>(params.g2(), beta),
        h_prime: g2_exp::<E>(params.g2(), nonzero_scalar::<E, R>(rng)),
        v_prime: g2_exp::<E>(params.g2(), nonzero_scalar::<E, R>(rng)),
        params,
    };
    (crs, Trapdoor { alpha, beta })
}

/// Opens a G1 commitment `(c1, c2) = (g1^r, u^r X)`: returns `X = c1^-alpha c2`.
pub fn extract_committed_g1<E: Pairing>(c1: &G1<E>, c2: &G1<E>, alpha: &Scalar<E>) -> G1<E> {
    g1_mul::<E>(g1_inv::<E>(g1_exp::<E>(*c1, *alpha)), *c2)
}

/// Opens a G2 commitment `(d1, d2) = (g2^s, v^s Y)`: returns `Y = d1^-beta d2`.
pub fn extract_committed_g2<E: Pairing>(d1: &G2<E>, d2: &G2<E>, beta: &Scalar<E>) -> G2<E> {
    g2_mul::<E>(g2_inv::<E>(g2_exp::<E>(*d1, *beta)), *d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{bls12_381_params, pair};
    use ark_bls12_381::Bls12_381 as E;
    use ark_ec::AffineRepr;
    use ark_ff::UniformRand;
    use ark_std::rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn trapdoor_matches_crs() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let params = bls12_381_params();
        let (crs, td) = generate(params.clone(), &mut rng);
        assert_eq!(g1_exp::<E>(params.g1(), td.alpha), crs.u);
        assert_eq!(g2_exp::<E>(params.g2(), td.beta), crs.v);
        // pair(u, g2) = pair(g1, g2)^alpha, checkable while holding the trapdoor.
        assert_eq!(pair::<E>(crs.u, crs.h), params.gt_generator() * td.alpha);
        for e in [crs.g, crs.u, crs.g_prime, crs.u_prime] {
            assert!(!e.is_zero());
        }
        for e in [crs.h, crs.v, crs.h_prime, crs.v_prime] {
            assert!(!e.is_zero());
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let params = bls12_381_params();
        let (a, ta) = generate(params.clone(), &mut ChaCha20Rng::seed_from_u64(7));
        let (b, tb) = generate(params.clone(), &mut ChaCha20Rng::seed_from_u64(7));
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = generate(params, &mut ChaCha20Rng::seed_from_u64(8));
        assert_ne!((a.u, a.v), (c.u, c.v));
    }

    #[test]
    fn extraction_recovers_committed_values() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let params = bls12_381_params();
        let (crs, td) = generate(params.clone(), &mut rng);
        for _ in 0..100 {
            let x = G1::<E>::rand(&mut rng);
            let r = Scalar::<E>::rand(&mut rng);
            let c1 = g1_exp::<E>(crs.g, r);
            let c2 = g1_mul::<E>(g1_exp::<E>(crs.u, r), x);
            assert_eq!(extract_committed_g1::<E>(&c1, &c2, &td.alpha), x);

            let y = G2::<E>::rand(&mut rng);
            let s = Scalar::<E>::rand(&mut rng);
            let d1 = g2_exp::<E>(crs.h, s);
            let d2 = g2_mul::<E>(g2_exp::<E>(crs.v, s), y);
            assert_eq!(extract_committed_g2::<E>(&d1, &d2, &td.beta), y);
        }
    }

    #[test]
    fn extraction_with_zero_randomness_is_transparent() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let params = bls12_381_params();
        let (_, td) = generate(params.clone(), &mut rng);
        let x = G1::<E>::rand(&mut rng);
        // r = 0: c1 is the identity and c2 is X itself.
        assert_eq!(
            extract_committed_g1::<E>(&G1::<E>::zero(), &x, &td.alpha),
            x
        );
        let y = G2::<E>::rand(&mut rng);
        assert_eq!(extract_committed_g2::<E>(&G2::<E>::zero(), &y, &td.beta), y);
    }

    #[test]
    fn crs_bytes_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let params = bls12_381_params();
        let (crs, _) = generate(params.clone(), &mut rng);
        let bytes = crs.to_bytes();
        assert_eq!(Crs::from_bytes(&bytes, &params).unwrap(), crs);
        assert!(Crs::<E>::from_bytes(&bytes[..bytes.len() - 1], &params).is_err());
        let mut wrong_id = bytes.clone();
        wrong_id[4] ^= 0x01;
        assert!(matches!(
            Crs::<E>::from_bytes(&wrong_id, &params),
            Err(CodecError::ParamsMismatch { .. })
        ));
    }
}
