//! Offline transferable e-cash over bilinear pairings.
//!
//! A digital euro is withdrawn from the bank under a blind Schnorr signature,
//! transferred peer to peer with one Groth-Sahai proof appended per transaction,
//! and deposited back at the bank, which detects double-spending retroactively
//! and can ask the trusted third party to revoke the spender's anonymity from
//! exactly the two diverging proofs.
//!
//! The crate is generic over an [`ark_ec::pairing::Pairing`] backend; BLS12-381
//! is the bundled default (see [`pairing::bls12_381_params`]).

pub mod crs;
pub mod gsproof;
pub mod pairing;
pub mod parties;
pub mod schnorr;
pub mod token;

mod error;

pub use error::CodecError;
pub use pairing::{bls12_381_params, GroupParams};
