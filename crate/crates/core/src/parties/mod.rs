//! State machines for the three protocol roles, independent of transport:
//! the trusted third party (registration, parameter publication, revocation),
//! the bank (withdrawal issuance, deposits, double-spend detection) and users
//! (wallet orchestration).
//!
//! Each state is single-writer: one logical owner processes messages
//! sequentially. All I/O lives elsewhere; these types consume and produce
//! plain values.

mod bank;
mod ttp;
mod user;

pub use bank::{BankError, BankState, DepositOutcome, DepositRejection};
pub use ttp::{RevocationAuthority, RevocationOutcome, TtpError, TtpState};
pub use user::{UserError, UserState};

use ark_ec::pairing::Pairing;

use crate::gsproof::TransactionProof;

/// First index at which two proof lists differ. If one list is a proper
/// prefix of the other, the divergence is at the shorter length. Identical
/// lists have no divergence.
pub fn find_divergence<E: Pairing>(
    a: &[TransactionProof<E>],
    b: &[TransactionProof<E>],
) -> Option<usize> {
    let shorter = a.len().min(b.len());
    for i in 0..shorter {
        if a[i] != b[i] {
            return Some(i);
        }
    }
    if a.len() != b.len() {
        return Some(shorter);
    }
    None
}
