//! Protocol drivers: client-side operations and per-role server loops. Each
//! session runs over one [`Connection`]; a transfer involves exactly the two
//! endpoints of that connection and nobody else.

use std::io;
use std::sync::{Arc, Mutex};

use ark_ec::pairing::Pairing;
use ark_std::rand::RngCore;

use offline_euro::crs::Crs;
use offline_euro::pairing::{GroupParams, G1};
use offline_euro::parties::{
    BankError, BankState, DepositOutcome, RevocationAuthority, RevocationOutcome, TtpError,
    TtpState, UserState,
};
use offline_euro::token::PreparedSpend;

use crate::message::{ErrCode, Message};
use crate::transport::{Connection, Listener};
use crate::WireError;

/// Deposit result as seen by the depositor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DepositVerdict {
    Accepted,
    DoubleSpend { identity: String },
    Rejected { detail: String },
}

fn unexpected<E: Pairing>(msg: Message<E>) -> WireError {
    match msg {
        Message::Err { code, detail } => WireError::Reply { code, detail },
        other => WireError::Unexpected { tag: other.tag() },
    }
}

// ---- client operations -----------------------------------------------------

/// Registers an identity/key pair with the peer (TTP or bank).
pub fn register<E: Pairing>(
    conn: &mut Connection,
    params: &GroupParams<E>,
    identity: &str,
    pubkey: G1<E>,
) -> Result<(), WireError> {
    conn.send(&Message::<E>::Register {
        identity: identity.to_string(),
        pubkey,
    })?;
    match conn.recv::<E>(params)? {
        Message::Ack => Ok(()),
        other => Err(unexpected(other)),
    }
}

/// Fetches the reference string and, when known, the bank key from the TTP.
pub fn fetch_params<E: Pairing>(
    conn: &mut Connection,
    params: &GroupParams<E>,
) -> Result<(Crs<E>, Option<G1<E>>), WireError> {
    conn.send(&Message::<E>::ParamsReq)?;
    match conn.recv::<E>(params)? {
        Message::ParamsRep { crs, bank_pk } => Ok((crs, bank_pk)),
        other => Err(unexpected(other)),
    }
}

/// Runs the three-leg withdrawal against the bank. Returns the wallet index
/// of the fresh euro.
pub fn withdraw<E: Pairing, R: RngCore>(
    conn: &mut Connection,
    user: &mut UserState<E>,
    bank_pk: &G1<E>,
    params: &GroupParams<E>,
    rng: &mut R,
) -> Result<usize, WireError> {
    conn.send(&Message::<E>::WithdrawInit { pubkey: user.pk() })?;
    let r = match conn.recv::<E>(params)? {
        Message::WithdrawNonce { r } => r,
        other => return Err(unexpected(other)),
    };
    let c_prime = user
        .begin_withdrawal(&r, bank_pk, params, rng)
        .map_err(WireError::party)?;
    conn.send(&Message::<E>::WithdrawChallenge { c_prime })?;
    let sigma_prime = match conn.recv::<E>(params)? {
        Message::WithdrawResp { sigma_prime } => sigma_prime,
        other => return Err(unexpected(other)),
    };
    user.finish_withdrawal(&sigma_prime, bank_pk, params)
        .map_err(WireError::party)
}

/// Receiver side of a transfer: connect to the spender, send the
/// randomization elements, verify the payload and acknowledge. Returns the
/// wallet index of the received euro.
pub fn request_payment<E: Pairing, R: RngCore>(
    conn: &mut Connection,
    receiver: &mut UserState<E>,
    crs: &Crs<E>,
    bank_pk: &G1<E>,
    rng: &mut R,
) -> Result<usize, WireError> {
    let elements = receiver.prepare_receive(crs, rng);
    conn.send(&Message::<E>::TransferInit { elements })?;
    let bundle = match conn.recv::<E>(crs.params())? {
        Message::TransferPayload { bundle } => bundle,
        other => return Err(unexpected(other)),
    };
    match receiver.complete_receive(&bundle, crs, bank_pk) {
        Ok(idx) => {
            conn.send(&Message::<E>::Ack)?;
            Ok(idx)
        }
        Err(err) => {
            conn.send(&Message::<E>::Err {
                code: ErrCode::Rejected,
                detail: err.to_string(),
            })?;
            Err(WireError::party(err))
        }
    }
}

/// Deposits the euro at wallet index `idx` with the bank. `double` selects
/// the dishonest re-spend path used by the detection experiments.
pub fn deposit<E: Pairing, R: RngCore>(
    conn: &mut Connection,
    user: &mut UserState<E>,
    idx: usize,
    crs: &Crs<E>,
    rng: &mut R,
    double: bool,
) -> Result<DepositVerdict, WireError> {
    conn.send(&Message::<E>::DepositInit { pubkey: user.pk() })?;
    let elements = match conn.recv::<E>(crs.params())? {
        Message::TransferInit { elements } => elements,
        other => return Err(unexpected(other)),
    };
    let prepared: PreparedSpend<E> = if double {
        user.prepare_double_spend(idx, &elements, crs, rng)
    } else {
        user.prepare_spend(idx, &elements, crs, rng)
    }
    .map_err(WireError::party)?;
    conn.send(&Message::<E>::DepositPayload {
        bundle: prepared.bundle.clone(),
    })?;
    match conn.recv::<E>(crs.params())? {
        Message::Ack => {
            user.commit_spend(idx, prepared).map_err(WireError::party)?;
            Ok(DepositVerdict::Accepted)
        }
        Message::Err {
            code: ErrCode::DoubleSpend,
            detail,
        } => {
            // The bank kept the euro as evidence; the entry is gone either way.
            user.commit_spend(idx, prepared).map_err(WireError::party)?;
            Ok(DepositVerdict::DoubleSpend { identity: detail })
        }
        Message::Err {
            code: ErrCode::Rejected,
            detail,
        } => Ok(DepositVerdict::Rejected { detail }),
        other => Err(unexpected(other)),
    }
}

/// Asks the third party to open two diverging proofs.
pub fn revoke_remote<E: Pairing>(
    conn: &mut Connection,
    a: &offline_euro::gsproof::TransactionProof<E>,
    b: &offline_euro::gsproof::TransactionProof<E>,
    params: &GroupParams<E>,
) -> Result<RevocationOutcome, WireError> {
    conn.send(&Message::<E>::RevokeReq {
        proof_a: Box::new(*a),
        proof_b: Box::new(*b),
    })?;
    match conn.recv::<E>(params)? {
        Message::RevokeRep { outcome } => Ok(outcome),
        Message::Err {
            code: ErrCode::UnknownKey,
            ..
        } => Ok(RevocationOutcome::UnknownKey),
        other => Err(unexpected(other)),
    }
}

/// Revocation authority backed by a dialed connection to the TTP. Transport
/// failures degrade to `UnknownKey`: the deposit is rejected and logged, but
/// nobody is named.
pub struct RemoteTtp<'a, E: Pairing> {
    dial: &'a (dyn Fn() -> io::Result<Connection> + Sync),
    params: &'a GroupParams<E>,
}

impl<'a, E: Pairing> RemoteTtp<'a, E> {
    pub fn new(
        dial: &'a (dyn Fn() -> io::Result<Connection> + Sync),
        params: &'a GroupParams<E>,
    ) -> Self {
        Self { dial, params }
    }
}

impl<E: Pairing> RevocationAuthority<E> for RemoteTtp<'_, E> {
    fn revoke(
        &mut self,
        a: &offline_euro::gsproof::TransactionProof<E>,
        b: &offline_euro::gsproof::TransactionProof<E>,
    ) -> RevocationOutcome {
        let attempt = (|| -> Result<RevocationOutcome, WireError> {
            let mut conn = (self.dial)().map_err(WireError::Io)?;
            revoke_remote(&mut conn, a, b, self.params)
        })();
        attempt.unwrap_or(RevocationOutcome::UnknownKey)
    }
}

// ---- server loops ----------------------------------------------------------

fn err_msg<E: Pairing>(code: ErrCode, detail: impl ToString) -> Message<E> {
    Message::Err {
        code,
        detail: detail.to_string(),
    }
}

/// Serves TTP sessions: registration, parameter fetch, revocation. Handles
/// `max_sessions` connections when given, otherwise loops forever.
pub fn serve_ttp<E: Pairing>(
    mut listener: Box<dyn Listener>,
    ttp: Arc<Mutex<TtpState<E>>>,
    params: GroupParams<E>,
    max_sessions: Option<usize>,
) {
    let mut served = 0usize;
    while max_sessions.is_none_or(|max| served < max) {
        let Ok(stream) = listener.accept() else { break };
        let mut conn = Connection::new(stream);
        let _ = handle_ttp_conn(&mut conn, &ttp, &params);
        served += 1;
    }
}

fn handle_ttp_conn<E: Pairing>(
    conn: &mut Connection,
    ttp: &Arc<Mutex<TtpState<E>>>,
    params: &GroupParams<E>,
) -> Result<(), WireError> {
    loop {
        let Some(frame) = conn.recv_frame()? else {
            return Ok(());
        };
        let msg = match Message::<E>::from_frame(&frame, params) {
            Ok(msg) => msg,
            Err(WireError::UnknownTag(t)) => {
                conn.send(&err_msg::<E>(
                    ErrCode::Protocol,
                    format!("unknown tag {t:#04x}"),
                ))?;
                continue;
            }
            Err(err) => {
                conn.send(&err_msg::<E>(ErrCode::Decode, err))?;
                continue;
            }
        };
        match msg {
            Message::Register { identity, pubkey } => {
                let result = ttp.lock().unwrap().register(&identity, pubkey);
                match result {
                    Ok(()) => conn.send(&Message::<E>::Ack)?,
                    Err(TtpError::AlreadyRegistered) => conn.send(&err_msg::<E>(
                        ErrCode::AlreadyRegistered,
                        "already registered",
                    ))?,
                    Err(err) => conn.send(&err_msg::<E>(ErrCode::Protocol, err))?,
                }
            }
            Message::ParamsReq => {
                let (crs, bank_pk) = {
                    let ttp = ttp.lock().unwrap();
                    (ttp.crs().clone(), ttp.bank_pk())
                };
                conn.send(&Message::<E>::ParamsRep { crs, bank_pk })?;
            }
            Message::RevokeReq { proof_a, proof_b } => {
                let outcome = ttp.lock().unwrap().revoke(&proof_a, &proof_b);
                match outcome {
                    RevocationOutcome::UnknownKey => {
                        conn.send(&err_msg::<E>(ErrCode::UnknownKey, "key not registered"))?
                    }
                    outcome => conn.send(&Message::<E>::RevokeRep { outcome })?,
                }
            }
            other => {
                conn.send(&err_msg::<E>(
                    ErrCode::Protocol,
                    format!("unexpected message {:#04x}", other.tag()),
                ))?;
            }
        }
    }
}

/// Serves bank sessions: registration, the three-leg withdrawal, deposits.
/// Revocations are relayed through `ttp_dial` when detection requires them.
pub fn serve_bank<E: Pairing, R: RngCore>(
    mut listener: Box<dyn Listener>,
    bank: Arc<Mutex<BankState<E>>>,
    crs: Crs<E>,
    rng: Arc<Mutex<R>>,
    ttp_dial: Arc<dyn Fn() -> io::Result<Connection> + Send + Sync>,
    max_sessions: Option<usize>,
) {
    let mut served = 0usize;
    while max_sessions.is_none_or(|max| served < max) {
        let Ok(stream) = listener.accept() else { break };
        let mut conn = Connection::new(stream);
        let _ = handle_bank_conn(&mut conn, &bank, &crs, &rng, ttp_dial.as_ref());
        served += 1;
    }
}

fn handle_bank_conn<E: Pairing, R: RngCore>(
    conn: &mut Connection,
    bank: &Arc<Mutex<BankState<E>>>,
    crs: &Crs<E>,
    rng: &Arc<Mutex<R>>,
    ttp_dial: &(dyn Fn() -> io::Result<Connection> + Sync),
) -> Result<(), WireError> {
    let params = crs.params();
    // Connection-local protocol state.
    let mut withdrawer: Option<G1<E>> = None;
    let mut depositor: Option<G1<E>> = None;
    loop {
        let Some(frame) = conn.recv_frame()? else {
            return Ok(());
        };
        let msg = match Message::<E>::from_frame(&frame, params) {
            Ok(msg) => msg,
            Err(WireError::UnknownTag(t)) => {
                conn.send(&err_msg::<E>(
                    ErrCode::Protocol,
                    format!("unknown tag {t:#04x}"),
                ))?;
                continue;
            }
            Err(err) => {
                conn.send(&err_msg::<E>(ErrCode::Decode, err))?;
                continue;
            }
        };
        match msg {
            Message::Register { identity, pubkey } => {
                let result = bank.lock().unwrap().register(&identity, &pubkey);
                match result {
                    Ok(()) => conn.send(&Message::<E>::Ack)?,
                    Err(err) => conn.send(&err_msg::<E>(ErrCode::AlreadyRegistered, err))?,
                }
            }
            Message::WithdrawInit { pubkey } => {
                let result = {
                    let mut rng = rng.lock().unwrap();
                    bank.lock()
                        .unwrap()
                        .withdraw_round1(&pubkey, params, &mut *rng)
                };
                match result {
                    Ok(r) => {
                        withdrawer = Some(pubkey);
                        conn.send(&Message::<E>::WithdrawNonce { r })?;
                    }
                    Err(BankError::NotRegistered) => {
                        conn.send(&err_msg::<E>(ErrCode::NotRegistered, "register first"))?
                    }
                    Err(err) => conn.send(&err_msg::<E>(ErrCode::Protocol, err))?,
                }
            }
            Message::WithdrawChallenge { c_prime } => match withdrawer {
                Some(pk) => {
                    let result = bank.lock().unwrap().withdraw_round3(&pk, &c_prime);
                    match result {
                        Ok(sigma_prime) => {
                            withdrawer = None;
                            conn.send(&Message::<E>::WithdrawResp { sigma_prime })?;
                        }
                        Err(err) => conn.send(&err_msg::<E>(ErrCode::NoSession, err))?,
                    }
                }
                None => conn.send(&err_msg::<E>(ErrCode::NoSession, "no withdrawal open"))?,
            },
            Message::DepositInit { pubkey } => {
                let result = {
                    let mut rng = rng.lock().unwrap();
                    bank.lock().unwrap().begin_deposit(&pubkey, crs, &mut *rng)
                };
                match result {
                    Ok(elements) => {
                        depositor = Some(pubkey);
                        conn.send(&Message::<E>::TransferInit { elements })?;
                    }
                    Err(BankError::NotRegistered) => {
                        conn.send(&err_msg::<E>(ErrCode::NotRegistered, "register first"))?
                    }
                    Err(err) => conn.send(&err_msg::<E>(ErrCode::Protocol, err))?,
                }
            }
            Message::DepositPayload { bundle } => match depositor.take() {
                Some(pk) => {
                    let mut ttp = RemoteTtp::new(ttp_dial, params);
                    let outcome = bank
                        .lock()
                        .unwrap()
                        .complete_deposit(&pk, &bundle, crs, &mut ttp);
                    match outcome {
                        DepositOutcome::Accepted => conn.send(&Message::<E>::Ack)?,
                        DepositOutcome::DoubleSpend { identity } => {
                            conn.send(&err_msg::<E>(ErrCode::DoubleSpend, identity))?
                        }
                        DepositOutcome::Rejected { reason } => {
                            conn.send(&err_msg::<E>(ErrCode::Rejected, reason))?
                        }
                    }
                }
                None => conn.send(&err_msg::<E>(ErrCode::NoSession, "no deposit open"))?,
            },
            other => {
                conn.send(&err_msg::<E>(
                    ErrCode::Protocol,
                    format!("unexpected message {:#04x}", other.tag()),
                ))?;
            }
        }
    }
}

/// Serves the spender side of payments: each accepted session is one incoming
/// payment request, answered from the first unspent wallet entry. The entry
/// is committed spent only once the receiver acknowledges.
pub fn serve_payments<E: Pairing, R: RngCore>(
    mut listener: Box<dyn Listener>,
    user: Arc<Mutex<UserState<E>>>,
    crs: Crs<E>,
    rng: Arc<Mutex<R>>,
    sessions: usize,
) {
    for _ in 0..sessions {
        let Ok(stream) = listener.accept() else { break };
        let mut conn = Connection::new(stream);
        let _ = handle_payment_conn(&mut conn, &user, &crs, &rng);
    }
}

fn handle_payment_conn<E: Pairing, R: RngCore>(
    conn: &mut Connection,
    user: &Arc<Mutex<UserState<E>>>,
    crs: &Crs<E>,
    rng: &Arc<Mutex<R>>,
) -> Result<(), WireError> {
    let Some(frame) = conn.recv_frame()? else {
        return Ok(());
    };
    let msg = Message::<E>::from_frame(&frame, crs.params())?;
    let elements = match msg {
        Message::TransferInit { elements } => elements,
        other => {
            conn.send(&err_msg::<E>(
                ErrCode::Protocol,
                format!("unexpected message {:#04x}", other.tag()),
            ))?;
            return Ok(());
        }
    };
    let (idx, prepared) = {
        let user = user.lock().unwrap();
        let Some(idx) = user.first_unspent() else {
            conn.send(&err_msg::<E>(ErrCode::Rejected, "no unspent euro"))?;
            return Ok(());
        };
        let mut rng = rng.lock().unwrap();
        match user.prepare_spend(idx, &elements, crs, &mut *rng) {
            Ok(prepared) => (idx, prepared),
            Err(err) => {
                conn.send(&err_msg::<E>(ErrCode::Rejected, err))?;
                return Ok(());
            }
        }
    };
    conn.send(&Message::<E>::TransferPayload {
        bundle: prepared.bundle.clone(),
    })?;
    match conn.recv::<E>(crs.params())? {
        Message::Ack => {
            user.lock()
                .unwrap()
                .commit_spend(idx, prepared)
                .map_err(WireError::party)?;
            Ok(())
        }
        // Receiver refused: leave the wallet untouched.
        Message::Err { .. } => Ok(()),
        other => Err(unexpected(other)),
    }
}
