//! Protocol messages and their byte-exact frame encodings. Field order is
//! normative; every group element and scalar uses its canonical fixed-width
//! encoding from the core crate.

use ark_ec::pairing::Pairing;

use offline_euro::crs::Crs;
use offline_euro::gsproof::{RandomizationElements, TransactionProof};
use offline_euro::pairing::{
    g1_from_bytes, g1_len, g1_to_bytes, scalar_from_bytes, scalar_len, scalar_to_bytes,
    GroupParams, Scalar, G1,
};
use offline_euro::parties::RevocationOutcome;
use offline_euro::token::TransferBundle;

use crate::frame::{tag, Frame};
use crate::WireError;

/// Error codes carried by `ERR` frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrCode {
    Protocol = 1,
    Decode = 2,
    NotRegistered = 3,
    AlreadyRegistered = 4,
    NoSession = 5,
    Rejected = 6,
    DoubleSpend = 7,
    UnknownKey = 8,
}

impl ErrCode {
    pub fn from_u8(code: u8) -> Option<Self> {
        Some(match code {
            1 => Self::Protocol,
            2 => Self::Decode,
            3 => Self::NotRegistered,
            4 => Self::AlreadyRegistered,
            5 => Self::NoSession,
            6 => Self::Rejected,
            7 => Self::DoubleSpend,
            8 => Self::UnknownKey,
            _ => return None,
        })
    }
}

/// Every message of the protocol. One frame per message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message<E: Pairing> {
    /// Identify (identity, pubkey) to the TTP or the bank.
    Register {
        identity: String,
        pubkey: G1<E>,
    },
    ParamsReq,
    /// Reference string plus the bank key, once the bank has registered.
    ParamsRep {
        crs: Crs<E>,
        bank_pk: Option<G1<E>>,
    },
    /// Withdrawal leg 1: the user announces itself.
    WithdrawInit {
        pubkey: G1<E>,
    },
    /// Reply to leg 1: the signer nonce `r = g1^k`.
    WithdrawNonce {
        r: G1<E>,
    },
    /// Leg 2: the blinded challenge `c'`.
    WithdrawChallenge {
        c_prime: Scalar<E>,
    },
    /// Leg 3: the blinded signature `sigma'`.
    WithdrawResp {
        sigma_prime: Scalar<E>,
    },
    /// Receiver opens a transfer with its randomization elements.
    TransferInit {
        elements: RandomizationElements<E>,
    },
    /// Spender answers with the extended euro and openers.
    TransferPayload {
        bundle: TransferBundle<E>,
    },
    /// Depositor announces a deposit; the bank answers with `TransferInit`
    /// since a deposit is a transfer with the bank as receiver.
    DepositInit {
        pubkey: G1<E>,
    },
    /// Same shape as `TransferPayload`, addressed to the bank.
    DepositPayload {
        bundle: TransferBundle<E>,
    },
    /// Exactly two proofs; nothing else crosses this interface.
    RevokeReq {
        proof_a: Box<TransactionProof<E>>,
        proof_b: Box<TransactionProof<E>>,
    },
    RevokeRep {
        outcome: RevocationOutcome,
    },
    Ack,
    Err {
        code: ErrCode,
        detail: String,
    },
}

fn put_string(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_be_bytes());
    buf.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.pos + n > self.buf.len() {
            return Err(WireError::Truncated);
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, WireError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| WireError::BadString)
    }

    fn g1<E: Pairing>(&mut self) -> Result<G1<E>, WireError> {
        Ok(g1_from_bytes::<E>(self.take(g1_len::<E>())?)?)
    }

    fn scalar<E: Pairing>(&mut self) -> Result<Scalar<E>, WireError> {
        Ok(scalar_from_bytes::<E>(self.take(scalar_len::<E>())?)?)
    }

    fn rest(&mut self) -> &'a [u8] {
        let out = &self.buf[self.pos..];
        self.pos = self.buf.len();
        out
    }

    fn finish(self) -> Result<(), WireError> {
        if self.pos != self.buf.len() {
            return Err(WireError::TrailingBytes);
        }
        Ok(())
    }
}

impl<E: Pairing> Message<E> {
    pub fn tag(&self) -> u8 {
        match self {
            Message::Register { .. } => tag::REGISTER,
            Message::ParamsReq => tag::PARAMS_REQ,
            Message::ParamsRep { .. } => tag::PARAMS_REP,
            Message::WithdrawInit { .. } => tag::WITHDRAW_INIT,
            Message::WithdrawNonce { .. } => tag::WITHDRAW_NONCE,
            Message::WithdrawChallenge { .. } => tag::WITHDRAW_CHALLENGE,
            Message::WithdrawResp { .. } => tag::WITHDRAW_RESP,
            Message::TransferInit { .. } => tag::TRANSFER_INIT,
            Message::TransferPayload { .. } => tag::TRANSFER_PAYLOAD,
            Message::DepositInit { .. } => tag::DEPOSIT_INIT,
            Message::DepositPayload { .. } => tag::DEPOSIT_PAYLOAD,
            Message::RevokeReq { .. } => tag::REVOKE_REQ,
            Message::RevokeRep { .. } => tag::REVOKE_REP,
            Message::Ack => tag::ACK,
            Message::Err { .. } => tag::ERR,
        }
    }

    pub fn to_frame(&self) -> Frame {
        let payload = match self {
            Message::Register { identity, pubkey } => {
                let mut buf = Vec::new();
                put_string(&mut buf, identity);
                buf.extend_from_slice(&g1_to_bytes::<E>(pubkey));
                buf
            }
            Message::ParamsReq | Message::Ack => Vec::new(),
            Message::ParamsRep { crs, bank_pk } => {
                let mut buf = crs.to_bytes();
                match bank_pk {
                    Some(pk) => {
                        buf.push(1);
                        buf.extend_from_slice(&g1_to_bytes::<E>(pk));
                    }
                    None => buf.push(0),
                }
                buf
            }
            Message::WithdrawInit { pubkey } => g1_to_bytes::<E>(pubkey),
            Message::WithdrawNonce { r } => g1_to_bytes::<E>(r),
            Message::WithdrawChallenge { c_prime } => scalar_to_bytes::<E>(c_prime),
            Message::WithdrawResp { sigma_prime } => scalar_to_bytes::<E>(sigma_prime),
            Message::TransferInit { elements } => elements.to_bytes(),
            Message::TransferPayload { bundle } | Message::DepositPayload { bundle } => {
                bundle.to_bytes()
            }
            Message::DepositInit { pubkey } => g1_to_bytes::<E>(pubkey),
            Message::RevokeReq { proof_a, proof_b } => {
                let mut buf = proof_a.to_bytes();
                buf.extend_from_slice(&proof_b.to_bytes());
                buf
            }
            Message::RevokeRep { outcome } => match outcome {
                RevocationOutcome::NotDoubleSpend => vec![0],
                RevocationOutcome::DoubleSpender { identity } => {
                    let mut buf = vec![1];
                    put_string(&mut buf, identity);
                    buf
                }
                RevocationOutcome::UnknownKey => vec![2],
            },
            Message::Err { code, detail } => {
                let mut buf = vec![*code as u8];
                put_string(&mut buf, detail);
                buf
            }
        };
        Frame::new(self.tag(), payload)
    }

    pub fn from_frame(frame: &Frame, params: &GroupParams<E>) -> Result<Self, WireError> {
        let mut r = Reader::new(&frame.payload);
        let msg = match frame.tag {
            tag::REGISTER => {
                let identity = r.string()?;
                let pubkey = r.g1::<E>()?;
                Message::Register { identity, pubkey }
            }
            tag::PARAMS_REQ => Message::ParamsReq,
            tag::PARAMS_REP => {
                // The CRS length is fixed per backend: id prefix + 8 elements.
                let crs_len = 4
                    + params.id().len()
                    + 4 * g1_len::<E>()
                    + 4 * offline_euro::pairing::g2_len::<E>();
                let crs = Crs::from_bytes(r.take(crs_len)?, params)?;
                let bank_pk = match r.u8()? {
                    0 => None,
                    1 => Some(r.g1::<E>()?),
                    _ => return Err(WireError::BadFlag),
                };
                Message::ParamsRep { crs, bank_pk }
            }
            tag::WITHDRAW_INIT => Message::WithdrawInit {
                pubkey: r.g1::<E>()?,
            },
            tag::WITHDRAW_NONCE => Message::WithdrawNonce { r: r.g1::<E>()? },
            tag::WITHDRAW_CHALLENGE => Message::WithdrawChallenge {
                c_prime: r.scalar::<E>()?,
            },
            tag::WITHDRAW_RESP => Message::WithdrawResp {
                sigma_prime: r.scalar::<E>()?,
            },
            tag::TRANSFER_INIT => Message::TransferInit {
                elements: RandomizationElements::from_bytes(r.rest())?,
            },
            tag::TRANSFER_PAYLOAD => Message::TransferPayload {
                bundle: TransferBundle::from_bytes(r.rest())?,
            },
            tag::DEPOSIT_INIT => Message::DepositInit {
                pubkey: r.g1::<E>()?,
            },
            tag::DEPOSIT_PAYLOAD => Message::DepositPayload {
                bundle: TransferBundle::from_bytes(r.rest())?,
            },
            tag::REVOKE_REQ => {
                let w = TransactionProof::<E>::encoded_len();
                let proof_a = Box::new(TransactionProof::from_bytes(r.take(w)?)?);
                let proof_b = Box::new(TransactionProof::from_bytes(r.take(w)?)?);
                Message::RevokeReq { proof_a, proof_b }
            }
            tag::REVOKE_REP => {
                let outcome = match r.u8()? {
                    0 => RevocationOutcome::NotDoubleSpend,
                    1 => RevocationOutcome::DoubleSpender {
                        identity: r.string()?,
                    },
                    2 => RevocationOutcome::UnknownKey,
                    _ => return Err(WireError::BadFlag),
                };
                Message::RevokeRep { outcome }
            }
            tag::ACK => Message::Ack,
            tag::ERR => {
                let code = ErrCode::from_u8(r.u8()?).ok_or(WireError::BadFlag)?;
                let detail = r.string()?;
                Message::Err { code, detail }
            }
            other => return Err(WireError::UnknownTag(other)),
        };
        r.finish()?;
        Ok(msg)
    }
}
