use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{Address, Asset, SecretKey};
use crate::fieldhash::{h_p_parts, FieldElement, HashKind, DOMAIN_SIG};
use crate::zkrelation::Proof;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DepositPayload {
    pub amt: u128,
    pub cm: FieldElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WithdrawPayload {
    pub sn: FieldElement,
    pub root: FieldElement,
    pub proof: Proof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RedeemPayload {
    pub sn: FieldElement,
    pub root: FieldElement,
    pub proof: Proof,
    pub cm_new: FieldElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payload {
    Deposit(DepositPayload),
    Withdraw(WithdrawPayload),
    Redeem(RedeemPayload),
    Lock {
        gamma: u128,
        t_lock: u64,
    },
    Claim,
    Unlock,
    Transfer {
        to: Address,
        amount: u128,
        asset: Asset,
    },
}

impl Payload {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Payload::Deposit(_) => "deposit",
            Payload::Withdraw(_) => "withdraw",
            Payload::Redeem(_) => "redeem",
            Payload::Lock { .. } => "lock",
            Payload::Claim => "claim",
            Payload::Unlock => "unlock",
            Payload::Transfer { .. } => "transfer",
        }
    }

    /// Coins the sender must hold besides the fee.
    pub fn coin_value(&self) -> u128 {
        match self {
            Payload::Deposit(p) => p.amt,
            Payload::Transfer {
                amount,
                asset: Asset::Coin,
                ..
            } => *amount,
            _ => 0,
        }
    }

    fn write_canonical(&self, out: &mut Vec<u8>) {
        let fe = |out: &mut Vec<u8>, x: &FieldElement| out.extend_from_slice(&x.to_bytes_be());
        match self {
            Payload::Deposit(p) => {
                out.push(1);
                out.extend_from_slice(&p.amt.to_be_bytes());
                fe(out, &p.cm);
            }
            Payload::Withdraw(p) => {
                out.push(2);
                fe(out, &p.sn);
                fe(out, &p.root);
                out.extend_from_slice(&p.proof.to_bytes());
            }
            Payload::Redeem(p) => {
                out.push(3);
                fe(out, &p.sn);
                fe(out, &p.root);
                out.extend_from_slice(&p.proof.to_bytes());
                fe(out, &p.cm_new);
            }
            Payload::Lock { gamma, t_lock } => {
                out.push(4);
                out.extend_from_slice(&gamma.to_be_bytes());
                out.extend_from_slice(&t_lock.to_be_bytes());
            }
            Payload::Claim => out.push(5),
            Payload::Unlock => out.push(6),
            Payload::Transfer { to, amount, asset } => {
                out.push(7);
                fe(out, &to.0);
                out.extend_from_slice(&amount.to_be_bytes());
                out.push(match asset {
                    Asset::Coin => 0,
                    Asset::GovToken => 1,
                });
            }
        }
    }
}

/// A signed transaction. `adversarial` is simulator metadata used only by
/// ordering policies and is not covered by the signature.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct Tx {
    pub sender: Address,
    pub fee_payer: Address,
    pub fee: u128,
    pub payload: Payload,
    pub signature: FieldElement,
    pub adversarial: bool,
}

impl fmt::Debug for Tx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tx")
            .field("kind", &self.payload.kind_name())
            .field("sender", &self.sender)
            .field("fee", &self.fee)
            .field("adversarial", &self.adversarial)
            .finish()
    }
}

fn signing_digest(sender: &Address, fee_payer: &Address, fee: u128, payload: &Payload) -> [u8; 32] {
    let mut buf = Vec::with_capacity(192);
    buf.extend_from_slice(&sender.0.to_bytes_be());
    buf.extend_from_slice(&fee_payer.0.to_bytes_be());
    buf.extend_from_slice(&fee.to_be_bytes());
    payload.write_canonical(&mut buf);
    Sha256::digest(&buf).into()
}

impl Tx {
    pub fn sign(
        kind: HashKind,
        sk: &SecretKey,
        fee_payer: Option<Address>,
        fee: u128,
        payload: Payload,
    ) -> Tx {
        let sender = sk.address(kind);
        let fee_payer = fee_payer.unwrap_or(sender);
        let digest = signing_digest(&sender, &fee_payer, fee, &payload);
        Tx {
            sender,
            fee_payer,
            fee,
            payload,
            signature: h_p_parts(kind, &[DOMAIN_SIG, sk.as_bytes(), &digest]),
            adversarial: false,
        }
    }

    pub fn flagged_adversarial(mut self) -> Tx {
        self.adversarial = true;
        self
    }

    pub fn digest(&self) -> [u8; 32] {
        signing_digest(&self.sender, &self.fee_payer, self.fee, &self.payload)
    }

    pub fn verify_signature(&self, kind: HashKind, sk: &SecretKey) -> bool {
        if sk.address(kind) != self.sender {
            return false;
        }
        h_p_parts(kind, &[DOMAIN_SIG, sk.as_bytes(), &self.digest()]) == self.signature
    }
}
