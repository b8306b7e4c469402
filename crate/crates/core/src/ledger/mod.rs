//! Deterministic simulated blockchain: accounts, signed transactions, a
//! mempool with pluggable ordering, and per-block execution against a
//! [`Runtime`].

mod chain;
mod tx;

use std::collections::BTreeMap;
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fieldhash::{extract_pk, FieldElement, HashKind, SECRET_LEN};

pub use chain::{
    Block, Chain, ChainConfig, Holdings, OrderingPolicy, Outcome, Receipt, Revert, Runtime,
};
pub use tx::{DepositPayload, Payload, RedeemPayload, Tx, WithdrawPayload};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("signature does not verify for sender {0}")]
    BadSignature(Address),
    #[error("{payer} cannot act as fee payer for {sender}")]
    UnauthorizedFeePayer { sender: Address, payer: Address },
    #[error("{address} holds {available} {asset}, needs {required}")]
    InsufficientBalance {
        address: Address,
        asset: Asset,
        required: u128,
        available: u128,
    },
    #[error("account {0} already exists")]
    DuplicateAccount(Address),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Address(pub FieldElement);

impl Address {
    /// A fixed address for a system account; such addresses have no key.
    pub fn reserved(name: &str) -> Address {
        let digest = Sha256::digest(format!("AMR.address.{name}").as_bytes());
        Address(FieldElement::from_be_bytes_reduced(&digest))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hex = self.0.to_hex();
        write!(f, "Address({}..)", &hex[..12])
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_hex())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey([u8; SECRET_LEN]);

impl SecretKey {
    pub fn from_bytes(bytes: [u8; SECRET_LEN]) -> Self {
        SecretKey(bytes)
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; SECRET_LEN];
        rng.fill_bytes(&mut b);
        SecretKey(b)
    }

    pub fn as_bytes(&self) -> &[u8; SECRET_LEN] {
        &self.0
    }

    pub fn address(&self, kind: HashKind) -> Address {
        Address(extract_pk(kind, &self.0).expect("secret key has the right length"))
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Asset {
    Coin,
    #[serde(rename = "token")]
    GovToken,
}

impl fmt::Display for Asset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Asset::Coin => "coin",
            Asset::GovToken => "token",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Account {
    pub coins: u128,
    pub tokens: u128,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Balances {
    accounts: BTreeMap<Address, Account>,
}

impl Balances {
    pub fn get(&self, addr: &Address, asset: Asset) -> u128 {
        self.accounts.get(addr).map_or(0, |a| match asset {
            Asset::Coin => a.coins,
            Asset::GovToken => a.tokens,
        })
    }

    pub fn coins(&self, addr: &Address) -> u128 {
        self.get(addr, Asset::Coin)
    }

    pub fn tokens(&self, addr: &Address) -> u128 {
        self.get(addr, Asset::GovToken)
    }

    fn slot(&mut self, addr: Address, asset: Asset) -> &mut u128 {
        let acct = self.accounts.entry(addr).or_default();
        match asset {
            Asset::Coin => &mut acct.coins,
            Asset::GovToken => &mut acct.tokens,
        }
    }

    pub fn credit(&mut self, addr: Address, asset: Asset, amount: u128) {
        *self.slot(addr, asset) += amount;
    }

    pub fn debit(&mut self, addr: Address, asset: Asset, amount: u128) -> Result<(), LedgerError> {
        let available = self.get(&addr, asset);
        if available < amount {
            return Err(LedgerError::InsufficientBalance {
                address: addr,
                asset,
                required: amount,
                available,
            });
        }
        *self.slot(addr, asset) -= amount;
        Ok(())
    }

    pub fn transfer(
        &mut self,
        from: Address,
        to: Address,
        amount: u128,
        asset: Asset,
    ) -> Result<(), LedgerError> {
        self.debit(from, asset, amount)?;
        self.credit(to, asset, amount);
        Ok(())
    }

    pub fn total(&self, asset: Asset) -> u128 {
        self.accounts
            .values()
            .map(|a| match asset {
                Asset::Coin => a.coins,
                Asset::GovToken => a.tokens,
            })
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &Account)> {
        self.accounts.iter()
    }
}
