//! The mixer contract: deposits into a Merkle accumulator, withdrawals and
//! reward redemptions gated by nullifiers and membership proofs, with the
//! pooled principal invested in the lending model.

mod system;

use std::collections::{HashSet, VecDeque};

use rand::RngCore;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fieldhash::{FieldElement, HashKind};
use crate::ledger::{Address, DepositPayload, RedeemPayload, Revert, WithdrawPayload};
use crate::lending::{LendingError, LendingState};
use crate::merkle::{MerkleError, MerkleTree, MAX_DEPTH};
use crate::zkrelation::{self, ProvingKey, Statement, VerifyingKey};

pub use system::{AmrSystem, RedeemRecord, SystemConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContractError {
    #[error("deposit of {got} does not match denomination {expected}")]
    WrongDenomination { expected: u128, got: u128 },
    #[error("deposit tree is full")]
    TreeFull,
    #[error("root is not in the recent-root list")]
    StaleRoot,
    #[error("nullifier already spent")]
    DoubleSpend,
    #[error("proof does not verify")]
    BadProof,
    #[error("root does not match the current reward root")]
    WrongRewardRoot,
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Lending(#[from] LendingError),
    #[error(transparent)]
    Merkle(#[from] MerkleError),
}

impl ContractError {
    pub fn code(&self) -> &'static str {
        match self {
            ContractError::WrongDenomination { .. } => "WrongDenomination",
            ContractError::TreeFull => "TreeFull",
            ContractError::StaleRoot => "StaleRoot",
            ContractError::DoubleSpend => "DoubleSpend",
            ContractError::BadProof => "BadProof",
            ContractError::WrongRewardRoot => "WrongRewardRoot",
            ContractError::BadConfig(_) => "BadConfig",
            ContractError::Lending(_) => "Lending",
            ContractError::Merkle(_) => "Merkle",
        }
    }
}

impl From<ContractError> for Revert {
    fn from(e: ContractError) -> Self {
        Revert::new(e.code(), e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AmrParams {
    pub amt: u128,
    pub amt_rwd: u128,
    pub t_con: u64,
    pub depth: u32,
    /// Length of the recent-root list.
    pub k: usize,
    pub hash_kind: HashKind,
}

impl AmrParams {
    pub fn validate(&self) -> Result<(), ContractError> {
        if self.amt == 0 || self.amt_rwd == 0 {
            return Err(ContractError::BadConfig("amounts must be positive".into()));
        }
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(ContractError::BadConfig(format!(
                "depth {} outside 1..={MAX_DEPTH}",
                self.depth
            )));
        }
        if self.k == 0 {
            return Err(ContractError::BadConfig(
                "root list length must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A reward root. `height` is when it entered the `next` slot, `adopted_at`
/// when it was promoted to `curr`, and `leaves` the deposit-list length it
/// covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RewardRoot {
    pub root: FieldElement,
    pub height: u64,
    pub leaves: u64,
    pub adopted_at: u64,
}

/// Public contract data a client reads before building a transaction.
#[derive(Debug, Clone)]
pub struct ContractSnapshot {
    pub params: AmrParams,
    pub height: u64,
    pub deposit_list: Vec<FieldElement>,
    pub root_list: Vec<FieldElement>,
    pub root_rwd_curr: RewardRoot,
    pub root_rwd_next: RewardRoot,
    pub ek: ProvingKey,
}

impl ContractSnapshot {
    pub fn newest_root(&self) -> FieldElement {
        *self.root_list.last().expect("root list is never empty")
    }
}

/// Coins moved by a successful withdraw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WithdrawEffects {
    pub to_sender: u128,
    pub to_pool: u128,
    pub interest: u128,
    pub reinvested: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmrState {
    pub params: AmrParams,
    #[serde(skip)]
    tree: MerkleTree,
    /// Next leaf counter; starts at 1.
    pub index: u64,
    pub deposit_list: Vec<FieldElement>,
    pub nullifier_list: Vec<FieldElement>,
    #[serde(skip)]
    nullifier_set: HashSet<FieldElement>,
    pub root_list: VecDeque<FieldElement>,
    pub root_rwd_curr: RewardRoot,
    pub root_rwd_next: RewardRoot,
    pub share_balance: u128,
    #[serde(skip)]
    ek: ProvingKey,
    #[serde(skip)]
    vk: VerifyingKey,
}

impl AmrState {
    pub fn setup<R: RngCore + ?Sized>(
        params: AmrParams,
        rng: &mut R,
    ) -> Result<Self, ContractError> {
        params.validate()?;
        let tree = MerkleTree::init(params.depth, params.hash_kind)?;
        let empty = tree.root();
        let (ek, vk) = zkrelation::setup(params.hash_kind, params.depth, rng);
        let genesis = RewardRoot {
            root: empty,
            height: 0,
            leaves: 0,
            adopted_at: 0,
        };
        Ok(AmrState {
            params,
            tree,
            index: 1,
            deposit_list: Vec::new(),
            nullifier_list: Vec::new(),
            nullifier_set: HashSet::new(),
            root_list: std::iter::repeat(empty).take(params.k).collect(),
            root_rwd_curr: genesis,
            root_rwd_next: genesis,
            share_balance: 0,
            ek,
            vk,
        })
    }

    pub fn tree(&self) -> &MerkleTree {
        &self.tree
    }

    pub fn proving_key(&self) -> &ProvingKey {
        &self.ek
    }

    pub fn deposits_outstanding(&self) -> u64 {
        (self.deposit_list.len() - self.nullifier_list.len()) as u64
    }

    pub fn is_spent(&self, sn: &FieldElement) -> bool {
        self.nullifier_set.contains(sn)
    }

    pub fn snapshot(&self, height: u64) -> ContractSnapshot {
        ContractSnapshot {
            params: self.params,
            height,
            deposit_list: self.deposit_list.clone(),
            root_list: self.root_list.iter().copied().collect(),
            root_rwd_curr: self.root_rwd_curr,
            root_rwd_next: self.root_rwd_next,
            ek: self.ek.clone(),
        }
    }

    /// SHA-256 of the canonical byte serialization of the full state.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.index.to_be_bytes());
        h.update(self.tree.root().to_bytes_be());
        h.update((self.deposit_list.len() as u64).to_be_bytes());
        for cm in &self.deposit_list {
            h.update(cm.to_bytes_be());
        }
        h.update((self.nullifier_list.len() as u64).to_be_bytes());
        for sn in &self.nullifier_list {
            h.update(sn.to_bytes_be());
        }
        for root in &self.root_list {
            h.update(root.to_bytes_be());
        }
        for rr in [&self.root_rwd_curr, &self.root_rwd_next] {
            h.update(rr.root.to_bytes_be());
            h.update(rr.height.to_be_bytes());
            h.update(rr.leaves.to_be_bytes());
            h.update(rr.adopted_at.to_be_bytes());
        }
        h.update(self.share_balance.to_be_bytes());
        h.finalize().into()
    }

    fn insert_commitment(&mut self, cm: FieldElement, height: u64) -> Result<(), ContractError> {
        if self.index > self.tree.capacity() {
            return Err(ContractError::TreeFull);
        }
        let root = self.tree.update(self.index - 1, cm)?;
        self.deposit_list.push(cm);
        self.index += 1;
        self.root_list.pop_front();
        self.root_list.push_back(root);
        if height.saturating_sub(self.root_rwd_next.height) >= self.params.t_con {
            self.root_rwd_curr = RewardRoot {
                adopted_at: height,
                ..self.root_rwd_next
            };
            self.root_rwd_next = RewardRoot {
                root,
                height,
                leaves: self.deposit_list.len() as u64,
                adopted_at: 0,
            };
        }
        Ok(())
    }

    fn ensure_tree_space(&self) -> Result<(), ContractError> {
        if self.index > self.tree.capacity() {
            Err(ContractError::TreeFull)
        } else {
            Ok(())
        }
    }

    fn spend(&mut self, sn: FieldElement) {
        self.nullifier_list.push(sn);
        self.nullifier_set.insert(sn);
    }

    pub fn accept_deposit(
        &mut self,
        lending: &mut LendingState,
        payload: &DepositPayload,
        height: u64,
    ) -> Result<(), ContractError> {
        if payload.amt != self.params.amt {
            return Err(ContractError::WrongDenomination {
                expected: self.params.amt,
                got: payload.amt,
            });
        }
        self.ensure_tree_space()?;
        self.share_balance += lending.deposit(payload.amt)?;
        self.insert_commitment(payload.cm, height)
    }

    pub fn issue_withdraw(
        &mut self,
        lending: &mut LendingState,
        sender: Address,
        payload: &WithdrawPayload,
    ) -> Result<WithdrawEffects, ContractError> {
        if !self.root_list.contains(&payload.root) {
            return Err(ContractError::StaleRoot);
        }
        if self.is_spent(&payload.sn) {
            return Err(ContractError::DoubleSpend);
        }
        let st = Statement {
            pk: sender.0,
            sn: payload.sn,
            root: payload.root,
        };
        if !zkrelation::verify(&self.vk, &st, &payload.proof) {
            return Err(ContractError::BadProof);
        }
        let n = self.deposits_outstanding() as u128;
        debug_assert!(n > 0, "a valid proof implies an unspent deposit");
        let redeemed = lending.redeem(self.share_balance)?;
        self.share_balance = 0;
        let principal = n * self.params.amt;
        let interest = redeemed.saturating_sub(principal);
        let to_pool = interest / n;
        let to_sender = self.params.amt.min(redeemed - to_pool);
        let reinvested = redeemed - to_pool - to_sender;
        if reinvested > 0 {
            self.share_balance = lending.deposit(reinvested)?;
        }
        self.spend(payload.sn);
        Ok(WithdrawEffects {
            to_sender,
            to_pool,
            interest,
            reinvested,
        })
    }

    pub fn issue_reward(
        &mut self,
        sender: Address,
        payload: &RedeemPayload,
        height: u64,
    ) -> Result<u128, ContractError> {
        if payload.root != self.root_rwd_curr.root {
            return Err(ContractError::WrongRewardRoot);
        }
        if self.is_spent(&payload.sn) {
            return Err(ContractError::DoubleSpend);
        }
        let st = Statement {
            pk: sender.0,
            sn: payload.sn,
            root: payload.root,
        };
        if !zkrelation::verify(&self.vk, &st, &payload.proof) {
            return Err(ContractError::BadProof);
        }
        self.ensure_tree_space()?;
        self.spend(payload.sn);
        self.insert_commitment(payload.cm_new, height)?;
        Ok(self.params.amt_rwd)
    }
}
