//! Interest-distribution pool with time-weighted token locks.
//!
//! A lock of `gamma` tokens that unlocks at height `u` has weight
//! `gamma * (u - h) / t_max` at height `h`. Claims pay out of the current
//! interest balance in proportion to the claimer's weight among lockers who
//! have not yet claimed since interest last arrived.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::amount::mul_div_floor;
use crate::ledger::Address;

pub const DEFAULT_T_MAX: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PoolError {
    #[error("holding {available} tokens, cannot lock {required}")]
    InsufficientTokens { required: u128, available: u128 },
    #[error("lock duration {t_lock} outside 1..={t_max}")]
    BadDuration { t_lock: u64, t_max: u64 },
    #[error("lock amount must be positive")]
    ZeroAmount,
    #[error("no live lock")]
    NoLock,
    #[error("total voting weight is zero")]
    ZeroTotalWeight,
    #[error("no expired lock to release")]
    NothingToUnlock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lock {
    pub owner: Address,
    pub gamma: u128,
    pub unlock_height: u64,
    pub t_lock: u64,
    pub released: bool,
}

pub fn voting_weight(lock: &Lock, height: u64, t_max: u64) -> u128 {
    let left = lock.unlock_height.saturating_sub(height);
    mul_div_floor(lock.gamma, left as u128, t_max as u128)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoolState {
    pub t_max: u64,
    pub locks: Vec<Lock>,
    pub interest_balance: u128,
    pub total_received: u128,
    pub claimed: BTreeMap<Address, u128>,
    /// Bumped whenever new interest arrives.
    pub epoch: u64,
    last_claim_epoch: BTreeMap<Address, u64>,
}

impl PoolState {
    pub fn new(t_max: u64) -> Self {
        PoolState {
            t_max,
            locks: Vec::new(),
            interest_balance: 0,
            total_received: 0,
            claimed: BTreeMap::new(),
            epoch: 0,
            last_claim_epoch: BTreeMap::new(),
        }
    }

    pub fn escrowed(&self) -> u128 {
        self.locks
            .iter()
            .filter(|l| !l.released)
            .map(|l| l.gamma)
            .sum()
    }

    pub fn total_paid(&self) -> u128 {
        self.claimed.values().sum()
    }

    pub fn create_lock(
        &mut self,
        owner: Address,
        gamma: u128,
        t_lock: u64,
        height: u64,
        available_tokens: u128,
    ) -> Result<(), PoolError> {
        if gamma == 0 {
            return Err(PoolError::ZeroAmount);
        }
        if t_lock == 0 || t_lock > self.t_max {
            return Err(PoolError::BadDuration {
                t_lock,
                t_max: self.t_max,
            });
        }
        if available_tokens < gamma {
            return Err(PoolError::InsufficientTokens {
                required: gamma,
                available: available_tokens,
            });
        }
        self.locks.push(Lock {
            owner,
            gamma,
            unlock_height: height + t_lock,
            t_lock,
            released: false,
        });
        Ok(())
    }

    pub fn receive_interest(&mut self, amount: u128) {
        if amount > 0 {
            self.interest_balance += amount;
            self.total_received += amount;
            self.epoch += 1;
        }
    }

    fn has_claimed_this_epoch(&self, owner: &Address) -> bool {
        self.last_claim_epoch.get(owner) == Some(&self.epoch)
    }

    pub fn weight_of(&self, owner: &Address, height: u64) -> u128 {
        self.locks
            .iter()
            .filter(|l| &l.owner == owner && !l.released)
            .map(|l| voting_weight(l, height, self.t_max))
            .sum()
    }

    /// Weight of every locker still eligible in the current epoch.
    pub fn eligible_weight(&self, height: u64) -> u128 {
        self.locks
            .iter()
            .filter(|l| !l.released && !self.has_claimed_this_epoch(&l.owner))
            .map(|l| voting_weight(l, height, self.t_max))
            .sum()
    }

    pub fn claim(&mut self, owner: Address, height: u64) -> Result<u128, PoolError> {
        let live = self
            .locks
            .iter()
            .any(|l| l.owner == owner && !l.released && l.unlock_height > height);
        if !live {
            return Err(PoolError::NoLock);
        }
        if self.has_claimed_this_epoch(&owner) {
            return Ok(0);
        }
        let w = self.weight_of(&owner, height);
        let total = self.eligible_weight(height);
        if total == 0 {
            return Err(PoolError::ZeroTotalWeight);
        }
        let payout = mul_div_floor(self.interest_balance, w, total);
        self.interest_balance -= payout;
        *self.claimed.entry(owner).or_default() += payout;
        self.last_claim_epoch.insert(owner, self.epoch);
        Ok(payout)
    }

    /// Releases every expired lock of `owner`; returns the tokens freed.
    pub fn unlock(&mut self, owner: Address, height: u64) -> Result<u128, PoolError> {
        let mut freed = 0;
        for l in self.locks.iter_mut() {
            if l.owner == owner && !l.released && l.unlock_height <= height {
                l.released = true;
                freed += l.gamma;
            }
        }
        if freed == 0 {
            return Err(PoolError::NothingToUnlock);
        }
        Ok(freed)
    }
}
