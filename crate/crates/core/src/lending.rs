//! Share-based lending pool with a per-block exchange-rate growth factor.
//!
//! Depositors receive `floor(amt / rate)` shares; redeeming pays
//! `floor(shares * rate)`, capped by the cash held. Rounding remainders stay
//! in the pool.

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::amount::{mul_div_floor, UNIT};

/// Internal precision for compounding the growth factor (36 decimals).
const WIDE: u128 = UNIT * UNIT;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LendingError {
    #[error("deposit of zero")]
    ZeroAmount,
    #[error("redeeming {requested} shares, only {available} outstanding")]
    InsufficientShares { requested: u128, available: u128 },
    #[error("rate per block must be at least 1")]
    BadRate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LendingState {
    /// Cash held, underlying units.
    pub total_underlying: u128,
    pub total_shares: u128,
    /// Underlying per share, 18-decimal fixed point.
    pub exchange_rate: u128,
    pub rate_per_block: u128,
    /// Interest credited by accrual so far.
    pub minted_interest: u128,
    pub last_accrual_height: u64,
}

impl LendingState {
    pub fn new(rate_per_block: u128) -> Result<Self, LendingError> {
        if rate_per_block < UNIT {
            return Err(LendingError::BadRate);
        }
        Ok(LendingState {
            total_underlying: 0,
            total_shares: 0,
            exchange_rate: UNIT,
            rate_per_block,
            minted_interest: 0,
            last_accrual_height: 0,
        })
    }

    /// `rate_per_block ^ blocks` at 36-decimal precision.
    fn growth(&self, blocks: u64) -> BigUint {
        let wide = BigUint::from(WIDE);
        let mut base = BigUint::from(self.rate_per_block) * BigUint::from(UNIT);
        let mut acc = wide.clone();
        let mut n = blocks;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base / &wide;
            }
            base = &base * &base / &wide;
            n >>= 1;
        }
        acc
    }

    /// Value in underlying of `shares` at the current rate.
    pub fn value_of(&self, shares: u128) -> u128 {
        mul_div_floor(shares, self.exchange_rate, UNIT)
    }

    pub fn accrue(&mut self, blocks: u64) {
        if blocks == 0 || self.rate_per_block == UNIT {
            return;
        }
        let new_rate =
            BigUint::from(self.exchange_rate) * self.growth(blocks) / BigUint::from(WIDE);
        let new_rate = u128::try_from(new_rate).expect("exchange rate fits in u128");
        let before = self.value_of(self.total_shares);
        self.exchange_rate = new_rate;
        let interest = self.value_of(self.total_shares) - before;
        self.total_underlying += interest;
        self.minted_interest += interest;
    }

    /// Accrues up to `height`.
    pub fn accrue_to(&mut self, height: u64) {
        if height > self.last_accrual_height {
            self.accrue(height - self.last_accrual_height);
            self.last_accrual_height = height;
        }
    }

    pub fn deposit(&mut self, amt: u128) -> Result<u128, LendingError> {
        if amt == 0 {
            return Err(LendingError::ZeroAmount);
        }
        let shares = mul_div_floor(amt, UNIT, self.exchange_rate);
        self.total_underlying += amt;
        self.total_shares += shares;
        Ok(shares)
    }

    pub fn redeem(&mut self, shares: u128) -> Result<u128, LendingError> {
        if shares > self.total_shares {
            return Err(LendingError::InsufficientShares {
                requested: shares,
                available: self.total_shares,
            });
        }
        let payout = self.value_of(shares).min(self.total_underlying);
        self.total_shares -= shares;
        self.total_underlying -= payout;
        Ok(payout)
    }
}
