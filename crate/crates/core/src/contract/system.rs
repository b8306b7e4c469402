use rand::RngCore;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{AmrParams, AmrState, ContractError, RewardRoot};
use crate::amount::UNIT;
use crate::fieldhash::FieldElement;
use crate::ledger::{Address, Asset, Balances, Holdings, Payload, Revert, Runtime, Tx};
use crate::lending::LendingState;
use crate::pool::{PoolState, DEFAULT_T_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SystemConfig {
    pub params: AmrParams,
    pub rate_per_block: u128,
    pub t_max: u64,
}

impl SystemConfig {
    pub fn new(params: AmrParams) -> Self {
        SystemConfig {
            params,
            rate_per_block: UNIT + UNIT / 1_000_000,
            t_max: DEFAULT_T_MAX,
        }
    }
}

/// Public facts about a successful redeem, kept for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RedeemRecord {
    pub height: u64,
    pub sn: FieldElement,
    pub cm_new: FieldElement,
    pub reward_root: RewardRoot,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SystemStats {
    pub deposits: u64,
    pub withdraws: u64,
    pub redeems: u64,
    pub deposited: u128,
    pub paid_to_withdrawers: u128,
    pub paid_to_pool: u128,
    pub paid_to_claimers: u128,
}

/// Contract, lending model and reward pool executing together as the
/// chain's runtime.
#[derive(Debug, Clone)]
pub struct AmrSystem {
    pub contract: AmrState,
    pub lending: LendingState,
    pub pool: PoolState,
    pub stats: SystemStats,
    pub redeems: Vec<RedeemRecord>,
    tokens_minted: u128,
}

impl AmrSystem {
    pub fn setup<R: RngCore + ?Sized>(
        config: SystemConfig,
        rng: &mut R,
    ) -> Result<Self, ContractError> {
        if config.t_max == 0 {
            return Err(ContractError::BadConfig("t_max must be positive".into()));
        }
        Ok(AmrSystem {
            contract: AmrState::setup(config.params, rng)?,
            lending: LendingState::new(config.rate_per_block)?,
            pool: PoolState::new(config.t_max),
            stats: SystemStats::default(),
            redeems: Vec::new(),
            tokens_minted: 0,
        })
    }

    pub fn contract_address() -> Address {
        Address::reserved("amr-contract")
    }

    pub fn tokens_minted(&self) -> u128 {
        self.tokens_minted
    }
}

fn revert_from<E: std::fmt::Display>(code: &'static str) -> impl Fn(E) -> Revert {
    move |e| Revert::new(code, e)
}

impl Runtime for AmrSystem {
    fn begin_block(&mut self, height: u64, events: &mut Vec<Value>) {
        let before = self.lending.minted_interest;
        self.lending.accrue_to(height);
        let interest = self.lending.minted_interest - before;
        if interest > 0 {
            events.push(json!({
                "event": "accrue",
                "interest": interest.to_string(),
                "exchange_rate": self.lending.exchange_rate.to_string(),
            }));
        }
    }

    fn execute(
        &mut self,
        tx: &Tx,
        height: u64,
        balances: &mut Balances,
        events: &mut Vec<Value>,
    ) -> Result<(), Revert> {
        match &tx.payload {
            Payload::Deposit(p) => {
                self.contract.accept_deposit(&mut self.lending, p, height)?;
                balances
                    .debit(tx.sender, Asset::Coin, p.amt)
                    .map_err(revert_from("InsufficientBalance"))?;
                self.stats.deposits += 1;
                self.stats.deposited += p.amt;
                events.push(json!({"event": "lending-deposit", "amount": p.amt.to_string()}));
            }
            Payload::Withdraw(p) => {
                let fx = self
                    .contract
                    .issue_withdraw(&mut self.lending, tx.sender, p)?;
                balances.credit(tx.sender, Asset::Coin, fx.to_sender);
                self.pool.receive_interest(fx.to_pool);
                self.stats.withdraws += 1;
                self.stats.paid_to_withdrawers += fx.to_sender;
                self.stats.paid_to_pool += fx.to_pool;
                events.push(json!({
                    "event": "lending-redeem",
                    "interest": fx.interest.to_string(),
                    "to_pool": fx.to_pool.to_string(),
                    "reinvested": fx.reinvested.to_string(),
                }));
            }
            Payload::Redeem(p) => {
                let reward_root = self.contract.root_rwd_curr;
                let minted = self.contract.issue_reward(tx.sender, p, height)?;
                balances.credit(tx.sender, Asset::GovToken, minted);
                self.tokens_minted += minted;
                self.stats.redeems += 1;
                self.redeems.push(RedeemRecord {
                    height,
                    sn: p.sn,
                    cm_new: p.cm_new,
                    reward_root,
                });
            }
            Payload::Lock { gamma, t_lock } => {
                let available = balances.tokens(&tx.sender);
                self.pool
                    .create_lock(tx.sender, *gamma, *t_lock, height, available)
                    .map_err(|e| Revert::new(pool_code(&e), e))?;
                balances
                    .debit(tx.sender, Asset::GovToken, *gamma)
                    .map_err(revert_from("InsufficientTokens"))?;
            }
            Payload::Claim => {
                let paid = self
                    .pool
                    .claim(tx.sender, height)
                    .map_err(|e| Revert::new(pool_code(&e), e))?;
                balances.credit(tx.sender, Asset::Coin, paid);
                self.stats.paid_to_claimers += paid;
            }
            Payload::Unlock => {
                let freed = self
                    .pool
                    .unlock(tx.sender, height)
                    .map_err(|e| Revert::new(pool_code(&e), e))?;
                balances.credit(tx.sender, Asset::GovToken, freed);
            }
            Payload::Transfer { .. } => {
                return Err(Revert::new(
                    "Unsupported",
                    "transfers are executed by the chain",
                ));
            }
        }
        Ok(())
    }

    fn state_digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.contract.digest());
        h.update(serde_json::to_vec(&self.lending).expect("lending state serializes"));
        h.update(serde_json::to_vec(&self.pool).expect("pool state serializes"));
        h.update(self.tokens_minted.to_be_bytes());
        h.finalize().into()
    }

    fn holdings(&self) -> Holdings {
        Holdings {
            coins_held: self.lending.total_underlying + self.pool.interest_balance,
            tokens_held: self.pool.escrowed(),
            coins_minted: self.lending.minted_interest,
            tokens_minted: self.tokens_minted,
        }
    }
}

fn pool_code(e: &crate::pool::PoolError) -> &'static str {
    use crate::pool::PoolError::*;
    match e {
        InsufficientTokens { .. } => "InsufficientTokens",
        BadDuration { .. } => "BadDuration",
        ZeroAmount => "ZeroAmount",
        NoLock => "NoLock",
        ZeroTotalWeight => "ZeroTotalWeight",
        NothingToUnlock => "NothingToUnlock",
    }
}
