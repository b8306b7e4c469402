//! Scenario files: a seed, protocol parameters, fees, and actors with
//! per-block scripts.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::parse_amount;
use crate::contract::{AmrParams, SystemConfig};
use crate::fieldhash::HashKind;
use crate::ledger::{Asset, OrderingPolicy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingName {
    Fifo,
    AdversaryFirst,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub amount: String,
    pub reward_amount: String,
    pub t_con: u64,
    pub depth: u32,
    #[serde(default = "default_k")]
    pub root_list_len: usize,
    #[serde(default = "default_hash")]
    pub hash: HashKind,
    #[serde(default = "default_rate")]
    pub rate_per_block: String,
    #[serde(default = "default_t_max")]
    pub t_max: u64,
}

fn default_k() -> usize {
    100
}
fn default_hash() -> HashKind {
    HashKind::Mimc
}
fn default_rate() -> String {
    "1.000001".into()
}
fn default_t_max() -> u64 {
    crate::pool::DEFAULT_T_MAX
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeesSection {
    #[serde(default = "default_fee_dep")]
    pub deposit: String,
    #[serde(default = "default_fee_dep")]
    pub withdraw: String,
    #[serde(default = "default_fee_dep")]
    pub redeem: String,
    #[serde(default = "default_fee_small")]
    pub lock: String,
    #[serde(default = "default_fee_small")]
    pub claim: String,
    #[serde(default = "default_fee_small")]
    pub unlock: String,
    #[serde(default = "default_fee_small")]
    pub transfer: String,
}

fn default_fee_dep() -> String {
    "0.02".into()
}
fn default_fee_small() -> String {
    "0.01".into()
}

impl Default for FeesSection {
    fn default() -> Self {
        FeesSection {
            deposit: default_fee_dep(),
            withdraw: default_fee_dep(),
            redeem: default_fee_dep(),
            lock: default_fee_small(),
            claim: default_fee_small(),
            unlock: default_fee_small(),
            transfer: default_fee_small(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Honest,
    Adversary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    Deposit,
    Withdraw,
    Redeem,
    Lock,
    Claim,
    Unlock,
    Transfer,
    /// Resubmit the exact transaction of an earlier action.
    Replay,
    /// Re-sign an earlier action's payload as this actor.
    Steal,
    /// Withdraw with a random nullifier and a guessed proof.
    ForgeWithdraw,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub at: u64,
    pub op: Option<Op>,
    pub id: Option<String>,
    pub note: Option<String>,
    pub new_note: Option<String>,
    pub to: Option<String>,
    pub fee_payer: Option<String>,
    pub amount: Option<String>,
    pub asset: Option<Asset>,
    pub t_lock: Option<u64>,
    pub prepared_at: Option<u64>,
    pub of: Option<String>,
    #[serde(default)]
    pub use_next_root: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorSpec {
    pub name: String,
    pub role: Role,
    #[serde(default = "zero")]
    pub balance: String,
    #[serde(default)]
    pub relayer: bool,
    pub link_group: Option<u32>,
    #[serde(default)]
    pub script: Vec<ActionSpec>,
}

fn zero() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    pub blocks: u64,
    #[serde(default = "default_ordering")]
    pub ordering: OrderingName,
    #[serde(default)]
    pub custom_order: Vec<usize>,
    /// Monte-Carlo trials per honest spend in the privacy report; 0 disables.
    #[serde(default)]
    pub monte_carlo_trials: u64,
    pub params: ParamsSection,
    #[serde(default)]
    pub fees: FeesSection,
    #[serde(default, rename = "actor")]
    pub actors: Vec<ActorSpec>,
}

fn default_ordering() -> OrderingName {
    OrderingName::Fifo
}

/// Parsed fee schedule in fixed-point units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fees {
    pub deposit: u128,
    pub withdraw: u128,
    pub redeem: u128,
    pub lock: u128,
    pub claim: u128,
    pub unlock: u128,
    pub transfer: u128,
}

fn amount_field(field: &str, v: &str) -> Result<u128, ConfigError> {
    parse_amount(v).map_err(|e| invalid(field, e.to_string()))
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut s = Self::from_toml(&text)?;
        if s.name.is_empty() {
            s.name = path
                .file_stem()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn ordering_policy(&self) -> OrderingPolicy {
        match self.ordering {
            OrderingName::Fifo => OrderingPolicy::Fifo,
            OrderingName::AdversaryFirst => OrderingPolicy::AdversaryFirst,
            OrderingName::Custom => OrderingPolicy::Custom(self.custom_order.clone()),
        }
    }

    pub fn system_config(&self) -> Result<SystemConfig, ConfigError> {
        let p = &self.params;
        let params = AmrParams {
            amt: amount_field("params.amount", &p.amount)?,
            amt_rwd: amount_field("params.reward_amount", &p.reward_amount)?,
            t_con: p.t_con,
            depth: p.depth,
            k: p.root_list_len,
            hash_kind: p.hash,
        };
        params
            .validate()
            .map_err(|e| invalid("params", e.to_string()))?;
        let rate = amount_field("params.rate_per_block", &p.rate_per_block)?;
        if rate < crate::amount::UNIT {
            return Err(invalid("params.rate_per_block", "must be at least 1"));
        }
        if p.t_max == 0 {
            return Err(invalid("params.t_max", "must be positive"));
        }
        Ok(SystemConfig {
            params,
            rate_per_block: rate,
            t_max: p.t_max,
        })
    }

    pub fn fees(&self) -> Result<Fees, ConfigError> {
        let f = &self.fees;
        Ok(Fees {
            deposit: amount_field("fees.deposit", &f.deposit)?,
            withdraw: amount_field("fees.withdraw", &f.withdraw)?,
            redeem: amount_field("fees.redeem", &f.redeem)?,
            lock: amount_field("fees.lock", &f.lock)?,
            claim: amount_field("fees.claim", &f.claim)?,
            unlock: amount_field("fees.unlock", &f.unlock)?,
            transfer: amount_field("fees.transfer", &f.transfer)?,
        })
    }

    pub fn actor_index(&self, name: &str) -> Option<usize> {
        self.actors.iter().position(|a| a.name == name)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system_config()?;
        self.fees()?;
        if self.blocks == 0 {
            return Err(invalid("blocks", "must be positive"));
        }
        if self.ordering != OrderingName::Custom && !self.custom_order.is_empty() {
            return Err(invalid(
                "custom_order",
                "only allowed with ordering = \"custom\"",
            ));
        }
        let mut names = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for (ai, actor) in self.actors.iter().enumerate() {
            let base = format!("actor[{ai}]");
            if actor.name.is_empty() || !names.insert(actor.name.as_str()) {
                return Err(invalid(
                    format!("{base}.name"),
                    "must be non-empty and unique",
                ));
            }
            amount_field(&format!("{base}.balance"), &actor.balance)?;
            let mut notes = BTreeSet::new();
            for (si, act) in actor.script.iter().enumerate() {
                let field = format!("{base}.script[{si}]");
                let op = act
                    .op
                    .ok_or_else(|| invalid(format!("{field}.op"), "missing"))?;
                if act.at == 0 || act.at > self.blocks {
                    return Err(invalid(
                        format!("{field}.at"),
                        format!("must be in 1..={}", self.blocks),
                    ));
                }
                if let Some(p) = act.prepared_at {
                    if p >= act.at {
                        return Err(invalid(format!("{field}.prepared_at"), "must precede `at`"));
                    }
                }
                if let Some(id) = &act.id {
                    if !ids.insert(id.clone()) {
                        return Err(invalid(
                            format!("{field}.id"),
                            format!("duplicate id `{id}`"),
                        ));
                    }
                }
                for (key, who) in [("to", &act.to), ("fee_payer", &act.fee_payer)] {
                    if let Some(n) = who {
                        if self.actor_index(n).is_none() {
                            return Err(invalid(
                                format!("{field}.{key}"),
                                format!("unknown actor `{n}`"),
                            ));
                        }
                    }
                }
                if let Some(a) = &act.amount {
                    amount_field(&format!("{field}.amount"), a)?;
                }
                let need = |key: &str, present: bool| {
                    if present {
                        Ok(())
                    } else {
                        Err(invalid(
                            format!("{field}.{key}"),
                            format!("required for {op:?}"),
                        ))
                    }
                };
                match op {
                    Op::Deposit => {
                        need("note", act.note.is_some())?;
                        let n = act.note.as_ref().expect("checked");
                        if !notes.insert(n.clone()) {
                            return Err(invalid(
                                format!("{field}.note"),
                                format!("note `{n}` already defined"),
                            ));
                        }
                    }
                    Op::Withdraw => need("note", act.note.is_some())?,
                    Op::Redeem => {
                        need("note", act.note.is_some())?;
                        let n = act
                            .new_note
                            .clone()
                            .unwrap_or_else(|| format!("{}'", act.note.as_ref().expect("checked")));
                        if !notes.insert(n.clone()) {
                            return Err(invalid(
                                format!("{field}.new_note"),
                                format!("note `{n}` already defined"),
                            ));
                        }
                    }
                    Op::Lock => {
                        need("amount", act.amount.is_some())?;
                        need("t_lock", act.t_lock.is_some())?;
                    }
                    Op::Transfer => {
                        need("to", act.to.is_some())?;
                        need("amount", act.amount.is_some())?;
                    }
                    Op::Replay | Op::Steal => need("of", act.of.is_some())?,
                    Op::Claim | Op::Unlock | Op::ForgeWithdraw => {}
                }
            }
        }
        for (ai, actor) in self.actors.iter().enumerate() {
            for (si, act) in actor.script.iter().enumerate() {
                if let Some(of) = &act.of {
                    if !ids.contains(of) {
                        return Err(invalid(
                            format!("actor[{ai}].script[{si}].of"),
                            format!("unknown id `{of}`"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}
