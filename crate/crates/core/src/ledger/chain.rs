use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{Address, Asset, Balances, LedgerError, Payload, SecretKey, Tx};
use crate::fieldhash::HashKind;

/// Why a transaction was rolled back during execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Revert {
    pub code: String,
    pub message: String,
}

impl Revert {
    pub fn new(code: impl Into<String>, message: impl fmt::Display) -> Self {
        Revert {
            code: code.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Revert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Assets held by the runtime outside of accounts, and what it has minted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Holdings {
    pub coins_held: u128,
    pub tokens_held: u128,
    pub coins_minted: u128,
    pub tokens_minted: u128,
}

/// Contract-side execution. The chain clones the runtime before every
/// transaction and restores the clone if execution reverts.
pub trait Runtime: Clone {
    fn begin_block(&mut self, height: u64, events: &mut Vec<Value>);

    fn execute(
        &mut self,
        tx: &Tx,
        height: u64,
        balances: &mut Balances,
        events: &mut Vec<Value>,
    ) -> Result<(), Revert>;

    fn state_digest(&self) -> [u8; 32];

    fn holdings(&self) -> Holdings;
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingPolicy {
    #[default]
    Fifo,
    AdversaryFirst,
    /// Mempool positions in execution order. Positions not listed follow in
    /// arrival order; out-of-range or repeated entries are ignored.
    Custom(Vec<usize>),
}

impl OrderingPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            OrderingPolicy::Fifo => "fifo",
            OrderingPolicy::AdversaryFirst => "adversary-first",
            OrderingPolicy::Custom(_) => "custom",
        }
    }

    pub fn order(&self, mempool: &[Tx]) -> Vec<usize> {
        match self {
            OrderingPolicy::Fifo => (0..mempool.len()).collect(),
            OrderingPolicy::AdversaryFirst => {
                let (adv, honest): (Vec<usize>, Vec<usize>) =
                    (0..mempool.len()).partition(|&i| mempool[i].adversarial);
                adv.into_iter().chain(honest).collect()
            }
            OrderingPolicy::Custom(perm) => {
                let mut seen = vec![false; mempool.len()];
                let mut out = Vec::with_capacity(mempool.len());
                for &i in perm {
                    if i < mempool.len() && !seen[i] {
                        seen[i] = true;
                        out.push(i);
                    }
                }
                out.extend((0..mempool.len()).filter(|&i| !seen[i]));
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Executed,
    Reverted(Revert),
    /// The fee payer could not cover the fee at execution time.
    Dropped,
}

impl Outcome {
    pub fn is_executed(&self) -> bool {
        matches!(self, Outcome::Executed)
    }

    pub fn revert_code(&self) -> Option<&str> {
        match self {
            Outcome::Reverted(r) => Some(&r.code),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub tx: Tx,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub height: u64,
    pub receipts: Vec<Receipt>,
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub kind: HashKind,
    pub policy: OrderingPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Chain {
    kind: HashKind,
    policy: OrderingPolicy,
    blocks: Vec<Block>,
    balances: Balances,
    keys: BTreeMap<Address, SecretKey>,
    relayers: BTreeSet<Address>,
    mempool: Vec<Tx>,
    fee_sink: Address,
    initial_coins: u128,
    log: Vec<String>,
}

impl Chain {
    pub fn new(config: ChainConfig) -> Self {
        let header = json!({
            "event": "header",
            "seed": config.seed,
            "ordering": config.policy.name(),
            "custom_order": match &config.policy {
                OrderingPolicy::Custom(p) => json!(p),
                _ => Value::Null,
            },
            "hash": config.kind.as_str(),
        });
        Chain {
            kind: config.kind,
            policy: config.policy,
            blocks: Vec::new(),
            balances: Balances::default(),
            keys: BTreeMap::new(),
            relayers: BTreeSet::new(),
            mempool: Vec::new(),
            fee_sink: Address::reserved("fee-sink"),
            initial_coins: 0,
            log: vec![header.to_string()],
        }
    }

    pub fn kind(&self) -> HashKind {
        self.kind
    }

    /// Height of the last mined block; 0 before the first block.
    pub fn height(&self) -> u64 {
        self.blocks.last().map_or(0, |b| b.height)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn balances(&self) -> &Balances {
        &self.balances
    }

    pub fn mempool(&self) -> &[Tx] {
        &self.mempool
    }

    pub fn fee_sink(&self) -> Address {
        self.fee_sink
    }

    pub fn initial_coins(&self) -> u128 {
        self.initial_coins
    }

    pub fn policy(&self) -> &OrderingPolicy {
        &self.policy
    }

    pub fn set_policy(&mut self, policy: OrderingPolicy) {
        self.policy = policy;
    }

    pub fn event_log(&self) -> &[String] {
        &self.log
    }

    pub fn event_log_text(&self) -> String {
        let mut s = self.log.join("\n");
        s.push('\n');
        s
    }

    /// Registers a key-holding account with an initial coin endowment.
    pub fn open_account(&mut self, sk: SecretKey, coins: u128) -> Result<Address, LedgerError> {
        let addr = sk.address(self.kind);
        if self.keys.contains_key(&addr) {
            return Err(LedgerError::DuplicateAccount(addr));
        }
        self.keys.insert(addr, sk);
        self.balances.credit(addr, Asset::Coin, coins);
        self.initial_coins += coins;
        self.log.push(
            json!({"event": "account", "address": addr.to_string(), "coins": coins.to_string()})
                .to_string(),
        );
        Ok(addr)
    }

    pub fn register_relayer(&mut self, addr: Address) {
        self.relayers.insert(addr);
    }

    pub fn is_relayer(&self, addr: &Address) -> bool {
        self.relayers.contains(addr)
    }

    pub fn transfer(
        &mut self,
        from: Address,
        to: Address,
        amount: u128,
        asset: Asset,
    ) -> Result<(), LedgerError> {
        self.balances.transfer(from, to, amount, asset)
    }

    pub fn submit(&mut self, tx: Tx) -> Result<(), LedgerError> {
        let ok = self
            .keys
            .get(&tx.sender)
            .is_some_and(|sk| tx.verify_signature(self.kind, sk));
        if !ok {
            return Err(LedgerError::BadSignature(tx.sender));
        }
        if tx.fee_payer != tx.sender && !self.relayers.contains(&tx.fee_payer) {
            return Err(LedgerError::UnauthorizedFeePayer {
                sender: tx.sender,
                payer: tx.fee_payer,
            });
        }
        let value = tx.payload.coin_value();
        let check = |addr: Address, required: u128| {
            let available = self.balances.coins(&addr);
            if available < required {
                Err(LedgerError::InsufficientBalance {
                    address: addr,
                    asset: Asset::Coin,
                    required,
                    available,
                })
            } else {
                Ok(())
            }
        };
        if tx.fee_payer == tx.sender {
            check(tx.sender, value + tx.fee)?;
        } else {
            check(tx.sender, value)?;
            check(tx.fee_payer, tx.fee)?;
        }
        self.mempool.push(tx);
        Ok(())
    }

    /// Full-state digest over balances and the runtime's own digest.
    pub fn state_digest<R: Runtime>(&self, rt: &R) -> [u8; 32] {
        let mut h = Sha256::new();
        for (addr, acct) in self.balances.iter() {
            h.update(addr.0.to_bytes_be());
            h.update(acct.coins.to_be_bytes());
            h.update(acct.tokens.to_be_bytes());
        }
        h.update(rt.state_digest());
        h.finalize().into()
    }

    pub fn mine_block<R: Runtime>(&mut self, rt: &mut R) -> &Block {
        let height = self.height() + 1;
        let mut events = Vec::new();
        rt.begin_block(height, &mut events);
        self.flush_events(height, &mut events);

        let pending = std::mem::take(&mut self.mempool);
        let order = self.policy.order(&pending);
        let mut slots: Vec<Option<Tx>> = pending.into_iter().map(Some).collect();
        let mut receipts = Vec::with_capacity(order.len());

        for (pos, idx) in order.into_iter().enumerate() {
            let tx = slots[idx].take().expect("each mempool entry executes once");
            let outcome = self.execute_one(rt, &tx, height, &mut events);
            let mut rec = json!({
                "event": "tx",
                "height": height,
                "pos": pos,
                "kind": tx.payload.kind_name(),
                "sender": tx.sender.to_string(),
                "fee_payer": tx.fee_payer.to_string(),
                "adversarial": tx.adversarial,
                "outcome": match &outcome {
                    Outcome::Executed => "ok",
                    Outcome::Reverted(_) => "reverted",
                    Outcome::Dropped => "dropped",
                },
                "state": hex::encode(self.state_digest(rt)),
            });
            if let Outcome::Reverted(r) = &outcome {
                rec["reason"] = json!(r.code);
                rec["detail"] = json!(r.message);
            }
            self.log.push(rec.to_string());
            self.flush_events(height, &mut events);
            receipts.push(Receipt { tx, outcome });
        }

        self.log.push(
            json!({
                "event": "block",
                "height": height,
                "txs": receipts.len(),
                "state": hex::encode(self.state_digest(rt)),
            })
            .to_string(),
        );
        self.blocks.push(Block { height, receipts });
        self.blocks.last().expect("just pushed")
    }

    fn execute_one<R: Runtime>(
        &mut self,
        rt: &mut R,
        tx: &Tx,
        height: u64,
        events: &mut Vec<Value>,
    ) -> Outcome {
        if self
            .balances
            .transfer(tx.fee_payer, self.fee_sink, tx.fee, Asset::Coin)
            .is_err()
        {
            return Outcome::Dropped;
        }
        let rt_snapshot = rt.clone();
        let bal_snapshot = self.balances.clone();
        let n_events = events.len();
        let result = match &tx.payload {
            Payload::Transfer { to, amount, asset } => self
                .balances
                .transfer(tx.sender, *to, *amount, *asset)
                .map_err(|e| Revert::new("InsufficientBalance", e)),
            _ => rt.execute(tx, height, &mut self.balances, events),
        };
        match result {
            Ok(()) => Outcome::Executed,
            Err(r) => {
                *rt = rt_snapshot;
                self.balances = bal_snapshot;
                events.truncate(n_events);
                Outcome::Reverted(r)
            }
        }
    }

    fn flush_events(&mut self, height: u64, events: &mut Vec<Value>) {
        for mut e in events.drain(..) {
            if let Value::Object(m) = &mut e {
                m.insert("height".into(), json!(height));
            }
            self.log.push(e.to_string());
        }
    }

    /// Checks coin and token conservation against the runtime's holdings.
    pub fn conservation<R: Runtime>(&self, rt: &R) -> Result<(), String> {
        let h = rt.holdings();
        let coins = self.balances.total(Asset::Coin) + h.coins_held;
        let expected = self.initial_coins + h.coins_minted;
        if coins != expected {
            return Err(format!(
                "coins: {coins} in circulation, expected {expected}"
            ));
        }
        let tokens = self.balances.total(Asset::GovToken) + h.tokens_held;
        if tokens != h.tokens_minted {
            return Err(format!(
                "tokens: {tokens} in circulation, expected {}",
                h.tokens_minted
            ));
        }
        Ok(())
    }
}
