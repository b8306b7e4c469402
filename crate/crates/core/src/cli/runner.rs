//! Deterministic scenario execution with per-block audits.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::audit::{AuditFailure, AuditInput, Auditor};
use super::scenario::{ConfigError, Fees, Op, Role, Scenario};
use crate::amount::{format_amount, parse_amount};
use crate::client::{ClientError, NoteId, Wallet};
use crate::contract::AmrSystem;
use crate::fieldhash::FieldElement;
use crate::ledger::{
    Address, Asset, Chain, ChainConfig, LedgerError, Outcome, Payload, SecretKey, Tx,
    WithdrawPayload,
};
use crate::privacy::{
    adv_bound_redeem, adv_bound_withdraw, monte_carlo_linker, AnonymityView, CommitmentEvent,
    GroundTruth, NullifierEvent, SpendKind, UniformGuesser,
};
use crate::zkrelation::Proof;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionStatus {
    Executed,
    Reverted,
    Dropped,
    /// Never reached the chain: the client refused to build it or the
    /// mempool refused to admit it.
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionResult {
    pub actor: String,
    pub at: u64,
    pub op: Op,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub status: ActionStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// An executed spend by an honest actor, kept for the privacy report.
#[derive(Debug, Clone, Copy)]
struct SpendRecord {
    actor: usize,
    event: NullifierEvent,
}

#[derive(Debug, Clone)]
enum Effect {
    Deposit {
        actor: usize,
        cm: FieldElement,
    },
    Withdraw {
        actor: usize,
        note: NoteId,
        sn: FieldElement,
        cm: FieldElement,
    },
    Redeem {
        actor: usize,
        old: NoteId,
        new: NoteId,
        sn: FieldElement,
        cm_old: FieldElement,
        cm_new: FieldElement,
    },
    Plain,
}

#[derive(Debug, Clone)]
struct Built {
    tx: Tx,
    effect: Effect,
}

#[derive(Debug, Clone)]
struct Actor {
    name: String,
    sk: SecretKey,
    addr: Address,
    honest: bool,
    link_group: Option<u32>,
    notes: BTreeMap<String, NoteId>,
}

type ActionKey = (usize, usize);

/// Final outcome of a scenario run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Value,
    pub event_log: String,
    pub actions: Vec<ActionResult>,
    pub failures: Vec<AuditFailure>,
    pub passed: bool,
}

impl RunReport {
    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

fn client_code(e: &ClientError) -> &'static str {
    match e {
        ClientError::InsufficientBalance { .. } => "InsufficientBalance",
        ClientError::InsufficientTokens { .. } => "InsufficientTokens",
        ClientError::ZeroAmount => "ZeroAmount",
        ClientError::NoteNotFound => "NoteNotFound",
        ClientError::NoteTooYoung => "NoteTooYoung",
        ClientError::NoteNotLive { .. } => "NoteNotLive",
        ClientError::UnknownNote(_) => "UnknownNote",
        ClientError::SnapshotMismatch => "SnapshotMismatch",
        ClientError::Relation(_) => "Relation",
        ClientError::Merkle(_) => "Merkle",
    }
}

fn ledger_code(e: &LedgerError) -> &'static str {
    match e {
        LedgerError::BadSignature(_) => "BadSignature",
        LedgerError::UnauthorizedFeePayer { .. } => "UnauthorizedFeePayer",
        LedgerError::InsufficientBalance { .. } => "InsufficientBalance",
        LedgerError::DuplicateAccount(_) => "DuplicateAccount",
    }
}

/// A scenario in progress. [`Simulation::run`] drives it to completion;
/// [`Simulation::step`] mines one block at a time.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    fees: Fees,
    chain: Chain,
    system: AmrSystem,
    rng: ChaCha20Rng,
    actors: Vec<Actor>,
    wallets: Vec<Wallet>,
    view: AnonymityView,
    truth: GroundTruth,
    auditor: Auditor,
    prepared: BTreeMap<ActionKey, Result<Built, String>>,
    by_id: BTreeMap<String, Built>,
    results: BTreeMap<ActionKey, ActionResult>,
    spends: Vec<SpendRecord>,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self, ConfigError> {
        scenario.validate()?;
        let config = scenario.system_config()?;
        let fees = scenario.fees()?;
        let kind = config.params.hash_kind;
        let mut rng = ChaCha20Rng::seed_from_u64(scenario.seed);
        let system = AmrSystem::setup(config, &mut rng).map_err(|e| ConfigError::Invalid {
            field: "params".into(),
            message: e.to_string(),
        })?;
        let mut chain = Chain::new(ChainConfig {
            kind,
            policy: scenario.ordering_policy(),
            seed: scenario.seed,
        });
        let mut actors = Vec::new();
        let mut wallets = Vec::new();
        for (i, spec) in scenario.actors.iter().enumerate() {
            let sk = SecretKey::random(&mut rng);
            let coins = parse_amount(&spec.balance).expect("validated balance");
            let addr = chain
                .open_account(sk.clone(), coins)
                .map_err(|e| ConfigError::Invalid {
                    field: format!("actor[{i}]"),
                    message: e.to_string(),
                })?;
            if spec.relayer {
                chain.register_relayer(addr);
            }
            actors.push(Actor {
                name: spec.name.clone(),
                sk,
                addr,
                honest: spec.role == Role::Honest,
                link_group: spec.link_group,
                notes: BTreeMap::new(),
            });
            wallets.push(Wallet::new(kind, config.params.depth));
        }
        let auditor = Auditor::new(&system);
        let mut sim = Simulation {
            scenario,
            fees,
            chain,
            system,
            rng,
            actors,
            wallets,
            view: AnonymityView::new(),
            truth: GroundTruth::new(),
            auditor,
            prepared: BTreeMap::new(),
            by_id: BTreeMap::new(),
            results: BTreeMap::new(),
            spends: Vec::new(),
        };
        sim.prepare_due(0);
        Ok(sim)
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn system(&self) -> &AmrSystem {
        &self.system
    }

    pub fn view(&self) -> &AnonymityView {
        &self.view
    }

    /// Simulator-only record of which commitment each nullifier spent.
    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn audit_failures(&self) -> &[AuditFailure] {
        self.auditor.failures()
    }

    pub fn is_done(&self) -> bool {
        self.chain.height() >= self.scenario.blocks
    }

    pub fn address_of(&self, actor: &str) -> Option<Address> {
        self.actors.iter().find(|a| a.name == actor).map(|a| a.addr)
    }

    fn keys_at(&self, height: u64, pick: impl Fn(Op) -> bool, prepared: bool) -> Vec<ActionKey> {
        let mut out = Vec::new();
        for (ai, actor) in self.scenario.actors.iter().enumerate() {
            for (si, act) in actor.script.iter().enumerate() {
                let op = act.op.expect("validated op");
                let when = if prepared {
                    act.prepared_at
                } else {
                    Some(act.at)
                };
                if when == Some(height) && pick(op) {
                    out.push((ai, si));
                }
            }
        }
        out
    }

    fn prepare_due(&mut self, height: u64) {
        for key in self.keys_at(height, |_| true, true) {
            let built = self.build(key);
            self.prepared.insert(key, built);
        }
    }

    fn actor_index(&self, name: &str) -> usize {
        self.scenario
            .actor_index(name)
            .expect("validated actor name")
    }

    fn note_id(&self, ai: usize, name: &str) -> Result<NoteId, String> {
        self.actors[ai]
            .notes
            .get(name)
            .copied()
            .ok_or_else(|| "UnknownNote".to_string())
    }

    fn build(&mut self, (ai, si): ActionKey) -> Result<Built, String> {
        let act = self.scenario.actors[ai].script[si].clone();
        let op = act.op.expect("validated op");
        let kind = self.chain.kind();
        let height = self.chain.height();
        let params = self.system.contract.params;
        let sk = self.actors[ai].sk.clone();
        let addr = self.actors[ai].addr;
        let fee_payer = act
            .fee_payer
            .as_deref()
            .map(|n| self.actors[self.actor_index(n)].addr);
        let amount = act
            .amount
            .as_deref()
            .map(|a| parse_amount(a).expect("validated amount"));
        let cerr = |e: ClientError| client_code(&e).to_string();
        let fees = self.fees;

        let built = match op {
            Op::Deposit => {
                let bal = self.chain.balances().coins(&addr);
                let (id, tx) = self.wallets[ai]
                    .create_deposit_tx(&sk, params.amt, fees.deposit, bal, &mut self.rng)
                    .map_err(cerr)?;
                let cm = self.wallets[ai].notes()[id].cm;
                self.actors[ai]
                    .notes
                    .insert(act.note.clone().expect("validated note"), id);
                Built {
                    tx,
                    effect: Effect::Deposit { actor: ai, cm },
                }
            }
            Op::Withdraw => {
                let note = self.note_id(ai, act.note.as_deref().expect("validated note"))?;
                let signer = act.to.as_deref().map_or(ai, |n| self.actor_index(n));
                let signer_sk = self.actors[signer].sk.clone();
                let snap = self.system.contract.snapshot(height);
                let tx = self.wallets[ai]
                    .create_withdraw_tx(&signer_sk, note, &snap, fees.withdraw, fee_payer)
                    .map_err(cerr)?;
                let rec = &self.wallets[ai].notes()[note];
                Built {
                    tx,
                    effect: Effect::Withdraw {
                        actor: ai,
                        note,
                        sn: rec.sn,
                        cm: rec.cm,
                    },
                }
            }
            Op::Redeem => {
                let old_name = act.note.clone().expect("validated note");
                let old = self.note_id(ai, &old_name)?;
                let mut snap = self.system.contract.snapshot(height);
                if act.use_next_root {
                    snap.root_rwd_curr = snap.root_rwd_next;
                }
                let (new, tx) = self.wallets[ai]
                    .create_redeem_tx(&sk, old, &snap, fees.redeem, fee_payer, &mut self.rng)
                    .map_err(cerr)?;
                let (sn, cm_old) = {
                    let r = &self.wallets[ai].notes()[old];
                    (r.sn, r.cm)
                };
                let cm_new = self.wallets[ai].notes()[new].cm;
                self.actors[ai].notes.insert(
                    act.new_note
                        .clone()
                        .unwrap_or_else(|| format!("{old_name}'")),
                    new,
                );
                Built {
                    tx,
                    effect: Effect::Redeem {
                        actor: ai,
                        old,
                        new,
                        sn,
                        cm_old,
                        cm_new,
                    },
                }
            }
            Op::Lock => {
                let tokens = self.chain.balances().tokens(&addr);
                let tx = self.wallets[ai]
                    .create_lock_tx(
                        &sk,
                        amount.expect("validated amount"),
                        act.t_lock.expect("validated t_lock"),
                        tokens,
                        fees.lock,
                    )
                    .map_err(cerr)?;
                Built {
                    tx,
                    effect: Effect::Plain,
                }
            }
            Op::Claim => Built {
                tx: self.wallets[ai].create_claim_tx(&sk, fees.claim),
                effect: Effect::Plain,
            },
            Op::Unlock => Built {
                tx: self.wallets[ai].create_unlock_tx(&sk, fees.unlock),
                effect: Effect::Plain,
            },
            Op::Transfer => {
                let to =
                    self.actors[self.actor_index(act.to.as_deref().expect("validated to"))].addr;
                let asset = act.asset.unwrap_or(Asset::Coin);
                Built {
                    tx: self.wallets[ai].create_transfer_tx(
                        &sk,
                        to,
                        amount.expect("validated amount"),
                        asset,
                        fees.transfer,
                    ),
                    effect: Effect::Plain,
                }
            }
            Op::Replay => {
                let of = act.of.as_deref().expect("validated of");
                // An identical transaction has the same effect as the original.
                return self
                    .by_id
                    .get(of)
                    .cloned()
                    .ok_or_else(|| "NotBuilt".to_string());
            }
            Op::Steal => {
                let of = act.of.as_deref().expect("validated of");
                let orig = self.by_id.get(of).ok_or_else(|| "NotBuilt".to_string())?;
                // Re-signing one's own payload is a plain resubmission.
                let effect = if orig.tx.sender == addr {
                    orig.effect.clone()
                } else {
                    Effect::Plain
                };
                Built {
                    tx: Tx::sign(kind, &sk, fee_payer, orig.tx.fee, orig.tx.payload),
                    effect,
                }
            }
            Op::ForgeWithdraw => {
                let payload = WithdrawPayload {
                    sn: FieldElement::random(&mut self.rng),
                    root: *self
                        .system
                        .contract
                        .root_list
                        .back()
                        .expect("root list is never empty"),
                    proof: Proof {
                        tag: FieldElement::random(&mut self.rng),
                    },
                };
                Built {
                    tx: Tx::sign(
                        kind,
                        &sk,
                        fee_payer,
                        fees.withdraw,
                        Payload::Withdraw(payload),
                    ),
                    effect: Effect::Plain,
                }
            }
        };
        let built = if self.actors[ai].honest {
            built
        } else {
            Built {
                tx: built.tx.flagged_adversarial(),
                effect: built.effect,
            }
        };
        if let Some(id) = &act.id {
            self.by_id.insert(id.clone(), built.clone());
        }
        Ok(built)
    }

    fn record(&mut self, (ai, si): ActionKey, status: ActionStatus, reason: Option<String>) {
        let spec = &self.scenario.actors[ai];
        let act = &spec.script[si];
        self.results.insert(
            (ai, si),
            ActionResult {
                actor: spec.name.clone(),
                at: act.at,
                op: act.op.expect("validated op"),
                id: act.id.clone(),
                status,
                reason,
            },
        );
    }

    fn abandon(&mut self, effect: &Effect) {
        if let Effect::Redeem { actor, new, .. } = effect {
            let _ = self.wallets[*actor].discard_refresh(*new);
        }
    }

    fn apply(&mut self, effect: &Effect, height: u64) {
        let commit = |sim: &mut Simulation, actor: usize, cm: FieldElement| {
            let a = &sim.actors[actor];
            sim.view.record_commitment(CommitmentEvent {
                cm,
                height,
                honest: a.honest,
                link_group: a.link_group,
            });
            sim.truth.record_insertion(cm, height);
        };
        let spend = |sim: &mut Simulation,
                     actor: usize,
                     sn: FieldElement,
                     cm: FieldElement,
                     kind: SpendKind| {
            let event = NullifierEvent {
                sn,
                height,
                honest: sim.actors[actor].honest,
                kind,
            };
            sim.view.record_nullifier(event);
            sim.truth.record_spend(sn, cm);
            if event.honest {
                sim.spends.push(SpendRecord { actor, event });
            }
        };
        match *effect {
            Effect::Deposit { actor, cm } => commit(self, actor, cm),
            Effect::Withdraw {
                actor,
                note,
                sn,
                cm,
            } => {
                let _ = self.wallets[actor].confirm_withdraw(note);
                spend(self, actor, sn, cm, SpendKind::Withdraw);
            }
            Effect::Redeem {
                actor,
                old,
                new,
                sn,
                cm_old,
                cm_new,
            } => {
                let _ = self.wallets[actor].confirm_redeem(old, new);
                spend(self, actor, sn, cm_old, SpendKind::Redeem);
                commit(self, actor, cm_new);
            }
            Effect::Plain => {}
        }
    }

    /// Submits the actions scheduled for the next block, mines it, and
    /// audits the resulting state. Returns false once the scenario is over.
    pub fn step(&mut self) -> bool {
        if self.is_done() {
            return false;
        }
        let height = self.chain.height() + 1;
        let is_derived = |op: Op| matches!(op, Op::Replay | Op::Steal);
        let mut due = self.keys_at(height, |op| !is_derived(op), false);
        due.extend(self.keys_at(height, is_derived, false));

        let mut submitted = Vec::new();
        for key in due {
            let built = match self.prepared.remove(&key) {
                Some(b) => b,
                None => self.build(key),
            };
            match built {
                Ok(b) => match self.chain.submit(b.tx.clone()) {
                    Ok(()) => submitted.push((key, b)),
                    Err(e) => {
                        self.abandon(&b.effect);
                        self.record(key, ActionStatus::Rejected, Some(ledger_code(&e).into()));
                    }
                },
                Err(code) => self.record(key, ActionStatus::Rejected, Some(code)),
            }
        }

        let receipts = self.chain.mine_block(&mut self.system).receipts.clone();
        let mut used = vec![false; receipts.len()];
        for (key, b) in submitted {
            let i = (0..receipts.len())
                .find(|&i| !used[i] && receipts[i].tx == b.tx)
                .expect("every admitted transaction gets a receipt");
            used[i] = true;
            match &receipts[i].outcome {
                Outcome::Executed => {
                    self.apply(&b.effect, height);
                    self.record(key, ActionStatus::Executed, None);
                }
                Outcome::Reverted(r) => {
                    self.abandon(&b.effect);
                    self.record(key, ActionStatus::Reverted, Some(r.code.clone()));
                }
                Outcome::Dropped => {
                    self.abandon(&b.effect);
                    self.record(key, ActionStatus::Dropped, None);
                }
            }
        }

        self.prepare_due(height);
        self.auditor.check(&AuditInput {
            chain: &self.chain,
            system: &self.system,
            truth: &self.truth,
            wallets: &self.wallets,
        });
        true
    }

    pub fn run(mut self) -> RunReport {
        while self.step() {}
        self.finish()
    }

    fn actions(&self) -> Vec<ActionResult> {
        let mut v: Vec<_> = self
            .results
            .iter()
            .map(|(k, r)| (r.at, *k, r.clone()))
            .collect();
        v.sort_by_key(|(at, k, _)| (*at, *k));
        v.into_iter().map(|(_, _, r)| r).collect()
    }

    fn privacy_report(&self) -> Value {
        let h = self.chain.height();
        let t_con = self.system.contract.params.t_con;
        let guesser = UniformGuesser { t_con };
        let trials = self.scenario.monte_carlo_trials;
        let spends: Vec<Value> = self
            .spends
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let e = &s.event;
                let bound = match e.kind {
                    SpendKind::Withdraw => adv_bound_withdraw(&self.view, e.height),
                    SpendKind::Redeem => adv_bound_redeem(&self.view, e.height, t_con),
                };
                let mut v = json!({
                    "actor": self.actors[s.actor].name,
                    "height": e.height,
                    "kind": e.kind,
                    "anon_set": guesser.eligible(&self.view, e).len(),
                });
                match bound {
                    Ok(b) => v["bound"] = json!(b),
                    Err(err) => v["bound_error"] = json!(err.to_string()),
                }
                if trials > 0 {
                    let sub_seed =
                        self.scenario.seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    let mut rng = ChaCha20Rng::seed_from_u64(sub_seed);
                    let r =
                        monte_carlo_linker(&self.view, &self.truth, &guesser, e, trials, &mut rng);
                    v["monte_carlo"] = json!(r);
                }
                v
            })
            .collect();
        json!({
            "anon_set_size": self.view.anom_size(h),
            "nullifiers": self.view.nullifier_count(h),
            "negligible_term": 0.0,
            "spends": spends,
        })
    }

    pub fn finish(&self) -> RunReport {
        let s = &self.scenario;
        let sys = &self.system;
        let c = &sys.contract;
        let p = c.params;
        let bal = self.chain.balances();
        let mut balances = serde_json::Map::new();
        for a in &self.actors {
            balances.insert(
                a.name.clone(),
                json!({"coins": format_amount(bal.coins(&a.addr)), "tokens": format_amount(bal.tokens(&a.addr))}),
            );
        }
        balances.insert(
            "fee-sink".into(),
            json!({"coins": format_amount(bal.coins(&self.chain.fee_sink())), "tokens": "0"}),
        );
        let rr = |r: crate::contract::RewardRoot| json!({"root": r.root, "height": r.height, "leaves": r.leaves, "adopted_at": r.adopted_at});
        let actions = self.actions();
        let audits = self.auditor.results();
        let passed = self.auditor.passed();
        let summary = json!({
            "scenario": s.name,
            "seed": s.seed,
            "blocks": self.chain.height(),
            "ordering": self.chain.policy().name(),
            "params": {
                "amount": format_amount(p.amt),
                "reward_amount": format_amount(p.amt_rwd),
                "t_con": p.t_con,
                "depth": p.depth,
                "root_list_len": p.k,
                "hash": p.hash_kind,
                "rate_per_block": format_amount(sys.lending.rate_per_block),
                "t_max": sys.pool.t_max,
            },
            "contract": {
                "deposits": sys.stats.deposits,
                "withdraws": sys.stats.withdraws,
                "redeems": sys.stats.redeems,
                "leaves": c.deposit_list.len(),
                "nullifiers": c.nullifier_list.len(),
                "deposits_outstanding": c.deposits_outstanding(),
                "root": c.tree().root(),
                "reward_root_curr": rr(c.root_rwd_curr),
                "reward_root_next": rr(c.root_rwd_next),
                "tokens_minted": format_amount(sys.tokens_minted()),
            },
            "lending": {
                "exchange_rate": format_amount(sys.lending.exchange_rate),
                "total_underlying": format_amount(sys.lending.total_underlying),
                "minted_interest": format_amount(sys.lending.minted_interest),
            },
            "pool": {
                "interest_balance": format_amount(sys.pool.interest_balance),
                "total_received": format_amount(sys.pool.total_received),
                "total_paid": format_amount(sys.pool.total_paid()),
                "escrowed": format_amount(sys.pool.escrowed()),
                "epoch": sys.pool.epoch,
            },
            "balances": balances,
            "actions": actions,
            "privacy": self.privacy_report(),
            "audits": audits,
            "audit_failures": self.auditor.failures(),
            "passed": passed,
        });
        RunReport {
            summary,
            event_log: self.chain.event_log_text(),
            actions,
            failures: self.auditor.failures().to_vec(),
            passed,
        }
    }
}

pub fn run_scenario(scenario: Scenario) -> Result<RunReport, ConfigError> {
    Ok(Simulation::new(scenario)?.run())
}
