//! Invariant audits run after every mined block.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::client::{NoteStatus, Wallet};
use crate::contract::AmrSystem;
use crate::fieldhash::FieldElement;
use crate::ledger::Chain;
use crate::merkle::MerkleTree;
use crate::privacy::GroundTruth;

pub const AUDITS: [&str; 10] = [
    "conservation",
    "nullifier-uniqueness",
    "no-theft",
    "outstanding-consistency",
    "one-use-per-commitment",
    "redeem-age",
    "wallet-agreement",
    "root-history",
    "reward-root-monotonic",
    "pool-solvency",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditFailure {
    pub height: u64,
    pub audit: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditResult {
    pub name: &'static str,
    pub passed: bool,
    pub failures: usize,
}

/// Carries the state needed to check history-dependent invariants.
#[derive(Debug, Clone)]
pub struct Auditor {
    mirror: MerkleTree,
    roots: Vec<FieldElement>,
    last_curr: (u64, u64),
    failures: Vec<AuditFailure>,
}

pub struct AuditInput<'a> {
    pub chain: &'a Chain,
    pub system: &'a AmrSystem,
    pub truth: &'a GroundTruth,
    pub wallets: &'a [Wallet],
}

impl Auditor {
    pub fn new(system: &AmrSystem) -> Self {
        let p = system.contract.params;
        let mirror = MerkleTree::init(p.depth, p.hash_kind).expect("validated depth");
        let empty = mirror.root();
        Auditor {
            mirror,
            roots: vec![empty],
            last_curr: (0, 0),
            failures: Vec::new(),
        }
    }

    pub fn failures(&self) -> &[AuditFailure] {
        &self.failures
    }

    pub fn results(&self) -> Vec<AuditResult> {
        AUDITS
            .iter()
            .map(|&name| {
                let failures = self.failures.iter().filter(|f| f.audit == name).count();
                AuditResult {
                    name,
                    passed: failures == 0,
                    failures,
                }
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, height: u64, audit: &'static str, detail: impl Into<String>) {
        self.failures.push(AuditFailure {
            height,
            audit,
            detail: detail.into(),
        });
    }

    pub fn check(&mut self, input: &AuditInput<'_>) {
        let h = input.chain.height();
        let sys = input.system;
        let c = &sys.contract;
        let p = c.params;
        let stats = sys.stats;

        if let Err(e) = input.chain.conservation(sys) {
            self.fail(h, "conservation", e);
        }
        if sys.tokens_minted() != p.amt_rwd * stats.redeems as u128 {
            self.fail(
                h,
                "conservation",
                format!(
                    "{} tokens minted for {} redeems",
                    sys.tokens_minted(),
                    stats.redeems
                ),
            );
        }

        let unique: HashSet<_> = c.nullifier_list.iter().collect();
        if unique.len() != c.nullifier_list.len() {
            self.fail(h, "nullifier-uniqueness", "a nullifier was accepted twice");
        }
        if c.nullifier_list.len() as u64 != stats.withdraws + stats.redeems {
            self.fail(
                h,
                "nullifier-uniqueness",
                "nullifier count differs from spends",
            );
        }

        if stats.withdraws > stats.deposits {
            self.fail(
                h,
                "no-theft",
                format!(
                    "{} withdraws for {} deposits",
                    stats.withdraws, stats.deposits
                ),
            );
        }
        if stats.paid_to_withdrawers > stats.withdraws as u128 * p.amt {
            self.fail(
                h,
                "no-theft",
                "a withdrawer received more than the denomination",
            );
        }
        let paid = stats.paid_to_withdrawers + stats.paid_to_claimers;
        if paid > stats.deposited + sys.lending.minted_interest {
            self.fail(
                h,
                "no-theft",
                format!("paid {paid} exceeds deposits plus interest"),
            );
        }

        let expected = stats.deposits.saturating_sub(stats.withdraws);
        if c.deposits_outstanding() != expected
            || c.deposit_list.len() as u64 != stats.deposits + stats.redeems
        {
            self.fail(
                h,
                "outstanding-consistency",
                format!(
                    "outstanding {} but {} deposits and {} withdraws",
                    c.deposits_outstanding(),
                    stats.deposits,
                    stats.withdraws
                ),
            );
        }

        let mut origins = HashSet::new();
        for sn in &c.nullifier_list {
            match input.truth.origin_of(sn) {
                Some(cm) if origins.insert(cm) => {}
                Some(_) => self.fail(h, "one-use-per-commitment", "a commitment was spent twice"),
                None => self.fail(
                    h,
                    "one-use-per-commitment",
                    "a nullifier has no known origin",
                ),
            }
        }

        let position: BTreeMap<FieldElement, u64> = c
            .deposit_list
            .iter()
            .enumerate()
            .map(|(i, cm)| (*cm, i as u64))
            .collect();
        for r in &sys.redeems {
            let rr = r.reward_root;
            if rr.height + p.t_con > rr.adopted_at || rr.adopted_at > r.height {
                self.fail(
                    h,
                    "redeem-age",
                    format!("redeem at {} used a root not yet mature", r.height),
                );
            }
            let origin = input.truth.origin_of(&r.sn);
            let pos = origin.and_then(|cm| position.get(&cm).copied());
            let born = origin.and_then(|cm| input.truth.insertion_height(&cm));
            match (pos, born) {
                (Some(i), Some(b)) if i < rr.leaves && b + p.t_con <= r.height => {}
                _ => self.fail(
                    h,
                    "redeem-age",
                    format!("redeem at {} spent a note younger than t_con", r.height),
                ),
            }
        }

        for (wi, w) in input.wallets.iter().enumerate() {
            for (ni, n) in w.notes().iter().enumerate() {
                let listed = position.contains_key(&n.cm);
                let spent = c.is_spent(&n.sn);
                let ok = match n.status {
                    NoteStatus::Live => !spent,
                    NoteStatus::Nullified => listed && spent,
                    NoteStatus::Discarded => !listed,
                    NoteStatus::Pending => !listed,
                };
                if !ok {
                    self.fail(
                        h,
                        "wallet-agreement",
                        format!(
                            "wallet {wi} note {ni} is {:?} (listed {listed}, spent {spent})",
                            n.status
                        ),
                    );
                }
            }
        }

        for (i, cm) in c.deposit_list.iter().enumerate().skip(self.roots.len() - 1) {
            let root = self
                .mirror
                .update(i as u64, *cm)
                .expect("contract enforces capacity");
            self.roots.push(root);
        }
        let n = self.roots.len();
        let k = c.root_list.len();
        let expected: Vec<FieldElement> = (0..k)
            .map(|i| self.roots[(n + i).saturating_sub(k)])
            .collect();
        if c.root_list.iter().ne(expected.iter()) {
            self.fail(
                h,
                "root-history",
                "root list differs from the mirror tree history",
            );
        }
        for (label, rr) in [("current", c.root_rwd_curr), ("next", c.root_rwd_next)] {
            if self.roots.get(rr.leaves as usize) != Some(&rr.root) {
                self.fail(
                    h,
                    "root-history",
                    format!("{label} reward root does not match its prefix"),
                );
            }
        }

        let curr = (c.root_rwd_curr.height, c.root_rwd_curr.leaves);
        if curr < self.last_curr || c.root_rwd_curr.leaves > c.root_rwd_next.leaves {
            self.fail(h, "reward-root-monotonic", "reward root moved backwards");
        }
        self.last_curr = curr;

        let pool = &sys.pool;
        if pool.total_paid() > pool.total_received
            || pool.interest_balance
                != pool.total_received - pool.total_paid().min(pool.total_received)
        {
            self.fail(h, "pool-solvency", "pool paid out more than it received");
        }
        if pool.total_paid() != stats.paid_to_claimers || pool.total_received != stats.paid_to_pool
        {
            self.fail(
                h,
                "pool-solvency",
                "pool accounting differs from contract stats",
            );
        }
    }
}
