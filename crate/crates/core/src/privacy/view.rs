use std::collections::BTreeSet;

use serde::Serialize;

use crate::fieldhash::FieldElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CommitmentEvent {
    pub cm: FieldElement,
    pub height: u64,
    /// Inserted by an honest actor, so its opening is unknown to the adversary.
    pub honest: bool,
    /// Deposits in the same group come from addresses known to be linked.
    pub link_group: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpendKind {
    Withdraw,
    Redeem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NullifierEvent {
    pub sn: FieldElement,
    pub height: u64,
    pub honest: bool,
    pub kind: SpendKind,
}

/// Everything an on-chain observer knows: which commitments and nullifiers
/// appeared at which heights, and which actors are honest.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AnonymityView {
    commitments: Vec<CommitmentEvent>,
    nullifiers: Vec<NullifierEvent>,
}

impl AnonymityView {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_commitment(&mut self, event: CommitmentEvent) {
        self.commitments.push(event);
    }

    pub fn record_nullifier(&mut self, event: NullifierEvent) {
        self.nullifiers.push(event);
    }

    pub fn commitments(&self) -> &[CommitmentEvent] {
        &self.commitments
    }

    pub fn nullifiers(&self) -> &[NullifierEvent] {
        &self.nullifiers
    }

    /// Honest commitments inserted at or before height `h`.
    pub fn anom_set(&self, h: u64) -> impl Iterator<Item = &CommitmentEvent> {
        self.commitments
            .iter()
            .filter(move |c| c.honest && c.height <= h)
    }

    /// `|AnomSet^h|`, counting each linked group once.
    pub fn anom_size(&self, h: u64) -> usize {
        let mut groups = BTreeSet::new();
        let mut n = 0;
        for c in self.anom_set(h) {
            match c.link_group {
                Some(g) => {
                    if groups.insert(g) {
                        n += 1;
                    }
                }
                None => n += 1,
            }
        }
        n
    }

    /// `|NullifierSet^h|`.
    pub fn nullifier_count(&self, h: u64) -> usize {
        self.nullifiers.iter().filter(|n| n.height <= h).count()
    }
}
