use std::collections::HashMap;

use crate::fieldhash::FieldElement;

/// Simulator-side record of which commitment each nullifier spent.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    origin: HashMap<FieldElement, FieldElement>,
    inserted_at: HashMap<FieldElement, u64>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_insertion(&mut self, cm: FieldElement, height: u64) {
        self.inserted_at.entry(cm).or_insert(height);
    }

    pub fn record_spend(&mut self, sn: FieldElement, cm: FieldElement) {
        self.origin.insert(sn, cm);
    }

    pub fn origin_of(&self, sn: &FieldElement) -> Option<FieldElement> {
        self.origin.get(sn).copied()
    }

    pub fn insertion_height(&self, cm: &FieldElement) -> Option<u64> {
        self.inserted_at.get(cm).copied()
    }
}
