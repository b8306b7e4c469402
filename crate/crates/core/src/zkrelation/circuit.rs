//! Constraint counting for the withdraw circuit by gadget composition.
//!
//! The circuit is a tree of gadgets: a fixed leaf gadget (key extraction,
//! nullifier and commitment hashing) plus one Merkle level gadget per tree
//! level. Per-gadget costs are configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RelationError;
use crate::fieldhash::HashKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitCostModel {
    pub base_constraints: u64,
    pub per_level_constraints: BTreeMap<HashKind, u64>,
}

impl Default for CircuitCostModel {
    fn default() -> Self {
        CircuitCostModel {
            base_constraints: 1815,
            per_level_constraints: BTreeMap::from([
                (HashKind::Mimc, 1323),
                (HashKind::Poseidon, 243),
            ]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub name: String,
    pub own_constraints: u64,
    pub children: Vec<Gadget>,
}

impl Gadget {
    pub fn leaf(name: impl Into<String>, constraints: u64) -> Self {
        Gadget {
            name: name.into(),
            own_constraints: constraints,
            children: Vec::new(),
        }
    }

    pub fn constraints(&self) -> u64 {
        self.own_constraints + self.children.iter().map(Gadget::constraints).sum::<u64>()
    }

    pub fn gadget_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(Gadget::gadget_count)
            .sum::<usize>()
    }
}

pub fn withdraw_circuit(
    kind: HashKind,
    depth: u32,
    model: &CircuitCostModel,
) -> Result<Gadget, RelationError> {
    if depth == 0 {
        return Err(RelationError::BadConfig(
            "circuit depth must be at least 1".into(),
        ));
    }
    let per_level = *model
        .per_level_constraints
        .get(&kind)
        .ok_or_else(|| RelationError::BadConfig(format!("no per-level cost for {kind}")))?;
    let mut children = vec![Gadget::leaf("leaf", model.base_constraints)];
    children
        .extend((0..depth).map(|level| Gadget::leaf(format!("merkle_level_{level}"), per_level)));
    Ok(Gadget {
        name: format!("withdraw_{kind}_d{depth}"),
        own_constraints: 0,
        children,
    })
}

pub fn count_constraints(
    kind: HashKind,
    depth: u32,
    model: &CircuitCostModel,
) -> Result<u64, RelationError> {
    Ok(withdraw_circuit(kind, depth, model)?.constraints())
}
