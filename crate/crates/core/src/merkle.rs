//! Fixed-depth Merkle accumulator over field elements.
//!
//! Leaves default to zero. Only nodes that differ from the all-zero subtree of
//! their level are stored, so depth 30 costs no more memory than depth 8.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fieldhash::{h_2p, FieldElement, HashKind};

pub const MAX_DEPTH: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MerkleError {
    #[error("tree depth {0} outside 1..={MAX_DEPTH}")]
    BadConfig(u32),
    #[error("leaf index {index} outside a depth-{depth} tree")]
    BadIndex { index: u64, depth: u32 },
    #[error("path has {got} siblings, tree depth is {expected}")]
    MalformedPath { expected: usize, got: usize },
    #[error("snapshot: {0}")]
    Snapshot(String),
}

/// Authentication path for one leaf, siblings ordered leaf to root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerklePath {
    pub index: u64,
    pub siblings: Vec<FieldElement>,
}

#[derive(Debug, Clone)]
pub struct MerkleTree {
    depth: u32,
    kind: HashKind,
    /// `zeros[l]` is the root of an all-zero subtree of height `l`.
    zeros: Vec<FieldElement>,
    /// `levels[0]` holds leaves, `levels[depth]` the root.
    levels: Vec<BTreeMap<u64, FieldElement>>,
    hash_calls: u64,
}

/// `Z_0 = 0`, `Z_{i+1} = h_2p(Z_i, Z_i)`.
pub fn zero_roots(kind: HashKind, depth: u32) -> Vec<FieldElement> {
    let mut zeros = Vec::with_capacity(depth as usize + 1);
    zeros.push(FieldElement::ZERO);
    for l in 0..depth as usize {
        zeros.push(h_2p(kind, zeros[l], zeros[l]));
    }
    zeros
}

impl MerkleTree {
    pub fn init(depth: u32, kind: HashKind) -> Result<Self, MerkleError> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(MerkleError::BadConfig(depth));
        }
        Ok(MerkleTree {
            depth,
            kind,
            zeros: zero_roots(kind, depth),
            levels: vec![BTreeMap::new(); depth as usize + 1],
            hash_calls: 0,
        })
    }

    /// Builds the tree holding `leaves` at positions `0..leaves.len()`,
    /// hashing level by level.
    pub fn from_leaves(
        depth: u32,
        kind: HashKind,
        leaves: &[FieldElement],
    ) -> Result<Self, MerkleError> {
        let mut tree = Self::init(depth, kind)?;
        if leaves.len() as u64 > tree.capacity() {
            return Err(MerkleError::BadIndex {
                index: leaves.len() as u64 - 1,
                depth,
            });
        }
        let mut current: Vec<FieldElement> = leaves.to_vec();
        for level in 0..depth as usize {
            for (i, v) in current.iter().enumerate() {
                if *v != tree.zeros[level] {
                    tree.levels[level].insert(i as u64, *v);
                }
            }
            let zero = tree.zeros[level];
            let parents: Vec<FieldElement> = current
                .chunks(2)
                .map(|pair| {
                    let right = pair.get(1).copied().unwrap_or(zero);
                    tree.hash_calls += 1;
                    h_2p(kind, pair[0], right)
                })
                .collect();
            current = parents;
        }
        if let Some(root) = current.first() {
            if *root != tree.zeros[depth as usize] {
                tree.levels[depth as usize].insert(0, *root);
            }
        }
        Ok(tree)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn kind(&self) -> HashKind {
        self.kind
    }

    pub fn capacity(&self) -> u64 {
        1u64 << self.depth
    }

    /// Total `h_2p` invocations made by this tree since construction.
    pub fn hash_calls(&self) -> u64 {
        self.hash_calls
    }

    fn node(&self, level: usize, index: u64) -> FieldElement {
        self.levels[level]
            .get(&index)
            .copied()
            .unwrap_or(self.zeros[level])
    }

    fn set_node(&mut self, level: usize, index: u64, value: FieldElement) {
        if value == self.zeros[level] {
            self.levels[level].remove(&index);
        } else {
            self.levels[level].insert(index, value);
        }
    }

    pub fn root(&self) -> FieldElement {
        self.node(self.depth as usize, 0)
    }

    pub fn empty_root(&self) -> FieldElement {
        self.zeros[self.depth as usize]
    }

    pub fn leaf(&self, index: u64) -> Result<FieldElement, MerkleError> {
        self.check_index(index)?;
        Ok(self.node(0, index))
    }

    fn check_index(&self, index: u64) -> Result<(), MerkleError> {
        if index >= self.capacity() {
            return Err(MerkleError::BadIndex {
                index,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// Sets leaf `index` to `value` and rehashes its root path with exactly
    /// `depth` compressions. Returns the new root.
    pub fn update(&mut self, index: u64, value: FieldElement) -> Result<FieldElement, MerkleError> {
        self.check_index(index)?;
        self.set_node(0, index, value);
        let mut idx = index;
        let mut cur = value;
        for level in 0..self.depth as usize {
            let sibling = self.node(level, idx ^ 1);
            let (l, r) = if idx & 1 == 0 {
                (cur, sibling)
            } else {
                (sibling, cur)
            };
            cur = h_2p(self.kind, l, r);
            self.hash_calls += 1;
            idx >>= 1;
            self.set_node(level + 1, idx, cur);
        }
        Ok(cur)
    }

    pub fn prove(&self, index: u64) -> Result<MerklePath, MerkleError> {
        self.check_index(index)?;
        let mut idx = index;
        let siblings = (0..self.depth as usize)
            .map(|level| {
                let s = self.node(level, idx ^ 1);
                idx >>= 1;
                s
            })
            .collect();
        Ok(MerklePath { index, siblings })
    }

    pub fn verify(
        &self,
        index: u64,
        leaf: FieldElement,
        root: FieldElement,
        path: &MerklePath,
    ) -> Result<bool, MerkleError> {
        verify_path(self.kind, self.depth, index, leaf, root, path)
    }

    /// Non-zero leaves in index order.
    pub fn occupied_leaves(&self) -> impl Iterator<Item = (u64, FieldElement)> + '_ {
        self.levels[0].iter().map(|(i, v)| (*i, *v))
    }

    pub fn to_snapshot(&self) -> TreeSnapshot {
        TreeSnapshot {
            depth: self.depth,
            hash: self.kind,
            root: self.root(),
            leaf: self
                .occupied_leaves()
                .map(|(index, value)| SnapshotLeaf { index, value })
                .collect(),
        }
    }

    pub fn from_snapshot(snapshot: &TreeSnapshot) -> Result<Self, MerkleError> {
        let mut tree = Self::init(snapshot.depth, snapshot.hash)?;
        for leaf in &snapshot.leaf {
            tree.update(leaf.index, leaf.value)?;
        }
        if tree.root() != snapshot.root {
            return Err(MerkleError::Snapshot(format!(
                "recomputed root {} does not match recorded root {}",
                tree.root(),
                snapshot.root
            )));
        }
        Ok(tree)
    }

    pub fn export_text(&self) -> String {
        toml::to_string(&self.to_snapshot()).expect("snapshot serializes")
    }

    pub fn import_text(text: &str) -> Result<Self, MerkleError> {
        let snapshot: TreeSnapshot =
            toml::from_str(text).map_err(|e| MerkleError::Snapshot(e.to_string()))?;
        Self::from_snapshot(&snapshot)
    }
}

/// Folds `leaf` up `path` using the bits of `index` and compares with `root`.
pub fn verify_path(
    kind: HashKind,
    depth: u32,
    index: u64,
    leaf: FieldElement,
    root: FieldElement,
    path: &MerklePath,
) -> Result<bool, MerkleError> {
    if path.siblings.len() != depth as usize {
        return Err(MerkleError::MalformedPath {
            expected: depth as usize,
            got: path.siblings.len(),
        });
    }
    if depth < 64 && index >= (1u64 << depth) {
        return Ok(false);
    }
    let mut idx = index;
    let mut cur = leaf;
    for sibling in &path.siblings {
        cur = if idx & 1 == 0 {
            h_2p(kind, cur, *sibling)
        } else {
            h_2p(kind, *sibling, cur)
        };
        idx >>= 1;
    }
    Ok(cur == root)
}

/// Text form of a tree: depth, hash kind, root and the occupied leaves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSnapshot {
    pub depth: u32,
    pub hash: HashKind,
    pub root: FieldElement,
    #[serde(default)]
    pub leaf: Vec<SnapshotLeaf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotLeaf {
    pub index: u64,
    pub value: FieldElement,
}
