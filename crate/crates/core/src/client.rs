//! Client wallet: secret notes, local tree reconstruction from public
//! contract data, proof construction and transaction assembly.

use std::fmt;

use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::contract::ContractSnapshot;
use crate::fieldhash::{commit, nullifier, FieldElement, HashKind, SECRET_LEN};
use crate::ledger::{
    Address, Asset, DepositPayload, Payload, RedeemPayload, SecretKey, Tx, WithdrawPayload,
};
use crate::merkle::{MerkleError, MerklePath, MerkleTree};
use crate::zkrelation::{self, RelationError, Statement, Witness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClientError {
    #[error("balance {available} is below the required {required}")]
    InsufficientBalance { required: u128, available: u128 },
    #[error("token balance {available} is below the required {required}")]
    InsufficientTokens { required: u128, available: u128 },
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("commitment is not in the deposit list")]
    NoteNotFound,
    #[error("commitment is not covered by the current reward root")]
    NoteTooYoung,
    #[error("note {id} is {status:?}, not live")]
    NoteNotLive { id: NoteId, status: NoteStatus },
    #[error("no note with id {0}")]
    UnknownNote(NoteId),
    #[error("rebuilt tree root does not match the snapshot")]
    SnapshotMismatch,
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Merkle(#[from] MerkleError),
}

/// The secret opening `(k_dep, r)` of a commitment.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretNote {
    k_dep: [u8; SECRET_LEN],
    r: [u8; SECRET_LEN],
}

impl SecretNote {
    pub fn from_parts(k_dep: [u8; SECRET_LEN], r: [u8; SECRET_LEN]) -> Self {
        SecretNote { k_dep, r }
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k_dep = [0u8; SECRET_LEN];
        let mut r = [0u8; SECRET_LEN];
        rng.fill_bytes(&mut k_dep);
        rng.fill_bytes(&mut r);
        SecretNote { k_dep, r }
    }

    pub fn k_dep(&self) -> &[u8; SECRET_LEN] {
        &self.k_dep
    }

    pub fn r(&self) -> &[u8; SECRET_LEN] {
        &self.r
    }

    pub fn commitment(&self, kind: HashKind) -> FieldElement {
        commit(kind, &self.k_dep, &self.r).expect("note parts are 32 bytes")
    }

    pub fn nullifier(&self, kind: HashKind) -> FieldElement {
        nullifier(kind, &self.k_dep).expect("note parts are 32 bytes")
    }
}

impl fmt::Debug for SecretNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretNote(..)")
    }
}

pub type NoteId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoteStatus {
    /// Refresh note whose redeem has not been confirmed yet.
    Pending,
    Live,
    Nullified,
    /// Refresh note whose redeem reverted.
    Discarded,
}

#[derive(Debug, Clone)]
pub struct NoteRecord {
    pub note: SecretNote,
    pub cm: FieldElement,
    pub sn: FieldElement,
    pub status: NoteStatus,
    /// Expected leaf position recorded when a refresh note is created.
    pub leaf_hint: Option<u64>,
    pub parent: Option<NoteId>,
}

#[derive(Debug, Clone)]
pub struct Wallet {
    kind: HashKind,
    depth: u32,
    notes: Vec<NoteRecord>,
    mirror: Option<(MerkleTree, usize)>,
}

impl Wallet {
    pub fn new(kind: HashKind, depth: u32) -> Self {
        Wallet {
            kind,
            depth,
            notes: Vec::new(),
            mirror: None,
        }
    }

    pub fn kind(&self) -> HashKind {
        self.kind
    }

    pub fn notes(&self) -> &[NoteRecord] {
        &self.notes
    }

    pub fn note(&self, id: NoteId) -> Result<&NoteRecord, ClientError> {
        self.notes.get(id).ok_or(ClientError::UnknownNote(id))
    }

    fn add_note(
        &mut self,
        note: SecretNote,
        status: NoteStatus,
        leaf_hint: Option<u64>,
        parent: Option<NoteId>,
    ) -> NoteId {
        let cm = note.commitment(self.kind);
        let sn = note.nullifier(self.kind);
        self.notes.push(NoteRecord {
            note,
            cm,
            sn,
            status,
            leaf_hint,
            parent,
        });
        self.notes.len() - 1
    }

    fn live_note(&self, id: NoteId) -> Result<&NoteRecord, ClientError> {
        let rec = self.note(id)?;
        if rec.status != NoteStatus::Live {
            return Err(ClientError::NoteNotLive {
                id,
                status: rec.status,
            });
        }
        Ok(rec)
    }

    fn set_status(
        &mut self,
        id: NoteId,
        from: NoteStatus,
        to: NoteStatus,
    ) -> Result<(), ClientError> {
        let rec = self.notes.get_mut(id).ok_or(ClientError::UnknownNote(id))?;
        if rec.status != from {
            return Err(ClientError::NoteNotLive {
                id,
                status: rec.status,
            });
        }
        rec.status = to;
        Ok(())
    }

    /// Records that a withdraw spending `id` executed.
    pub fn confirm_withdraw(&mut self, id: NoteId) -> Result<(), ClientError> {
        self.set_status(id, NoteStatus::Live, NoteStatus::Nullified)
    }

    /// Records that a redeem of `old` executed, activating its refresh note.
    /// A refresh note discarded after an earlier failure is revived, since
    /// the same signed redeem may still be mined later.
    pub fn confirm_redeem(&mut self, old: NoteId, new: NoteId) -> Result<(), ClientError> {
        if self.note(new)?.status == NoteStatus::Discarded {
            self.set_status(new, NoteStatus::Discarded, NoteStatus::Pending)?;
        }
        self.set_status(old, NoteStatus::Live, NoteStatus::Nullified)?;
        self.set_status(new, NoteStatus::Pending, NoteStatus::Live)
    }

    pub fn discard_refresh(&mut self, new: NoteId) -> Result<(), ClientError> {
        self.set_status(new, NoteStatus::Pending, NoteStatus::Discarded)
    }

    /// Position of a commitment in the deposit list, preferring the recorded hint.
    fn locate(&self, rec: &NoteRecord, deposit_list: &[FieldElement]) -> Option<u64> {
        if let Some(h) = rec.leaf_hint {
            if deposit_list.get(h as usize) == Some(&rec.cm) {
                return Some(h);
            }
        }
        deposit_list
            .iter()
            .position(|c| *c == rec.cm)
            .map(|i| i as u64)
    }

    fn synced_mirror(&mut self, deposit_list: &[FieldElement]) -> Result<&MerkleTree, ClientError> {
        let stale = match &self.mirror {
            Some((tree, n)) => {
                *n > deposit_list.len()
                    || (*n > 0 && tree.leaf(*n as u64 - 1).ok() != Some(deposit_list[*n - 1]))
            }
            None => true,
        };
        if stale {
            self.mirror = Some((MerkleTree::init(self.depth, self.kind)?, 0));
        }
        let (tree, n) = self.mirror.as_mut().expect("mirror initialised");
        for (i, cm) in deposit_list.iter().enumerate().skip(*n) {
            tree.update(i as u64, *cm)?;
        }
        *n = deposit_list.len();
        Ok(tree)
    }

    pub fn create_deposit_tx<R: RngCore + ?Sized>(
        &mut self,
        sk: &SecretKey,
        amt: u128,
        fee: u128,
        balance: u128,
        rng: &mut R,
    ) -> Result<(NoteId, Tx), ClientError> {
        if balance < amt + fee {
            return Err(ClientError::InsufficientBalance {
                required: amt + fee,
                available: balance,
            });
        }
        let note = SecretNote::random(rng);
        let cm = note.commitment(self.kind);
        let id = self.add_note(note, NoteStatus::Live, None, None);
        let tx = Tx::sign(
            self.kind,
            sk,
            None,
            fee,
            Payload::Deposit(DepositPayload { amt, cm }),
        );
        Ok((id, tx))
    }

    fn witness(&self, sk: &SecretKey, rec: &NoteRecord, path: MerklePath) -> Witness {
        Witness {
            sk: *sk.as_bytes(),
            k_dep: rec.note.k_dep,
            r: rec.note.r,
            commitment: rec.cm,
            path,
        }
    }

    /// Builds a withdraw against the newest root in the snapshot's root list.
    pub fn create_withdraw_tx(
        &mut self,
        sk: &SecretKey,
        id: NoteId,
        snapshot: &ContractSnapshot,
        fee: u128,
        fee_payer: Option<Address>,
    ) -> Result<Tx, ClientError> {
        let rec = self.live_note(id)?.clone();
        let index = self
            .locate(&rec, &snapshot.deposit_list)
            .ok_or(ClientError::NoteNotFound)?;
        let root = snapshot.newest_root();
        let tree = self.synced_mirror(&snapshot.deposit_list)?;
        if tree.root() != root {
            return Err(ClientError::SnapshotMismatch);
        }
        let path = tree.prove(index)?;
        let st = Statement {
            pk: sk.address(self.kind).0,
            sn: rec.sn,
            root,
        };
        let proof = zkrelation::prove(&snapshot.ek, &st, &self.witness(sk, &rec, path))?;
        Ok(Tx::sign(
            self.kind,
            sk,
            fee_payer,
            fee,
            Payload::Withdraw(WithdrawPayload {
                sn: rec.sn,
                root,
                proof,
            }),
        ))
    }

    /// Builds a redeem against the current reward root and registers the
    /// refresh note as pending.
    pub fn create_redeem_tx<R: RngCore + ?Sized>(
        &mut self,
        sk: &SecretKey,
        id: NoteId,
        snapshot: &ContractSnapshot,
        fee: u128,
        fee_payer: Option<Address>,
        rng: &mut R,
    ) -> Result<(NoteId, Tx), ClientError> {
        let rec = self.live_note(id)?.clone();
        let index = self
            .locate(&rec, &snapshot.deposit_list)
            .ok_or(ClientError::NoteNotFound)?;
        let curr = snapshot.root_rwd_curr;
        if index >= curr.leaves {
            return Err(ClientError::NoteTooYoung);
        }
        let prefix = &snapshot.deposit_list[..curr.leaves as usize];
        let tree = MerkleTree::from_leaves(self.depth, self.kind, prefix)?;
        if tree.root() != curr.root {
            return Err(ClientError::SnapshotMismatch);
        }
        let path = tree.prove(index)?;
        let st = Statement {
            pk: sk.address(self.kind).0,
            sn: rec.sn,
            root: curr.root,
        };
        let proof = zkrelation::prove(&snapshot.ek, &st, &self.witness(sk, &rec, path))?;
        let fresh = SecretNote::random(rng);
        let cm_new = fresh.commitment(self.kind);
        let new_id = self.add_note(
            fresh,
            NoteStatus::Pending,
            Some(snapshot.deposit_list.len() as u64),
            Some(id),
        );
        let tx = Tx::sign(
            self.kind,
            sk,
            fee_payer,
            fee,
            Payload::Redeem(RedeemPayload {
                sn: rec.sn,
                root: curr.root,
                proof,
                cm_new,
            }),
        );
        Ok((new_id, tx))
    }

    pub fn create_lock_tx(
        &self,
        sk: &SecretKey,
        gamma: u128,
        t_lock: u64,
        token_balance: u128,
        fee: u128,
    ) -> Result<Tx, ClientError> {
        if gamma == 0 {
            return Err(ClientError::ZeroAmount);
        }
        if token_balance < gamma {
            return Err(ClientError::InsufficientTokens {
                required: gamma,
                available: token_balance,
            });
        }
        Ok(Tx::sign(
            self.kind,
            sk,
            None,
            fee,
            Payload::Lock { gamma, t_lock },
        ))
    }

    pub fn create_claim_tx(&self, sk: &SecretKey, fee: u128) -> Tx {
        Tx::sign(self.kind, sk, None, fee, Payload::Claim)
    }

    pub fn create_unlock_tx(&self, sk: &SecretKey, fee: u128) -> Tx {
        Tx::sign(self.kind, sk, None, fee, Payload::Unlock)
    }

    pub fn create_transfer_tx(
        &self,
        sk: &SecretKey,
        to: Address,
        amount: u128,
        asset: Asset,
        fee: u128,
    ) -> Tx {
        Tx::sign(
            self.kind,
            sk,
            None,
            fee,
            Payload::Transfer { to, amount, asset },
        )
    }
}
