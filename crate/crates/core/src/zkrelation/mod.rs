//! The withdraw/redeem relation and a trapdoor-tag proof backend.
//!
//! A statement `(pk, sn, root)` is satisfied by `(sk, k_dep, r, path)` when
//! `pk = extract_pk(sk)`, `sn = nullifier(k_dep)`, the path leaf equals
//! `commit(k_dep, r)` and the path authenticates that leaf under `root`.
//!
//! The simulation backend issues `tag = h_p(DOMAIN_PROOF || trapdoor || pk || sn || root)`
//! only after checking the relation. Keys never expose the trapdoor through
//! the public API, so a party holding only public data cannot mint a tag.

pub mod circuit;

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fieldhash::{
    self, h_p_parts, FieldElement, HashKind, MalformedNote, DOMAIN_CIRCUIT, DOMAIN_PROOF,
    SECRET_LEN,
};
use crate::merkle::{verify_path, MerkleError, MerklePath};

pub use circuit::{count_constraints, withdraw_circuit, CircuitCostModel, Gadget};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("relation not satisfied: {0} conjunct failed")]
    UnsatisfiedRelation(Conjunct),
    #[error(transparent)]
    MalformedNote(#[from] MalformedNote),
    #[error(transparent)]
    Merkle(#[from] MerkleError),
    #[error("proving key is for circuit {key}, statement targets {expected}")]
    WrongCircuit { key: String, expected: String },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("key file: {0}")]
    KeyFile(String),
}

/// Which part of the relation a witness failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conjunct {
    PublicKey,
    Nullifier,
    Commitment,
    Membership,
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conjunct::PublicKey => "public-key",
            Conjunct::Nullifier => "nullifier",
            Conjunct::Commitment => "commitment",
            Conjunct::Membership => "membership",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Statement {
    pub pk: FieldElement,
    pub sn: FieldElement,
    pub root: FieldElement,
}

/// Private inputs. `commitment` is the circuit's intermediate leaf wire:
/// the value the path claims to authenticate.
#[derive(Clone, PartialEq, Eq)]
pub struct Witness {
    pub sk: [u8; SECRET_LEN],
    pub k_dep: [u8; SECRET_LEN],
    pub r: [u8; SECRET_LEN],
    pub commitment: FieldElement,
    pub path: MerklePath,
}

impl fmt::Debug for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Witness")
            .field("commitment", &self.commitment)
            .field("index", &self.path.index)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircuitId {
    pub kind: HashKind,
    pub depth: u32,
    pub digest: FieldElement,
}

impl CircuitId {
    pub fn new(kind: HashKind, depth: u32) -> Self {
        let tag = [kind as u8];
        let digest = h_p_parts(kind, &[DOMAIN_CIRCUIT, &tag, &depth.to_be_bytes()]);
        CircuitId {
            kind,
            depth,
            digest,
        }
    }
}

impl fmt::Display for CircuitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-d{}", self.kind, self.depth)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct ProvingKey {
    trapdoor: FieldElement,
    circuit: CircuitId,
}

#[derive(Clone, PartialEq, Eq)]
pub struct VerifyingKey {
    trapdoor: FieldElement,
    circuit: CircuitId,
}

impl fmt::Debug for ProvingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProvingKey({})", self.circuit)
    }
}

impl fmt::Debug for VerifyingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VerifyingKey({})", self.circuit)
    }
}

impl ProvingKey {
    pub fn circuit(&self) -> CircuitId {
        self.circuit
    }
}

impl VerifyingKey {
    pub fn circuit(&self) -> CircuitId {
        self.circuit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Proof {
    pub tag: FieldElement,
}

impl Proof {
    pub fn to_bytes(&self) -> [u8; 32] {
        self.tag.to_bytes_be()
    }
}

/// Interface a proof system must provide to the contract and clients.
pub trait ProofSystem {
    type ProvingKey;
    type VerifyingKey;
    type Proof;

    fn setup<R: RngCore + ?Sized>(
        &self,
        kind: HashKind,
        depth: u32,
        rng: &mut R,
    ) -> (Self::ProvingKey, Self::VerifyingKey);
    fn prove(
        &self,
        ek: &Self::ProvingKey,
        st: &Statement,
        wit: &Witness,
    ) -> Result<Self::Proof, RelationError>;
    fn verify(&self, vk: &Self::VerifyingKey, st: &Statement, proof: &Self::Proof) -> bool;
}

/// The trapdoor-tag backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulationBackend;

fn tag(kind: HashKind, trapdoor: &FieldElement, st: &Statement) -> FieldElement {
    h_p_parts(
        kind,
        &[
            DOMAIN_PROOF,
            &trapdoor.to_bytes_be(),
            &st.pk.to_bytes_be(),
            &st.sn.to_bytes_be(),
            &st.root.to_bytes_be(),
        ],
    )
}

/// Checks all four conjuncts, reporting the first that fails.
pub fn check_relation(
    circuit: CircuitId,
    st: &Statement,
    wit: &Witness,
) -> Result<(), RelationError> {
    let kind = circuit.kind;
    if fieldhash::extract_pk(kind, &wit.sk)? != st.pk {
        return Err(RelationError::UnsatisfiedRelation(Conjunct::PublicKey));
    }
    if fieldhash::nullifier(kind, &wit.k_dep)? != st.sn {
        return Err(RelationError::UnsatisfiedRelation(Conjunct::Nullifier));
    }
    if fieldhash::commit(kind, &wit.k_dep, &wit.r)? != wit.commitment {
        return Err(RelationError::UnsatisfiedRelation(Conjunct::Commitment));
    }
    if !verify_path(
        kind,
        circuit.depth,
        wit.path.index,
        wit.commitment,
        st.root,
        &wit.path,
    )? {
        return Err(RelationError::UnsatisfiedRelation(Conjunct::Membership));
    }
    Ok(())
}

impl ProofSystem for SimulationBackend {
    type ProvingKey = ProvingKey;
    type VerifyingKey = VerifyingKey;
    type Proof = Proof;

    fn setup<R: RngCore + ?Sized>(
        &self,
        kind: HashKind,
        depth: u32,
        rng: &mut R,
    ) -> (ProvingKey, VerifyingKey) {
        let trapdoor = FieldElement::random(rng);
        let circuit = CircuitId::new(kind, depth);
        (
            ProvingKey { trapdoor, circuit },
            VerifyingKey { trapdoor, circuit },
        )
    }

    fn prove(
        &self,
        ek: &ProvingKey,
        st: &Statement,
        wit: &Witness,
    ) -> Result<Proof, RelationError> {
        check_relation(ek.circuit, st, wit)?;
        Ok(Proof {
            tag: tag(ek.circuit.kind, &ek.trapdoor, st),
        })
    }

    fn verify(&self, vk: &VerifyingKey, st: &Statement, proof: &Proof) -> bool {
        tag(vk.circuit.kind, &vk.trapdoor, st) == proof.tag
    }
}

pub fn setup<R: RngCore + ?Sized>(
    kind: HashKind,
    depth: u32,
    rng: &mut R,
) -> (ProvingKey, VerifyingKey) {
    SimulationBackend.setup(kind, depth, rng)
}

pub fn prove(ek: &ProvingKey, st: &Statement, wit: &Witness) -> Result<Proof, RelationError> {
    SimulationBackend.prove(ek, st, wit)
}

pub fn verify(vk: &VerifyingKey, st: &Statement, proof: &Proof) -> bool {
    SimulationBackend.verify(vk, st, proof)
}

pub fn extract_pk(kind: HashKind, sk: &[u8]) -> Result<FieldElement, MalformedNote> {
    fieldhash::extract_pk(kind, sk)
}

#[derive(Serialize, Deserialize)]
struct KeyFile {
    insecure_test_fixture: bool,
    hash: HashKind,
    depth: u32,
    circuit_id: FieldElement,
    trapdoor: FieldElement,
}

const KEY_FILE_BANNER: &str =
    "# INSECURE TEST FIXTURE: this file contains the proof-system trapdoor.\n\
# Anyone holding it can forge proofs. Never use outside tests.\n";

/// Key-file form of a key pair: circuit id plus trapdoor, for test fixtures only.
pub fn export_insecure_key_fixture(ek: &ProvingKey) -> String {
    let body = KeyFile {
        insecure_test_fixture: true,
        hash: ek.circuit.kind,
        depth: ek.circuit.depth,
        circuit_id: ek.circuit.digest,
        trapdoor: ek.trapdoor,
    };
    format!(
        "{KEY_FILE_BANNER}{}",
        toml::to_string(&body).expect("key file serializes")
    )
}

pub fn import_insecure_key_fixture(
    text: &str,
) -> Result<(ProvingKey, VerifyingKey), RelationError> {
    let file: KeyFile = toml::from_str(text).map_err(|e| RelationError::KeyFile(e.to_string()))?;
    if !file.insecure_test_fixture {
        return Err(RelationError::KeyFile(
            "missing insecure_test_fixture marker".into(),
        ));
    }
    let circuit = CircuitId::new(file.hash, file.depth);
    if circuit.digest != file.circuit_id {
        return Err(RelationError::KeyFile(
            "circuit id does not match hash/depth".into(),
        ));
    }
    Ok((
        ProvingKey {
            trapdoor: file.trapdoor,
            circuit,
        },
        VerifyingKey {
            trapdoor: file.trapdoor,
            circuit,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldhash::{commit, nullifier};
    use crate::merkle::MerkleTree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Fixture {
        tree: MerkleTree,
        notes: Vec<([u8; 32], [u8; 32])>,
        sk: [u8; 32],
    }

    const KIND: HashKind = HashKind::Poseidon;

    fn fixture(rng: &mut ChaCha20Rng) -> Fixture {
        let mut tree = MerkleTree::init(2, KIND).unwrap();
        let mut notes = Vec::new();
        for i in 0..4 {
            let mut k = [0u8; 32];
            let mut r = [0u8; 32];
            rng.fill_bytes(&mut k);
            rng.fill_bytes(&mut r);
            tree.update(i, commit(KIND, &k, &r).unwrap()).unwrap();
            notes.push((k, r));
        }
        Fixture {
            tree,
            notes,
            sk: [9u8; 32],
        }
    }

    fn honest(f: &Fixture, i: usize) -> (Statement, Witness) {
        let (k, r) = f.notes[i];
        let st = Statement {
            pk: extract_pk(KIND, &f.sk).unwrap(),
            sn: nullifier(KIND, &k).unwrap(),
            root: f.tree.root(),
        };
        let wit = Witness {
            sk: f.sk,
            k_dep: k,
            r,
            commitment: commit(KIND, &k, &r).unwrap(),
            path: f.tree.prove(i as u64).unwrap(),
        };
        (st, wit)
    }

    #[test]
    fn completeness() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let f = fixture(&mut rng);
        let (ek, vk) = setup(KIND, 2, &mut rng);
        for i in 0..4 {
            let (st, wit) = honest(&f, i);
            let proof = prove(&ek, &st, &wit).unwrap();
            assert!(verify(&vk, &st, &proof));
        }
    }

    #[test]
    fn wrong_r_fails_commitment() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let f = fixture(&mut rng);
        let (ek, _) = setup(KIND, 2, &mut rng);
        let (st, mut wit) = honest(&f, 1);
        wit.r[0] ^= 1;
        assert_eq!(
            prove(&ek, &st, &wit),
            Err(RelationError::UnsatisfiedRelation(Conjunct::Commitment))
        );
    }

    #[test]
    fn path_to_other_leaf_fails_membership() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let f = fixture(&mut rng);
        let (ek, _) = setup(KIND, 2, &mut rng);
        // Every (note, foreign position) pair on the 4-leaf tree.
        for i in 0..4 {
            for j in (0..4).filter(|&j| j != i) {
                let (st, mut wit) = honest(&f, i);
                wit.path = f.tree.prove(j as u64).unwrap();
                assert_eq!(
                    prove(&ek, &st, &wit),
                    Err(RelationError::UnsatisfiedRelation(Conjunct::Membership)),
                    "note {i} at position {j}"
                );
            }
        }
    }

    #[test]
    fn key_and_nullifier_conjuncts() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let f = fixture(&mut rng);
        let (ek, _) = setup(KIND, 2, &mut rng);
        let (st, mut wit) = honest(&f, 0);
        wit.sk[5] ^= 0x80;
        assert_eq!(
            prove(&ek, &st, &wit),
            Err(RelationError::UnsatisfiedRelation(Conjunct::PublicKey))
        );
        let (mut st, wit) = honest(&f, 0);
        st.sn = st.sn + FieldElement::ONE;
        assert_eq!(
            prove(&ek, &st, &wit),
            Err(RelationError::UnsatisfiedRelation(Conjunct::Nullifier))
        );
    }

    #[test]
    fn statement_binding() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let f = fixture(&mut rng);
        let (ek, vk) = setup(KIND, 2, &mut rng);
        let (st, wit) = honest(&f, 2);
        let proof = prove(&ek, &st, &wit).unwrap();
        let other_pk = extract_pk(KIND, &[1u8; 32]).unwrap();
        assert!(!verify(&vk, &Statement { pk: other_pk, ..st }, &proof));
        assert!(!verify(&vk, &Statement { sn: st.root, ..st }, &proof));
        let mut later = f.tree.clone();
        later.update(3, FieldElement::from_u64(1)).unwrap();
        assert!(!verify(
            &vk,
            &Statement {
                root: later.root(),
                ..st
            },
            &proof
        ));
    }

    #[test]
    fn key_pairs_are_bound() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let f = fixture(&mut rng);
        let (ek_a, vk_a) = setup(KIND, 2, &mut rng);
        let (_, vk_b) = setup(KIND, 2, &mut rng);
        assert!(ek_a.trapdoor != vk_b.trapdoor);
        let (st, wit) = honest(&f, 0);
        let proof = prove(&ek_a, &st, &wit).unwrap();
        assert!(verify(&vk_a, &st, &proof));
        assert!(!verify(&vk_b, &st, &proof));
        assert_ne!(
            CircuitId::new(HashKind::Mimc, 20),
            CircuitId::new(HashKind::Poseidon, 20)
        );
    }

    #[test]
    fn proof_independent_of_witness() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut f = fixture(&mut rng);
        let (ek, _) = setup(KIND, 2, &mut rng);
        // The same commitment at two positions gives two distinct witnesses
        // for one statement.
        let cm0 = f.tree.leaf(0).unwrap();
        f.tree.update(3, cm0).unwrap();
        let (st, wit) = honest(&f, 0);
        let wit2 = Witness {
            path: f.tree.prove(3).unwrap(),
            ..wit.clone()
        };
        assert_ne!(wit.path, wit2.path);
        assert_eq!(
            prove(&ek, &st, &wit).unwrap(),
            prove(&ek, &st, &wit2).unwrap()
        );
    }

    #[test]
    fn key_fixture_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (ek, vk) = setup(HashKind::Mimc, 20, &mut rng);
        let text = export_insecure_key_fixture(&ek);
        assert!(text.starts_with("# INSECURE"));
        let (ek2, vk2) = import_insecure_key_fixture(&text).unwrap();
        assert_eq!(ek, ek2);
        assert_eq!(vk, vk2);
        let tampered = text.replace("depth = 20", "depth = 21");
        assert!(import_insecure_key_fixture(&tampered).is_err());
    }
}
