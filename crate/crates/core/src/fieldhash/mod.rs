//! Field arithmetic, the two hash families and the note commitment scheme.
//!
//! * `h_2p` is the 2-to-1 compression used for Merkle nodes (MiMC or Poseidon).
//! * `h_p` maps arbitrary bytes to a field element: a rate-1 sponge over
//!   `h_2p` that absorbs a fixed tag, then 31-byte big-endian chunks of the
//!   input padded with `0x01 0x00*`.
//! * `commit`, `nullifier` and `extract_pk` are `h_p` over distinct domain
//!   prefixes, so their images never coincide on honest inputs.

pub mod field;
pub mod mimc;
pub mod params;
pub mod poseidon;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use field::{fe_add, fe_inv, fe_mul, fe_sub, FieldElement};

/// Security parameter in bits; note secrets and keys are `LAMBDA / 8` bytes.
pub const LAMBDA: usize = 256;
pub const SECRET_LEN: usize = LAMBDA / 8;

pub const DOMAIN_CM: &[u8] = b"AMR.cm";
pub const DOMAIN_SN: &[u8] = b"AMR.sn";
pub const DOMAIN_PK: &[u8] = b"AMR.pk";
pub const DOMAIN_SIG: &[u8] = b"AMR.sig";
pub const DOMAIN_PROOF: &[u8] = b"AMR.proof";
pub const DOMAIN_CIRCUIT: &[u8] = b"AMR.circuit";

/// Tag absorbed before any input, `be_int("AMR.hp.v1")`.
const HP_TAG: &[u8] = b"AMR.hp.v1";
const CHUNK: usize = 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("encoding is not a canonical field element")]
    NonCanonical,
    #[error("bad hex field element `{0}`")]
    BadHex(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed note: expected {expected} bytes, got {got}")]
pub struct MalformedNote {
    pub expected: usize,
    pub got: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashKind {
    Mimc,
    Poseidon,
}

impl HashKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HashKind::Mimc => "mimc",
            HashKind::Poseidon => "poseidon",
        }
    }

    pub fn all() -> [HashKind; 2] {
        [HashKind::Mimc, HashKind::Poseidon]
    }
}

impl fmt::Display for HashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HashKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mimc" => Ok(HashKind::Mimc),
            "poseidon" => Ok(HashKind::Poseidon),
            other => Err(format!(
                "unknown hash kind `{other}` (expected mimc or poseidon)"
            )),
        }
    }
}

pub fn h_2p(kind: HashKind, left: FieldElement, right: FieldElement) -> FieldElement {
    match kind {
        HashKind::Mimc => mimc::compress(params::mimc(), left, right),
        HashKind::Poseidon => poseidon::compress(params::poseidon(), left, right),
    }
}

pub fn h_p(kind: HashKind, data: &[u8]) -> FieldElement {
    let mut state = h_2p(
        kind,
        FieldElement::ZERO,
        FieldElement::from_be_bytes_reduced(HP_TAG),
    );
    let mut padded = Vec::with_capacity(data.len() + CHUNK);
    padded.extend_from_slice(data);
    padded.push(0x01);
    padded.resize(padded.len().div_ceil(CHUNK) * CHUNK, 0);
    for chunk in padded.chunks(CHUNK) {
        state = h_2p(kind, state, FieldElement::from_be_bytes_reduced(chunk));
    }
    state
}

/// `h_p` over the concatenation of `parts`.
pub fn h_p_parts(kind: HashKind, parts: &[&[u8]]) -> FieldElement {
    h_p(kind, &parts.concat())
}

fn check_len(bytes: &[u8]) -> Result<(), MalformedNote> {
    if bytes.len() != SECRET_LEN {
        return Err(MalformedNote {
            expected: SECRET_LEN,
            got: bytes.len(),
        });
    }
    Ok(())
}

pub fn commit(kind: HashKind, k: &[u8], r: &[u8]) -> Result<FieldElement, MalformedNote> {
    check_len(k)?;
    check_len(r)?;
    Ok(h_p_parts(kind, &[DOMAIN_CM, k, r]))
}

pub fn verify_commit(kind: HashKind, cm: FieldElement, k: &[u8], r: &[u8]) -> bool {
    matches!(commit(kind, k, r), Ok(c) if c == cm)
}

pub fn nullifier(kind: HashKind, k: &[u8]) -> Result<FieldElement, MalformedNote> {
    check_len(k)?;
    Ok(h_p_parts(kind, &[DOMAIN_SN, k]))
}

pub fn extract_pk(kind: HashKind, sk: &[u8]) -> Result<FieldElement, MalformedNote> {
    check_len(sk)?;
    Ok(h_p_parts(kind, &[DOMAIN_PK, sk]))
}
