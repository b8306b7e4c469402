//! Permutation parameters, loaded from the versioned constants file.
//!
//! Round constants are `SHA-256("AMR-<kind>-rc-<i>") mod P`. The file is
//! generated by [`render_constants_file`] and checked in; the hash code reads
//! round counts and constants only from the parsed file.

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::field::{FieldElement, MODULUS_HEX};
use super::HashKind;

pub const CONSTANTS_VERSION: u32 = 1;

const CONSTANTS_TOML: &str = include_str!("../../constants/amr-constants-v1.toml");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MimcParams {
    pub rounds: usize,
    pub exponent: u32,
    pub key: FieldElement,
    pub round_constants: Vec<FieldElement>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoseidonParams {
    pub width: usize,
    pub full_rounds: usize,
    pub partial_rounds: usize,
    pub alpha: u32,
    pub round_constants: Vec<FieldElement>,
    pub mds: Vec<Vec<FieldElement>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsFile {
    pub version: u32,
    pub modulus: String,
    pub mimc: MimcParams,
    pub poseidon: PoseidonParams,
}

/// Describes one permutation's parameters for a [`HashKind`].
#[derive(Debug, Clone)]
pub enum PermutationParams {
    Mimc(&'static MimcParams),
    Poseidon(&'static PoseidonParams),
}

static PARAMS: Lazy<ConstantsFile> = Lazy::new(|| {
    let parsed: ConstantsFile =
        toml::from_str(CONSTANTS_TOML).expect("bundled constants file parses");
    assert_eq!(
        parsed.modulus, MODULUS_HEX,
        "constants file modulus mismatch"
    );
    assert_eq!(parsed.version, CONSTANTS_VERSION);
    assert_eq!(parsed.mimc.round_constants.len(), parsed.mimc.rounds);
    assert_eq!(parsed.mimc.exponent, 7, "MiMC round function is x^7");
    let p = &parsed.poseidon;
    assert_eq!(
        p.round_constants.len(),
        (p.full_rounds + p.partial_rounds) * p.width
    );
    assert_eq!(p.alpha, 5, "Poseidon S-box is x^5");
    assert_eq!(p.width, 3, "compression uses a width-3 state");
    assert_eq!(p.mds.len(), p.width);
    parsed
});

pub fn constants() -> &'static ConstantsFile {
    &PARAMS
}

pub fn mimc() -> &'static MimcParams {
    &PARAMS.mimc
}

pub fn poseidon() -> &'static PoseidonParams {
    &PARAMS.poseidon
}

pub fn params_for(kind: HashKind) -> PermutationParams {
    match kind {
        HashKind::Mimc => PermutationParams::Mimc(mimc()),
        HashKind::Poseidon => PermutationParams::Poseidon(poseidon()),
    }
}

pub fn derive_round_constant(kind: HashKind, i: usize) -> FieldElement {
    let digest = Sha256::digest(format!("AMR-{}-rc-{}", kind.as_str(), i).as_bytes());
    FieldElement::from_be_bytes_reduced(&digest)
}

/// Cauchy matrix `M[i][j] = 1 / (i + j + width)`.
pub fn derive_cauchy_mds(width: usize) -> Vec<Vec<FieldElement>> {
    (0..width)
        .map(|i| {
            (0..width)
                .map(|j| {
                    FieldElement::from_u64((i + j + width) as u64)
                        .inverse()
                        .expect("nonzero denominator")
                })
                .collect()
        })
        .collect()
}

pub fn derive_constants(
    mimc_rounds: usize,
    width: usize,
    full_rounds: usize,
    partial_rounds: usize,
) -> ConstantsFile {
    ConstantsFile {
        version: CONSTANTS_VERSION,
        modulus: MODULUS_HEX.to_string(),
        mimc: MimcParams {
            rounds: mimc_rounds,
            exponent: 7,
            key: FieldElement::ZERO,
            round_constants: (0..mimc_rounds)
                .map(|i| derive_round_constant(HashKind::Mimc, i))
                .collect(),
        },
        poseidon: PoseidonParams {
            width,
            full_rounds,
            partial_rounds,
            alpha: 5,
            round_constants: (0..(full_rounds + partial_rounds) * width)
                .map(|i| derive_round_constant(HashKind::Poseidon, i))
                .collect(),
            mds: derive_cauchy_mds(width),
        },
    }
}

/// Renders the constants file for the default parameter set.
pub fn render_constants_file() -> String {
    let body = toml::to_string(&derive_constants(91, 3, 8, 57)).expect("constants serialize");
    format!(
        "# AMR permutation constants, version {CONSTANTS_VERSION}.\n\
         # Round constants: SHA-256(\"AMR-<kind>-rc-<i>\") as a big-endian integer mod P.\n\
         # MiMC: Feistel over (left, right), t = left + key + c_i, (left, right) <- (right + t^7, left).\n\
         # Poseidon: state [0, left, right], ARK / S-box x^5 / Cauchy MDS, output state[0].\n\
         # Regenerate with `amr constants`.\n{body}"
    )
}
