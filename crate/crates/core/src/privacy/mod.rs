//! Anonymity-set tracking, linking-advantage bounds, a Monte-Carlo linking
//! adversary, front-running cost, and deposit-trace analysis.
//!
//! Bounds report the negligible cryptographic term as exactly zero: the
//! simulated proof system gives the adversary no cryptanalytic advantage.

mod linker;
mod trace;
mod truth;
mod view;

use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

pub use linker::{Linker, UniformGuesser};
pub use trace::{
    analyze_trace, format_trace, parse_trace, uniform_trace, GapPoint, TraceError, TraceKind,
    TraceRecord, TraceReport, WindowStat,
};
pub use truth::GroundTruth;
pub use view::{AnonymityView, CommitmentEvent, NullifierEvent, SpendKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrivacyError {
    #[error("anonymity set at height {0} is empty")]
    EmptyAnonSet(u64),
    #[error("height {h} is below t_con = {t_con}")]
    HeightUnderflow { h: u64, t_con: u64 },
}

/// Withdraw linking bound `1 / |AnomSet^h|`.
pub fn adv_bound_withdraw(view: &AnonymityView, h: u64) -> Result<f64, PrivacyError> {
    match view.anom_size(h) {
        0 => Err(PrivacyError::EmptyAnonSet(h)),
        n => Ok(1.0 / n as f64),
    }
}

/// Redeem linking bound `1 / |AnomSet^(h - t_con)|`.
pub fn adv_bound_redeem(view: &AnonymityView, h: u64, t_con: u64) -> Result<f64, PrivacyError> {
    let base = h
        .checked_sub(t_con)
        .ok_or(PrivacyError::HeightUnderflow { h, t_con })?;
    adv_bound_withdraw(view, base)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkerReport {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    /// Standard error of `rate`.
    pub stderr: f64,
}

impl LinkerReport {
    fn new(trials: u64, successes: u64) -> Self {
        let rate = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (rate * (1.0 - rate) / trials as f64).sqrt()
        };
        LinkerReport {
            trials,
            successes,
            rate,
            stderr,
        }
    }
}

/// Runs `trials` guesses against `target`, scoring each against the ground truth.
pub fn monte_carlo_linker<L: Linker, R: RngCore>(
    view: &AnonymityView,
    truth: &GroundTruth,
    linker: &L,
    target: &NullifierEvent,
    trials: u64,
    rng: &mut R,
) -> LinkerReport {
    let answer = truth.origin_of(&target.sn);
    let mut successes = 0;
    for _ in 0..trials {
        let guess = linker.guess(view, target, rng);
        if guess.is_some() && guess == answer {
            successes += 1;
        }
    }
    LinkerReport::new(trials, successes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrontrunCost {
    /// Capital needed to push `k` deposits ahead of a victim.
    pub total: u128,
    /// Fees that are lost even if every deposit is later withdrawn.
    pub sunk_fees: u128,
}

pub fn frontrun_cost(k: u64, amt: u128, fee_dep: u128) -> FrontrunCost {
    FrontrunCost {
        total: k as u128 * (amt + fee_dep),
        sunk_fees: k as u128 * fee_dep,
    }
}
