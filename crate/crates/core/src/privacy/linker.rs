//! Adversary strategies. This module sees only the public [`AnonymityView`].

use rand::{Rng, RngCore};

use super::view::{AnonymityView, NullifierEvent, SpendKind};
use crate::fieldhash::FieldElement;

pub trait Linker {
    fn guess(
        &self,
        view: &AnonymityView,
        target: &NullifierEvent,
        rng: &mut dyn RngCore,
    ) -> Option<FieldElement>;
}

/// Picks uniformly among honest commitments old enough to be the origin:
/// inserted by the spend height for withdrawals, and by `t_con` blocks
/// earlier for redemptions.
#[derive(Debug, Clone, Copy)]
pub struct UniformGuesser {
    pub t_con: u64,
}

impl UniformGuesser {
    pub fn eligible(&self, view: &AnonymityView, target: &NullifierEvent) -> Vec<FieldElement> {
        let horizon = match target.kind {
            SpendKind::Withdraw => Some(target.height),
            SpendKind::Redeem => target.height.checked_sub(self.t_con),
        };
        match horizon {
            Some(h) => view.anom_set(h).map(|c| c.cm).collect(),
            None => Vec::new(),
        }
    }
}

impl Linker for UniformGuesser {
    fn guess(
        &self,
        view: &AnonymityView,
        target: &NullifierEvent,
        rng: &mut dyn RngCore,
    ) -> Option<FieldElement> {
        let pool = self.eligible(view, target);
        if pool.is_empty() {
            return None;
        }
        Some(pool[rng.gen_range(0..pool.len())])
    }
}
