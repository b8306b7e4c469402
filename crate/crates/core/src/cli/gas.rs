//! Linear gas-cost reporting model. It does not meter execution.

use serde::{Deserialize, Serialize};

use crate::fieldhash::HashKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasModel {
    pub a_dep: u64,
    pub b_dep_mimc: u64,
    pub b_dep_poseidon: u64,
    pub c_wdr: u64,
    pub dep_lending: u64,
    pub wdr_lending: u64,
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel {
            a_dep: 43_000,
            b_dep_mimc: 51_000,
            b_dep_poseidon: 41_000,
            c_wdr: 320_000,
            dep_lending: 300_000,
            wdr_lending: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GasEstimate {
    pub kind: HashKind,
    pub depth: u32,
    pub with_lending: bool,
    pub deposit: u64,
    pub withdraw: u64,
    pub redeem: u64,
}

impl GasModel {
    pub fn per_level(&self, kind: HashKind) -> u64 {
        match kind {
            HashKind::Mimc => self.b_dep_mimc,
            HashKind::Poseidon => self.b_dep_poseidon,
        }
    }

    pub fn estimate(&self, kind: HashKind, depth: u32, with_lending: bool) -> GasEstimate {
        let mut deposit = self.a_dep + self.per_level(kind) * depth as u64;
        let mut withdraw = self.c_wdr;
        if with_lending {
            deposit += self.dep_lending;
            withdraw += self.wdr_lending;
        }
        GasEstimate {
            kind,
            depth,
            with_lending,
            deposit,
            withdraw,
            redeem: deposit + withdraw,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mimc_depth_20_deposit() {
        let e = GasModel::default().estimate(HashKind::Mimc, 20, false);
        assert_eq!(e.deposit, 1_063_000);
        assert_eq!(e.withdraw, 320_000);
        assert_eq!(e.redeem, 1_383_000);
    }

    #[test]
    fn lending_add_ons() {
        let m = GasModel::default();
        for kind in HashKind::all() {
            for d in [1, 10, 30] {
                let plain = m.estimate(kind, d, false);
                let lend = m.estimate(kind, d, true);
                assert_eq!(lend.deposit, plain.deposit + 300_000);
                assert_eq!(lend.withdraw, plain.withdraw + 200_000);
                assert_eq!(lend.redeem, lend.deposit + lend.withdraw);
            }
        }
    }
}
