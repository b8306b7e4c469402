//! Seeded random scenario generator for fuzzing the simulator.

use amr_core::cli::{
    ActionSpec, ActorSpec, FeesSection, Op, OrderingName, ParamsSection, Role, Scenario,
};
use amr_core::fieldhash::HashKind;
use amr_core::ledger::Asset;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct GenLimits {
    pub max_txs: usize,
    pub max_depth: u32,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits {
            max_txs: 50,
            max_depth: 8,
        }
    }
}

pub fn random_scenario(seed: u64, limits: &GenLimits) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = rng.gen_range(4..=24u64);
    let depth = rng.gen_range(1..=limits.max_depth);
    let n_actors = rng.gen_range(2..=5usize);
    let names: Vec<String> = (0..n_actors).map(|i| format!("p{i}")).collect();
    let relayer = rng.gen_bool(0.5).then(|| rng.gen_range(0..n_actors));
    let mut actors: Vec<ActorSpec> = names
        .iter()
        .enumerate()
        .map(|(i, name)| ActorSpec {
            name: name.clone(),
            role: if i > 0 && rng.gen_bool(0.3) {
                Role::Adversary
            } else {
                Role::Honest
            },
            balance: format!("{}", rng.gen_range(0..80u32)),
            relayer: relayer == Some(i),
            link_group: rng.gen_bool(0.2).then(|| rng.gen_range(0..2)),
            script: Vec::new(),
        })
        .collect();

    let n_txs = rng.gen_range(1..=limits.max_txs);
    let mut notes: Vec<Vec<String>> = vec![Vec::new(); n_actors];
    let mut ids: Vec<String> = Vec::new();
    let mut counter = 0usize;
    let mut fresh = |prefix: &str| {
        counter += 1;
        format!("{prefix}{counter}")
    };
    let mut ats: Vec<u64> = (0..n_txs).map(|_| rng.gen_range(1..=blocks)).collect();
    ats.sort_unstable();
    let mut actions: Vec<(usize, ActionSpec)> = Vec::new();
    for at in ats {
        let roll = rng.gen_range(0..100);
        let holders: Vec<usize> = (0..n_actors).filter(|&i| !notes[i].is_empty()).collect();
        let a = if (35..70).contains(&roll) && !holders.is_empty() {
            *holders.choose(&mut rng).unwrap()
        } else {
            rng.gen_range(0..n_actors)
        };
        let mut act = ActionSpec {
            at,
            ..ActionSpec::default()
        };
        let pick_note = |rng: &mut ChaCha8Rng, notes: &[String]| -> String {
            if notes.is_empty() || rng.gen_bool(0.05) {
                "ghost".to_string()
            } else {
                notes.choose(rng).unwrap().clone()
            }
        };
        let op = match roll {
            0..=34 => {
                let n = fresh("n");
                notes[a].push(n.clone());
                act.note = Some(n);
                Op::Deposit
            }
            35..=54 => {
                act.note = Some(pick_note(&mut rng, &notes[a]));
                if rng.gen_bool(0.3) {
                    act.to = Some(names.choose(&mut rng).unwrap().clone());
                }
                Op::Withdraw
            }
            55..=69 => {
                act.note = Some(pick_note(&mut rng, &notes[a]));
                let n = fresh("r");
                notes[a].push(n.clone());
                act.new_note = Some(n);
                act.use_next_root = rng.gen_bool(0.1);
                Op::Redeem
            }
            70..=74 => {
                act.amount = Some(["0.05", "0.1", "1"].choose(&mut rng).unwrap().to_string());
                act.t_lock = Some(rng.gen_range(1..=30));
                Op::Lock
            }
            75..=79 => Op::Claim,
            80..=81 => Op::Unlock,
            82..=85 => {
                act.to = Some(names.choose(&mut rng).unwrap().clone());
                act.amount = Some(["1", "5", "0.25"].choose(&mut rng).unwrap().to_string());
                if rng.gen_bool(0.3) {
                    act.asset = Some(Asset::GovToken);
                }
                Op::Transfer
            }
            86..=91 if !ids.is_empty() => {
                act.of = Some(ids.choose(&mut rng).unwrap().clone());
                if rng.gen_bool(0.5) {
                    Op::Replay
                } else {
                    Op::Steal
                }
            }
            _ => Op::ForgeWithdraw,
        };
        if matches!(op, Op::Withdraw | Op::Redeem) {
            if rng.gen_bool(0.4) {
                let id = fresh("id");
                ids.push(id.clone());
                act.id = Some(id);
            }
            if at > 1 && rng.gen_bool(0.2) {
                act.prepared_at = Some(rng.gen_range(0..at));
            }
            if let Some(r) = relayer {
                if rng.gen_bool(0.3) {
                    act.fee_payer = Some(names[r].clone());
                }
            }
        }
        act.op = Some(op);
        actions.push((a, act));
    }
    for (a, act) in actions {
        actors[a].script.push(act);
    }

    let ordering = *[
        OrderingName::Fifo,
        OrderingName::AdversaryFirst,
        OrderingName::Custom,
    ]
    .choose(&mut rng)
    .unwrap();
    let custom_order = if ordering == OrderingName::Custom {
        let mut p: Vec<usize> = (0..rng.gen_range(0..8)).collect();
        p.shuffle(&mut rng);
        p
    } else {
        Vec::new()
    };
    let rate = ["1", "1.0001", "1.01", "1.05"].choose(&mut rng).unwrap();
    Scenario {
        name: format!("fuzz-{seed}"),
        seed,
        blocks,
        ordering,
        custom_order,
        monte_carlo_trials: 0,
        params: ParamsSection {
            amount: ["1", "10", "0.5"].choose(&mut rng).unwrap().to_string(),
            reward_amount: ["1", "0.1"].choose(&mut rng).unwrap().to_string(),
            t_con: rng.gen_range(0..=5),
            depth,
            root_list_len: rng.gen_range(1..=6),
            hash: if rng.gen_bool(0.5) {
                HashKind::Mimc
            } else {
                HashKind::Poseidon
            },
            rate_per_block: rate.to_string(),
            t_max: rng.gen_range(1..=40),
        },
        fees: FeesSection::default(),
        actors,
    }
}

pub fn tx_count(s: &Scenario) -> usize {
    s.actors.iter().map(|a| a.script.len()).sum()
}
