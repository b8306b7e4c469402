//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::HashSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use amr_core::amount::UNIT;
use amr_core::cli::{
    gas_table, run_scenario, ActionSpec, ActionStatus, ActorSpec, FeesSection, GasModel, Op,
    OrderingName, ParamsSection, Role, Scenario, Simulation,
};
use amr_core::fieldhash::{h_2p, h_p, FieldElement, HashKind};
use amr_core::ledger::Asset;
use amr_core::merkle::MerkleTree;
use amr_core::privacy::{
    adv_bound_redeem, adv_bound_withdraw, frontrun_cost, monte_carlo_linker, SpendKind,
    UniformGuesser,
};
use amr_core::zkrelation::{count_constraints, CircuitCostModel};
use common::gen::{random_scenario, tx_count, GenLimits};
use common::oracle::Oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let o = f();
    let took = t.elapsed();
    let within = took < budget;
    Outcome {
        pass: o.pass && within,
        detail: format!("{} ({:.2?}, budget {:?})", o.detail, took, budget),
    }
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn bundled() -> Vec<Scenario> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(root().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    files.iter().map(|f| Scenario::load(f).unwrap()).collect()
}

fn params(depth: u32, k: usize, t_con: u64, kind: HashKind) -> ParamsSection {
    ParamsSection {
        amount: "10".into(),
        reward_amount: "1".into(),
        t_con,
        depth,
        root_list_len: k,
        hash: kind,
        rate_per_block: "1.0001".into(),
        t_max: 100,
    }
}

fn actor(name: &str, role: Role, balance: &str, script: Vec<ActionSpec>) -> ActorSpec {
    ActorSpec {
        name: name.into(),
        role,
        balance: balance.into(),
        relayer: false,
        link_group: None,
        script,
    }
}

fn act(at: u64, op: Op) -> ActionSpec {
    ActionSpec {
        at,
        op: Some(op),
        ..ActionSpec::default()
    }
}

fn deposit(at: u64, note: &str) -> ActionSpec {
    ActionSpec {
        note: Some(note.into()),
        ..act(at, Op::Deposit)
    }
}

fn scenario(seed: u64, blocks: u64, params: ParamsSection, actors: Vec<ActorSpec>) -> Scenario {
    Scenario {
        name: String::new(),
        seed,
        blocks,
        ordering: OrderingName::Fifo,
        custom_order: Vec::new(),
        monte_carlo_trials: 0,
        params,
        fees: FeesSection::default(),
        actors,
    }
}

fn criterion_1() -> Outcome {
    let model = CircuitCostModel::default();
    let table = [
        (HashKind::Poseidon, [4245, 5460, 6675, 7890, 9105]),
        (HashKind::Mimc, [15045, 21660, 28275, 34890, 41505]),
    ];
    let mut matched = 0;
    let mut bad = Vec::new();
    for (kind, expected) in table {
        for (d, want) in [10, 15, 20, 25, 30].into_iter().zip(expected) {
            let got = count_constraints(kind, d, &model).unwrap();
            if got == want {
                matched += 1;
            } else {
                bad.push(format!("{kind} d={d}: {got} != {want}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{matched}/10 cells exact {}", bad.join("; ")),
    )
}

fn criterion_2() -> Outcome {
    let m = GasModel::default();
    let mut bad = Vec::new();
    let mut checked = 0;
    for kind in HashKind::all() {
        let b = if kind == HashKind::Mimc {
            51_000
        } else {
            41_000
        };
        for d in 1..=32u32 {
            for lend in [false, true] {
                let e = m.estimate(kind, d, lend);
                let dep = 43_000 + b * d as u64 + if lend { 300_000 } else { 0 };
                let wdr = 320_000 + if lend { 200_000 } else { 0 };
                checked += 1;
                if e.deposit != dep || e.withdraw != wdr || e.redeem != dep + wdr {
                    bad.push(format!("{kind} d={d} lending={lend}"));
                }
            }
        }
    }
    let row = gas_table(&m, &[HashKind::Mimc], &[20], false);
    let cli_ok = row.lines().nth(1) == Some("mimc\t20\tfalse\t1063000\t320000\t1383000");
    outcome(
        bad.is_empty() && cli_ok,
        format!("{checked} (kind, depth, lending) rows match the linear model; MiMC d=20 deposit 1063000 {}", bad.join("; ")),
    )
}

/// A victim builds a withdraw proof, then `j` adversarial deposits land
/// before it is mined. Returns the victim's withdraw outcome.
fn interleaving(j: u64, depth: u32, k: usize) -> (ActionStatus, Option<String>) {
    let submit_at = j + 2;
    let victim = actor(
        "victim",
        Role::Honest,
        "100",
        vec![
            deposit(1, "v"),
            ActionSpec {
                note: Some("v".into()),
                prepared_at: Some(1),
                ..act(submit_at, Op::Withdraw)
            },
        ],
    );
    let flood = (0..j).map(|i| deposit(2 + i, &format!("f{i}"))).collect();
    let adversary = actor("adv", Role::Adversary, "1000", flood);
    let s = scenario(
        3,
        submit_at,
        params(depth, k, 100, HashKind::Poseidon),
        vec![victim, adversary],
    );
    let report = run_scenario(s).unwrap();
    let w = report
        .actions
        .iter()
        .find(|a| a.op == Op::Withdraw)
        .unwrap();
    (w.status, w.reason.clone())
}

fn criterion_3() -> Outcome {
    let c = frontrun_cost(1000, 10 * UNIT, 2 * UNIT / 100);
    let cost_ok = c.total == 10_020 * UNIT && c.sunk_fees == 20 * UNIT;
    let (d, k) = (6, 8);
    let mut survived = Vec::new();
    let mut stale = Vec::new();
    let mut wrong = Vec::new();
    for j in 0..=(k as u64 + 2) {
        let (status, reason) = interleaving(j, d, k);
        match (status, reason.as_deref()) {
            (ActionStatus::Executed, _) if j < k as u64 => survived.push(j),
            (ActionStatus::Reverted, Some("StaleRoot")) if j >= k as u64 => stale.push(j),
            other => wrong.push(format!("j={j}: {other:?}")),
        }
    }
    outcome(
        cost_ok && wrong.is_empty(),
        format!(
            "cost {} coins, sunk {}; d={d} k={k}: survives j={:?}, StaleRoot j={:?} {}",
            c.total / UNIT,
            c.sunk_fees / UNIT,
            survived,
            stale,
            wrong.join("; ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let limits = GenLimits {
        max_txs: 50,
        max_depth: 8,
    };
    let n = 1000u64;
    let mut violations = Vec::new();
    let (mut withdraws, mut redeems, mut txs) = (0u64, 0u64, 0usize);
    for seed in 0..n {
        let s = random_scenario(0xA11CE + seed, &limits);
        assert!(tx_count(&s) <= 50 && s.params.depth <= 8);
        txs += tx_count(&s);
        let t_con = s.params.t_con;
        let mut sim = Simulation::new(s).unwrap();
        while sim.step() {
            let sys = sim.system();
            let st = sys.stats;
            // (a) payouts never exceed deposits plus minted interest
            let paid = st.paid_to_withdrawers + st.paid_to_claimers;
            if paid > st.deposited + sys.lending.minted_interest {
                violations.push(format!("seed {seed}: payout {paid} exceeds inflow"));
            }
            // (b) each nullifier succeeds at most once
            let list = &sys.contract.nullifier_list;
            if list.iter().collect::<HashSet<_>>().len() != list.len() {
                violations.push(format!("seed {seed}: nullifier reused"));
            }
            // (c) redeemed notes are at least t_con blocks old
            for r in &sys.redeems {
                let born = sim
                    .truth()
                    .origin_of(&r.sn)
                    .and_then(|cm| sim.truth().insertion_height(&cm));
                if born.is_none_or(|b| b + t_con > r.height)
                    || r.reward_root.height + t_con > r.height
                {
                    violations.push(format!("seed {seed}: young redeem at {}", r.height));
                }
            }
        }
        if !sim.audit_failures().is_empty() {
            violations.push(format!("seed {seed}: audit {:?}", sim.audit_failures()[0]));
        }
        withdraws += sim.system().stats.withdraws;
        redeems += sim.system().stats.redeems;
    }
    violations.dedup();
    outcome(
        violations.is_empty(),
        format!(
            "{n} scenarios, {txs} txs, {withdraws} withdraws and {redeems} redeems executed, {} violations {}",
            violations.len(),
            violations.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    )
}

/// `n` honest depositors at heights 1..=n and one adversarial deposit. In
/// the next block the first depositor redeems and the last one withdraws,
/// so the withdraw also sees the redeem's refresh commitment.
fn privacy_scenario(n: usize, t_con: u64) -> Scenario {
    let blocks = n as u64 + 1;
    let mut actors: Vec<ActorSpec> = (0..n)
        .map(|i| {
            actor(
                &format!("h{i}"),
                Role::Honest,
                "20",
                vec![deposit(i as u64 + 1, "n")],
            )
        })
        .collect();
    actors[0].script.push(ActionSpec {
        note: Some("n".into()),
        ..act(blocks, Op::Redeem)
    });
    actors[n - 1].script.push(ActionSpec {
        note: Some("n".into()),
        ..act(blocks, Op::Withdraw)
    });
    actors.push(actor("adv", Role::Adversary, "20", vec![deposit(1, "x")]));
    scenario(
        17 + n as u64,
        blocks,
        params(8, 64, t_con, HashKind::Poseidon),
        actors,
    )
}

fn criterion_5() -> Outcome {
    let trials = 100_000u64;
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [2usize, 10, 50] {
        let t_con = 1;
        let mut sim = Simulation::new(privacy_scenario(n, t_con)).unwrap();
        while sim.step() {}
        let view = sim.view();
        let guesser = UniformGuesser { t_con };
        for (i, target) in view.nullifiers().iter().enumerate() {
            let bound = match target.kind {
                SpendKind::Withdraw => adv_bound_withdraw(view, target.height),
                SpendKind::Redeem => adv_bound_redeem(view, target.height, t_con),
            }
            .unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(1000 + n as u64 * 10 + i as u64);
            let r = monte_carlo_linker(view, sim.truth(), &guesser, target, trials, &mut rng);
            let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
            let pass = match target.kind {
                SpendKind::Withdraw => (r.rate - bound).abs() <= 3.0 * sigma,
                SpendKind::Redeem => r.rate <= bound + 3.0 * sigma,
            };
            ok &= pass;
            lines.push(format!(
                "n={n} {:?} rate {:.4} vs {:.4}",
                target.kind, r.rate, bound
            ));
        }
        if view.nullifiers().len() != 2 {
            ok = false;
            lines.push(format!(
                "n={n}: expected 2 spends, saw {}",
                view.nullifiers().len()
            ));
        }
    }
    outcome(ok, lines.join(", "))
}

fn criterion_6() -> Outcome {
    let mut blocks = 0;
    let mut bad = Vec::new();
    for s in bundled() {
        let name = s.name.clone();
        let mut sim = Simulation::new(s).unwrap();
        while sim.step() {
            blocks += 1;
            let chain = sim.chain();
            let sys = sim.system();
            let h = chain.height();
            let coins = chain.balances().total(Asset::Coin)
                + sys.lending.total_underlying
                + sys.pool.interest_balance;
            if coins != chain.initial_coins() + sys.lending.minted_interest {
                bad.push(format!("{name}@{h}: coins"));
            }
            let tokens = chain.balances().total(Asset::GovToken) + sys.pool.escrowed();
            let amt_rwd = sys.contract.params.amt_rwd;
            if tokens != amt_rwd * sys.stats.redeems as u128 {
                bad.push(format!("{name}@{h}: tokens"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{blocks} blocks checked exactly {}", bad.join("; ")),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let kind = if rng.gen_bool(0.5) {
            HashKind::Mimc
        } else {
            HashKind::Poseidon
        };
        let depth = rng.gen_range(1..=8u32);
        let cap = 1usize << depth;
        let mut tree = MerkleTree::init(depth, kind).unwrap();
        let mut dense = vec![FieldElement::ZERO; cap];
        for _ in 0..rng.gen_range(1..=12) {
            let i = rng.gen_range(0..cap);
            let v = FieldElement::random(&mut rng);
            tree.update(i as u64, v).unwrap();
            dense[i] = v;
        }
        let mut level = dense;
        while level.len() > 1 {
            level = level.chunks(2).map(|p| h_2p(kind, p[0], p[1])).collect();
        }
        if level[0] != tree.root() {
            mismatches += 1;
        }
    }

    #[derive(serde::Deserialize)]
    struct Vectors {
        h2p: Vec<H2p>,
        hp: Vec<Hp>,
    }
    #[derive(serde::Deserialize)]
    struct H2p {
        kind: HashKind,
        left: FieldElement,
        right: FieldElement,
    }
    #[derive(serde::Deserialize)]
    struct Hp {
        kind: HashKind,
        data: String,
    }
    let v: Vectors = toml::from_str(include_str!("fixtures/hash_vectors.toml")).unwrap();
    let oracle = Oracle::new();
    let mut vec_bad = 0;
    for c in &v.h2p {
        if h_2p(c.kind, c.left, c.right).to_biguint()
            != oracle.h2(c.kind.as_str(), &c.left.to_biguint(), &c.right.to_biguint())
        {
            vec_bad += 1;
        }
    }
    for c in &v.hp {
        let data = hex::decode(&c.data).unwrap();
        if h_p(c.kind, &data).to_biguint() != oracle.hp(c.kind.as_str(), &data) {
            vec_bad += 1;
        }
    }
    outcome(
        mismatches == 0 && vec_bad == 0,
        format!(
            "1000 random update sequences, {mismatches} root mismatches; {} fixture vectors, {vec_bad} oracle mismatches",
            v.h2p.len() + v.hp.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut names = Vec::new();
    let mut ok = true;
    for s in bundled().into_iter().take(3) {
        let a = run_scenario(s.clone()).unwrap();
        let b = run_scenario(s.clone()).unwrap();
        ok &= a.event_log == b.event_log && !a.event_log.is_empty();
        names.push(s.name);
    }
    outcome(
        ok && names.len() == 3,
        format!("byte-identical event logs for {}", names.join(", ")),
    )
}

fn main() {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        (
            "1 constraint counts",
            Box::new(|| timed(Duration::from_secs(1), criterion_1)),
        ),
        (
            "2 gas model",
            Box::new(|| timed(Duration::from_secs(1), criterion_2)),
        ),
        (
            "3 front-running",
            Box::new(|| timed(Duration::from_secs(10), criterion_3)),
        ),
        (
            "4 correctness fuzzing",
            Box::new(|| timed(Duration::from_secs(300), criterion_4)),
        ),
        (
            "5 privacy bounds",
            Box::new(|| timed(Duration::from_secs(60), criterion_5)),
        ),
        ("6 conservation", Box::new(criterion_6)),
        (
            "7 merkle and hash oracles",
            Box::new(|| timed(Duration::from_secs(30), criterion_7)),
        ),
        ("8 determinism", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "[N/A ] 9 not reproducible here: key-generation times and key sizes, measured EVM gas, \
         proof-generation wall-clock and mainnet deposit/withdraw counts; covered by 1-8 and the synthetic trace reports"
    );
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
