//! Fixed-seed property suites, one per module. A failing suite reports the
//! first (and, since instance sizes grow with the trial index, smallest)
//! counterexample it met.

use super::{generate_with, run, Family, Format, InstanceSpec, OutputSpec, Params, Scenario};
use crate::agents::{decide, DecisionProblem, TieBreak, TiePolicy};
use crate::error::{Error, Result};
use crate::kserver::{self, dc_step, kserver_offline_opt, ServerConfig, VirtualPair};
use crate::metric::{
    canonical_matching, min_cost_matching_oracle, r_local_matching, Geodesic, MetricSpace, RealLine, TreeMetric,
    TreePoint,
};
use crate::mts::{self, follow_step, mts_offline_opt, traversal_cost, FollowState, TaskSystem};
use crate::parking::{
    block_of, blocks, check_payment_conditions, epsilon_strict, harmonic_prices, min_sum_prices, observation_prices,
    run_priced_agents, Occupancy, PricingRule, Street,
};
use crate::TOLERANCE;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub const SUITES: &[&str] = &["metric", "agents", "mts", "kserver", "parking", "harness"];

const SEED: u64 = 0x5EED;

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub check: String,
    pub witness: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub checks: usize,
    pub failure: Option<Failure>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    /// Writes the counterexample (if any) to `dir/<suite>.json`.
    pub fn write_witness(&self, dir: &Path) -> Result<Option<PathBuf>> {
        let Some(f) = &self.failure else { return Ok(None) };
        let io = |source, path: &Path| Error::Io {
            path: path.display().to_string(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        let path = dir.join(format!("{}.json", self.name));
        let body = json!({ "suite": self.name, "check": f.check, "witness": f.witness });
        std::fs::write(&path, serde_json::to_string_pretty(&body).expect("json")).map_err(|e| io(e, &path))?;
        Ok(Some(path))
    }

    pub fn line(&self, witness: Option<&Path>) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let w = witness.map_or("-".to_string(), |p| p.display().to_string());
        format!("SUITE {} {status} witness={w}", self.name)
    }
}

type Outcome = std::result::Result<usize, Failure>;

fn fail(check: &str, witness: Value) -> Failure {
    Failure {
        check: check.to_string(),
        witness,
    }
}

pub fn run_suite(name: &str) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let outcome = match name {
        "metric" => metric_suite(&mut rng),
        "agents" => agents_suite(&mut rng),
        "mts" => mts_suite(&mut rng),
        "kserver" => kserver_suite(&mut rng),
        "parking" => parking_suite(&mut rng),
        "harness" => harness_suite(),
        other => {
            return Err(Error::config(
                "suite",
                format!("unknown suite `{other}` ({}|all)", SUITES.join("|")),
            ))
        }
    }?;
    let (checks, failure) = match outcome {
        Ok(n) => (n, None),
        Err(f) => (0, Some(f)),
    };
    Ok(SuiteResult {
        name: name.to_string(),
        checks,
        failure,
    })
}

fn int_points<R: Rng>(rng: &mut R, n: usize, hi: i32) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0..=hi) as f64).collect()
}

fn random_tree<R: Rng>(rng: &mut R, v: usize) -> (TreeMetric, Vec<(usize, usize, f64)>) {
    let edges: Vec<_> = (1..v)
        .map(|i| (rng.gen_range(0..i), i, rng.gen_range(1..=9) as f64))
        .collect();
    (TreeMetric::new(v, &edges).expect("random tree"), edges)
}

fn metric_suite(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut checks = 0;
    for trial in 0..200 {
        let n = 1 + trial % 7;
        let mut xs = int_points(rng, n, 30);
        let mut ys = int_points(rng, n, 30);
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let c = canonical_matching(&xs, &ys)?.cost;
        let o = min_cost_matching_oracle(&xs, &ys, &RealLine)?.cost;
        if c != o {
            return Ok(Err(fail(
                "canonical matching is optimal",
                json!({ "x": xs, "y": ys, "canonical": c, "oracle": o }),
            )));
        }
        let (tree, edges) = random_tree(rng, 2 + trial % 9);
        let pts = |rng: &mut ChaCha8Rng| -> Vec<TreePoint> {
            (0..n).map(|_| TreePoint::at(rng.gen_range(0..tree.len()))).collect()
        };
        let (tx, ty) = (pts(rng), pts(rng));
        let r = rng.gen_range(0..n);
        let m = r_local_matching(&tx, &ty, r, &tree)?;
        let o = min_cost_matching_oracle(&tx, &ty, &tree)?.cost;
        let partner = &ty[m.x_to_y[r]];
        let adjacent = ty
            .iter()
            .enumerate()
            .all(|(j, y)| j == m.x_to_y[r] || tree.dist(y, partner) <= TOLERANCE || !tree.on_path(&tx[r], partner, y));
        if (m.cost - o).abs() > 1e-9 || !adjacent {
            return Ok(Err(fail(
                "r-local matching is optimal and adjacent",
                json!({ "edges": edges, "x": tx, "y": ty, "r": r, "cost": m.cost, "oracle": o }),
            )));
        }
        let m = 2 + trial % 6;
        let mut w = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i + 1..m {
                w[i][j] = rng.gen_range(1.0..10.0);
                w[j][i] = w[i][j];
            }
        }
        let d = MetricSpace::matrix(super::metric_closure(w))?;
        for _ in 0..20 {
            let (a, b, c) = (rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m));
            if d.d(a, b) != d.d(b, a) || d.d(a, a) != 0.0 || d.d(a, c) > d.d(a, b) + d.d(b, c) + 1e-9 {
                return Ok(Err(fail(
                    "metric axioms",
                    json!({ "matrix": d.to_matrix(), "triple": [a, b, c] }),
                )));
            }
        }
        checks += 3;
    }
    Ok(Ok(checks))
}

fn agents_suite(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut checks = 0;
    for trial in 0..500 {
        let n = 1 + trial % 8;
        let dis: Vec<f64> = (0..n).map(|_| rng.gen_range(0..5) as f64).collect();
        let p = DecisionProblem::new((0..n).collect(), dis.clone())?;
        let shift = rng.gen_range(0.0..1e3);
        let q = DecisionProblem::new((0..n).collect(), dis.iter().map(|d| d + shift).collect())?;
        for mut policy in [
            TieBreak::First,
            TieBreak::Last,
            TieBreak::Random(ChaCha8Rng::seed_from_u64(trial as u64)),
        ] {
            let c = decide(&p, &mut policy, TOLERANCE)?;
            if dis.iter().any(|&d| dis[c] > d + TOLERANCE) {
                return Ok(Err(fail(
                    "decide returns a minimizer",
                    json!({ "disutility": dis, "chosen": c }),
                )));
            }
        }
        if p.argmin_set(TOLERANCE) != q.argmin_set(TOLERANCE) {
            return Ok(Err(fail(
                "argmin is shift invariant",
                json!({ "disutility": dis, "shift": shift }),
            )));
        }
        checks += 2;
    }
    Ok(Ok(checks))
}

fn mts_instance(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Result<(TaskSystem, Vec<Vec<f64>>, Value)> {
    let mut params = Params::new();
    params.insert("m".into(), m as f64);
    params.insert("n".into(), n as f64);
    let inst = generate_with(Family::Mts, "uniform", &params, rng)?;
    let (sys, tasks) = inst.task_system()?;
    let tasks = tasks.to_vec();
    Ok((sys, tasks, serde_json::to_value(&inst).expect("json")))
}

fn mts_suite(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut checks = 0;
    for trial in 0..150 {
        let m = 2 + trial % 5;
        let n = 1 + trial % 15;
        let (sys, tasks, witness) = mts_instance(rng, m, n)?;
        let alg1 = traversal_cost(&sys, &tasks).0;
        let mut st = FollowState::new();
        for t in &tasks {
            follow_step(&sys, &mut st, t);
        }
        if st.cost() > 2.0 * alg1 + 1e-9 {
            return Ok(Err(fail("follow-the-traversal is within twice the traversal", witness)));
        }
        let scale: Vec<Vec<f64>> = tasks
            .iter()
            .map(|t| t.iter().map(|&x| x * rng.gen_range(0.0..=1.0)).collect())
            .collect();
        if traversal_cost(&sys, &scale).1.total_work() > traversal_cost(&sys, &tasks).1.total_work() + 1e-9 {
            return Ok(Err(fail(
                "traversal work is monotone in the tasks",
                json!({ "instance": witness, "smaller": scale }),
            )));
        }
        let run = mts::run_priced_agents(&sys, &tasks, &mut TieBreak::First)?;
        let opt = mts_offline_opt(&tasks, sys.metric(), sys.initial_state())?;
        if !run.unfaithful.is_empty() {
            return Ok(Err(fail("priced agents follow the traversal", witness)));
        }
        if run.cost() > 16.0 * (m as f64 - 1.0) * opt + 1e-9 {
            return Ok(Err(fail("priced agents are 16(m-1)-competitive", witness)));
        }
        checks += 4;
    }
    Ok(Ok(checks))
}

fn kserver_suite(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut checks = 0;
    for trial in 0..150 {
        let k = 1 + trial % 4;
        let n = 1 + trial % 12;
        let mut init: Vec<f64> = rand::seq::index::sample(rng, 101, k)
            .into_iter()
            .map(|x| x as f64)
            .collect();
        init.sort_by(f64::total_cmp);
        let requests = int_points(rng, n, 100);
        let witness = json!({ "servers": init, "requests": requests });
        let config = ServerConfig::line(init.clone())?;
        let mut pair = VirtualPair::new(config.clone());
        let mut dc = config.clone();
        let (mut lazy_total, mut dc_total) = (0.0, 0.0);
        for r in &requests {
            let s = pair.lazy_step(&RealLine, r)?;
            if s.cost + s.phi_after - s.phi_before > s.virtual_cost + 1e-9 {
                return Ok(Err(fail("lazy step potential inequality", witness)));
            }
            lazy_total += s.cost;
            dc_total += dc_step(&RealLine, &mut dc, r)?.cost;
        }
        if lazy_total > dc_total + 1e-9 {
            return Ok(Err(fail("lazy DC costs no more than DC", witness)));
        }
        let run = kserver::run_priced_agents(&RealLine, config, &requests, &mut TieBreak::First)?;
        let opt = kserver_offline_opt(&RealLine, &init, &requests)?;
        if !run.deviations.is_empty() || run.cost() > run.dc_cost + 1e-3 || run.cost() > (k as f64 + 0.25) * opt + 1e-9
        {
            return Ok(Err(fail("threshold prices reproduce lazy DC", witness)));
        }
        let (tree, edges) = random_tree(rng, 2 + trial % 7);
        let tk = k.min(tree.len());
        let servers: Vec<TreePoint> = rand::seq::index::sample(rng, tree.len(), tk)
            .into_iter()
            .map(TreePoint::at)
            .collect();
        let treq: Vec<TreePoint> = (0..n).map(|_| TreePoint::at(rng.gen_range(0..tree.len()))).collect();
        let mut pair = VirtualPair::new(ServerConfig::new(servers.clone())?);
        for r in &treq {
            let s = pair.lazy_step(&tree, r)?;
            if s.cost + s.phi_after - s.phi_before > s.virtual_cost + 1e-9 {
                return Ok(Err(fail(
                    "lazy step potential inequality on a tree",
                    json!({ "edges": edges, "servers": servers, "requests": treq }),
                )));
            }
        }
        checks += 4;
    }
    Ok(Ok(checks))
}

fn random_street(rng: &mut ChaCha8Rng, n: usize) -> Result<Street> {
    let mut coords = vec![0.0];
    for _ in 1..n {
        let last = *coords.last().unwrap();
        coords.push(last + rng.gen_range(1..=10) as f64);
    }
    Street::all_slots(coords)
}

fn parking_suite(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut checks = 0;
    for trial in 0..200 {
        let n = 2 + trial % 10;
        let street = random_street(rng, n)?;
        let mut slots: Vec<usize> = (0..n).collect();
        slots.shuffle(rng);
        let taken = &slots[..rng.gen_range(0..n)];
        let occ = Occupancy::from_occupied(&street, taken)?;
        let witness = json!({ "coords": street.coords(), "occupied": taken });
        let eps = epsilon_strict(&street);
        let h = harmonic_prices(&street, &occ, rng);
        if let Err(e) = check_payment_conditions(&street, &occ, &h, eps) {
            return Ok(Err(fail(&format!("harmonic payment conditions: {e}"), witness)));
        }
        let lp = min_sum_prices(&street, &occ, &h.draws)?;
        let obs = observation_prices(&street, &occ, &h.draws)?;
        let sum = |p: &crate::parking::SlotPrices| p.prices.iter().flatten().sum::<f64>();
        if check_payment_conditions(&street, &occ, &lp, eps * 1e-3).is_err() || sum(&lp) > sum(&obs) + 1e-9 {
            return Ok(Err(fail("min-sum prices are feasible and no larger", witness)));
        }
        let goals: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let run = run_priced_agents(
            &street,
            &street,
            &goals,
            PricingRule::Harmonic,
            rng,
            &mut TieBreak::First,
        )?;
        let mut occ = Occupancy::empty(&street);
        for (&g, &s) in goals.iter().zip(&run.slots) {
            let ok = if occ.is_vacant(&street, g) {
                s == g
            } else {
                let bl = blocks(&street, &occ);
                let b = block_of(&bl, g).expect("occupied goal lies in a block");
                Some(s) == b.left || Some(s) == b.right
            };
            if !ok {
                return Ok(Err(fail(
                    "priced cars park at their block boundary",
                    json!({ "coords": street.coords(), "goals": goals }),
                )));
            }
            occ.park(&street, s)?;
        }
        checks += 3;
    }
    Ok(Ok(checks))
}

fn harness_suite() -> Result<Outcome> {
    let mut checks = 0;
    for (family, algorithm, pricing, generator) in [
        (Family::Mts, "agents", "posted", "uniform"),
        (Family::Kserver, "agents", "threshold", "line"),
        (Family::Parking, "agents", "harmonic", "weighted-line"),
    ] {
        let mut s = Scenario {
            family,
            algorithm: algorithm.into(),
            pricing: pricing.into(),
            trials: 12,
            seed: SEED,
            tie_policy: TiePolicy::Random,
            jobs: 1,
            instance: InstanceSpec {
                generator: Some(generator.into()),
                per_trial: true,
                ..Default::default()
            },
            output: OutputSpec::default(),
        };
        let a = run(&s)?.to_table(Format::Csv);
        let b = run(&s)?.to_table(Format::Csv);
        s.jobs = 4;
        let c = run(&s)?.to_table(Format::Csv);
        if a != b || a != c {
            return Ok(Err(fail(
                "reports are deterministic",
                json!({ "scenario": s.to_toml() }),
            )));
        }
        checks += 2;
    }
    Ok(Ok(checks))
}
