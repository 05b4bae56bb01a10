//! Seeded experiments: scenarios, instance generators, concurrent trials, CSV
//! reports and the property suites behind `verify`.
//!
//! Every trial draws its randomness from `(seed, trial index)` alone, so a
//! report is the same whether trials run serially or on a thread pool.

mod instance;
pub mod suites;

pub use instance::{generate, generate_with, metric_closure, parse_params, Family, Instance, Params, GENERATORS};

use crate::agents::{ratio, TieBreak, TiePolicy};
use crate::error::{Error, Result};
use crate::kserver::{self, dc_step, kserver_offline_opt, ServerSpace, VirtualPair};
use crate::metric::RealLine;
use crate::mts::{self, follow_step, mts_offline_opt, traversal_cost, FollowState};
use crate::parking::{self, matching_offline_opt, run_greedy, run_harmonic, PricingRule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub family: Family,
    /// `agents` for priced selfish agents, otherwise the name of an online
    /// algorithm run directly.
    pub algorithm: String,
    pub pricing: String,
    pub trials: usize,
    pub seed: u64,
    pub tie_policy: TiePolicy,
    #[serde(default = "one")]
    pub jobs: usize,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    /// Generator seed; the scenario seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Draw a fresh instance for every trial instead of sharing one.
    #[serde(default)]
    pub per_trial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Instance>,
    /// An instance file as written by `gen`, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "tsv" => Ok(Self::Tsv),
            other => Err(Error::config(
                "output.format",
                format!("unknown format `{other}` (csv|tsv)"),
            )),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

const ALGORITHMS: &[(Family, &str, &[&str])] = &[
    (Family::Mts, "agents", &["posted", "none"]),
    (Family::Mts, "follow", &["none"]),
    (Family::Mts, "traversal", &["none"]),
    (Family::Kserver, "agents", &["threshold", "balance2", "none"]),
    (Family::Kserver, "dc", &["none"]),
    (Family::Kserver, "lazy-dc", &["none"]),
    (
        Family::Parking,
        "agents",
        &["harmonic", "min-sum", "monotone-harmonic", "none"],
    ),
    (Family::Parking, "harmonic", &["none"]),
    (Family::Parking, "greedy", &["none"]),
];

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("."))
    }

    fn parse(text: &str, base: &Path) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        let mut s = s;
        if let Some(file) = s.instance.file.take() {
            if s.instance.explicit.is_some() {
                return Err(Error::config(
                    "instance.file",
                    "give either a file or an explicit instance",
                ));
            }
            s.instance.explicit = Some(load_instance(&base.join(file))?);
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let Some((_, _, pricings)) = ALGORITHMS
            .iter()
            .find(|(f, a, _)| *f == self.family && *a == self.algorithm)
        else {
            return Err(Error::config(
                "algorithm",
                format!("unknown algorithm `{}` for {}", self.algorithm, self.family),
            ));
        };
        if !pricings.contains(&self.pricing.as_str()) {
            return Err(Error::config(
                "pricing",
                format!("`{}` is not one of {}", self.pricing, pricings.join("|")),
            ));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "at least one trial is required"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs", "must be positive"));
        }
        let spec = &self.instance;
        match (&spec.generator, &spec.explicit) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "instance",
                    "give either a generator or an explicit instance",
                ))
            }
            (None, None) => {
                return Err(Error::config(
                    "instance",
                    "a generator or an explicit instance is required",
                ))
            }
            (None, Some(inst)) => {
                if inst.family() != self.family {
                    return Err(Error::config(
                        "instance.explicit.kind",
                        format!("instance is not a {} instance", self.family),
                    ));
                }
                if spec.per_trial {
                    return Err(Error::config(
                        "instance.per_trial",
                        "only generated instances can vary per trial",
                    ));
                }
            }
            (Some(g), None) => {
                if !GENERATORS.contains(&(self.family, g.as_str())) {
                    return Err(Error::config(
                        "instance.generator",
                        format!("unknown generator `{g}` for {}", self.family),
                    ));
                }
                // catches bad parameters before any trial runs
                generate(self.family, g, &spec.params, 0)?;
            }
        }
        if self.family == Family::Kserver && self.pricing == "balance2" {
            if let Some(inst) = &spec.explicit {
                let k = match inst {
                    Instance::KserverLine { servers, .. } => servers.len(),
                    Instance::KserverTree { servers, .. } => servers.len(),
                    _ => 0,
                };
                if k != 2 {
                    return Err(Error::config("pricing", "balance2 needs exactly two servers"));
                }
            }
        }
        Ok(())
    }

    fn instance_for(&self, trial: usize) -> Result<Instance> {
        let spec = &self.instance;
        if let Some(inst) = &spec.explicit {
            return Ok(inst.clone());
        }
        let g = spec.generator.as_deref().unwrap_or_default();
        let seed = spec.seed.unwrap_or(self.seed);
        if spec.per_trial {
            generate_with(
                self.family,
                g,
                &spec.params,
                &mut trial_rng(seed, trial, Lane::Instance),
            )
        } else {
            generate(self.family, g, &spec.params, seed)
        }
    }
}

/// Reads an instance file (the TOML written by `gen`).
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))
}

#[derive(Clone, Copy)]
enum Lane {
    Algorithm = 0,
    Ties = 1,
    Instance = 2,
}

/// Randomness of one trial for one purpose; depends only on its arguments.
fn trial_rng(seed: u64, trial: usize, lane: Lane) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((lane as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    rng.set_stream(trial as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub cost: f64,
    pub opt: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub family: Family,
    pub algorithm: String,
    pub pricing: String,
    pub seed: u64,
    pub rows: Vec<TrialRow>,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl RunReport {
    fn new(s: &Scenario, mut rows: Vec<TrialRow>) -> Self {
        rows.sort_by_key(|r| r.trial);
        let n = rows.len() as f64;
        let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let mean = rows.iter().map(|r| r.ratio).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r.ratio - mean).powi(2)).sum::<f64>() / n;
        Self {
            family: s.family,
            algorithm: s.algorithm.clone(),
            pricing: s.pricing.clone(),
            seed: s.seed,
            rows,
            max,
            mean,
            std: var.sqrt(),
        }
    }

    pub fn mean_cost(&self) -> f64 {
        self.rows.iter().map(|r| r.cost).sum::<f64>() / self.rows.len() as f64
    }

    /// The per-trial table with header `trial,family,algorithm,pricing,cost,opt,ratio,seed`.
    pub fn to_table(&self, format: Format) -> String {
        let sep = match format {
            Format::Csv => ",",
            Format::Tsv => "\t",
        };
        let mut out = [
            "trial",
            "family",
            "algorithm",
            "pricing",
            "cost",
            "opt",
            "ratio",
            "seed",
        ]
        .join(sep);
        out.push('\n');
        for r in &self.rows {
            let fields = [
                r.trial.to_string(),
                self.family.to_string(),
                self.algorithm.clone(),
                self.pricing.clone(),
                r.cost.to_string(),
                r.opt.to_string(),
                r.ratio.to_string(),
                self.seed.to_string(),
            ];
            out.push_str(&fields.join(sep));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "family={} algorithm={} pricing={} seed={}",
            self.family, self.algorithm, self.pricing, self.seed
        );
        let _ = writeln!(
            s,
            "trials={} mean_cost={} ratio_max={} ratio_mean={} ratio_std={}",
            self.rows.len(),
            self.mean_cost(),
            self.max,
            self.mean,
            self.std
        );
        s
    }
}

fn opt_cost(inst: &Instance) -> Result<f64> {
    match inst {
        Instance::Mts { .. } => {
            let (sys, tasks) = inst.task_system()?;
            mts_offline_opt(tasks, sys.metric(), sys.initial_state())
        }
        Instance::KserverLine { .. } => {
            let (config, requests) = inst.line_servers()?;
            kserver_offline_opt(&RealLine, &config.positions, requests)
        }
        Instance::KserverTree { .. } => {
            let (tree, config, requests) = inst.tree_servers()?;
            kserver_offline_opt(&tree, &config.positions, &requests)
        }
        Instance::Parking { .. } => {
            let p = inst.parking()?;
            matching_offline_opt(&p.street, &p.goals)
        }
    }
}

fn kserver_cost<S: ServerSpace>(
    s: &Scenario,
    space: &S,
    config: kserver::ServerConfig<S::Point>,
    requests: &[S::Point],
    tie: &mut TieBreak,
) -> Result<f64> {
    Ok(match (s.algorithm.as_str(), s.pricing.as_str()) {
        ("agents", "threshold") => kserver::run_priced_agents(space, config, requests, tie)?.cost(),
        ("agents", "balance2") => kserver::run_balance2_agents(space, config, requests, tie)?.cost(),
        ("agents", _) => kserver::run_free_agents(space, config, requests, tie)?.cost(),
        ("dc", _) => {
            let mut c = config;
            let mut total = 0.0;
            for r in requests {
                total += dc_step(space, &mut c, r)?.cost;
            }
            total
        }
        _ => {
            let mut pair = VirtualPair::new(config);
            let mut total = 0.0;
            for r in requests {
                total += pair.lazy_step(space, r)?.cost;
            }
            total
        }
    })
}

fn trial_cost(s: &Scenario, inst: &Instance, trial: usize) -> Result<f64> {
    let mut rng = trial_rng(s.seed, trial, Lane::Algorithm);
    let mut tie = TieBreak::from_policy(s.tie_policy, trial_rng(s.seed, trial, Lane::Ties));
    match inst {
        Instance::Mts { .. } => {
            let (sys, tasks) = inst.task_system()?;
            Ok(match (s.algorithm.as_str(), s.pricing.as_str()) {
                ("agents", "posted") => mts::run_priced_agents(&sys, tasks, &mut tie)?.cost(),
                ("agents", _) => mts::run_free_agents(&sys, tasks, &mut tie)?.cost(),
                ("follow", _) => {
                    let mut st = FollowState::new();
                    for t in tasks {
                        follow_step(&sys, &mut st, t);
                    }
                    st.cost()
                }
                _ => traversal_cost(&sys, tasks).0,
            })
        }
        Instance::KserverLine { .. } => {
            let (config, requests) = inst.line_servers()?;
            kserver_cost(s, &RealLine, config, requests, &mut tie)
        }
        Instance::KserverTree { .. } => {
            let (tree, config, requests) = inst.tree_servers()?;
            kserver_cost(s, &tree, config, &requests, &mut tie)
        }
        Instance::Parking { .. } => {
            let p = inst.parking()?;
            let (street, goals) = (&p.street, &p.goals);
            Ok(match s.algorithm.as_str() {
                "agents" => {
                    let rule = match s.pricing.as_str() {
                        "none" => PricingRule::Free,
                        other => other.parse()?,
                    };
                    parking::run_priced_agents(street, street, goals, rule, &mut rng, &mut tie)?.cost()
                }
                "harmonic" => run_harmonic(street, goals, &mut rng)?.cost(),
                _ => run_greedy(street, goals)?.cost(),
            })
        }
    }
}

/// Runs every trial of `scenario`. Trials are spread over `scenario.jobs`
/// threads; the report does not depend on that number.
pub fn run(scenario: &Scenario) -> Result<RunReport> {
    scenario.validate()?;
    if scenario.family == Family::Kserver && scenario.pricing == "balance2" {
        let inst = scenario.instance_for(0)?;
        let k = match &inst {
            Instance::KserverLine { servers, .. } => servers.len(),
            Instance::KserverTree { servers, .. } => servers.len(),
            _ => 0,
        };
        if k != 2 {
            return Err(Error::config("pricing", "balance2 needs exactly two servers"));
        }
    }
    let shared = if scenario.instance.per_trial {
        None
    } else {
        let inst = scenario.instance_for(0)?;
        let opt = opt_cost(&inst)?;
        Some((inst, opt))
    };
    let one = |trial: usize| -> Result<TrialRow> {
        let (inst, opt) = match &shared {
            Some((i, o)) => (std::borrow::Cow::Borrowed(i), *o),
            None => {
                let i = scenario.instance_for(trial)?;
                let o = opt_cost(&i)?;
                (std::borrow::Cow::Owned(i), o)
            }
        };
        let cost = trial_cost(scenario, &inst, trial)?;
        Ok(TrialRow {
            trial,
            cost,
            opt,
            ratio: ratio(cost, opt),
        })
    };
    let rows = if scenario.jobs <= 1 {
        (0..scenario.trials).map(one).collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(scenario.jobs)
            .build()
            .map_err(|e| Error::config("jobs", e.to_string()))?;
        pool.install(|| {
            (0..scenario.trials)
                .into_par_iter()
                .map(one)
                .collect::<Result<Vec<_>>>()
        })?
    };
    Ok(RunReport::new(scenario, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARKING: &str = r#"
family = "parking"
algorithm = "agents"
pricing = "harmonic"
trials = 20
seed = 7
tie_policy = "first"
jobs = 1

[instance]
generator = "adversarial"
params = { n = 8, eps = 1e-6 }
"#;

    #[test]
    fn serial_and_parallel_reports_agree() {
        let mut s = Scenario::from_toml(PARKING).unwrap();
        let a = run(&s).unwrap().to_table(Format::Csv);
        s.jobs = 4;
        let b = run(&s).unwrap().to_table(Format::Csv);
        assert_eq!(a, b);
        assert!(a.starts_with("trial,family,algorithm,pricing,cost,opt,ratio,seed\n"));
        assert_eq!(a.lines().count(), 21);
    }

    #[test]
    fn trials_use_their_own_randomness() {
        let s = Scenario::from_toml(PARKING).unwrap();
        let r = run(&s).unwrap();
        let costs: Vec<f64> = r.rows.iter().map(|r| r.cost).collect();
        assert!(costs.windows(2).any(|w| w[0] != w[1]));
        let mut t = s.clone();
        t.trials = 5;
        assert_eq!(run(&t).unwrap().rows[..], r.rows[..5]);
    }

    #[test]
    fn config_errors_carry_paths() {
        let e = Scenario::from_toml(&PARKING.replace("trials = 20", "trials = \"x\"")).unwrap_err();
        assert!(e.to_string().contains("`trials`"), "{e}");
        let e = Scenario::from_toml(&PARKING.replace("pricing = \"harmonic\"", "pricing = \"threshold\"")).unwrap_err();
        assert!(e.to_string().contains("`pricing`"), "{e}");
        let e = Scenario::from_toml(&PARKING.replace("n = 8", "n = 8, q = 1")).unwrap_err();
        assert!(e.to_string().contains("instance.params.q"), "{e}");
        let e = Scenario::from_toml(&PARKING.replace("seed = 7", "seed = 7\nbogus = 1")).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn every_algorithm_runs() {
        for &(family, algorithm, pricings) in ALGORITHMS {
            for &pricing in pricings {
                let generator = match family {
                    Family::Mts => "uniform",
                    Family::Kserver => "line",
                    Family::Parking => "weighted-line",
                };
                let s = Scenario {
                    family,
                    algorithm: algorithm.into(),
                    pricing: pricing.into(),
                    trials: 3,
                    seed: 1,
                    tie_policy: TiePolicy::Random,
                    jobs: 1,
                    instance: InstanceSpec {
                        generator: Some(generator.into()),
                        per_trial: true,
                        ..Default::default()
                    },
                    output: OutputSpec::default(),
                };
                let r = run(&s).unwrap_or_else(|e| panic!("{family}/{algorithm}/{pricing}: {e}"));
                assert!(
                    r.rows.iter().all(|r| r.ratio >= 1.0 - 1e-9),
                    "{family}/{algorithm}/{pricing}"
                );
                let back = Scenario::from_toml(&s.to_toml()).unwrap();
                assert_eq!(back, s);
            }
        }
    }
}
