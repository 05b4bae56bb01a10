//! The selfish-agent decision engine shared by all problem families.
//!
//! An agent sees a finite set of options, each with a disutility (its own
//! cost plus the posted price), and picks a minimiser. Ties are resolved by a
//! [`TieBreak`] policy, which is how experiments explore different equilibria.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionProblem {
    pub options: Vec<usize>,
    pub disutility: Vec<f64>,
}

impl DecisionProblem {
    pub fn new(options: Vec<usize>, disutility: Vec<f64>) -> Result<Self> {
        if options.is_empty() {
            return Err(Error::input("decision problem has no options"));
        }
        if options.len() != disutility.len() {
            return Err(Error::input("options and disutilities differ in length"));
        }
        if let Some(i) = disutility.iter().position(|d| !d.is_finite()) {
            return Err(Error::input(format!(
                "disutility of option {} is not finite",
                options[i]
            )));
        }
        Ok(Self { options, disutility })
    }

    /// Builds a problem from per-option disutilities where `None` (or an
    /// infinite value) marks an unavailable option.
    pub fn from_partial(values: &[Option<f64>]) -> Result<Self> {
        let (options, disutility) = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.filter(|x| x.is_finite()).map(|x| (i, x)))
            .unzip();
        Self::new(options, disutility)
    }

    /// Options whose disutility is within `tolerance` of the minimum.
    pub fn argmin_set(&self, tolerance: f64) -> Vec<usize> {
        let best = self.disutility.iter().copied().fold(f64::INFINITY, f64::min);
        self.options
            .iter()
            .zip(&self.disutility)
            .filter(|(_, &d)| d <= best + tolerance)
            .map(|(&o, _)| o)
            .collect()
    }
}

/// Serializable name of a tie-breaking policy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    #[default]
    First,
    Last,
    Random,
}

impl std::str::FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Self::First),
            "last" => Ok(Self::Last),
            "random" => Ok(Self::Random),
            other => Err(Error::input(format!(
                "unknown tie policy `{other}` (first|last|random)"
            ))),
        }
    }
}

impl std::fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::First => "first",
            Self::Last => "last",
            Self::Random => "random",
        })
    }
}

pub type TieCallback = Box<dyn FnMut(&[usize]) -> usize + Send>;

/// How an agent picks among equally good options.
pub enum TieBreak {
    First,
    Last,
    Random(ChaCha8Rng),
    /// Test hook: the callback receives the argmin set and must return one of
    /// its members.
    Adversarial(TieCallback),
}

impl TieBreak {
    pub fn from_policy(policy: TiePolicy, rng: ChaCha8Rng) -> Self {
        match policy {
            TiePolicy::First => Self::First,
            TiePolicy::Last => Self::Last,
            TiePolicy::Random => Self::Random(rng),
        }
    }
}

impl std::fmt::Debug for TieBreak {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::First => f.write_str("First"),
            Self::Last => f.write_str("Last"),
            Self::Random(_) => f.write_str("Random"),
            Self::Adversarial(_) => f.write_str("Adversarial"),
        }
    }
}

/// Picks a disutility minimiser (within `tolerance`) using `policy`.
pub fn decide(problem: &DecisionProblem, policy: &mut TieBreak, tolerance: f64) -> Result<usize> {
    let ties = problem.argmin_set(tolerance);
    if ties.is_empty() {
        return Err(Error::input("decision problem has no options"));
    }
    let pick = match policy {
        TieBreak::First => ties[0],
        TieBreak::Last => ties[ties.len() - 1],
        TieBreak::Random(rng) => ties[rng.gen_range(0..ties.len())],
        TieBreak::Adversarial(cb) => {
            let choice = cb(&ties);
            if !ties.contains(&choice) {
                return Err(Error::Invariant(format!(
                    "adversarial tie-break returned {choice}, not in argmin set {ties:?}"
                )));
            }
            choice
        }
    };
    Ok(pick)
}

/// One arrival: what was offered, what it cost, what was chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub arrival: usize,
    pub options: Vec<usize>,
    pub prices: Vec<f64>,
    pub disutilities: Vec<f64>,
    pub chosen: usize,
    /// Social cost incurred by this arrival; prices are transfers and are
    /// not included.
    pub cost: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub total_cost: f64,
    pub total_payments: f64,
}

impl Trace {
    pub fn push(&mut self, row: TraceRow) {
        self.total_cost += row.cost;
        if let Some(i) = row.options.iter().position(|&o| o == row.chosen) {
            self.total_payments += row.prices.get(i).copied().unwrap_or(0.0);
        }
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when the totals equal the sums of the per-arrival increments.
    pub fn reconciles(&self) -> bool {
        let mut cost = 0.0;
        for r in &self.rows {
            cost += r.cost;
        }
        cost == self.total_cost
    }
}

/// Ratio of a realised cost to the optimum with the zero-optimum conventions
/// (0/0 = 1, x/0 = ∞).
pub fn ratio(cost: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        cost / opt
    } else if cost <= crate::TOLERANCE {
        1.0
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoaStats {
    pub ratios: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

impl PoaStats {
    fn from_ratios(ratios: Vec<f64>) -> Self {
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = if ratios.is_empty() {
            0.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        };
        Self { ratios, max, mean }
    }
}

/// Per-instance cost/OPT ratios of a set of traces.
pub fn empirical_poa(traces: &[Trace], opt_costs: &[f64]) -> Result<PoaStats> {
    if traces.len() != opt_costs.len() {
        return Err(Error::input("one optimum per trace is required"));
    }
    if opt_costs.iter().any(|&o| o < 0.0) {
        return Err(Error::input("optimal costs must be non-negative"));
    }
    Ok(PoaStats::from_ratios(
        traces
            .iter()
            .zip(opt_costs)
            .map(|(t, &o)| ratio(t.total_cost, o))
            .collect(),
    ))
}

/// Expected-cost ratios for randomized schemes: every instance contributes
/// mean(cost over its runs) / OPT.
pub fn expected_poa(runs: &[(Vec<f64>, f64)]) -> Result<PoaStats> {
    let mut ratios = Vec::with_capacity(runs.len());
    for (costs, opt) in runs {
        if costs.is_empty() {
            return Err(Error::input("instance without runs"));
        }
        let mean = costs.iter().sum::<f64>() / costs.len() as f64;
        ratios.push(ratio(mean, *opt));
    }
    Ok(PoaStats::from_ratios(ratios))
}
