use super::dc::dc_step;
use super::lazy::VirtualPair;
use super::regions::{balance2_prices, perturb_thresholds, regions, server_prices, RegionMap};
use super::{ServerConfig, ServerSpace};
use crate::agents::{decide, DecisionProblem, TieBreak, Trace, TraceRow};
use crate::error::Result;
use crate::TOLERANCE;

/// Disutility of every server for a request at `r`.
pub fn kserver_agent_options<S: ServerSpace>(
    space: &S,
    prices: &[f64],
    positions: &[S::Point],
    r: &S::Point,
) -> Vec<f64> {
    positions
        .iter()
        .zip(prices)
        .map(|(s, p)| space.dist(r, s) + p)
        .collect()
}

/// `n` evenly spaced points covering [lo, hi].
pub fn request_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// A grid point where the priced agent and the region owner disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMismatch {
    pub index: usize,
    pub owner: usize,
    pub chosen: usize,
    pub owner_is_minimizer: bool,
}

/// Online state of the threshold pricing scheme: the lazy DC pair, whose
/// real side is the configuration the agents actually produced.
#[derive(Clone, Debug)]
pub struct KServerPricer<'a, S: ServerSpace> {
    space: &'a S,
    pair: VirtualPair<S::Point>,
    arrival: usize,
    eps0: f64,
}

impl<'a, S: ServerSpace> KServerPricer<'a, S> {
    pub fn new(space: &'a S, initial: ServerConfig<S::Point>) -> Self {
        let pos = &initial.positions;
        let mut min_gap = f64::INFINITY;
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                let d = space.dist(&pos[i], &pos[j]);
                if d > TOLERANCE {
                    min_gap = min_gap.min(d);
                }
            }
        }
        let eps0 = 1e-6 * if min_gap.is_finite() { min_gap } else { 1.0 };
        Self {
            space,
            pair: VirtualPair::new(initial),
            arrival: 0,
            eps0,
        }
    }

    pub fn pair(&self) -> &VirtualPair<S::Point> {
        &self.pair
    }

    /// Perturbation for the current arrival, halving every time.
    pub fn eps(&self) -> f64 {
        self.eps0 * 0.5f64.powi(self.arrival.min(1000) as i32)
    }

    /// Region map with every threshold pushed off its owner.
    pub fn region_map(&self) -> Result<RegionMap<S::Point>> {
        let map = regions(self.space, &self.pair)?;
        perturb_thresholds(self.space, &map, &self.pair, self.eps())
    }

    pub fn prices(&self) -> Result<Vec<f64>> {
        server_prices(self.space, &self.region_map()?, &self.pair.real)
    }

    /// The server the lazy algorithm would use for `r`.
    pub fn owner(&self, r: &S::Point) -> Result<usize> {
        self.pair.query(self.space, r)
    }

    /// Checks that, under the current prices, an agent at each point prefers
    /// the region owner (and picks it with first-index tie-breaking).
    pub fn check_grid(&self, points: &[S::Point]) -> Result<Vec<GridMismatch>> {
        let prices = self.prices()?;
        let mut bad = Vec::new();
        for (index, r) in points.iter().enumerate() {
            let owner = self.owner(r)?;
            let dis = kserver_agent_options(self.space, &prices, &self.pair.real.positions, r);
            let problem = DecisionProblem::new((0..dis.len()).collect(), dis)?;
            let owner_is_minimizer = problem.argmin_set(TOLERANCE).contains(&owner);
            let chosen = decide(&problem, &mut TieBreak::First, TOLERANCE)?;
            if chosen != owner || !owner_is_minimizer {
                bad.push(GridMismatch {
                    index,
                    owner,
                    chosen,
                    owner_is_minimizer,
                });
            }
        }
        Ok(bad)
    }

    /// Records that `server` was sent to `r`; returns DC's cost for `r`.
    pub fn observe(&mut self, r: &S::Point, server: usize) -> Result<f64> {
        let dc = dc_step(self.space, &mut self.pair.virt, r)?;
        self.pair.real.move_server(self.space, server, r.clone());
        self.arrival += 1;
        Ok(dc.cost)
    }
}

/// One simulated request sequence.
#[derive(Clone, Debug, Default)]
pub struct KServerRun {
    pub trace: Trace,
    pub servers: Vec<usize>,
    /// What Double Coverage paid on the same requests (priced runs only).
    pub dc_cost: f64,
    /// Arrivals where the agent did not pick the lazy algorithm's server.
    pub deviations: Vec<usize>,
}

impl KServerRun {
    pub fn cost(&self) -> f64 {
        self.trace.total_cost
    }
}

fn serve<S: ServerSpace>(
    space: &S,
    config: &mut ServerConfig<S::Point>,
    run: &mut KServerRun,
    arrival: usize,
    r: &S::Point,
    prices: Vec<f64>,
    tie: &mut TieBreak,
) -> Result<usize> {
    let dis = kserver_agent_options(space, &prices, &config.positions, r);
    let options: Vec<usize> = (0..dis.len()).collect();
    let chosen = decide(&DecisionProblem::new(options.clone(), dis.clone())?, tie, TOLERANCE)?;
    let cost = config.move_server(space, chosen, r.clone());
    run.trace.push(TraceRow {
        arrival,
        options,
        prices,
        disutilities: dis,
        chosen,
        cost,
    });
    run.servers.push(chosen);
    Ok(chosen)
}

/// Agents facing threshold prices derived from lazy Double Coverage.
pub fn run_priced_agents<S: ServerSpace>(
    space: &S,
    initial: ServerConfig<S::Point>,
    requests: &[S::Point],
    tie: &mut TieBreak,
) -> Result<KServerRun> {
    let mut pricer = KServerPricer::new(space, initial.clone());
    let mut config = initial;
    let mut run = KServerRun::default();
    for (i, r) in requests.iter().enumerate() {
        let prices = pricer.prices()?;
        let owner = pricer.owner(r)?;
        let chosen = serve(space, &mut config, &mut run, i, r, prices, tie)?;
        if chosen != owner {
            run.deviations.push(i);
        }
        run.dc_cost += pricer.observe(r, chosen)?;
    }
    Ok(run)
}

/// Agents facing no prices: each takes the nearest server.
pub fn run_free_agents<S: ServerSpace>(
    space: &S,
    initial: ServerConfig<S::Point>,
    requests: &[S::Point],
    tie: &mut TieBreak,
) -> Result<KServerRun> {
    let mut config = initial;
    let mut run = KServerRun::default();
    for (i, r) in requests.iter().enumerate() {
        let prices = vec![0.0; config.k()];
        serve(space, &mut config, &mut run, i, r, prices, tie)?;
    }
    Ok(run)
}

/// Two servers priced at half their travelled distance.
pub fn run_balance2_agents<S: ServerSpace>(
    space: &S,
    initial: ServerConfig<S::Point>,
    requests: &[S::Point],
    tie: &mut TieBreak,
) -> Result<KServerRun> {
    let mut config = initial;
    let mut run = KServerRun::default();
    for (i, r) in requests.iter().enumerate() {
        let prices = balance2_prices(&config)?;
        serve(space, &mut config, &mut run, i, r, prices, tie)?;
    }
    Ok(run)
}
