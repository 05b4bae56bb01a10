//! Posted prices that make greedy agents follow the traversal.
//!
//! The scheme never sees a task vector. After each arrival it rebuilds the
//! smallest task consistent with the observed choice (the imaginary task) and
//! feeds that to its internal follow-the-traversal simulation.

use super::follow::{first_occurrence_costs, FollowState};
use super::{MtsObservation, State, Task, TaskSystem};
use crate::agents::{decide, DecisionProblem, TieBreak, Trace, TraceRow};
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::TOLERANCE;

/// Prices for the next agent given the follower window and the state the
/// previous agent left the system in. Shifted so the cheapest price is 0.
pub fn mts_prices(system: &TaskSystem, window: (usize, usize), prev_state: State) -> Vec<f64> {
    let (j_min, j_max) = window;
    let tau = system.traversal();
    let raw: Vec<f64> = (0..system.states())
        .map(|s| {
            let m = tau.first_at_or_after(j_min, s);
            let extra = if m > j_max { tau.delta(j_max, m) } else { 0.0 };
            extra - system.d(prev_state, s)
        })
        .collect();
    let low = raw.iter().copied().fold(f64::INFINITY, f64::min);
    raw.into_iter().map(|p| p - low).collect()
}

/// The smallest task vector under which choosing `obs.state` was selfish.
pub fn imaginary_task(obs: &MtsObservation, prices: &[f64], prev_state: State, d: &MetricSpace) -> Task {
    let s = obs.state;
    let paid = obs.work + d.d(prev_state, s) + prices[s];
    (0..prices.len())
        .map(|j| {
            if j == s {
                obs.work
            } else {
                (paid - d.d(prev_state, j) - prices[j]).max(0.0)
            }
        })
        .collect()
}

/// Disutility of every state for an agent carrying `task`.
pub fn mts_agent_options(prices: &[f64], prev_state: State, task: &[f64], d: &MetricSpace) -> Vec<f64> {
    (0..task.len())
        .map(|s| task[s] + d.d(prev_state, s) + prices[s])
        .collect()
}

/// What the pricer concluded from one observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Observed {
    pub imaginary: Task,
    /// ℓ_i = m(s_i)
    pub ell: usize,
    /// Whether m(s_i) minimizes c̃ under the imaginary task.
    pub faithful: bool,
}

/// Online state of the pricing scheme.
#[derive(Clone, Debug)]
pub struct MtsPricer<'a> {
    system: &'a TaskSystem,
    follow: FollowState,
    prev_state: State,
    history: Vec<MtsObservation>,
}

impl<'a> MtsPricer<'a> {
    pub fn new(system: &'a TaskSystem) -> Self {
        Self {
            system,
            follow: FollowState::new(),
            prev_state: system.initial_state(),
            history: Vec::new(),
        }
    }

    pub fn prices(&self) -> Vec<f64> {
        mts_prices(self.system, self.follow.window(), self.prev_state)
    }

    pub fn follow_state(&self) -> &FollowState {
        &self.follow
    }

    pub fn history(&self) -> &[MtsObservation] {
        &self.history
    }

    pub fn current_state(&self) -> State {
        self.prev_state
    }

    /// Updates ℓ and the simulated traversal after an agent acted.
    pub fn observe(&mut self, obs: MtsObservation) -> Result<Observed> {
        if obs.state >= self.system.states() {
            return Err(Error::UnknownVertex(obs.state));
        }
        if !(obs.work.is_finite() && obs.work >= 0.0) {
            return Err(Error::input("observed work must be finite and non-negative"));
        }
        let prices = self.prices();
        let imaginary = imaginary_task(&obs, &prices, self.prev_state, self.system.metric());
        let (j_min, j_max) = self.follow.window();
        let tau = self.system.traversal();
        let costs = first_occurrence_costs(tau, self.system.states(), j_min, j_max, &imaginary);
        let best = costs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let (ell, chosen) = costs[obs.state];
        let faithful = chosen <= best + 1e3 * TOLERANCE * (1.0 + best.abs());
        self.follow.record(self.system, ell, &imaginary);
        self.prev_state = obs.state;
        self.history.push(obs);
        Ok(Observed {
            imaginary,
            ell,
            faithful,
        })
    }
}

/// One simulated sequence of agents.
#[derive(Clone, Debug, Default)]
pub struct MtsAgentRun {
    pub trace: Trace,
    pub states: Vec<State>,
    pub imaginary: Vec<Task>,
    /// Arrivals at which the agent's choice was not a c̃ minimizer.
    pub unfaithful: Vec<usize>,
}

impl MtsAgentRun {
    pub fn cost(&self) -> f64 {
        self.trace.total_cost
    }
}

fn run_agents(
    system: &TaskSystem,
    tasks: &[Task],
    tie: &mut TieBreak,
    mut pricer: Option<MtsPricer<'_>>,
) -> Result<MtsAgentRun> {
    let d = system.metric();
    let mut run = MtsAgentRun::default();
    let mut prev = system.initial_state();
    for (i, task) in tasks.iter().enumerate() {
        system.check_task(task)?;
        let prices = match &pricer {
            Some(p) => p.prices(),
            None => vec![0.0; system.states()],
        };
        let disutility = mts_agent_options(&prices, prev, task, d);
        let options: Vec<usize> = (0..system.states()).collect();
        let problem = DecisionProblem::new(options.clone(), disutility.clone())?;
        let s = decide(&problem, tie, TOLERANCE)?;
        let cost = d.d(prev, s) + task[s];
        if let Some(p) = pricer.as_mut() {
            let seen = p.observe(MtsObservation {
                state: s,
                work: task[s],
            })?;
            if !seen.faithful {
                run.unfaithful.push(i);
            }
            run.imaginary.push(seen.imaginary);
        }
        run.trace.push(TraceRow {
            arrival: i,
            options,
            prices,
            disutilities: disutility,
            chosen: s,
            cost,
        });
        run.states.push(s);
        prev = s;
    }
    Ok(run)
}

/// Agents facing the dynamic prices.
pub fn run_priced_agents(system: &TaskSystem, tasks: &[Task], tie: &mut TieBreak) -> Result<MtsAgentRun> {
    run_agents(system, tasks, tie, Some(MtsPricer::new(system)))
}

/// Agents facing no prices at all (each one minimizes its own cost).
pub fn run_free_agents(system: &TaskSystem, tasks: &[Task], tie: &mut TieBreak) -> Result<MtsAgentRun> {
    run_agents(system, tasks, tie, None)
}
