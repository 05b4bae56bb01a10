//! Metrical task systems.
//!
//! The fractional traversal algorithm walks a fixed traversal sequence,
//! spending work in each position until it equals the distance to the next
//! one. "Follow the traversal" turns that into a single-state algorithm, and
//! the pricing scheme in [`pricing`] makes greedy agents reproduce it while
//! observing only their choices and the work they spent.

mod follow;
mod opt;
pub mod pricing;
mod traversal;

pub use follow::{classify_case, follow_step, FollowOutcome, FollowState};
pub use opt::mts_offline_opt;
pub use pricing::{
    imaginary_task, mts_agent_options, mts_prices, run_free_agents, run_priced_agents, MtsAgentRun, MtsPricer,
};
pub use traversal::{default_traversal, Scalar, StepRecord, Traversal, TraversalCursor};

use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use serde::{Deserialize, Serialize};

/// A state index, 0-based.
pub type State = usize;

/// Per-state processing costs of one task.
pub type Task = Vec<f64>;

/// What the pricing scheme gets to see after an agent acted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtsObservation {
    pub state: State,
    pub work: f64,
}

/// States, their metric, the initial state and a traversal sequence.
#[derive(Clone, Debug)]
pub struct TaskSystem {
    d: MetricSpace,
    s0: State,
    tau: Traversal,
}

impl TaskSystem {
    /// Uses the default traversal (doubled DFS tour of a minimum spanning tree).
    pub fn new(d: MetricSpace, s0: State) -> Result<Self> {
        Self::check_states(&d, s0)?;
        let tau = default_traversal(&d, s0);
        Self::with_traversal(d, s0, tau.period().to_vec())
    }

    /// Uses an explicit traversal period, repeated forever.
    pub fn with_traversal(d: MetricSpace, s0: State, period: Vec<State>) -> Result<Self> {
        Self::check_states(&d, s0)?;
        if period.first() != Some(&s0) {
            return Err(Error::input("the traversal sequence must start in the initial state"));
        }
        let tau = Traversal::new(&d, period)?;
        Ok(Self { d, s0, tau })
    }

    fn check_states(d: &MetricSpace, s0: State) -> Result<()> {
        if !d.contains(s0) {
            return Err(Error::UnknownVertex(s0));
        }
        for u in 0..d.len() {
            for v in u + 1..d.len() {
                if d.d(u, v) <= 0.0 {
                    return Err(Error::input(format!("states {u} and {v} are at distance zero")));
                }
            }
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        self.d.len()
    }

    pub fn metric(&self) -> &MetricSpace {
        &self.d
    }

    pub fn d(&self, s: State, t: State) -> f64 {
        self.d.d(s, t)
    }

    pub fn initial_state(&self) -> State {
        self.s0
    }

    pub fn traversal(&self) -> &Traversal {
        &self.tau
    }

    pub fn check_task(&self, task: &[f64]) -> Result<()> {
        if task.len() != self.states() {
            return Err(Error::input(format!(
                "task has {} entries, system has {} states",
                task.len(),
                self.states()
            )));
        }
        if let Some(s) = task.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::input(format!(
                "task cost in state {s} must be finite and non-negative"
            )));
        }
        Ok(())
    }
}

/// Cost of running the fractional traversal algorithm on `tasks`: transitions
/// plus processing. Returns the cursor for inspection.
pub fn traversal_cost(system: &TaskSystem, tasks: &[Task]) -> (f64, TraversalCursor<f64>) {
    let mut cursor = TraversalCursor::new();
    for task in tasks {
        cursor.step(system.traversal(), task);
    }
    let movement = system.traversal().delta(1, cursor.position());
    (movement + cursor.total_work(), cursor)
}

#[cfg(test)]
pub(crate) fn appendix_system() -> TaskSystem {
    let d = MetricSpace::matrix(vec![vec![0.0, 2.0, 3.0], vec![2.0, 0.0, 4.0], vec![3.0, 4.0, 0.0]]).unwrap();
    TaskSystem::with_traversal(d, 0, vec![0, 1, 0, 2]).unwrap()
}
