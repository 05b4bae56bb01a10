use super::traversal::{StepRecord, Traversal, TraversalCursor};
use super::{State, TaskSystem};
use crate::TOLERANCE;

/// The extended cost c̃ of the first occurrence m(s) of every state, given the
/// window [j_min, j_max]. Returns `(m(s), c̃(m(s)))` indexed by state.
pub(crate) fn first_occurrence_costs(
    tau: &Traversal,
    states: usize,
    j_min: usize,
    j_max: usize,
    task: &[f64],
) -> Vec<(usize, f64)> {
    (0..states)
        .map(|s| {
            let m = tau.first_at_or_after(j_min, s);
            let extra = if m > j_max { tau.delta(j_max, m) } else { 0.0 };
            (m, task[s] + extra)
        })
        .collect()
}

/// Follow-the-traversal state: the follower's τ-indices ℓ_0.. and the
/// simulated fractional traversal.
#[derive(Clone, Debug)]
pub struct FollowState {
    ell: Vec<usize>,
    cursor: TraversalCursor<f64>,
    cost: f64,
}

impl Default for FollowState {
    fn default() -> Self {
        Self::new()
    }
}

impl FollowState {
    pub fn new() -> Self {
        Self {
            ell: vec![1],
            cursor: TraversalCursor::new(),
            cost: 0.0,
        }
    }

    pub fn ell(&self) -> &[usize] {
        &self.ell
    }

    pub fn position(&self) -> usize {
        *self.ell.last().expect("ℓ_0 is always present")
    }

    pub fn cursor(&self) -> &TraversalCursor<f64> {
        &self.cursor
    }

    /// Total cost paid by the follower so far (transitions plus processing).
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// (j_min, j_max) for the next task.
    pub fn window(&self) -> (usize, usize) {
        let (l, t) = (self.position(), self.cursor.position());
        (l.min(t), l.max(t))
    }

    pub(crate) fn record(&mut self, system: &TaskSystem, ell: usize, task: &[f64]) -> (f64, StepRecord<f64>) {
        let tau = system.traversal();
        let prev = tau.state(self.position());
        let cost = system.d(prev, tau.state(ell)) + task[tau.state(ell)];
        self.cost += cost;
        self.ell.push(ell);
        let step = self.cursor.step(tau, task);
        (cost, step)
    }
}

/// Result of one follow-the-traversal step.
#[derive(Clone, Debug, PartialEq)]
pub struct FollowOutcome {
    /// ℓ_i
    pub ell: usize,
    pub state: State,
    /// Transition plus processing cost of this step.
    pub cost: f64,
    /// Which of the nine orderings of (ℓ_{i-1}, t_{i-1}, ℓ_i, t_i) occurred.
    pub case: u8,
    pub traversal: StepRecord<f64>,
}

/// Handles one task: picks ℓ_i minimizing c̃ (smallest index on ties), then
/// advances the simulated traversal with the same task.
pub fn follow_step(system: &TaskSystem, state: &mut FollowState, task: &[f64]) -> FollowOutcome {
    let (j_min, j_max) = state.window();
    let costs = first_occurrence_costs(system.traversal(), system.states(), j_min, j_max, task);
    let best = costs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let ell = costs
        .iter()
        .filter(|c| c.1 <= best + TOLERANCE)
        .map(|c| c.0)
        .min()
        .expect("at least one state");
    let (lp, tp) = (state.position(), state.cursor.position());
    let (cost, step) = state.record(system, ell, task);
    FollowOutcome {
        ell,
        state: system.traversal().state(ell),
        cost,
        case: classify_case(lp, tp, ell, step.end),
        traversal: step,
    }
}

/// Labels the ordering of (ℓ_{i-1}, t_{i-1}, ℓ_i, t_i) with the case number
/// used in the 2-approximation argument (first matching case wins).
pub fn classify_case(lp: usize, tp: usize, l: usize, t: usize) -> u8 {
    if lp <= tp {
        if l <= tp {
            1
        } else if l <= t {
            2
        } else {
            3
        }
    } else if t <= l && l <= lp {
        4
    } else if t <= lp && lp < l {
        5
    } else if l < t && t <= lp {
        6
    } else if l < lp && lp < t {
        7
    } else if lp <= l && l < t {
        8
    } else {
        9
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;
    use crate::mts::{appendix_system, traversal_cost};

    #[test]
    fn appendix_first_task_stays_home() {
        let sys = appendix_system();
        let costs = first_occurrence_costs(sys.traversal(), 3, 1, 1, &[3.0, 6.0, 3.0]);
        assert_eq!(costs, vec![(1, 3.0), (2, 8.0), (4, 10.0)]);
        let mut st = FollowState::new();
        let out = follow_step(&sys, &mut st, &[3.0, 6.0, 3.0]);
        assert_eq!((out.ell, out.cost), (1, 3.0));
        assert_eq!(st.cursor().position(), 3);
    }

    #[test]
    fn moves_when_cheaper_beyond_window() {
        let d = MetricSpace::matrix(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let sys = TaskSystem::new(d, 0).unwrap();
        let mut st = FollowState::new();
        let out = follow_step(&sys, &mut st, &[5.0, 1.0]);
        assert_eq!(out.ell, 2);
        assert_eq!(out.cost, 3.0);
    }

    #[test]
    fn zero_cost_at_window_start_wins() {
        let sys = appendix_system();
        let mut st = FollowState::new();
        let out = follow_step(&sys, &mut st, &[0.0, 0.0, 0.0]);
        assert_eq!(out.ell, 1);
        assert_eq!(out.cost, 0.0);
    }

    #[test]
    fn case_three_is_reachable() {
        // ℓ jumps past where the traversal stops
        let d = MetricSpace::matrix(vec![
            vec![0.0, 10.0, 10.0],
            vec![10.0, 0.0, 10.0],
            vec![10.0, 10.0, 0.0],
        ])
        .unwrap();
        let sys = TaskSystem::with_traversal(d, 0, vec![0, 1, 2]).unwrap();
        let mut st = FollowState::new();
        let out = follow_step(&sys, &mut st, &[30.0, 12.0, 0.0]);
        assert_eq!(out.case, 3);
    }

    #[test]
    fn case_labels_cover_orderings() {
        assert_eq!(classify_case(1, 3, 2, 5), 1);
        assert_eq!(classify_case(1, 3, 4, 5), 2);
        assert_eq!(classify_case(1, 3, 6, 5), 3);
        assert_eq!(classify_case(5, 2, 4, 3), 4);
        assert_eq!(classify_case(5, 2, 6, 3), 5);
        assert_eq!(classify_case(5, 2, 3, 4), 6);
        assert_eq!(classify_case(5, 2, 3, 7), 7);
        assert_eq!(classify_case(5, 2, 6, 7), 8);
        assert_eq!(classify_case(5, 2, 7, 6), 9);
    }

    #[test]
    fn within_twice_traversal_on_appendix_tasks() {
        let sys = appendix_system();
        let tasks = vec![vec![3.0, 6.0, 3.0], vec![1.0, 3.0, 4.0], vec![10.0, 10.0, 10.0]];
        let mut st = FollowState::new();
        for t in &tasks {
            follow_step(&sys, &mut st, t);
        }
        let (trav, _) = traversal_cost(&sys, &tasks);
        assert!(st.cost() <= 2.0 * trav + 1e-9);
    }
}
