use super::State;
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use num_traits::Num;
use std::fmt::Debug;

/// Numbers the fractional traversal can run on (`f64`, exact rationals).
pub trait Scalar: Clone + PartialOrd + Num + Debug {}
impl<T: Clone + PartialOrd + Num + Debug> Scalar for T {}

/// A periodic traversal sequence τ with 1-based absolute indices.
///
/// Because τ repeats one period forever, positions and traversal distances
/// are computed arithmetically instead of materializing a prefix.
#[derive(Clone, Debug)]
pub struct Traversal {
    period: Vec<State>,
    /// `gaps[p]` = d(period[p], period[p+1 mod len]).
    gaps: Vec<f64>,
    /// `prefix[p]` = gaps[0] + ... + gaps[p-1].
    prefix: Vec<f64>,
    cycle: f64,
}

impl Traversal {
    pub fn new(d: &MetricSpace, period: Vec<State>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::input("traversal period is empty"));
        }
        if let Some(&s) = period.iter().find(|&&s| !d.contains(s)) {
            return Err(Error::UnknownVertex(s));
        }
        if let Some(s) = (0..d.len()).find(|s| !period.contains(s)) {
            return Err(Error::input(format!(
                "state {s} does not appear in the traversal period"
            )));
        }
        let len = period.len();
        let gaps: Vec<f64> = if len == 1 {
            vec![0.0]
        } else {
            (0..len).map(|p| d.d(period[p], period[(p + 1) % len])).collect()
        };
        if len > 1 {
            if let Some(p) = gaps.iter().position(|&g| g <= 0.0) {
                return Err(Error::input(format!(
                    "consecutive traversal entries at period offsets {p} and {} must be distinct states",
                    (p + 1) % len
                )));
            }
        }
        let mut prefix = Vec::with_capacity(len);
        let mut acc = 0.0;
        for g in &gaps {
            prefix.push(acc);
            acc += g;
        }
        Ok(Self {
            period,
            gaps,
            prefix,
            cycle: acc,
        })
    }

    pub fn period(&self) -> &[State] {
        &self.period
    }

    /// τ_j for a 1-based index.
    pub fn state(&self, j: usize) -> State {
        self.period[(j - 1) % self.period.len()]
    }

    /// d(τ_j, τ_{j+1}); `None` when τ never moves (one-state systems).
    pub fn gap(&self, j: usize) -> Option<f64> {
        (self.period.len() > 1).then(|| self.gaps[(j - 1) % self.period.len()])
    }

    fn offset(&self, j: usize) -> f64 {
        let p = self.period.len();
        let (q, r) = ((j - 1) / p, (j - 1) % p);
        q as f64 * self.cycle + self.prefix[r]
    }

    /// δ(l, l2): traversal distance between two 1-based indices.
    pub fn delta(&self, l: usize, l2: usize) -> f64 {
        let (lo, hi) = (l.min(l2), l.max(l2));
        if lo == hi || self.period.len() == 1 {
            return 0.0;
        }
        let p = self.period.len();
        // sum exactly over a short range to avoid cancellation
        if hi - lo <= p {
            return (lo..hi).map(|j| self.gaps[(j - 1) % p]).sum();
        }
        self.offset(hi) - self.offset(lo)
    }

    /// m(s): the first index ≥ `from` whose state is `s`.
    pub fn first_at_or_after(&self, from: usize, s: State) -> usize {
        (from..from + self.period.len())
            .find(|&j| self.state(j) == s)
            .expect("every state appears once per period")
    }

    /// The first `n` entries of τ.
    pub fn materialize(&self, n: usize) -> Vec<State> {
        (1..=n).map(|j| self.state(j)).collect()
    }
}

/// The default traversal period: a doubled depth-first tour of a minimum
/// spanning tree rooted at `s0`, children visited in increasing id order.
pub fn default_traversal(d: &MetricSpace, s0: State) -> Traversal {
    let m = d.len();
    // Prim
    let mut in_tree = vec![false; m];
    let mut best = vec![(f64::INFINITY, s0); m];
    let mut children = vec![Vec::new(); m];
    best[s0] = (0.0, s0);
    for _ in 0..m {
        let u = (0..m)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0).then(a.cmp(&b)))
            .expect("vertices remain");
        in_tree[u] = true;
        if u != s0 {
            children[best[u].1].push(u);
        }
        for v in 0..m {
            if !in_tree[v] && d.d(u, v) < best[v].0 {
                best[v] = (d.d(u, v), u);
            }
        }
    }
    for c in &mut children {
        c.sort_unstable();
    }
    let mut walk = Vec::with_capacity(2 * m);
    fn tour(u: State, children: &[Vec<State>], walk: &mut Vec<State>) {
        walk.push(u);
        for &c in &children[u] {
            tour(c, children, walk);
            walk.push(u);
        }
    }
    tour(s0, &children, &mut walk);
    if walk.len() > 1 {
        walk.pop(); // the closing return to s0 starts the next period
    }
    Traversal::new(d, walk).expect("an MST tour is a valid traversal")
}

/// What one task did to the traversal.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<T> {
    /// t_{i-1}
    pub start: usize,
    /// t_i
    pub end: usize,
    /// (τ-index, λ) for every position the task was executed in.
    pub fractions: Vec<(usize, T)>,
    /// Work spent on this task.
    pub work: T,
    /// Residual work at `end` after the task.
    pub rho: T,
}

/// State of the fractional traversal algorithm: position j, residual work ρ
/// and the checkpoints t_0, t_1, ...
#[derive(Clone, Debug, PartialEq)]
pub struct TraversalCursor<T> {
    j: usize,
    rho: T,
    checkpoints: Vec<usize>,
    total_work: T,
    history: Vec<StepRecord<T>>,
}

impl<T: Scalar> Default for TraversalCursor<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> TraversalCursor<T> {
    pub fn new() -> Self {
        Self {
            j: 1,
            rho: T::zero(),
            checkpoints: vec![1],
            total_work: T::zero(),
            history: Vec::new(),
        }
    }

    /// Current τ-index (t_i after i tasks).
    pub fn position(&self) -> usize {
        self.j
    }

    pub fn rho(&self) -> &T {
        &self.rho
    }

    pub fn checkpoints(&self) -> &[usize] {
        &self.checkpoints
    }

    pub fn total_work(&self) -> T {
        self.total_work.clone()
    }

    pub fn history(&self) -> &[StepRecord<T>] {
        &self.history
    }

    /// Processes one task. `gap(j)` is d(τ_j, τ_{j+1}) (`None` = never
    /// advance) and `state_of(j)` is τ_j.
    ///
    /// A position whose task cost is zero absorbs the whole remaining
    /// fraction for free.
    pub fn step_with(
        &mut self,
        gap: impl Fn(usize) -> Option<T>,
        state_of: impl Fn(usize) -> State,
        task: &[T],
    ) -> StepRecord<T> {
        let start = self.j;
        let mut remaining = T::one();
        let mut fractions = Vec::new();
        let mut work = T::zero();
        while remaining > T::zero() {
            let w = task[state_of(self.j)].clone();
            let limit = match gap(self.j) {
                Some(g) if w > T::zero() => Some((g - self.rho.clone()) / w.clone()),
                _ => None,
            };
            match limit {
                // ρ reaches the gap: advance
                Some(lambda) if lambda <= remaining => {
                    let spent = lambda.clone() * w;
                    work = work + spent;
                    remaining = remaining - lambda.clone();
                    fractions.push((self.j, lambda));
                    self.j += 1;
                    self.rho = T::zero();
                }
                _ => {
                    let spent = remaining.clone() * w;
                    self.rho = self.rho.clone() + spent.clone();
                    work = work + spent;
                    fractions.push((self.j, remaining));
                    remaining = T::zero();
                }
            }
        }
        self.checkpoints.push(self.j);
        self.total_work = self.total_work.clone() + work.clone();
        let record = StepRecord {
            start,
            end: self.j,
            fractions,
            work,
            rho: self.rho.clone(),
        };
        self.history.push(record.clone());
        record
    }
}

impl TraversalCursor<f64> {
    pub fn step(&mut self, tau: &Traversal, task: &[f64]) -> StepRecord<f64> {
        self.step_with(|j| tau.gap(j), |j| tau.state(j), task)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::traversal_distance;
    use crate::mts::appendix_system;
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn appendix_trace_is_exact() {
        let dist = [[0i64, 2, 3], [2, 0, 4], [3, 4, 0]];
        let period = [0usize, 1, 0, 2];
        let state_of = |j: usize| period[(j - 1) % 4];
        let gap = |j: usize| Some(Rational64::from_integer(dist[state_of(j)][state_of(j + 1)]));
        let task = |w: [i64; 3]| w.map(Rational64::from_integer).to_vec();
        let mut cursor = TraversalCursor::<Rational64>::new();

        let s1 = cursor.step_with(gap, state_of, &task([3, 6, 3]));
        assert_eq!(s1.fractions, vec![(1, r(2, 3)), (2, r(1, 3))]);
        assert_eq!((s1.end, s1.rho), (3, r(0, 1)));

        let s2 = cursor.step_with(gap, state_of, &task([1, 3, 4]));
        assert_eq!(s2.fractions, vec![(3, r(1, 1))]);
        assert_eq!(s2.rho, r(1, 1));

        let s3 = cursor.step_with(gap, state_of, &task([10, 10, 10]));
        assert_eq!(
            s3.fractions,
            vec![
                (3, r(2, 10)),
                (4, r(3, 10)),
                (5, r(2, 10)),
                (6, r(2, 10)),
                (7, r(1, 10))
            ]
        );
        assert_eq!((s3.end, s3.rho), (7, r(1, 1)));
        assert_eq!(cursor.checkpoints(), &[1, 3, 3, 7]);
        // total work = δ(t_0, t_n) + ρ = 14 + 1
        assert_eq!(cursor.total_work(), r(15, 1));
    }

    #[test]
    fn default_tour_examples() {
        let two = MetricSpace::matrix(vec![vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
        assert_eq!(default_traversal(&two, 0).period(), &[0, 1]);
        let one = MetricSpace::matrix(vec![vec![0.0]]).unwrap();
        let t = default_traversal(&one, 0);
        assert_eq!(t.materialize(3), vec![0, 0, 0]);
        assert_eq!(t.gap(1), None);
        // the appendix metric's MST is the star around state 1
        let sys = appendix_system();
        assert_eq!(default_traversal(sys.metric(), 0).period(), &[0, 1, 0, 2]);
    }

    #[test]
    fn one_state_absorbs_everything() {
        let one = MetricSpace::matrix(vec![vec![0.0]]).unwrap();
        let tau = default_traversal(&one, 0);
        let mut c = TraversalCursor::new();
        let rec = c.step(&tau, &[7.0]);
        assert_eq!(rec.fractions, vec![(1, 1.0)]);
        assert_eq!(c.position(), 1);
        assert_eq!(*c.rho(), 7.0);
    }

    #[test]
    fn zero_cost_position_absorbs_remaining_fraction() {
        let sys = appendix_system();
        let mut c = TraversalCursor::new();
        let rec = c.step(sys.traversal(), &[0.0, 5.0, 5.0]);
        assert_eq!(rec.fractions, vec![(1, 1.0)]);
        assert_eq!((c.position(), *c.rho()), (1, 0.0));
    }

    #[test]
    fn rejects_invalid_periods() {
        let sys = appendix_system();
        assert!(Traversal::new(sys.metric(), vec![0, 0, 1, 2]).is_err());
        assert!(Traversal::new(sys.metric(), vec![0, 1]).is_err());
        assert!(Traversal::new(sys.metric(), vec![]).is_err());
    }

    #[test]
    fn delta_matches_materialized_sum() {
        let sys = appendix_system();
        let tau = sys.traversal();
        let mat = tau.materialize(40);
        for a in 1..=40 {
            for b in a..=40 {
                let expect = traversal_distance(&mat, sys.metric(), a, b).unwrap();
                assert!((tau.delta(a, b) - expect).abs() < 1e-9);
            }
        }
        assert_eq!(tau.first_at_or_after(2, 2), 4);
        assert_eq!(tau.first_at_or_after(5, 2), 8);
    }

    proptest! {
        #[test]
        fn work_equals_distance_plus_residual(
            tasks in proptest::collection::vec(proptest::collection::vec(0u32..16, 3), 1..15)
        ) {
            let sys = appendix_system();
            let mut c = TraversalCursor::new();
            for t in &tasks {
                let task: Vec<f64> = t.iter().map(|&w| w as f64).collect();
                let rec = c.step(sys.traversal(), &task);
                let total: f64 = rec.fractions.iter().map(|(_, l)| l).sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                let expect = sys.traversal().delta(1, c.position()) + c.rho();
                prop_assert!((c.total_work() - expect).abs() < 1e-6);
                prop_assert!(*c.rho() >= 0.0);
                prop_assert!(*c.rho() < sys.traversal().gap(c.position()).unwrap() + 1e-9);
            }
        }
    }
}
