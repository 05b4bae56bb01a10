use super::{State, Task};
use crate::error::{Error, Result};
use crate::metric::MetricSpace;

/// Largest n·m² the dynamic program will attempt.
const BUDGET: usize = 50_000_000;

/// Exact offline optimum: the cheapest state sequence paying transitions
/// plus processing, by dynamic programming over (task, state).
pub fn mts_offline_opt(tasks: &[Task], d: &MetricSpace, s0: State) -> Result<f64> {
    let m = d.len();
    if !d.contains(s0) {
        return Err(Error::UnknownVertex(s0));
    }
    if tasks.len().saturating_mul(m * m) > BUDGET {
        return Err(Error::Unsupported(format!(
            "offline optimum over {} tasks and {m} states exceeds the search budget",
            tasks.len()
        )));
    }
    let mut best = vec![f64::INFINITY; m];
    best[s0] = 0.0;
    for task in tasks {
        if task.len() != m {
            return Err(Error::input("task length differs from the number of states"));
        }
        best = (0..m)
            .map(|s| {
                let arrive = (0..m).map(|u| best[u] + d.d(u, s)).fold(f64::INFINITY, f64::min);
                arrive + task[s]
            })
            .collect();
    }
    Ok(best.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mts::appendix_system;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let sys = appendix_system();
        assert_eq!(mts_offline_opt(&[vec![3.0, 6.0, 3.0]], sys.metric(), 0).unwrap(), 3.0);
        assert_eq!(mts_offline_opt(&vec![vec![0.0; 3]; 4], sys.metric(), 0).unwrap(), 0.0);
        let one = MetricSpace::matrix(vec![vec![0.0]]).unwrap();
        assert_eq!(mts_offline_opt(&[vec![2.0], vec![5.0]], &one, 0).unwrap(), 7.0);
        assert_eq!(mts_offline_opt(&[], sys.metric(), 0).unwrap(), 0.0);
    }

    fn brute(tasks: &[Task], d: &MetricSpace, s: State) -> f64 {
        match tasks.split_first() {
            None => 0.0,
            Some((t, rest)) => (0..d.len())
                .map(|u| d.d(s, u) + t[u] + brute(rest, d, u))
                .fold(f64::INFINITY, f64::min),
        }
    }

    proptest! {
        #[test]
        fn agrees_with_enumeration(
            tasks in proptest::collection::vec(proptest::collection::vec(0u32..10, 3), 0..6)
        ) {
            let sys = appendix_system();
            let tasks: Vec<Task> = tasks.into_iter().map(|t| t.into_iter().map(f64::from).collect()).collect();
            let dp = mts_offline_opt(&tasks, sys.metric(), 0).unwrap();
            prop_assert!((dp - brute(&tasks, sys.metric(), 0)).abs() < 1e-9);
        }
    }
}
