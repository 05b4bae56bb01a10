use super::ServerSpace;
use crate::error::{Error, Result};
use std::collections::HashMap;

/// Largest number of configurations (bounded by (k+n)^k) the search accepts.
const BUDGET: f64 = 1e7;

/// Exact offline optimum: minimum total movement to serve `requests` in
/// order, starting from `initial`. Lazy schedules suffice, so the search runs
/// over multisets of points drawn from the initial positions and requests.
pub fn kserver_offline_opt<S: ServerSpace>(space: &S, initial: &[S::Point], requests: &[S::Point]) -> Result<f64> {
    let k = initial.len();
    if k == 0 {
        return Err(Error::input("no servers"));
    }
    if ((k + requests.len()) as f64).powi(k as i32) > BUDGET {
        return Err(Error::input(format!(
            "offline optimum for k = {k} and {} requests exceeds the search budget",
            requests.len()
        )));
    }
    let mut points: Vec<S::Point> = Vec::new();
    let index = |p: &S::Point, points: &mut Vec<S::Point>| -> usize {
        match points.iter().position(|q| space.same(p, q)) {
            Some(i) => i,
            None => {
                points.push(p.clone());
                points.len() - 1
            }
        }
    };
    let mut start: Vec<usize> = initial.iter().map(|p| index(p, &mut points)).collect();
    let reqs: Vec<usize> = requests.iter().map(|p| index(p, &mut points)).collect();
    let dist: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| space.dist(a, b)).collect())
        .collect();
    start.sort_unstable();
    let mut layer: HashMap<Vec<usize>, f64> = HashMap::from([(start, 0.0)]);
    for &r in &reqs {
        let mut next: HashMap<Vec<usize>, f64> = HashMap::with_capacity(layer.len() * k);
        for (conf, cost) in &layer {
            if conf.contains(&r) {
                let e = next.entry(conf.clone()).or_insert(f64::INFINITY);
                *e = e.min(*cost);
                continue;
            }
            for i in 0..k {
                if i > 0 && conf[i] == conf[i - 1] {
                    continue;
                }
                let mut c = conf.clone();
                let moved = dist[c[i]][r];
                c[i] = r;
                c.sort_unstable();
                let e = next.entry(c).or_insert(f64::INFINITY);
                *e = e.min(cost + moved);
            }
        }
        layer = next;
    }
    Ok(layer.into_values().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::RealLine;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(
            kserver_offline_opt(&RealLine, &[0.0, 10.0], &[1.0, 2.0, 3.0]).unwrap(),
            3.0
        );
        assert_eq!(kserver_offline_opt(&RealLine, &[0.0, 10.0], &[]).unwrap(), 0.0);
        assert_eq!(kserver_offline_opt(&RealLine, &[0.0, 10.0], &[10.0, 0.0]).unwrap(), 0.0);
        assert!(kserver_offline_opt(&RealLine, &[0.0; 8], &[1.0; 30]).is_err());
    }

    /// Every assignment of requests to servers.
    fn brute(init: &[f64], reqs: &[f64]) -> f64 {
        let k = init.len();
        let mut best = f64::INFINITY;
        for code in 0..k.pow(reqs.len() as u32) {
            let mut pos = init.to_vec();
            let (mut c, mut cost) = (code, 0.0);
            for &r in reqs {
                let s = c % k;
                c /= k;
                cost += (pos[s] - r).abs();
                pos[s] = r;
            }
            best = best.min(cost);
        }
        best
    }

    proptest! {
        #[test]
        fn agrees_with_enumeration(
            init in proptest::collection::vec(0u32..20, 1..=3),
            reqs in proptest::collection::vec(0u32..20, 0..=7),
        ) {
            let init: Vec<f64> = init.into_iter().map(f64::from).collect();
            let reqs: Vec<f64> = reqs.into_iter().map(f64::from).collect();
            let dp = kserver_offline_opt(&RealLine, &init, &reqs).unwrap();
            prop_assert!((dp - brute(&init, &reqs)).abs() < 1e-9);
        }
    }
}
