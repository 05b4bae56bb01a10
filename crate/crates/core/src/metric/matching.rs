use super::Geodesic;
use crate::error::{Error, Result};
use crate::TOLERANCE;

/// Sizes up to this limit are solved by enumerating permutations.
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// A perfect matching between two equally sized point lists, stored as
/// `x_to_y[i] = j` (X point `i` is matched to Y point `j`).
#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    pub x_to_y: Vec<usize>,
    pub cost: f64,
}

impl Matching {
    fn from_assignment<G: Geodesic>(space: &G, xs: &[G::Point], ys: &[G::Point], x_to_y: Vec<usize>) -> Self {
        let cost = x_to_y
            .iter()
            .enumerate()
            .map(|(i, &j)| space.dist(&xs[i], &ys[j]))
            .sum();
        Self { x_to_y, cost }
    }

    pub fn pairs<'a, P>(&self, xs: &'a [P], ys: &'a [P]) -> Vec<(&'a P, &'a P)> {
        self.x_to_y.iter().enumerate().map(|(i, &j)| (&xs[i], &ys[j])).collect()
    }

    /// Index of the X point matched to Y point `j`.
    pub fn y_owner(&self, j: usize) -> Option<usize> {
        self.x_to_y.iter().position(|&y| y == j)
    }

    pub fn is_perfect(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        self.x_to_y.len() == n
            && self
                .x_to_y
                .iter()
                .all(|&j| j < n && !std::mem::replace(&mut seen[j], true))
    }
}

fn check_sizes(nx: usize, ny: usize) -> Result<()> {
    if nx != ny {
        return Err(Error::input(format!("matching needs equal sizes, got {nx} and {ny}")));
    }
    Ok(())
}

/// The sorted-order matching of two ascending point lists on a line, which
/// has minimum cost among all perfect matchings.
pub fn canonical_matching(xs: &[f64], ys: &[f64]) -> Result<Matching> {
    check_sizes(xs.len(), ys.len())?;
    for (name, pts) in [("X", xs), ("Y", ys)] {
        if pts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input(format!("{name} must be sorted ascending")));
        }
    }
    let cost = xs.iter().zip(ys).map(|(x, y)| (x - y).abs()).sum();
    Ok(Matching {
        x_to_y: (0..xs.len()).collect(),
        cost,
    })
}

/// Indices of `pts` sorted by (coordinate, index).
fn sorted_order(coords: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]).then(a.cmp(&b)));
    order
}

/// Canonical matching for unsorted points on a line, returned in the callers'
/// index space.
fn canonical_unsorted(xc: &[f64], yc: &[f64]) -> Vec<usize> {
    let (xo, yo) = (sorted_order(xc), sorted_order(yc));
    let mut x_to_y = vec![0; xc.len()];
    for (rank, &xi) in xo.iter().enumerate() {
        x_to_y[xi] = yo[rank];
    }
    x_to_y
}

/// A minimum-cost perfect matching in which X point `r` is matched to a Y
/// point adjacent to it (no other Y point strictly closer on the path).
///
/// On a line the starting matching is the canonical one, so the result is
/// the r-canonical matching. Elsewhere it starts from
/// [`min_cost_matching_oracle`]. A single rematch step then makes it r-local.
pub fn r_local_matching<G: Geodesic>(xs: &[G::Point], ys: &[G::Point], r: usize, space: &G) -> Result<Matching> {
    check_sizes(xs.len(), ys.len())?;
    if r >= xs.len() {
        return Err(Error::input(format!(
            "r index {r} is not a point of X (|X| = {})",
            xs.len()
        )));
    }
    let line: Option<(Vec<f64>, Vec<f64>)> = xs
        .iter()
        .map(|p| space.line_coord(p))
        .collect::<Option<Vec<_>>>()
        .zip(ys.iter().map(|p| space.line_coord(p)).collect::<Option<Vec<_>>>());
    let mut x_to_y = match line {
        Some((xc, yc)) => canonical_unsorted(&xc, &yc),
        None => min_cost_matching_oracle(xs, ys, space)?.x_to_y,
    };

    let y = x_to_y[r];
    let d_ry = space.dist(&xs[r], &ys[y]);
    // the Y point on P(y, r) closest to r
    let closer = (0..ys.len())
        .filter(|&j| j != y)
        .filter(|&j| space.on_path(&ys[y], &xs[r], &ys[j]))
        .map(|j| (space.dist(&xs[r], &ys[j]), j))
        .filter(|&(d, _)| d < d_ry - TOLERANCE)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if let Some((_, y_adj)) = closer {
        let x = x_to_y.iter().position(|&j| j == y_adj).expect("perfect matching");
        x_to_y[x] = y;
        x_to_y[r] = y_adj;
    }
    Ok(Matching::from_assignment(space, xs, ys, x_to_y))
}

/// Provably minimum-cost perfect matching: permutation enumeration up to
/// [`BRUTE_FORCE_LIMIT`] points (the lexicographically first optimum), the
/// Hungarian method above that.
pub fn min_cost_matching_oracle<G: Geodesic>(xs: &[G::Point], ys: &[G::Point], space: &G) -> Result<Matching> {
    check_sizes(xs.len(), ys.len())?;
    let n = xs.len();
    let cost: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| ys.iter().map(|y| space.dist(x, y)).collect())
        .collect();
    let x_to_y = if n <= BRUTE_FORCE_LIMIT {
        brute_force(&cost)
    } else {
        assignment(&cost).0
    };
    Ok(Matching::from_assignment(space, xs, ys, x_to_y))
}

fn brute_force(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = f64::INFINITY;
    loop {
        let c: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if c < best_cost - 1e-12 {
            best_cost = c;
            best.clone_from(&perm);
        }
        if !next_permutation(&mut perm) {
            return best;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Rectangular assignment problem (rows ≤ columns) by the Hungarian method
/// with potentials, O(n²m). Returns the column of every row and the cost.
pub fn assignment(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let m = cost[0].len();
    assert!(n <= m, "assignment needs rows <= columns");
    // 1-based arrays, column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=m {
        if row_of[j] > 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    let total = col_of.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (col_of, total)
}
