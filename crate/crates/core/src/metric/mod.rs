//! Finite metric spaces over dense vertex ids, plus the matching primitives
//! used by the k-server transformation.

mod matching;
mod tree;

pub use matching::{
    assignment, canonical_matching, min_cost_matching_oracle, r_local_matching, Matching, BRUTE_FORCE_LIMIT,
};
pub use tree::{TreeMetric, TreePoint};

use crate::error::{Error, Result};
use crate::TOLERANCE;
use serde::{Deserialize, Serialize};

pub type Vertex = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    WeightedLine,
    Tree,
    Matrix,
}

#[derive(Clone, Debug)]
enum Repr {
    Line(Vec<f64>),
    Tree(TreeMetric),
    Matrix { size: usize, entries: Vec<f64> },
}

/// An immutable finite metric space.
///
/// Vertices are `0..len()`. Construction validates the metric axioms, so every
/// value of this type is a metric.
#[derive(Clone, Debug)]
pub struct MetricSpace {
    repr: Repr,
}

impl MetricSpace {
    /// A weighted line given by strictly increasing vertex coordinates.
    pub fn weighted_line(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input("a line needs at least one vertex"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("line coordinates must be finite"));
        }
        if let Some(w) = coords.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::input(format!(
                "line coordinates must be strictly increasing (vertex {} at {} >= vertex {} at {})",
                w,
                coords[w],
                w + 1,
                coords[w + 1]
            )));
        }
        Ok(Self {
            repr: Repr::Line(coords),
        })
    }

    /// A weighted tree on `n` vertices given by its edge list, rooted at 0.
    pub fn tree(n: usize, edges: &[(Vertex, Vertex, f64)]) -> Result<Self> {
        Ok(Self {
            repr: Repr::Tree(TreeMetric::new(n, edges)?),
        })
    }

    /// An explicit symmetric matrix. The triangle inequality is checked on
    /// every triple.
    pub fn matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::input("matrix metric needs at least one point"));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::input(format!(
                    "matrix row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        let at = |i: usize, j: usize| entries[i * size + j];
        for i in 0..size {
            if at(i, i) != 0.0 {
                return Err(Error::input(format!("d({i},{i}) = {} is not zero", at(i, i))));
            }
            for j in 0..size {
                let v = at(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::input(format!(
                        "d({i},{j}) = {v} is not a finite non-negative value"
                    )));
                }
                if (v - at(j, i)).abs() > TOLERANCE {
                    return Err(Error::input(format!("matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        for i in 0..size {
            for j in 0..size {
                for k in 0..size {
                    if at(i, k) > at(i, j) + at(j, k) + TOLERANCE {
                        return Err(Error::input(format!(
                            "triangle inequality fails: d({i},{k}) = {} > d({i},{j}) + d({j},{k}) = {}",
                            at(i, k),
                            at(i, j) + at(j, k)
                        )));
                    }
                }
            }
        }
        Ok(Self {
            repr: Repr::Matrix { size, entries },
        })
    }

    pub fn kind(&self) -> MetricKind {
        match &self.repr {
            Repr::Line(_) => MetricKind::WeightedLine,
            Repr::Tree(_) => MetricKind::Tree,
            Repr::Matrix { .. } => MetricKind::Matrix,
        }
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Line(c) => c.len(),
            Repr::Tree(t) => t.len(),
            Repr::Matrix { size, .. } => *size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v < self.len()
    }

    pub fn distance(&self, u: Vertex, v: Vertex) -> Result<f64> {
        for x in [u, v] {
            if !self.contains(x) {
                return Err(Error::UnknownVertex(x));
            }
        }
        Ok(self.d(u, v))
    }

    /// Distance without the bounds check. Panics on unknown vertices.
    pub fn d(&self, u: Vertex, v: Vertex) -> f64 {
        match &self.repr {
            Repr::Line(c) => (c[u] - c[v]).abs(),
            Repr::Tree(t) => t.vertex_distance(u, v),
            Repr::Matrix { size, entries } => entries[u * size + v],
        }
    }

    /// Coordinates of a weighted line.
    pub fn coords(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Line(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&TreeMetric> {
        match &self.repr {
            Repr::Tree(t) => Some(t),
            _ => None,
        }
    }

    /// Full distance matrix, row-major.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|u| (0..n).map(|v| self.d(u, v)).collect()).collect()
    }

    /// Largest over smallest positive pairwise distance.
    pub fn aspect_ratio(&self) -> f64 {
        let n = self.len();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for u in 0..n {
            for v in u + 1..n {
                let d = self.d(u, v);
                if d > 0.0 {
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
            }
        }
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }
}

/// A space with geodesic distances: points, distances and a betweenness test.
///
/// Lines and trees are geodesic, so "c lies on the path from a to b" is the
/// same as d(a,c) + d(c,b) = d(a,b).
pub trait Geodesic {
    type Point: Clone + std::fmt::Debug;

    fn dist(&self, a: &Self::Point, b: &Self::Point) -> f64;

    fn on_path(&self, a: &Self::Point, b: &Self::Point, c: &Self::Point) -> bool {
        let direct = self.dist(a, b);
        self.dist(a, c) + self.dist(c, b) <= direct + TOLERANCE * (1.0 + direct)
    }

    /// Coordinate of a point when the space is a line; enables the canonical
    /// (sorted) matching.
    fn line_coord(&self, _p: &Self::Point) -> Option<f64> {
        None
    }
}

impl Geodesic for MetricSpace {
    type Point = Vertex;

    fn dist(&self, a: &Vertex, b: &Vertex) -> f64 {
        self.d(*a, *b)
    }

    fn line_coord(&self, p: &Vertex) -> Option<f64> {
        self.coords().map(|c| c[*p])
    }
}

/// The continuous real line.
#[derive(Clone, Copy, Debug, Default)]
pub struct RealLine;

impl Geodesic for RealLine {
    type Point = f64;

    fn dist(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn on_path(&self, a: &f64, b: &f64, c: &f64) -> bool {
        a.min(*b) <= *c && *c <= a.max(*b)
    }

    fn line_coord(&self, p: &f64) -> Option<f64> {
        Some(*p)
    }
}

/// δ(l, l2): the summed distances between consecutive entries of a
/// materialized traversal sequence, between two 1-based indices.
pub fn traversal_distance(tau: &[Vertex], space: &MetricSpace, l: usize, l2: usize) -> Result<f64> {
    for idx in [l, l2] {
        if idx == 0 || idx > tau.len() {
            return Err(Error::Range {
                index: idx,
                len: tau.len(),
            });
        }
    }
    let (lo, hi) = (l.min(l2), l.max(l2));
    let mut total = 0.0;
    for j in lo..hi {
        total += space.distance(tau[j - 1], tau[j])?;
    }
    Ok(total)
}
