use super::{Geodesic, Vertex};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// A weighted tree rooted at vertex 0.
///
/// Besides vertex distances it supports continuous points: a [`TreePoint`]
/// sits on the edge from `vertex` towards its parent.
#[derive(Clone, Debug)]
pub struct TreeMetric {
    parent: Vec<Option<Vertex>>,
    /// Weight of the edge to the parent (0 for the root).
    weight: Vec<f64>,
    /// Weighted distance from the root.
    depth: Vec<f64>,
    /// Unweighted depth.
    level: Vec<usize>,
}

/// A point on a tree: `up` units above `vertex` on the edge to its parent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub vertex: Vertex,
    pub up: f64,
}

impl TreePoint {
    pub fn at(vertex: Vertex) -> Self {
        Self { vertex, up: 0.0 }
    }
}

impl TreeMetric {
    pub fn new(n: usize, edges: &[(Vertex, Vertex, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("a tree needs at least one vertex"));
        }
        if edges.len() != n - 1 {
            return Err(Error::input(format!(
                "a tree on {n} vertices needs {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownVertex(u.max(v)));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::input(format!("edge ({u},{v}) has non-positive weight {w}")));
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let mut parent = vec![None; n];
        let mut weight = vec![0.0; n];
        let mut depth = vec![0.0; n];
        let mut level = vec![0; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, w) in &adj[u] {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                parent[v] = Some(u);
                weight[v] = w;
                depth[v] = depth[u] + w;
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::input(format!("tree is disconnected: vertex {v} unreachable")));
        }
        Ok(Self {
            parent,
            weight,
            depth,
            level,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v]
    }

    pub fn parent_weight(&self, v: Vertex) -> f64 {
        self.weight[v]
    }

    pub fn lca(&self, mut a: Vertex, mut b: Vertex) -> Vertex {
        while self.level[a] > self.level[b] {
            a = self.parent[a].expect("non-root has a parent");
        }
        while self.level[b] > self.level[a] {
            b = self.parent[b].expect("non-root has a parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root has a parent");
            b = self.parent[b].expect("non-root has a parent");
        }
        a
    }

    /// True when `a` is an ancestor of `b` (or equal).
    pub fn is_ancestor(&self, a: Vertex, b: Vertex) -> bool {
        self.lca(a, b) == a
    }

    pub fn vertex_distance(&self, u: Vertex, v: Vertex) -> f64 {
        let c = self.lca(u, v);
        self.depth[u] + self.depth[v] - 2.0 * self.depth[c]
    }

    fn height(&self, p: &TreePoint) -> f64 {
        self.depth[p.vertex] - p.up
    }

    /// Height (distance from the root) of the highest point on the path
    /// between `p` and `q`.
    fn top_height(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        let (a, b) = (p.vertex, q.vertex);
        if a == b {
            return self.height(p).min(self.height(q));
        }
        let c = self.lca(a, b);
        if c == a {
            // p sits above a, which is an ancestor of b: p lies on b's root path.
            self.height(p)
        } else if c == b {
            self.height(q)
        } else {
            self.depth[c]
        }
    }

    pub fn point_distance(&self, p: &TreePoint, q: &TreePoint) -> f64 {
        let top = self.top_height(p, q);
        (self.height(p) - top) + (self.height(q) - top)
    }

    /// The point at height `h` on the root path of vertex `v`
    /// (requires `h <= depth(v)`).
    fn on_root_path(&self, v: Vertex, h: f64) -> TreePoint {
        let mut u = v;
        loop {
            match self.parent[u] {
                Some(p) if self.depth[p] >= h => u = p,
                _ => break,
            }
        }
        let up = (self.depth[u] - h).max(0.0);
        if up >= self.weight[u] && self.parent[u].is_some() {
            TreePoint::at(self.parent[u].unwrap())
        } else {
            TreePoint { vertex: u, up }
        }
    }

    /// The point at distance `t` from `p` along the path towards `q`.
    pub fn point_toward(&self, p: &TreePoint, q: &TreePoint, t: f64) -> TreePoint {
        let total = self.point_distance(p, q);
        if t >= total {
            return *q;
        }
        if t <= 0.0 {
            return *p;
        }
        let top = self.top_height(p, q);
        let rise = self.height(p) - top;
        if p.vertex == q.vertex {
            let up = if q.up > p.up { p.up + t } else { p.up - t };
            return TreePoint { vertex: p.vertex, up };
        }
        if t <= rise {
            self.on_root_path(p.vertex, self.height(p) - t)
        } else {
            self.on_root_path(q.vertex, top + (t - rise))
        }
    }

    /// Canonical form: a point at the top end of its edge is its parent vertex.
    pub fn normalize(&self, p: TreePoint) -> TreePoint {
        match self.parent[p.vertex] {
            Some(par) if p.up >= self.weight[p.vertex] - 1e-12 => TreePoint::at(par),
            _ if p.up <= 1e-12 => TreePoint::at(p.vertex),
            _ => p,
        }
    }
}

impl Geodesic for TreeMetric {
    type Point = TreePoint;

    fn dist(&self, a: &TreePoint, b: &TreePoint) -> f64 {
        self.point_distance(a, b)
    }
}
