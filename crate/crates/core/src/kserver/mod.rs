//! k-server on lines and trees.
//!
//! Double Coverage moves several servers per request, which a greedy agent
//! can't be made to do. The lazy transform keeps DC as a "virtual"
//! configuration and moves only the real server matched to the request; the
//! resulting algorithm is local and monotone, so every server owns a connected
//! region and prices equalizing costs at the region boundaries make agents
//! pick the owner.

mod dc;
mod lazy;
mod opt;
mod regions;
mod run;

pub use dc::{dc_step, DcStep};
pub use lazy::{LazyStep, VirtualPair};
pub use opt::kserver_offline_opt;
pub use regions::{balance2_prices, perturb_thresholds, regions, server_prices, RegionMap, Threshold};
pub use run::{
    kserver_agent_options, request_grid, run_balance2_agents, run_free_agents, run_priced_agents, KServerPricer,
    KServerRun,
};

use crate::error::{Error, Result};
use crate::metric::{Geodesic, RealLine, TreeMetric};
use crate::TOLERANCE;

/// A geodesic space in which servers can move continuously.
pub trait ServerSpace: Geodesic {
    /// The point at distance `t` from `p` on the path to `q` (clamped to `q`).
    fn move_toward(&self, p: &Self::Point, q: &Self::Point, t: f64) -> Self::Point;

    fn same(&self, a: &Self::Point, b: &Self::Point) -> bool {
        self.dist(a, b) <= TOLERANCE
    }
}

impl ServerSpace for RealLine {
    fn move_toward(&self, p: &f64, q: &f64, t: f64) -> f64 {
        if (q - p).abs() <= t {
            *q
        } else if q > p {
            p + t
        } else {
            p - t
        }
    }
}

impl ServerSpace for TreeMetric {
    fn move_toward(&self, p: &Self::Point, q: &Self::Point, t: f64) -> Self::Point {
        self.normalize(self.point_toward(p, q, t))
    }
}

/// Positions of k servers (server ids are indices) and how far each has moved.
#[derive(Clone, Debug, PartialEq)]
pub struct ServerConfig<P> {
    pub positions: Vec<P>,
    pub travel: Vec<f64>,
}

impl<P: Clone> ServerConfig<P> {
    pub fn new(positions: Vec<P>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::input("a server configuration needs at least one server"));
        }
        let travel = vec![0.0; positions.len()];
        Ok(Self { positions, travel })
    }

    pub fn k(&self) -> usize {
        self.positions.len()
    }

    /// Moves server `id` to `to`, accounting the travelled distance.
    pub fn move_server<S: Geodesic<Point = P>>(&mut self, space: &S, id: usize, to: P) -> f64 {
        let d = space.dist(&self.positions[id], &to);
        self.positions[id] = to;
        self.travel[id] += d;
        d
    }

    pub fn total_travel(&self) -> f64 {
        self.travel.iter().sum()
    }
}

impl ServerConfig<f64> {
    /// A line configuration; positions are sorted so that server ids follow
    /// the left-to-right order.
    pub fn line(mut positions: Vec<f64>) -> Result<Self> {
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::input("server positions must be finite"));
        }
        positions.sort_by(f64::total_cmp);
        Self::new(positions)
    }
}

/// The lowest id of a server sitting at the same point as `id`.
pub(crate) fn representative<S: ServerSpace>(space: &S, positions: &[S::Point], id: usize) -> usize {
    (0..id)
        .find(|&j| space.same(&positions[j], &positions[id]))
        .unwrap_or(id)
}
