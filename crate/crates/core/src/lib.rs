//! Online algorithms together with the dynamic posted-price schemes that make
//! selfish agents reproduce them.
//!
//! Three problem families are covered:
//!
//! * [`mts`]: metrical task systems, the fractional traversal algorithm, the
//!   single-state "follow the traversal" algorithm and a state-pricing scheme
//!   that only observes the agents' decisions.
//! * [`kserver`]: k-server on lines and trees. Double Coverage is made lazy via
//!   a local min-cost matching, and servers are priced so that the threshold
//!   point between two regions is an indifference point for arriving agents.
//! * [`parking`]: online metric matching on weighted lines. Harmonic pricing,
//!   price-minimising variants, a metric transform for a known optimum estimate
//!   and pricing for arbitrary monotone algorithms.
//!
//! [`agents`] holds the shared decision engine, and [`harness`] drives seeded
//! experiments, property suites and price-of-anarchy reports.

pub mod agents;
pub mod error;
pub mod harness;
pub mod kserver;
pub mod metric;
pub mod mts;
pub mod parking;

pub use agents::{decide, DecisionProblem, TieBreak, TiePolicy, Trace, TraceRow};
pub use error::{Error, Result};
pub use metric::{Geodesic, Matching, MetricKind, MetricSpace, Vertex};

/// Comparison tolerance used wherever a strict inequality has to be checked
/// in floating point.
pub const TOLERANCE: f64 = 1e-9;
