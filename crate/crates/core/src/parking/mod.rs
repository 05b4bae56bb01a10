//! Online metric matching ("parking") on weighted lines.
//!
//! Cars arrive with a goal vertex and park in a vacant slot. Free parking
//! makes each car take the nearest slot, which can be exponentially worse
//! than optimal. Random posted prices can instead make selfish cars behave
//! like the harmonic algorithm, or like any other monotone algorithm.

mod harmonic;
mod lp;
mod monotone;
mod opt;
mod prior;
mod run;

pub use harmonic::{
    check_payment_conditions, epsilon_strict, harmonic_left_probability, harmonic_prices, harmonic_step, SlotPrices,
};
pub use lp::{min_sum_prices, observation_prices};
pub use monotone::{harmonic_cdf, monotone_cdf, monotone_prices, MonotoneCdf};
pub use opt::{matching_offline_opt, matching_oracle_brute_force};
pub use prior::transform_metric;
pub use run::{
    adversarial_instance, greedy_step, parking_options, run_free_agents, run_greedy, run_harmonic, run_monotone_agents,
    run_priced_agents, ParkingRun, PricingRule,
};

use crate::error::{Error, Result};
use crate::metric::Vertex;
use serde::{Deserialize, Serialize};

/// A weighted line: vertices in left-to-right order, some of which are
/// parking slots, with optional removed ("cut") edges that nothing crosses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Street {
    coords: Vec<f64>,
    is_slot: Vec<bool>,
    /// `cut[i]` removes the edge between vertices i and i+1.
    cut: Vec<bool>,
    /// Component id of every vertex.
    component: Vec<usize>,
}

impl Street {
    /// Strictly increasing coordinates; `is_slot` marks parking slots (the
    /// other vertices can only be goals).
    pub fn new(coords: Vec<f64>, is_slot: Vec<bool>) -> Result<Self> {
        let n = coords.len();
        Self::with_cuts(coords, is_slot, vec![false; n.saturating_sub(1)])
    }

    /// Every vertex is a slot.
    pub fn all_slots(coords: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        Self::new(coords, vec![true; n])
    }

    /// Builds the line from consecutive edge weights, starting at 0.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let mut coords = vec![0.0];
        for w in weights {
            coords.push(coords.last().unwrap() + w);
        }
        Self::all_slots(coords)
    }

    pub fn with_cuts(coords: Vec<f64>, is_slot: Vec<bool>, cut: Vec<bool>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input("a street needs at least one vertex"));
        }
        if is_slot.len() != coords.len() || cut.len() + 1 != coords.len() {
            return Err(Error::input("slot mask and cut list must match the vertex count"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("coordinates must be finite"));
        }
        if let Some(i) = coords.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::input(format!(
                "coordinates must be strictly increasing (vertex {} at {} follows {})",
                i + 1,
                coords[i + 1],
                coords[i]
            )));
        }
        let mut component = vec![0; coords.len()];
        for i in 1..coords.len() {
            component[i] = component[i - 1] + usize::from(cut[i - 1]);
        }
        Ok(Self {
            coords,
            is_slot,
            cut,
            component,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn is_slot(&self, v: Vertex) -> bool {
        self.is_slot[v]
    }

    pub fn slots(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.len()).filter(|&v| self.is_slot[v])
    }

    pub fn is_cut(&self, edge: usize) -> bool {
        self.cut[edge]
    }

    pub fn component(&self, v: Vertex) -> usize {
        self.component[v]
    }

    /// Weight of the edge between v and v+1.
    pub fn weight(&self, edge: usize) -> f64 {
        self.coords[edge + 1] - self.coords[edge]
    }

    /// Path distance; infinite across a cut.
    pub fn d(&self, u: Vertex, v: Vertex) -> f64 {
        if self.component[u] != self.component[v] {
            f64::INFINITY
        } else {
            (self.coords[u] - self.coords[v]).abs()
        }
    }

    /// Largest over smallest finite positive distance.
    pub fn aspect_ratio(&self) -> f64 {
        let mut hi: f64 = 0.0;
        let mut lo = f64::INFINITY;
        for i in 0..self.len() {
            if i + 1 < self.len() && !self.cut[i] {
                lo = lo.min(self.weight(i));
            }
            // farthest vertex in the same component
            let last = (i..self.len())
                .take_while(|&j| self.component[j] == self.component[i])
                .last()
                .unwrap();
            hi = hi.max(self.coords[last] - self.coords[i]);
        }
        if lo.is_finite() {
            hi / lo
        } else {
            1.0
        }
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }
}

/// Which slots are taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occupancy {
    occupied: Vec<bool>,
}

impl Occupancy {
    pub fn empty(street: &Street) -> Self {
        Self {
            occupied: vec![false; street.len()],
        }
    }

    pub fn from_occupied(street: &Street, taken: &[Vertex]) -> Result<Self> {
        let mut occ = Self::empty(street);
        for &v in taken {
            street.check_vertex(v)?;
            if !street.is_slot(v) {
                return Err(Error::input(format!("vertex {v} is not a parking slot")));
            }
            occ.occupied[v] = true;
        }
        Ok(occ)
    }

    pub fn is_occupied(&self, v: Vertex) -> bool {
        self.occupied[v]
    }

    pub fn is_vacant(&self, street: &Street, v: Vertex) -> bool {
        street.is_slot(v) && !self.occupied[v]
    }

    pub fn vacant(&self, street: &Street) -> Vec<Vertex> {
        (0..street.len()).filter(|&v| self.is_vacant(street, v)).collect()
    }

    pub fn park(&mut self, street: &Street, v: Vertex) -> Result<()> {
        street.check_vertex(v)?;
        if !self.is_vacant(street, v) {
            return Err(Error::input(format!("slot {v} is not vacant")));
        }
        self.occupied[v] = true;
        Ok(())
    }
}

/// A maximal run of vertices nobody can park at, with the nearest vacant
/// slot on either side within the same component.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    /// First and last vertex of the run.
    pub first: Vertex,
    pub last: Vertex,
    pub left: Option<Vertex>,
    pub right: Option<Vertex>,
}

impl Block {
    pub fn contains(&self, v: Vertex) -> bool {
        self.first <= v && v <= self.last
    }

    /// Both boundary slots exist.
    pub fn is_two_sided(&self) -> bool {
        self.left.is_some() && self.right.is_some()
    }

    /// d(L, R), when both exist.
    pub fn gap(&self, street: &Street) -> Option<f64> {
        Some(street.d(self.left?, self.right?))
    }
}

/// The blocks of the current occupancy. Vertices that are not slots count
/// as taken. A run at the end of a component has only one boundary slot (or
/// none, when the component is full).
pub fn blocks(street: &Street, occ: &Occupancy) -> Vec<Block> {
    let mut out = Vec::new();
    let n = street.len();
    let mut v = 0;
    while v < n {
        if occ.is_vacant(street, v) {
            v += 1;
            continue;
        }
        let first = v;
        let comp = street.component(v);
        while v + 1 < n && street.component(v + 1) == comp && !occ.is_vacant(street, v + 1) {
            v += 1;
        }
        let last = v;
        let left = (first > 0 && street.component(first - 1) == comp).then(|| first - 1);
        let right = (last + 1 < n && street.component(last + 1) == comp).then_some(last + 1);
        out.push(Block {
            first,
            last,
            left,
            right,
        });
        v += 1;
    }
    out
}

/// The block containing `v`, if `v` cannot be parked at.
pub fn block_of(blocks: &[Block], v: Vertex) -> Option<&Block> {
    blocks.iter().find(|b| b.contains(v))
}

/// Cars with goals on a street.
#[derive(Clone, Debug, PartialEq)]
pub struct ParkingInstance {
    pub street: Street,
    /// Goal vertex of each car, in arrival order.
    pub goals: Vec<Vertex>,
}

impl ParkingInstance {
    pub fn new(street: Street, goals: Vec<Vertex>) -> Result<Self> {
        for &g in &goals {
            street.check_vertex(g)?;
        }
        let slots = street.slots().count();
        if goals.len() > slots {
            return Err(Error::input(format!("{} cars but only {slots} slots", goals.len())));
        }
        Ok(Self { street, goals })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Street {
        Street::all_slots((0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn block_examples() {
        let s = unit(7);
        let occ = Occupancy::from_occupied(&s, &[2, 3]).unwrap();
        let b = blocks(&s, &occ);
        assert_eq!(
            b,
            vec![Block {
                first: 2,
                last: 3,
                left: Some(1),
                right: Some(4)
            }]
        );
        assert_eq!(b[0].gap(&s), Some(3.0));
        assert!(blocks(&s, &Occupancy::empty(&s)).is_empty());
        let occ = Occupancy::from_occupied(&s, &[1, 4]).unwrap();
        let b = blocks(&s, &occ);
        assert_eq!(b.len(), 2);
        assert_eq!(
            (b[0].left, b[0].right, b[1].left, b[1].right),
            (Some(0), Some(2), Some(3), Some(5))
        );
    }

    #[test]
    fn end_blocks_are_one_sided() {
        let s = unit(4);
        let occ = Occupancy::from_occupied(&s, &[0, 3]).unwrap();
        let b = blocks(&s, &occ);
        assert_eq!((b[0].left, b[0].right), (None, Some(1)));
        assert_eq!((b[1].left, b[1].right), (Some(2), None));
    }

    #[test]
    fn goal_vertices_form_blocks() {
        let s = Street::new(vec![0.0, 1.5, 3.0], vec![true, false, true]).unwrap();
        let b = blocks(&s, &Occupancy::empty(&s));
        assert_eq!((b[0].first, b[0].left, b[0].right), (1, Some(0), Some(2)));
    }

    #[test]
    fn cuts_split_components() {
        let s = Street::with_cuts(vec![0.0, 1.0, 5.0], vec![true; 3], vec![false, true]).unwrap();
        assert_eq!(s.d(0, 1), 1.0);
        assert_eq!(s.d(1, 2), f64::INFINITY);
        let occ = Occupancy::from_occupied(&s, &[1]).unwrap();
        let b = blocks(&s, &occ);
        assert_eq!((b[0].left, b[0].right), (Some(0), None));
        assert_eq!(s.aspect_ratio(), 1.0);
    }

    #[test]
    fn rejects_bad_streets() {
        assert!(Street::all_slots(vec![0.0, 0.0]).is_err());
        assert!(Street::all_slots(vec![]).is_err());
        assert!(Street::new(vec![0.0, 1.0], vec![true]).is_err());
    }
}
