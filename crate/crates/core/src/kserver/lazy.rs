use super::dc::dc_step;
use super::{representative, ServerConfig, ServerSpace};
use crate::error::Result;
use crate::metric::{min_cost_matching_oracle, r_local_matching};

/// The configuration of the underlying algorithm (DC) next to that of its
/// lazy version.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualPair<P> {
    pub virt: ServerConfig<P>,
    pub real: ServerConfig<P>,
}

/// Outcome of one lazy step.
#[derive(Clone, Debug, PartialEq)]
pub struct LazyStep {
    /// Real server moved onto the request.
    pub server: usize,
    /// Distance it moved.
    pub cost: f64,
    /// What DC paid for the same request.
    pub virtual_cost: f64,
    /// Minimum matching cost between the configurations before and after.
    pub phi_before: f64,
    pub phi_after: f64,
}

impl<P: Clone> VirtualPair<P> {
    /// Both configurations start at `initial`.
    pub fn new(initial: ServerConfig<P>) -> Self {
        Self {
            virt: initial.clone(),
            real: initial,
        }
    }

    /// The real server the lazy algorithm would send to `r`, without
    /// changing anything.
    pub fn query<S: ServerSpace<Point = P>>(&self, space: &S, r: &P) -> Result<usize> {
        self.clone().advance(space, r).map(|(server, _)| server)
    }

    /// Runs DC on the virtual configuration and picks the real server matched
    /// to `r` in an r-local minimum matching. The real configuration is left
    /// untouched.
    fn advance<S: ServerSpace<Point = P>>(&mut self, space: &S, r: &P) -> Result<(usize, f64)> {
        let dc = dc_step(space, &mut self.virt, r)?;
        let m = r_local_matching(&self.virt.positions, &self.real.positions, dc.server, space)?;
        // co-located real servers are interchangeable; always use the lowest id
        let server = representative(space, &self.real.positions, m.x_to_y[dc.server]);
        Ok((server, dc.cost))
    }

    /// Serves `r`: DC moves virtually, one real server moves to `r`.
    pub fn lazy_step<S: ServerSpace<Point = P>>(&mut self, space: &S, r: &P) -> Result<LazyStep> {
        let phi_before = self.phi(space)?;
        let (server, virtual_cost) = self.advance(space, r)?;
        let cost = self.real.move_server(space, server, r.clone());
        Ok(LazyStep {
            server,
            cost,
            virtual_cost,
            phi_before,
            phi_after: self.phi(space)?,
        })
    }

    /// Minimum matching cost between the virtual and real configurations.
    pub fn phi<S: ServerSpace<Point = P>>(&self, space: &S) -> Result<f64> {
        Ok(min_cost_matching_oracle(&self.virt.positions, &self.real.positions, space)?.cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::RealLine;
    use proptest::prelude::*;

    fn pair(virt: Vec<f64>, real: Vec<f64>) -> VirtualPair<f64> {
        VirtualPair {
            virt: ServerConfig::line(virt).unwrap(),
            real: ServerConfig::line(real).unwrap(),
        }
    }

    #[test]
    fn hand_example() {
        let mut p = pair(vec![2.0, 8.0], vec![0.0, 10.0]);
        let s = p.lazy_step(&RealLine, &4.0).unwrap();
        assert_eq!(p.virt.positions, vec![4.0, 6.0]);
        assert_eq!((s.server, s.cost), (0, 4.0));
        assert_eq!(p.real.positions, vec![4.0, 10.0]);
    }

    #[test]
    fn request_on_server_costs_nothing() {
        let mut p = pair(vec![3.0, 9.0], vec![3.0, 9.0]);
        let s = p.lazy_step(&RealLine, &9.0).unwrap();
        assert_eq!((s.server, s.cost), (1, 0.0));
    }

    #[test]
    fn query_does_not_mutate() {
        let p = pair(vec![6.0, 8.0], vec![0.0, 10.0]);
        let before = p.clone();
        assert_eq!(p.query(&RealLine, &6.5).unwrap(), 0);
        assert_eq!(p.query(&RealLine, &7.5).unwrap(), 1);
        assert_eq!(p, before);
    }

    proptest! {
        #[test]
        fn potential_inequality_on_line(
            init in proptest::collection::btree_set(0u32..40, 1..=4),
            reqs in proptest::collection::vec(0u32..40, 1..=12),
        ) {
            let init: Vec<f64> = init.into_iter().map(f64::from).collect();
            let mut p = VirtualPair::new(ServerConfig::line(init).unwrap());
            let (mut lazy, mut dc) = (0.0, 0.0);
            for r in reqs {
                let s = p.lazy_step(&RealLine, &f64::from(r)).unwrap();
                prop_assert!(s.cost + s.phi_after - s.phi_before <= s.virtual_cost + 1e-9);
                lazy += s.cost;
                dc += s.virtual_cost;
            }
            prop_assert!(lazy <= dc + 1e-9);
        }
    }
}
