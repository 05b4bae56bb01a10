use super::{representative, ServerConfig, ServerSpace};
use crate::error::{Error, Result};
use crate::TOLERANCE;

/// Outcome of one Double Coverage step.
#[derive(Clone, Debug, PartialEq)]
pub struct DcStep {
    /// The server now at the request.
    pub server: usize,
    pub cost: f64,
    /// Distance moved by each server.
    pub moved: Vec<f64>,
}

/// Servers adjacent to `r`: one per distinct location (the lowest id), with
/// no other server location on the path to `r`.
fn adjacent<S: ServerSpace>(space: &S, pos: &[S::Point], r: &S::Point) -> Vec<usize> {
    (0..pos.len())
        .filter(|&a| representative(space, pos, a) == a)
        .filter(|&a| (0..pos.len()).all(|b| space.same(&pos[b], &pos[a]) || !space.on_path(&pos[a], r, &pos[b])))
        .collect()
}

/// Double Coverage: every server adjacent to `r` moves towards it at the same
/// speed. Whenever a server's path gets blocked by another server it stops;
/// the first to arrive serves (lowest id when several arrive together, which
/// on a sorted line is the left one).
pub fn dc_step<S: ServerSpace>(space: &S, config: &mut ServerConfig<S::Point>, r: &S::Point) -> Result<DcStep> {
    let k = config.k();
    let mut moved = vec![0.0; k];
    for _ in 0..4 * k + 8 {
        let pos = &config.positions;
        if let Some(server) = (0..k).find(|&s| space.same(&pos[s], r)) {
            return Ok(DcStep {
                server,
                cost: moved.iter().sum(),
                moved,
            });
        }
        let adj = adjacent(space, pos, r);
        let mut t = adj
            .iter()
            .map(|&a| space.dist(&pos[a], r))
            .fold(f64::INFINITY, f64::min);
        // two servers whose paths to r merge: the first to reach the merge
        // point blocks the other
        for (i, &a) in adj.iter().enumerate() {
            for &b in &adj[i + 1..] {
                let (da, db, dab) = (
                    space.dist(&pos[a], r),
                    space.dist(&pos[b], r),
                    space.dist(&pos[a], &pos[b]),
                );
                let ga = (da + dab - db) / 2.0;
                let gb = (db + dab - da) / 2.0;
                let g = ga.min(gb);
                if g > TOLERANCE && g < t {
                    t = g;
                }
            }
        }
        for &a in &adj {
            let to = space.move_toward(&config.positions[a], r, t);
            moved[a] += config.move_server(space, a, to);
        }
    }
    Err(Error::Invariant("double coverage did not reach the request".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{RealLine, TreeMetric, TreePoint};

    #[test]
    fn line_examples() {
        let mut c = ServerConfig::line(vec![0.0, 10.0]).unwrap();
        let s = dc_step(&RealLine, &mut c, &4.0).unwrap();
        assert_eq!((c.positions.clone(), s.server, s.cost), (vec![4.0, 6.0], 0, 8.0));

        let mut c = ServerConfig::line(vec![5.0]).unwrap();
        let s = dc_step(&RealLine, &mut c, &2.0).unwrap();
        assert_eq!((c.positions.clone(), s.cost), (vec![2.0], 3.0));

        let mut c = ServerConfig::line(vec![0.0, 10.0]).unwrap();
        let s = dc_step(&RealLine, &mut c, &5.0).unwrap();
        assert_eq!((c.positions.clone(), s.server, s.cost), (vec![5.0, 5.0], 0, 10.0));
    }

    #[test]
    fn outer_request_moves_one_server() {
        let mut c = ServerConfig::line(vec![0.0, 4.0, 9.0]).unwrap();
        let s = dc_step(&RealLine, &mut c, &12.0).unwrap();
        assert_eq!((s.server, s.cost), (2, 3.0));
        assert_eq!(c.positions, vec![0.0, 4.0, 12.0]);
    }

    #[test]
    fn request_at_server_is_free() {
        let mut c = ServerConfig::line(vec![1.0, 7.0]).unwrap();
        let s = dc_step(&RealLine, &mut c, &7.0).unwrap();
        assert_eq!((s.server, s.cost), (1, 0.0));
    }

    #[test]
    fn tree_star_blocking() {
        // star: center 0, leaves 1 (w 4), 2 (w 6), 3 (w 1); request at leaf 3.
        let t = TreeMetric::new(4, &[(0, 1, 4.0), (0, 2, 6.0), (0, 3, 1.0)]).unwrap();
        let mut c = ServerConfig::new(vec![TreePoint::at(1), TreePoint::at(2)]).unwrap();
        let s = dc_step(&t, &mut c, &TreePoint::at(3)).unwrap();
        // both move 4: server 0 reaches the center and blocks server 1, then
        // walks the last unit alone
        assert_eq!(s.server, 0);
        assert!((s.cost - 9.0).abs() < 1e-9);
        assert!((t.point_distance(&c.positions[1], &TreePoint::at(2)) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn path_tree_matches_line() {
        let t = TreeMetric::new(3, &[(0, 1, 3.0), (1, 2, 5.0)]).unwrap();
        let mut c = ServerConfig::new(vec![TreePoint::at(0), TreePoint::at(2)]).unwrap();
        let s = dc_step(&t, &mut c, &TreePoint::at(1)).unwrap();
        let mut l = ServerConfig::line(vec![0.0, 8.0]).unwrap();
        let sl = dc_step(&RealLine, &mut l, &3.0).unwrap();
        assert_eq!(s.server, sl.server);
        assert!((s.cost - sl.cost).abs() < 1e-9);
    }
}
