use super::lazy::VirtualPair;
use super::{representative, ServerConfig, ServerSpace};
use crate::error::{Error, Result};
use std::collections::VecDeque;

/// The boundary between the regions of two adjacent servers.
#[derive(Clone, Debug, PartialEq)]
pub struct Threshold<P> {
    pub a: usize,
    pub b: usize,
    /// v(a, b), on the path between the two servers.
    pub point: P,
    /// d(a, v); the path length is `gap`.
    pub offset: f64,
    pub gap: f64,
}

/// Which servers own a region and where neighbouring regions meet.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionMap<P> {
    /// Servers with a non-empty region (one per occupied location).
    pub owners: Vec<usize>,
    pub thresholds: Vec<Threshold<P>>,
}

/// Largest distance from `from` along the path towards `to` at which the
/// lazy algorithm still serves with `owner`; `None` means the whole path.
fn reach<S: ServerSpace>(
    space: &S,
    pair: &VirtualPair<S::Point>,
    owner: usize,
    from: &S::Point,
    to: &S::Point,
    gap: f64,
) -> Result<f64> {
    let serves = |t: f64| -> Result<bool> {
        let r = space.move_toward(from, to, t);
        Ok(pair.query(space, &r)? == owner)
    };
    if !serves(0.0)? {
        return Err(Error::Invariant(format!(
            "server {owner} does not serve a request at its own position"
        )));
    }
    if serves(gap)? {
        return Ok(gap);
    }
    let (mut lo, mut hi) = (0.0, gap);
    while hi - lo > 1e-9 * gap {
        let mid = 0.5 * (lo + hi);
        if serves(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Line-only closed form: between sorted real servers s_i < s_{i+1} the
/// boundary is the midpoint of the matching virtual servers, clamped.
fn line_threshold<S: ServerSpace>(space: &S, pair: &VirtualPair<S::Point>, a: usize, b: usize) -> Option<f64> {
    let coord = |p: &S::Point| space.line_coord(p);
    let mut virt: Vec<f64> = pair.virt.positions.iter().map(coord).collect::<Option<_>>()?;
    let mut real: Vec<(f64, usize)> = pair
        .real
        .positions
        .iter()
        .enumerate()
        .map(|(i, p)| coord(p).map(|c| (c, i)))
        .collect::<Option<_>>()?;
    virt.sort_by(f64::total_cmp);
    real.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let i = real.iter().position(|x| x.1 == a)?;
    if real.get(i + 1).map(|x| x.1) != Some(b) {
        return None;
    }
    let mid = 0.5 * (virt[i] + virt[i + 1]);
    Some(mid.clamp(real[i].0, real[i + 1].0) - real[i].0)
}

/// Region map of the lazy algorithm in its current state, found by bisecting
/// the path between every pair of servers with hypothetical requests.
///
/// Two regions are adjacent when the stretch served by `a` from one end and
/// the stretch served by `b` from the other end meet.
pub fn regions<S: ServerSpace>(space: &S, pair: &VirtualPair<S::Point>) -> Result<RegionMap<S::Point>> {
    let pos = &pair.real.positions;
    let owners: Vec<usize> = (0..pos.len()).filter(|&s| representative(space, pos, s) == s).collect();
    let mut thresholds = Vec::new();
    for (i, &a) in owners.iter().enumerate() {
        for &b in &owners[i + 1..] {
            let gap = space.dist(&pos[a], &pos[b]);
            let from_a = reach(space, pair, a, &pos[a], &pos[b], gap)?;
            let from_b = reach(space, pair, b, &pos[b], &pos[a], gap)?;
            if from_a + from_b < gap * (1.0 - 1e-6) {
                continue;
            }
            // the stretches may also meet at a point owned by a third server
            let middle = space.move_toward(&pos[a], &pos[b], 0.5 * (from_a + gap - from_b));
            if ![a, b].contains(&pair.query(space, &middle)?) {
                continue;
            }
            let mut offset = from_a;
            if let Some(exact) = line_threshold(space, pair, a, b) {
                if (exact - offset).abs() <= 1e-6 * gap {
                    offset = exact;
                }
            }
            thresholds.push(Threshold {
                a,
                b,
                point: space.move_toward(&pos[a], &pos[b], offset),
                offset,
                gap,
            });
        }
    }
    if thresholds.len() + 1 < owners.len() {
        return Err(Error::Invariant(format!(
            "{} regions but {} boundaries; the lazy algorithm is not monotone here",
            owners.len(),
            thresholds.len()
        )));
    }
    Ok(RegionMap { owners, thresholds })
}

/// Prices making every threshold a point of indifference: the first owner
/// gets 0, neighbours are fixed breadth-first, then everything is shifted so
/// the minimum is 0. Co-located duplicates are priced above their twin so
/// they are never chosen.
pub fn server_prices<S: ServerSpace>(
    space: &S,
    map: &RegionMap<S::Point>,
    config: &ServerConfig<S::Point>,
) -> Result<Vec<f64>> {
    let k = config.k();
    let pos = &config.positions;
    let mut price: Vec<Option<f64>> = vec![None; k];
    let Some(&first) = map.owners.first() else {
        return Err(Error::input("region map has no owners"));
    };
    price[first] = Some(0.0);
    let mut queue = VecDeque::from([first]);
    while let Some(s) = queue.pop_front() {
        let ps = price[s].expect("queued servers are priced");
        for th in &map.thresholds {
            let other = match (th.a == s, th.b == s) {
                (true, _) => th.b,
                (_, true) => th.a,
                _ => continue,
            };
            let p = ps + space.dist(&pos[s], &th.point) - space.dist(&pos[other], &th.point);
            match price[other] {
                None => {
                    price[other] = Some(p);
                    queue.push_back(other);
                }
                Some(q) if (q - p).abs() > 1e-9 * (1.0 + p.abs()) => {
                    return Err(Error::Invariant(format!(
                        "inconsistent boundary equations at servers {s} and {other}"
                    )));
                }
                Some(_) => {}
            }
        }
    }
    let mut out = vec![0.0; k];
    for s in 0..k {
        let twin = representative(space, pos, s);
        out[s] = match (price[s], price[twin]) {
            (Some(p), _) => p,
            (None, Some(p)) if twin != s => p + 1.0,
            _ => {
                return Err(Error::Invariant(format!(
                    "server {s} is not reachable in the region tree"
                )))
            }
        };
    }
    let low = out.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(out.into_iter().map(|p| p - low).collect())
}

/// Moves every threshold by `eps` (at most a quarter of its gap) away from
/// the server that owns the threshold point itself, so that point lies
/// strictly inside its owner's region and no request is ever indifferent
/// between its owner and a neighbour.
pub fn perturb_thresholds<S: ServerSpace>(
    space: &S,
    map: &RegionMap<S::Point>,
    pair: &VirtualPair<S::Point>,
    eps: f64,
) -> Result<RegionMap<S::Point>> {
    if !(eps > 0.0) {
        return Err(Error::input("perturbation must be positive"));
    }
    let pos = &pair.real.positions;
    let mut out = map.clone();
    for th in &mut out.thresholds {
        let shift = eps.min(th.gap / 4.0);
        let owner = pair.query(space, &th.point)?;
        let offset = if owner == representative(space, pos, th.a) {
            th.offset + shift
        } else if owner == representative(space, pos, th.b) {
            th.offset - shift
        } else {
            // a third region meets here (a tree junction); nothing to separate
            continue;
        };
        th.offset = offset.clamp(shift, th.gap - shift);
        th.point = space.move_toward(&pos[th.a], &pos[th.b], th.offset);
    }
    Ok(out)
}

/// Half the distance each of two servers has travelled.
pub fn balance2_prices<P>(config: &ServerConfig<P>) -> Result<Vec<f64>> {
    if config.travel.len() != 2 {
        return Err(Error::input(format!(
            "balance pricing needs exactly 2 servers, got {}",
            config.travel.len()
        )));
    }
    Ok(config.travel.iter().map(|t| t / 2.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{RealLine, TreeMetric, TreePoint};

    fn pair(virt: Vec<f64>, real: Vec<f64>) -> VirtualPair<f64> {
        VirtualPair {
            virt: ServerConfig::line(virt).unwrap(),
            real: ServerConfig::line(real).unwrap(),
        }
    }

    #[test]
    fn threshold_between_virtual_servers() {
        let p = pair(vec![6.0, 8.0], vec![0.0, 10.0]);
        let map = regions(&RealLine, &p).unwrap();
        assert_eq!(map.thresholds.len(), 1);
        assert_eq!(map.thresholds[0].point, 7.0);
        let prices = server_prices(&RealLine, &map, &p.real).unwrap();
        // P(left) - P(right) = d(10,7) - d(0,7) = -4
        assert_eq!(prices, vec![0.0, 4.0]);
    }

    #[test]
    fn symmetric_threshold_and_equal_prices() {
        let p = pair(vec![0.0, 10.0], vec![0.0, 10.0]);
        let map = regions(&RealLine, &p).unwrap();
        assert_eq!(map.thresholds[0].point, 5.0);
        assert_eq!(server_prices(&RealLine, &map, &p.real).unwrap(), vec![0.0, 0.0]);

        let p = pair(vec![0.0, 4.0, 8.0], vec![0.0, 4.0, 8.0]);
        let map = regions(&RealLine, &p).unwrap();
        let pts: Vec<f64> = map.thresholds.iter().map(|t| t.point).collect();
        assert_eq!(pts, vec![2.0, 6.0]);
        assert_eq!(server_prices(&RealLine, &map, &p.real).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn single_server_has_no_thresholds() {
        let p = pair(vec![3.0], vec![1.0]);
        let map = regions(&RealLine, &p).unwrap();
        assert_eq!((map.owners.clone(), map.thresholds.len()), (vec![0], 0));
        assert_eq!(server_prices(&RealLine, &map, &p.real).unwrap(), vec![0.0]);
    }

    #[test]
    fn thresholds_move_off_their_owner() {
        // both virtual servers right of the real right server: left owns
        // everything up to 10
        let p = pair(vec![12.0, 14.0], vec![0.0, 10.0]);
        let map = regions(&RealLine, &p).unwrap();
        assert_eq!(map.thresholds[0].point, 10.0);
        // the server standing on 10 serves a request there, so the
        // threshold moves left
        let moved = perturb_thresholds(&RealLine, &map, &p, 1e-3).unwrap();
        assert!((moved.thresholds[0].point - (10.0 - 1e-3)).abs() < 1e-12);
        // DC sends its left server to 7, matched to the real server at 0
        let inner = pair(vec![6.0, 8.0], vec![0.0, 10.0]);
        let map = regions(&RealLine, &inner).unwrap();
        let moved = perturb_thresholds(&RealLine, &map, &inner, 1e-3).unwrap();
        assert!((moved.thresholds[0].point - (7.0 + 1e-3)).abs() < 1e-12);
        assert_eq!(inner.query(&RealLine, &7.0).unwrap(), 0);
    }

    #[test]
    fn duplicates_priced_out() {
        let p = pair(vec![0.0, 0.0, 9.0], vec![0.0, 0.0, 9.0]);
        let map = regions(&RealLine, &p).unwrap();
        assert_eq!(map.owners, vec![0, 2]);
        let prices = server_prices(&RealLine, &map, &p.real).unwrap();
        assert!(prices[1] > prices[0]);
    }

    #[test]
    fn star_tree_regions() {
        let t = TreeMetric::new(4, &[(0, 1, 4.0), (0, 2, 4.0), (0, 3, 4.0)]).unwrap();
        let init = ServerConfig::new(vec![TreePoint::at(1), TreePoint::at(2), TreePoint::at(3)]).unwrap();
        let p = VirtualPair::new(init);
        let map = regions(&t, &p).unwrap();
        assert_eq!(map.thresholds.len(), 2);
        let prices = server_prices(&t, &map, &p.real).unwrap();
        assert!(prices.iter().all(|&x| x.abs() < 1e-6));
    }

    #[test]
    fn balance_prices() {
        let mut c = ServerConfig::line(vec![0.0, 5.0]).unwrap();
        assert_eq!(balance2_prices(&c).unwrap(), vec![0.0, 0.0]);
        c.move_server(&RealLine, 0, 4.0);
        assert_eq!(balance2_prices(&c).unwrap(), vec![2.0, 0.0]);
        c.travel = vec![6.0, 2.0];
        assert_eq!(balance2_prices(&c).unwrap(), vec![3.0, 1.0]);
        assert!(balance2_prices(&ServerConfig::line(vec![1.0]).unwrap()).is_err());
    }
}
