use super::harmonic::{epsilon_strict, prices_from_draws, SlotPrices};
use super::{blocks, Occupancy, Street};
use crate::error::{Error, Result};

/// The prefix-sum prices for given block draws, shifted to be non-negative.
pub fn observation_prices(street: &Street, occ: &Occupancy, draws: &[Option<f64>]) -> Result<SlotPrices> {
    let bl = blocks(street, occ);
    if bl.len() != draws.len() {
        return Err(Error::input(format!("{} blocks but {} draws", bl.len(), draws.len())));
    }
    Ok(prices_from_draws(street, occ, bl, draws.to_vec()))
}

/// Least non-negative solution of the difference constraints, by longest
/// paths from an implicit source at 0. `None` on a positive cycle.
fn least_solution(n: usize, edges: &[(usize, usize, f64)]) -> Option<Vec<f64>> {
    // edge (b, a, w) means p_a >= p_b + w
    let mut p = vec![0.0; n];
    for _ in 0..=n {
        let mut changed = false;
        for &(b, a, w) in edges {
            let cand = p[b] + w;
            if cand > p[a] + 1e-12 * (1.0 + cand.abs()) {
                p[a] = cand;
                changed = true;
            }
        }
        if !changed {
            return Some(p);
        }
    }
    None
}

/// Prices satisfying both payment conditions for the given draws with the
/// smallest possible sum.
///
/// The constraints are all of the form p_a - p_b ≤ c plus p ≥ 0, whose
/// feasible set is closed under component-wise minimum; its least element
/// therefore minimizes every coordinate, and hence the sum.
pub fn min_sum_prices(street: &Street, occ: &Occupancy, draws: &[Option<f64>]) -> Result<SlotPrices> {
    let bl = blocks(street, occ);
    if bl.len() != draws.len() {
        return Err(Error::input(format!("{} blocks but {} draws", bl.len(), draws.len())));
    }
    let vacant = occ.vacant(street);
    let mut index = vec![usize::MAX; street.len()];
    for (i, &v) in vacant.iter().enumerate() {
        index[v] = i;
    }
    let mut eps = epsilon_strict(street);
    for _ in 0..2 {
        let mut edges = Vec::new();
        for (b, q) in bl.iter().zip(draws) {
            if let (Some(l), Some(r), Some(q)) = (b.left, b.right, q) {
                let (l, r) = (index[l], index[r]);
                edges.push((r, l, *q));
                edges.push((l, r, -q));
            }
        }
        for w in vacant.windows(2) {
            if street.component(w[0]) != street.component(w[1]) {
                continue;
            }
            let (u, v) = (index[w[0]], index[w[1]]);
            let slack = street.d(w[0], w[1]) - eps;
            edges.push((u, v, -slack));
            edges.push((v, u, -slack));
        }
        if let Some(p) = least_solution(vacant.len(), &edges) {
            let mut prices = vec![None; street.len()];
            for (i, &v) in vacant.iter().enumerate() {
                prices[v] = Some(p[i]);
            }
            return Ok(SlotPrices {
                prices,
                blocks: bl,
                draws: draws.to_vec(),
            });
        }
        eps *= 1e-3;
    }
    Err(Error::Invariant(
        "price program infeasible even with a reduced margin".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parking::{check_payment_conditions, harmonic_prices};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_block_minimum() {
        let s = Street::all_slots(vec![0.0, 1.0, 2.0]).unwrap();
        let occ = Occupancy::from_occupied(&s, &[1]).unwrap();
        let p = min_sum_prices(&s, &occ, &[Some(1.0)]).unwrap();
        assert_eq!(p.prices, vec![Some(1.0), None, Some(0.0)]);
        let z = min_sum_prices(&s, &occ, &[Some(0.0)]).unwrap();
        assert_eq!(z.prices, vec![Some(0.0), None, Some(0.0)]);
    }

    #[test]
    fn never_above_prefix_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let m = rng.gen_range(3..12);
            let coords: Vec<f64> = (0..m)
                .scan(0.0, |x, _| {
                    *x += rng.gen_range(1..6) as f64;
                    Some(*x)
                })
                .collect();
            let s = Street::all_slots(coords).unwrap();
            let taken: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
            let occ = Occupancy::from_occupied(&s, &taken).unwrap();
            let h = harmonic_prices(&s, &occ, &mut rng);
            let lp = min_sum_prices(&s, &occ, &h.draws).unwrap();
            check_payment_conditions(&s, &occ, &lp, epsilon_strict(&s) * 0.999).unwrap();
            for v in 0..m {
                if let (Some(a), Some(b)) = (lp.prices[v], h.prices[v]) {
                    assert!(a <= b + 1e-9);
                }
            }
        }
    }
}
