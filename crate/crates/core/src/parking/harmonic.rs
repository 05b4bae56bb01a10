use super::{block_of, blocks, Block, Occupancy, Street};
use crate::error::{Error, Result};
use crate::metric::Vertex;
use rand::Rng;

/// Margin that turns the strict inequalities of the payment conditions into
/// closed ones: 1e-9 of the smallest edge.
pub fn epsilon_strict(street: &Street) -> f64 {
    let min_edge = (0..street.len().saturating_sub(1))
        .filter(|&e| !street.is_cut(e))
        .map(|e| street.weight(e))
        .fold(f64::INFINITY, f64::min);
    1e-9 * if min_edge.is_finite() { min_edge } else { 1.0 }
}

/// Posted prices for vacant slots and the per-block draws behind them.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotPrices {
    /// Price per vertex; `None` where nobody can park.
    pub prices: Vec<Option<f64>>,
    pub blocks: Vec<Block>,
    /// P(L(B_j)) - P(R(B_j)) as drawn, for two-sided blocks.
    pub draws: Vec<Option<f64>>,
}

impl SlotPrices {
    pub fn get(&self, v: Vertex) -> Option<f64> {
        self.prices[v]
    }
}

/// Builds prices from per-block differences: each draw is added to every
/// vacant slot left of its block, then everything is shifted so the cheapest
/// vacant slot costs 0.
pub(crate) fn prices_from_draws(
    street: &Street,
    occ: &Occupancy,
    blocks: Vec<Block>,
    draws: Vec<Option<f64>>,
) -> SlotPrices {
    let mut prices: Vec<Option<f64>> = vec![None; street.len()];
    for v in occ.vacant(street) {
        let p = blocks
            .iter()
            .zip(&draws)
            .filter(|(b, _)| v < b.first)
            .filter_map(|(_, q)| *q)
            .sum();
        prices[v] = Some(p);
    }
    let low = prices.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    if low.is_finite() {
        for p in prices.iter_mut().flatten() {
            *p -= low;
        }
    }
    SlotPrices { prices, blocks, draws }
}

/// Fresh harmonic prices: for every two-sided block a draw q_j uniform on
/// [-d_j, d_j] (redrawn if within the strictness margin of an end) sets
/// P(L) - P(R) = q_j.
pub fn harmonic_prices<R: Rng + ?Sized>(street: &Street, occ: &Occupancy, rng: &mut R) -> SlotPrices {
    let eps = epsilon_strict(street);
    let bl = blocks(street, occ);
    let draws = bl
        .iter()
        .map(|b| {
            let d = b.gap(street)?;
            loop {
                let q: f64 = rng.gen_range(-d..=d);
                if q.abs() <= d - eps {
                    return Some(q);
                }
            }
        })
        .collect();
    prices_from_draws(street, occ, bl, draws)
}

/// Verifies both payment conditions: every block's boundary difference
/// equals its draw, and neighbouring vacant slots differ by at most their
/// distance minus `eps`.
pub fn check_payment_conditions(
    street: &Street,
    occ: &Occupancy,
    prices: &SlotPrices,
    eps: f64,
) -> std::result::Result<(), String> {
    for (b, q) in prices.blocks.iter().zip(&prices.draws) {
        if let (Some(l), Some(r), Some(q)) = (b.left, b.right, q) {
            let (pl, pr) = (
                prices.prices[l].ok_or("L not priced")?,
                prices.prices[r].ok_or("R not priced")?,
            );
            if (pl - pr - q).abs() > 1e-9 * (1.0 + q.abs()) {
                return Err(format!(
                    "block {}..{}: P(L) - P(R) = {} but draw is {q}",
                    b.first,
                    b.last,
                    pl - pr
                ));
            }
        }
    }
    let vacant = occ.vacant(street);
    for w in vacant.windows(2) {
        let (u, v) = (w[0], w[1]);
        if street.component(u) != street.component(v) {
            continue;
        }
        let diff = (prices.prices[u].unwrap_or(0.0) - prices.prices[v].unwrap_or(0.0)).abs();
        let d = street.d(u, v);
        if diff > d - eps + 1e-12 * d {
            return Err(format!("slots {u} and {v}: price difference {diff} vs distance {d}"));
        }
    }
    if let Some(v) = (0..street.len()).find(|&v| prices.prices[v].map_or(false, |p| p < 0.0)) {
        return Err(format!("negative price at slot {v}"));
    }
    Ok(())
}

/// Probability that the harmonic algorithm sends a car with goal `goal` in
/// `block` to the left boundary: d(goal, R) / d(L, R).
pub fn harmonic_left_probability(street: &Street, block: &Block, goal: Vertex) -> f64 {
    match (block.left, block.right) {
        (Some(l), Some(r)) => {
            let (dl, dr) = (street.d(goal, l), street.d(goal, r));
            dr / (dl + dr)
        }
        (Some(_), None) => 1.0,
        _ => 0.0,
    }
}

/// One step of the harmonic algorithm.
pub fn harmonic_step<R: Rng + ?Sized>(street: &Street, occ: &Occupancy, goal: Vertex, rng: &mut R) -> Result<Vertex> {
    street.check_vertex(goal)?;
    if occ.is_vacant(street, goal) {
        return Ok(goal);
    }
    let bl = blocks(street, occ);
    let block = block_of(&bl, goal).expect("a non-vacant vertex lies in a block");
    match (block.left, block.right) {
        (None, None) => Err(Error::Capacity),
        (Some(l), None) => Ok(l),
        (None, Some(r)) => Ok(r),
        (Some(l), Some(r)) => {
            let p = harmonic_left_probability(street, block, goal);
            Ok(if rng.gen_bool(p.clamp(0.0, 1.0)) { l } else { r })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parking::Street;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize) -> Street {
        Street::all_slots((0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn left_probability_examples() {
        // goal 2 from L=0, 4 from R=6
        let s = unit(7);
        let occ = Occupancy::from_occupied(&s, &[1, 2, 3, 4, 5]).unwrap();
        let bl = blocks(&s, &occ);
        assert!((harmonic_left_probability(&s, &bl[0], 2) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn vacant_goal_and_one_sided() {
        let s = unit(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let occ = Occupancy::from_occupied(&s, &[2, 3]).unwrap();
        assert_eq!(harmonic_step(&s, &occ, 0, &mut rng).unwrap(), 0);
        assert_eq!(harmonic_step(&s, &occ, 3, &mut rng).unwrap(), 1);
        let full = Occupancy::from_occupied(&s, &[0, 1, 2, 3]).unwrap();
        assert!(matches!(harmonic_step(&s, &full, 1, &mut rng), Err(Error::Capacity)));
    }

    #[test]
    fn prices_reproduce_draws() {
        let s = unit(9);
        let occ = Occupancy::from_occupied(&s, &[2, 3, 6]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = harmonic_prices(&s, &occ, &mut rng);
            check_payment_conditions(&s, &occ, &p, epsilon_strict(&s)).unwrap();
        }
        let none = harmonic_prices(&s, &Occupancy::empty(&s), &mut rng);
        assert!(none.prices.iter().all(|p| *p == Some(0.0)));
    }
}
