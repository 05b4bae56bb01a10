use super::harmonic::{harmonic_left_probability, prices_from_draws, SlotPrices};
use super::{blocks, Block, Occupancy, Street};
use crate::error::{Error, Result};
use rand::Rng;

/// Distribution of P(R) - P(L) for one block that reproduces given
/// left-probabilities: a car whose goal has Δ = d(goal, L) - d(goal, R) takes
/// L exactly when the draw exceeds Δ.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCdf {
    /// d(L, R)
    pub gap: f64,
    /// Per group of equal left-probability: smallest and largest Δ, and the
    /// probability. Groups are ordered left to right.
    groups: Vec<(f64, f64, f64)>,
}

impl MonotoneCdf {
    /// Breakpoints Δ_1 ≤ … ≤ Δ_t (the rightmost vertex of each group).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.1).collect()
    }

    /// Left-probabilities p_1 > … > p_t.
    pub fn probabilities(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.2).collect()
    }

    /// F(x): 0 up to -gap, 1 - p_i on (Δ_{i-1}, Δ_i], 1 beyond Δ_t.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -self.gap {
            return 0.0;
        }
        match self.groups.iter().find(|g| x <= g.1) {
            Some(g) => 1.0 - g.2,
            None => 1.0,
        }
    }

    /// Point masses realizing the CDF at every block vertex, placed strictly
    /// between consecutive groups so no car is ever indifferent.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let g = &self.groups;
        let mut out = Vec::with_capacity(g.len() + 1);
        out.push((0.5 * (-self.gap + g[0].0), 1.0 - g[0].2));
        for w in g.windows(2) {
            out.push((0.5 * (w[0].1 + w[1].0), w[0].2 - w[1].2));
        }
        let last = g[g.len() - 1];
        out.push((0.5 * (last.1 + self.gap), last.2));
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let atoms = self.atoms();
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(x, mass) in &atoms {
            acc += mass;
            if u < acc {
                return x;
            }
        }
        // rounding: fall back to the last atom with positive mass
        atoms.iter().rev().find(|a| a.1 > 0.0).map_or(atoms[0].0, |a| a.0)
    }
}

/// Builds the CDF from `(Δ, p_left)` for the vertices of a block with
/// d(L, R) = `gap`. Left-probabilities must not increase from left to right.
pub fn monotone_cdf(entries: &[(f64, f64)], gap: f64) -> Result<MonotoneCdf> {
    if entries.is_empty() {
        return Err(Error::input("a block has at least one vertex"));
    }
    if !(gap > 0.0) {
        return Err(Error::input("block gap must be positive"));
    }
    let mut e = entries.to_vec();
    for &(delta, p) in &e {
        if !(delta > -gap && delta < gap) {
            return Err(Error::input(format!("Δ = {delta} lies outside (-{gap}, {gap})")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!("left probability {p} is not a probability")));
        }
    }
    e.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for (delta, p) in e {
        match groups.last_mut() {
            Some(g) if (g.2 - p).abs() <= 1e-12 => g.1 = delta,
            Some(g) if p > g.2 => {
                return Err(Error::input(format!(
                    "left probability increases from {} (Δ = {}) to {p} (Δ = {delta}); the algorithm is not monotone",
                    g.2, g.1
                )));
            }
            _ => groups.push((delta, delta, p)),
        }
    }
    Ok(MonotoneCdf { gap, groups })
}

/// The CDF that reproduces the harmonic algorithm on a two-sided block.
pub fn harmonic_cdf(street: &Street, block: &Block) -> Option<MonotoneCdf> {
    let (l, r) = (block.left?, block.right?);
    let entries: Vec<(f64, f64)> = (block.first..=block.last)
        .map(|v| {
            (
                street.d(v, l) - street.d(v, r),
                harmonic_left_probability(street, block, v),
            )
        })
        .collect();
    monotone_cdf(&entries, street.d(l, r)).ok()
}

/// Samples q_j from each block's CDF and prices every vacant slot with the
/// sum of the draws of the blocks to its left, so that P(R) - P(L) = q_j.
/// `cdfs` is aligned with the current blocks; `None` marks blocks with a
/// single boundary slot.
pub fn monotone_prices<R: Rng + ?Sized>(
    street: &Street,
    occ: &Occupancy,
    cdfs: &[Option<MonotoneCdf>],
    rng: &mut R,
) -> Result<SlotPrices> {
    let bl = blocks(street, occ);
    if bl.len() != cdfs.len() {
        return Err(Error::input(format!(
            "{} blocks but {} distributions",
            bl.len(),
            cdfs.len()
        )));
    }
    let draws = bl
        .iter()
        .zip(cdfs)
        .map(|(b, cdf)| match (b.is_two_sided(), cdf) {
            (true, Some(cdf)) => Ok(Some(-cdf.sample(rng))),
            (true, None) => Err(Error::input(format!(
                "block {}..{} needs a distribution",
                b.first, b.last
            ))),
            (false, _) => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(prices_from_draws(street, occ, bl, draws))
}
