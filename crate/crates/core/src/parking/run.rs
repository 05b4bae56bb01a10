use super::harmonic::{harmonic_prices, harmonic_step, SlotPrices};
use super::lp::min_sum_prices;
use super::monotone::{harmonic_cdf, monotone_prices, MonotoneCdf};
use super::{blocks, Block, Occupancy, ParkingInstance, Street};
use crate::agents::{decide, DecisionProblem, TieBreak, Trace, TraceRow};
use crate::error::{Error, Result};
use crate::metric::Vertex;
use crate::TOLERANCE;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Nearest vacant slot in the goal's component; equidistant slots resolve to
/// the right.
pub fn greedy_step(street: &Street, occ: &Occupancy, goal: Vertex) -> Result<Vertex> {
    street.check_vertex(goal)?;
    let mut best: Option<(f64, Vertex)> = None;
    for v in occ.vacant(street) {
        let d = street.d(goal, v);
        if d.is_finite() && best.map_or(true, |(bd, _)| d <= bd) {
            best = Some((d, v));
        }
    }
    best.map(|b| b.1).ok_or(Error::Capacity)
}

/// The free-parking lower-bound instance: slots at 0 and 2^i (i < n), the
/// first car heading to 1 and car i ≥ 2 to just right of 2^{i-2}. Nearest-slot
/// parking cascades to the right for a total near 2^{n-1} - 1, while the
/// optimum is 1 + (n-1)·eps.
pub fn adversarial_instance(n: usize, eps: f64) -> Result<ParkingInstance> {
    if n < 2 {
        return Err(Error::input("the instance needs n >= 2"));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::input("eps must lie in (0, 0.5)"));
    }
    let mut points: Vec<(f64, bool)> = vec![(0.0, true)];
    points.extend((0..n).map(|i| ((1u64 << i) as f64, true)));
    points.extend((2..=n).map(|i| ((1u64 << (i - 2)) as f64 + eps, false)));
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coords: Vec<f64> = points.iter().map(|p| p.0).collect();
    let is_slot: Vec<bool> = points.iter().map(|p| p.1).collect();
    let find = |x: f64| coords.iter().position(|&c| c == x).expect("goal is a vertex");
    let mut goals = vec![find(1.0)];
    goals.extend((2..=n).map(|i| find((1u64 << (i - 2)) as f64 + eps)));
    ParkingInstance::new(Street::new(coords, is_slot)?, goals)
}

/// Disutility d(goal, v) + P(v) of each reachable vacant slot.
pub fn parking_options(street: &Street, prices: &SlotPrices, goal: Vertex) -> Vec<Option<f64>> {
    (0..street.len())
        .map(|v| {
            let p = prices.get(v)?;
            let d = street.d(goal, v);
            d.is_finite().then_some(d + p)
        })
        .collect()
}

/// How the slots are priced for each arrival.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PricingRule {
    /// Everything free.
    Free,
    /// Prefix sums of uniform draws.
    #[default]
    Harmonic,
    /// Same draws, prices of minimum sum.
    MinSum,
    /// The general monotone-algorithm scheme instantiated with harmonic
    /// probabilities.
    MonotoneHarmonic,
}

impl std::str::FromStr for PricingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" | "none" => Ok(Self::Free),
            "harmonic" => Ok(Self::Harmonic),
            "min-sum" => Ok(Self::MinSum),
            "monotone-harmonic" => Ok(Self::MonotoneHarmonic),
            other => Err(Error::input(format!(
                "unknown parking pricing `{other}` (free|harmonic|min-sum|monotone-harmonic)"
            ))),
        }
    }
}

/// One sequence of parked cars.
#[derive(Clone, Debug, Default)]
pub struct ParkingRun {
    pub trace: Trace,
    pub slots: Vec<Vertex>,
}

impl ParkingRun {
    pub fn cost(&self) -> f64 {
        self.trace.total_cost
    }
}

fn rule_prices<R: Rng + ?Sized>(
    street: &Street,
    occ: &Occupancy,
    rule: PricingRule,
    rng: &mut R,
) -> Result<SlotPrices> {
    match rule {
        PricingRule::Free => {
            let mut p = harmonic_prices(street, occ, rng);
            for x in p.prices.iter_mut().flatten() {
                *x = 0.0;
            }
            p.draws.iter_mut().for_each(|d| *d = None);
            Ok(p)
        }
        PricingRule::Harmonic => Ok(harmonic_prices(street, occ, rng)),
        PricingRule::MinSum => {
            let h = harmonic_prices(street, occ, rng);
            min_sum_prices(street, occ, &h.draws)
        }
        PricingRule::MonotoneHarmonic => {
            let cdfs: Vec<Option<MonotoneCdf>> = blocks(street, occ).iter().map(|b| harmonic_cdf(street, b)).collect();
            monotone_prices(street, occ, &cdfs, rng)
        }
    }
}

/// Generic priced run: `price` posts prices for each arrival, agents decide
/// with distances in `agent_street` and the social cost is measured in
/// `cost_street` (the two differ when agents face a transformed metric).
fn run_with<R, F>(
    agent_street: &Street,
    cost_street: &Street,
    goals: &[Vertex],
    rng: &mut R,
    tie: &mut TieBreak,
    mut price: F,
) -> Result<ParkingRun>
where
    R: Rng + ?Sized,
    F: FnMut(&Street, &Occupancy, &mut R) -> Result<SlotPrices>,
{
    if agent_street.len() != cost_street.len() {
        return Err(Error::input("agent and cost streets must share vertices"));
    }
    let mut occ = Occupancy::empty(agent_street);
    let mut run = ParkingRun::default();
    for (i, &g) in goals.iter().enumerate() {
        agent_street.check_vertex(g)?;
        let prices = price(agent_street, &occ, rng)?;
        let partial = parking_options(agent_street, &prices, g);
        let problem = DecisionProblem::from_partial(&partial).map_err(|_| Error::Capacity)?;
        let slot = decide(&problem, tie, TOLERANCE)?;
        occ.park(agent_street, slot)?;
        let row_prices = problem.options.iter().map(|&v| prices.get(v).unwrap_or(0.0)).collect();
        run.trace.push(TraceRow {
            arrival: i,
            options: problem.options.clone(),
            prices: row_prices,
            disutilities: problem.disutility.clone(),
            chosen: slot,
            cost: cost_street.d(g, slot),
        });
        run.slots.push(slot);
    }
    Ok(run)
}

/// Selfish cars under the given pricing rule.
pub fn run_priced_agents<R: Rng + ?Sized>(
    agent_street: &Street,
    cost_street: &Street,
    goals: &[Vertex],
    rule: PricingRule,
    rng: &mut R,
    tie: &mut TieBreak,
) -> Result<ParkingRun> {
    run_with(agent_street, cost_street, goals, rng, tie, |s, o, r| {
        rule_prices(s, o, rule, r)
    })
}

/// Selfish cars facing no prices.
pub fn run_free_agents<R: Rng + ?Sized>(
    street: &Street,
    goals: &[Vertex],
    rng: &mut R,
    tie: &mut TieBreak,
) -> Result<ParkingRun> {
    run_priced_agents(street, street, goals, PricingRule::Free, rng, tie)
}

/// Selfish cars priced to imitate a monotone algorithm given by its
/// left-probability for each (block, goal).
pub fn run_monotone_agents<R, P>(
    street: &Street,
    goals: &[Vertex],
    p_left: P,
    rng: &mut R,
    tie: &mut TieBreak,
) -> Result<ParkingRun>
where
    R: Rng + ?Sized,
    P: Fn(&Street, &Block, Vertex) -> f64,
{
    run_with(street, street, goals, rng, tie, |s, o, r| {
        let cdfs = blocks(s, o)
            .iter()
            .map(|b| {
                if !b.is_two_sided() {
                    return Ok(None);
                }
                let (l, rr) = (b.left.unwrap(), b.right.unwrap());
                let entries: Vec<(f64, f64)> = (b.first..=b.last)
                    .map(|v| (s.d(v, l) - s.d(v, rr), p_left(s, b, v)))
                    .collect();
                super::monotone_cdf(&entries, s.d(l, rr)).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        monotone_prices(s, o, &cdfs, r)
    })
}

fn run_algorithm<F>(street: &Street, goals: &[Vertex], mut step: F) -> Result<ParkingRun>
where
    F: FnMut(&Occupancy, Vertex) -> Result<Vertex>,
{
    let mut occ = Occupancy::empty(street);
    let mut run = ParkingRun::default();
    for (i, &g) in goals.iter().enumerate() {
        let slot = step(&occ, g)?;
        occ.park(street, slot)?;
        let cost = street.d(g, slot);
        run.trace.push(TraceRow {
            arrival: i,
            options: vec![slot],
            prices: vec![0.0],
            disutilities: vec![cost],
            chosen: slot,
            cost,
        });
        run.slots.push(slot);
    }
    Ok(run)
}

/// Nearest-slot parking with rightward ties.
pub fn run_greedy(street: &Street, goals: &[Vertex]) -> Result<ParkingRun> {
    run_algorithm(street, goals, |occ, g| greedy_step(street, occ, g))
}

/// The harmonic algorithm itself (no agents involved).
pub fn run_harmonic<R: Rng + ?Sized>(street: &Street, goals: &[Vertex], rng: &mut R) -> Result<ParkingRun> {
    run_algorithm(street, goals, |occ, g| harmonic_step(street, occ, g, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parking::matching_offline_opt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_examples() {
        let s = Street::all_slots(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let occ = Occupancy::from_occupied(&s, &[2]).unwrap();
        assert_eq!(greedy_step(&s, &occ, 0).unwrap(), 0);
        assert_eq!(greedy_step(&s, &occ, 2).unwrap(), 3);
        let s = Street::all_slots(vec![0.0, 1.0, 2.0, 4.0]).unwrap();
        let occ = Occupancy::from_occupied(&s, &[1, 2]).unwrap();
        assert_eq!(greedy_step(&s, &occ, 1).unwrap(), 0);
    }

    #[test]
    fn greedy_cascade_on_adversarial_instance() {
        for n in [2usize, 4, 10] {
            let eps = 1e-6;
            let inst = adversarial_instance(n, eps).unwrap();
            let run = run_greedy(&inst.street, &inst.goals).unwrap();
            let expect = (1u64 << (n - 1)) as f64 - 1.0 - (n - 1) as f64 * eps;
            assert!((run.cost() - expect).abs() < 1e-9, "n = {n}: {}", run.cost());
        }
        let inst = adversarial_instance(10, 1e-6).unwrap();
        let opt = matching_offline_opt(&inst.street, &inst.goals).unwrap();
        assert!(run_greedy(&inst.street, &inst.goals).unwrap().cost() / opt >= 400.0);
    }

    #[test]
    fn priced_agents_never_leave_their_block() {
        let inst = adversarial_instance(8, 1e-6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rule in [
            PricingRule::Harmonic,
            PricingRule::MinSum,
            PricingRule::MonotoneHarmonic,
        ] {
            let run = run_priced_agents(
                &inst.street,
                &inst.street,
                &inst.goals,
                rule,
                &mut rng,
                &mut TieBreak::First,
            )
            .unwrap();
            assert_eq!(run.slots.len(), inst.goals.len());
            assert!(run.trace.reconciles());
        }
    }

    #[test]
    fn free_agents_match_greedy_without_ties() {
        let inst = adversarial_instance(6, 1e-6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let free = run_free_agents(&inst.street, &inst.goals, &mut rng, &mut TieBreak::First).unwrap();
        let greedy = run_greedy(&inst.street, &inst.goals).unwrap();
        assert_eq!(free.slots, greedy.slots);
    }
}
