use super::Street;
use crate::error::{Error, Result};
use crate::metric::Vertex;

/// Minimum-cost assignment of cars (by goal) to distinct slots.
///
/// On a line some optimal matching is non-crossing, so a DP over goals and
/// slots in left-to-right order is exact. Cut edges make crossing them
/// infinitely expensive, which the DP handles unchanged.
pub fn matching_offline_opt(street: &Street, goals: &[Vertex]) -> Result<f64> {
    for &g in goals {
        street.check_vertex(g)?;
    }
    let mut gs = goals.to_vec();
    gs.sort_unstable();
    let slots: Vec<Vertex> = street.slots().collect();
    if gs.len() > slots.len() {
        return Err(Error::Capacity);
    }
    let m = slots.len();
    // row i: first i goals; column j: first j slots
    let mut prev = vec![0.0; m + 1];
    for (i, &g) in gs.iter().enumerate() {
        let mut cur = vec![f64::INFINITY; m + 1];
        for j in i + 1..=m {
            cur[j] = cur[j - 1].min(prev[j - 1] + street.d(g, slots[j - 1]));
        }
        prev = cur;
    }
    let best = prev[m];
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Capacity)
    }
}

/// Exhaustive search over injective assignments (test oracle; exponential).
pub fn matching_oracle_brute_force(street: &Street, goals: &[Vertex]) -> f64 {
    fn go(street: &Street, goals: &[Vertex], slots: &[Vertex], used: &mut Vec<bool>) -> f64 {
        let Some((&g, rest)) = goals.split_first() else {
            return 0.0;
        };
        let mut best = f64::INFINITY;
        for (k, &s) in slots.iter().enumerate() {
            if used[k] {
                continue;
            }
            used[k] = true;
            best = best.min(street.d(g, s) + go(street, rest, slots, used));
            used[k] = false;
        }
        best
    }
    let slots: Vec<Vertex> = street.slots().collect();
    let mut used = vec![false; slots.len()];
    go(street, goals, &slots, &mut used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::assignment;
    use crate::parking::adversarial_instance;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let s = Street::all_slots(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        assert_eq!(matching_offline_opt(&s, &[1, 3]).unwrap(), 0.0);
        let g = Street::new(vec![0.0, 2.5, 3.0], vec![true, false, true]).unwrap();
        assert_eq!(matching_offline_opt(&g, &[1]).unwrap(), 0.5);
        let inst = adversarial_instance(4, 1e-3).unwrap();
        let opt = matching_offline_opt(&inst.street, &inst.goals).unwrap();
        assert!((opt - (1.0 + 3e-3)).abs() < 1e-9);
        assert!((matching_oracle_brute_force(&inst.street, &inst.goals) - opt).abs() < 1e-9);
    }

    #[test]
    fn too_many_cars() {
        let s = Street::all_slots(vec![0.0, 1.0]).unwrap();
        assert!(matches!(matching_offline_opt(&s, &[0, 0, 1]), Err(Error::Capacity)));
    }

    proptest! {
        #[test]
        fn agrees_with_other_solvers(
            gaps in proptest::collection::vec(1u32..9, 1..8),
            slot_mask in proptest::collection::vec(any::<bool>(), 8),
            cut_mask in proptest::collection::vec(0u8..6, 8),
            goal_picks in proptest::collection::vec(0usize..8, 1..5),
        ) {
            let m = gaps.len() + 1;
            let mut coords = vec![0.0];
            for g in &gaps { coords.push(coords.last().unwrap() + f64::from(*g)); }
            let mut is_slot: Vec<bool> = slot_mask[..m].to_vec();
            is_slot[0] = true;
            let cut: Vec<bool> = cut_mask[..m - 1].iter().map(|&c| c == 0).collect();
            let s = Street::with_cuts(coords, is_slot, cut).unwrap();
            let goals: Vec<usize> = goal_picks.iter().map(|g| g % m).collect();
            let brute = matching_oracle_brute_force(&s, &goals);
            match matching_offline_opt(&s, &goals) {
                Ok(dp) => {
                    prop_assert!((dp - brute).abs() < 1e-9);
                    let slots: Vec<usize> = s.slots().collect();
                    let cost: Vec<Vec<f64>> = goals.iter()
                        .map(|&g| slots.iter().map(|&v| s.d(g, v).min(1e9)).collect())
                        .collect();
                    prop_assert!((assignment(&cost).1 - dp).abs() < 1e-6);
                }
                Err(_) => prop_assert!(!brute.is_finite()),
            }
        }
    }
}
