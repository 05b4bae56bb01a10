use super::Street;
use crate::error::{Error, Result};

/// Reshapes the line given an estimate `z` of the optimal matching cost,
/// valid within a factor `c`: edges of weight at least `z` are removed and
/// edges lighter than z/(2cn²) are raised to exactly that.
///
/// With at most n+1 vertices the aspect ratio of the result is at most 2cn³.
pub fn transform_metric(street: &Street, z: f64, c: f64, n: usize) -> Result<Street> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::input("the optimum estimate must be positive and finite"));
    }
    if !(c > 1.0) {
        return Err(Error::input("the estimate factor must exceed 1"));
    }
    if n == 0 {
        return Err(Error::input("the number of cars must be positive"));
    }
    let floor = z / (2.0 * c * (n * n) as f64);
    let m = street.len();
    let mut coords = Vec::with_capacity(m);
    let mut cut = Vec::with_capacity(m.saturating_sub(1));
    coords.push(0.0);
    for e in 0..m - 1 {
        let w = street.weight(e);
        let removed = street.is_cut(e) || w >= z;
        // a removed edge keeps a nominal length so coordinates stay increasing
        let w2 = w.max(floor);
        coords.push(coords[e] + w2);
        cut.push(removed);
    }
    let is_slot = (0..m).map(|v| street.is_slot(v)).collect();
    Street::with_cuts(coords, is_slot, cut)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_example() {
        let s = Street::from_weights(&[150.0, 1.0, 50.0]).unwrap();
        let t = transform_metric(&s, 100.0, 2.0, 4).unwrap();
        assert!(t.is_cut(0));
        assert_eq!(t.weight(1), 1.5625);
        assert_eq!(t.weight(2), 50.0);
        assert!(!t.is_cut(2));
    }

    #[test]
    fn middle_band_unchanged() {
        let s = Street::from_weights(&[2.0, 3.0, 99.0]).unwrap();
        let t = transform_metric(&s, 100.0, 2.0, 4).unwrap();
        assert_eq!(t.coords(), s.coords());
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = Street::from_weights(&[1.0]).unwrap();
        assert!(transform_metric(&s, 0.0, 2.0, 1).is_err());
        assert!(transform_metric(&s, 1.0, 1.0, 1).is_err());
    }
}
