//! Divided differences and the oscillation bound they give against
//! polynomials of lower degree.

use alloc::vec::Vec;
use libm::fabs;

use crate::error::{Error, Result};

/// `f[x_0, ..., x_n]` by the recursive table.
pub fn divided_difference(points: &[f64], values: &[f64]) -> Result<f64> {
    if points.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), found: values.len() });
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument { reason: "no points" });
    }
    for i in 0..points.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(Error::DuplicateAbscissa { index: i });
            }
        }
    }
    let mut table: Vec<f64> = values.to_vec();
    let n = points.len();
    for order in 1..n {
        for i in 0..n - order {
            table[i] = (table[i + 1] - table[i]) / (points[i + order] - points[i]);
        }
    }
    Ok(table[0])
}

/// `N! (delta/2)^N |dd|` for `N + 1` strictly increasing points with
/// minimal gap `delta`: any polynomial of degree below `N` misses `f` by
/// at least this much at one of the points.
pub fn oscillation_lower_bound(points: &[f64], dd: f64) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument { reason: "at least two points are required" });
    }
    let mut delta = f64::INFINITY;
    for (i, w) in points.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NotIncreasing { index: i + 1 });
        }
        delta = delta.min(w[1] - w[0]);
    }
    let n = points.len() - 1;
    let mut bound = fabs(dd);
    for m in 1..=n {
        bound *= m as f64 * delta / 2.0;
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_and_cube() {
        assert_eq!(divided_difference(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]).unwrap(), 1.0);
        assert_eq!(divided_difference(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 8.0, 27.0]).unwrap(), 1.0);
    }

    #[test]
    fn linear_data_has_zero_second_difference() {
        let xs = [0.1, 0.7, 0.35];
        let ys = xs.map(|x| 3.0 * x - 1.0);
        assert!(fabs(divided_difference(&xs, &ys).unwrap()) < 1e-14);
    }

    #[test]
    fn duplicate_abscissa_is_rejected() {
        let err = divided_difference(&[0.0, 1.0, 0.0], &[0.0, 1.0, 2.0]).unwrap_err();
        assert_eq!(err, Error::DuplicateAbscissa { index: 2 });
    }

    #[test]
    fn oscillation_bound_examples() {
        assert_eq!(oscillation_lower_bound(&[0.0, 1.0], 1.0).unwrap(), 0.5);
        assert_eq!(oscillation_lower_bound(&[0.0, 0.5, 1.0], 1.0).unwrap(), 0.125);
        assert_eq!(oscillation_lower_bound(&[0.0, 0.5, 1.0], 0.0).unwrap(), 0.0);
        assert_eq!(
            oscillation_lower_bound(&[0.0, 0.5, 0.5], 1.0).unwrap_err(),
            Error::NotIncreasing { index: 2 }
        );
    }
}
