//! Bracketed root finding for the monotone scalar equations that define the
//! dimension constants and the scaling function.

use libm::{exp, fabs, log};

/// Relative width at which bisection stops.
pub const REL_TOL: f64 = 1e-15;

const MAX_ITER: usize = 400;

/// Bisection for a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs (or one of them vanishes).
///
/// Iterates until the bracket is narrower than `REL_TOL * max(1, |x|)` or the
/// midpoint is no longer representable strictly inside it.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() {
        // Not bracketed (rounding at a tight bracket): best end.
        return if fabs(flo) <= fabs(fhi) { lo } else { hi };
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if fabs(hi - lo) <= REL_TOL * fabs(mid).max(1.0) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of a strictly monotone `f` starting from the guess bracket
/// `[lo, hi]`, which is widened geometrically until it contains a sign
/// change. Returns `None` if no sign change is found before `limit`.
pub fn bisect_expanding<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    limit: f64,
) -> Option<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    let mut width = hi - lo;
    while flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        if !flo.is_finite() || !fhi.is_finite() || width > limit {
            return None;
        }
        width *= 2.0;
        // Move whichever end the monotone function says is on the wrong side.
        if fabs(flo) < fabs(fhi) {
            lo -= width;
            flo = f(lo);
        } else {
            hi += width;
            fhi = f(hi);
        }
    }
    Some(bisect(f, lo, hi))
}

/// `ln(sum_k exp(v_k))` evaluated without overflow.
pub fn log_sum_exp<I: IntoIterator<Item = f64> + Clone>(values: I) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = values.into_iter().map(|v| exp(v - max)).sum();
    max + log(s)
}

/// Solves `sum_k exp(offset_k + slope_k * x) = 1` for `x`, where every slope
/// is strictly negative, so the left side is strictly decreasing in `x`.
///
/// Covers `sum a_k^s = 1` (offset 0, slope `ln a_k`), the scaling equation
/// `sum |d_k|^q a_k^b = 1` (offset `q ln|d_k|`, slope `ln a_k`) and the
/// `sigma` equation (offset 0, slope `ln(|d_k|/a_k)`).
pub fn solve_exp_sum(terms: &[(f64, f64)]) -> f64 {
    debug_assert!(!terms.is_empty());
    debug_assert!(terms.iter().all(|&(_, s)| s < 0.0));
    if terms.len() == 1 {
        let (o, s) = terms[0];
        return -o / s;
    }
    let ln_n = log(terms.len() as f64);
    // At lo every term is <= 1 and one equals 1, so the sum is >= 1; at hi
    // every term is <= 1/n.
    let lo = terms.iter().map(|&(o, s)| -o / s).fold(f64::NEG_INFINITY, f64::max);
    let hi = terms
        .iter()
        .map(|&(o, s)| -o / s + ln_n / -s)
        .fold(f64::NEG_INFINITY, f64::max);
    // Widen slightly so rounding cannot close the bracket.
    let pad = 1e-9 * (hi - lo).max(1e-3);
    bisect(
        |x| log_sum_exp(terms.iter().map(|&(o, s)| o + s * x)),
        lo - pad,
        hi + pad,
    )
}
