//! Scaling function, its Legendre transform and the multifractal spectrum.

use alloc::vec::Vec;
use libm::{exp, fabs, log, pow};
use serde::{Deserialize, Serialize};

use crate::constants::{Regime, SpectrumConstants};
use crate::error::{Error, Result};
use crate::roots::{bisect_expanding, solve_exp_sum};

/// Slack used when comparing an exponent with the ends of its range.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// An exponent value; the infinite exponent has its own variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    /// `+inf` for the infinite exponent.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Exponent::Infinite
        } else {
            Exponent::Finite(v)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumBranch {
    /// `sigma (alpha - 1)` below `alpha0` in the second regime.
    Linear,
    Legendre,
    Endpoint,
    Empty,
}

impl SpectrumBranch {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumBranch::Linear => "Linear",
            SpectrumBranch::Legendre => "Legendre",
            SpectrumBranch::Endpoint => "Endpoint",
            SpectrumBranch::Empty => "Empty",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub alpha: Exponent,
    /// Dimension of the level set; `None` when it is empty.
    pub dim: Option<f64>,
    pub branch: SpectrumBranch,
    /// Maximising probability vector, zero on `I_0`.
    pub p_opt: Option<Vec<f64>>,
    /// Set for `alpha = 1` in the second regime, where the value 0 is a
    /// convention rather than a consequence of the dimension formula.
    pub flagged: bool,
}

/// `beta(q)`: the root of `sum_{I_+} |d_k|^q a_k^beta = 1`.
pub fn beta(c: &SpectrumConstants, q: f64) -> f64 {
    let terms: Vec<(f64, f64)> = c.log_pairs().map(|(ld, la)| (q * ld, la)).collect();
    solve_exp_sum(&terms)
}

/// Gibbs weights `|d_k|^q a_k^beta(q)` (zero on `I_0`) and `beta(q)`.
pub fn gibbs(c: &SpectrumConstants, q: f64) -> (Vec<f64>, f64) {
    let b = beta(c, q);
    let mut p = alloc::vec![0.0; c.r];
    for &k in &c.index_plus {
        p[k - 1] = exp(q * log(fabs(c.d[k - 1])) + b * log(c.a[k - 1]));
    }
    (p, b)
}

/// `sum p ln|d| / sum p ln a` over `I_+`.
pub fn log_ratio(c: &SpectrumConstants, p: &[f64]) -> f64 {
    let (num, den) = c.index_plus.iter().fold((0.0, 0.0), |(n, m), &k| {
        let w = p[k - 1];
        (n + w * log(fabs(c.d[k - 1])), m + w * log(c.a[k - 1]))
    });
    num / den
}

/// `-beta'(q)`, the exponent at which `q` is the Legendre slope.
pub fn alpha_of_q(c: &SpectrumConstants, q: f64) -> f64 {
    log_ratio(c, &gibbs(c, q).0)
}

/// `beta'(q) = -sum p ln|d| / sum p ln a` for the Gibbs weights at `q`.
pub fn beta_prime(c: &SpectrumConstants, q: f64) -> f64 {
    -alpha_of_q(c, q)
}

/// `sum p ln p / sum p ln a` with `0 ln 0 = 0`.
pub fn entropy_ratio(c: &SpectrumConstants, p: &[f64]) -> f64 {
    let (num, den) = p.iter().zip(&c.a).fold((0.0, 0.0), |(n, m), (&w, &a)| {
        if w > 0.0 {
            (n + w * log(w), m + w * log(a))
        } else {
            (n, m)
        }
    });
    num / den
}

/// `sum_{I_+} p ln p / sum_{I_+} p (ln|d| - ln a)`, maximised by `p*`.
pub fn relative_entropy_ratio(c: &SpectrumConstants, p: &[f64]) -> f64 {
    let (num, den) = c.index_plus.iter().fold((0.0, 0.0), |(n, m), &k| {
        let w = p[k - 1];
        if w > 0.0 {
            (n + w * log(w), m + w * (log(fabs(c.d[k - 1])) - log(c.a[k - 1])))
        } else {
            (n, m)
        }
    });
    num / den
}

/// The Legendre slope `q*` with `alpha_of_q(q*) = alpha`, for `alpha`
/// strictly inside `(alpha_min, alpha_max)`.
pub fn legendre_slope(c: &SpectrumConstants, alpha: f64) -> Result<f64> {
    let hi = c.sigma.unwrap_or(1.0) + 1.0;
    bisect_expanding(|q| alpha_of_q(c, q) - alpha, -1.0, hi, 1e8).ok_or(Error::OutOfRange { alpha })
}

fn near(x: f64, y: f64) -> bool {
    fabs(x - y) <= ENDPOINT_TOL
}

/// `beta*(alpha) = inf_q (alpha q + beta(q))` on `[alpha_min, alpha_max]`.
pub fn beta_star(c: &SpectrumConstants, alpha: f64) -> Result<f64> {
    if near(alpha, c.alpha_min) {
        return Ok(c.s_min);
    }
    if near(alpha, c.alpha_max) {
        return Ok(c.s_max);
    }
    if !(alpha > c.alpha_min && alpha < c.alpha_max) {
        return Err(Error::OutOfRange { alpha });
    }
    let q = legendre_slope(c, alpha)?;
    Ok(alpha * q + beta(c, q))
}

/// Weights `a_k^s` on the branches in `set`.
fn endpoint_weights(c: &SpectrumConstants, set: &[usize], s: f64) -> Vec<f64> {
    let mut p = alloc::vec![0.0; c.r];
    for &k in set {
        p[k - 1] = pow(c.a[k - 1], s);
    }
    p
}

/// Maximiser of the constrained entropy problem at `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Maximizer {
    pub p: Vec<f64>,
    /// `sum p ln p / sum p ln a`.
    pub h: f64,
    /// `sum p ln p / sum p (ln|d| - ln a)`; only meaningful when every
    /// `|d_k| < a_k`.
    pub g: f64,
    pub branch: SpectrumBranch,
}

pub fn duality_maximizer(c: &SpectrumConstants, alpha: f64) -> Result<Maximizer> {
    let linear = c.regime == Regime::CaseB
        && alpha >= 1.0 - ENDPOINT_TOL
        && alpha <= c.alpha0.unwrap_or(f64::NEG_INFINITY);
    let (p, branch) = if linear {
        (c.p_star.clone().unwrap_or_default(), SpectrumBranch::Linear)
    } else if near(alpha, c.alpha_min) {
        (endpoint_weights(c, &c.argmin, c.s_min), SpectrumBranch::Endpoint)
    } else if near(alpha, c.alpha_max) {
        (endpoint_weights(c, &c.argmax, c.s_max), SpectrumBranch::Endpoint)
    } else if alpha > c.alpha_min && alpha < c.alpha_max {
        (gibbs(c, legendre_slope(c, alpha)?).0, SpectrumBranch::Legendre)
    } else {
        return Err(Error::OutOfRange { alpha });
    };
    let h = entropy_ratio(c, &p);
    let g = relative_entropy_ratio(c, &p);
    Ok(Maximizer { p, h, g, branch })
}

/// `D(alpha)`: dimension of the set of points with exponent `alpha`.
pub fn spectrum_d(c: &SpectrumConstants, alpha: Exponent) -> SpectrumPoint {
    let empty = SpectrumPoint { alpha, dim: None, branch: SpectrumBranch::Empty, p_opt: None, flagged: false };
    let a = match alpha {
        Exponent::Infinite => {
            // A zero branch occurs at almost every point.
            return if c.index_plus.len() < c.r {
                SpectrumPoint { dim: Some(1.0), branch: SpectrumBranch::Endpoint, ..empty }
            } else {
                empty
            };
        }
        Exponent::Finite(a) => a,
    };
    if c.regime == Regime::CaseB {
        let sigma = c.sigma.unwrap_or(0.0);
        let alpha0 = c.alpha0.unwrap_or(1.0);
        if near(a, 1.0) {
            return SpectrumPoint {
                dim: Some(0.0),
                branch: SpectrumBranch::Linear,
                p_opt: c.p_star.clone(),
                flagged: true,
                ..empty
            };
        }
        if a < 1.0 || a > c.alpha_max + ENDPOINT_TOL {
            return empty;
        }
        if a <= alpha0 {
            return SpectrumPoint {
                dim: Some(sigma * (a - 1.0)),
                branch: SpectrumBranch::Linear,
                p_opt: c.p_star.clone(),
                ..empty
            };
        }
    } else if a < c.alpha_min - ENDPOINT_TOL || a > c.alpha_max + ENDPOINT_TOL {
        return empty;
    }
    match duality_maximizer(c, a) {
        Ok(m) => {
            let dim = if m.branch == SpectrumBranch::Endpoint {
                if near(a, c.alpha_min) { c.s_min } else { c.s_max }
            } else {
                beta_star(c, a).unwrap_or(m.h)
            };
            SpectrumPoint { dim: Some(dim), branch: m.branch, p_opt: Some(m.p), ..empty }
        }
        Err(_) => empty,
    }
}

/// Support of the spectrum over finite exponents.
pub fn support(c: &SpectrumConstants) -> (f64, f64) {
    match c.regime {
        Regime::CaseA => (c.alpha_min, c.alpha_max),
        Regime::CaseB => (1.0, c.alpha_max),
    }
}

/// `grid` evenly spaced exponents over the support together with the
/// distinguished abscissae, sorted, with near-duplicates merged (the
/// distinguished value wins).
pub fn table_abscissae(c: &SpectrumConstants, grid: usize) -> Vec<f64> {
    let (lo, hi) = support(c);
    let mut special = alloc::vec![lo, c.alpha_hat, hi];
    if c.regime == Regime::CaseB {
        special.push(c.alpha_min);
        special.extend(c.alpha0);
    }
    let mut xs: Vec<(f64, bool)> = special.into_iter().map(|v| (v, true)).collect();
    let n = grid.max(2);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let v = if i == n - 1 { hi } else { lo + t * (hi - lo) };
        xs.push((v, false));
    }
    xs.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    let mut last_special = false;
    for (v, special) in xs {
        match out.last_mut() {
            Some(prev) if fabs(v - *prev) <= ENDPOINT_TOL => {
                if special && !last_special {
                    *prev = v;
                    last_special = true;
                }
            }
            _ => {
                out.push(v);
                last_special = special;
            }
        }
    }
    out
}

pub fn spectrum_table(c: &SpectrumConstants, grid: usize) -> Vec<SpectrumPoint> {
    table_abscissae(c, grid)
        .into_iter()
        .map(|a| spectrum_d(c, Exponent::Finite(a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::compute_constants;
    use crate::presets::preset;

    fn consts(name: &str) -> SpectrumConstants {
        compute_constants(&preset(name).unwrap()).unwrap()
    }

    #[test]
    fn beta_at_zero_is_s_hat() {
        for name in ["riesz-nagy:0.3", "okamoto:0.6", "skew-takagi:0.3,0.5,0.25"] {
            let c = consts(name);
            assert!(fabs(beta(&c, 0.0) - c.s_hat) < 1e-14);
        }
    }

    #[test]
    fn takagi_beta_is_affine() {
        for w in [0.5, 1.0, 1.5] {
            let c = consts(&alloc::format!("takagi:{w}"));
            for q in [-3.0, -0.5, 0.0, 0.7, 4.0] {
                assert!(fabs(beta(&c, q) - (1.0 - w * q)) < 1e-12);
            }
        }
    }

    #[test]
    fn beta_at_sigma_in_case_b() {
        let c = consts("skew-takagi:0.3,0.5,0.25");
        let s = c.sigma.unwrap();
        assert!(fabs(beta(&c, s) + s) < 1e-12);
    }

    #[test]
    fn landmarks_of_beta_star() {
        for name in ["riesz-nagy:0.3", "okamoto:0.6", "skew-takagi:0.3,0.5,0.25"] {
            let c = consts(name);
            assert!(fabs(beta_star(&c, c.alpha_hat).unwrap() - c.s_hat) < 1e-9, "{name}");
            assert_eq!(beta_star(&c, c.alpha_min).unwrap(), c.s_min);
            assert_eq!(beta_star(&c, c.alpha_max).unwrap(), c.s_max);
            // Continuity towards the endpoints.
            let e = 1e-7 * (c.alpha_max - c.alpha_min);
            assert!(fabs(beta_star(&c, c.alpha_min + e).unwrap() - c.s_min) < 1e-3);
            assert!(fabs(beta_star(&c, c.alpha_max - e).unwrap() - c.s_max) < 1e-3);
            assert_eq!(beta_star(&c, c.alpha_max + 0.1).unwrap_err().name(), "OutOfRange");
        }
    }

    #[test]
    fn skew_takagi_two_map_closed_form() {
        // r = 2: the hyperplane meets the simplex in one point p.
        let c = consts("skew-takagi:0.3,0.5,0.25");
        let (la, lb, ld) = (log(0.3), log(0.7), log(0.25));
        for i in 1..20 {
            let alpha = c.alpha_min + (c.alpha_max - c.alpha_min) * i as f64 / 20.0;
            let p = (ld / alpha - lb) / (la - lb);
            let h = (p * log(p) + (1.0 - p) * log(1.0 - p)) / (p * la + (1.0 - p) * lb);
            let gp = gibbs(&c, legendre_slope(&c, alpha).unwrap()).0;
            assert!(fabs(gp[0] - p) < 1e-9);
            if alpha > c.alpha0.unwrap() {
                assert_eq!(duality_maximizer(&c, alpha).unwrap().p, gp);
            }
            assert!(fabs(beta_star(&c, alpha).unwrap() - h) < 1e-10);
        }
    }

    #[test]
    fn case_b_branches_meet_at_alpha0() {
        let c = consts("skew-takagi:0.3,0.5,0.25");
        let (s, a0) = (c.sigma.unwrap(), c.alpha0.unwrap());
        assert!(fabs(beta_star(&c, a0).unwrap() - s * (a0 - 1.0)) < 1e-10);
        let p1 = spectrum_d(&c, Exponent::Finite(1.0));
        assert_eq!((p1.dim, p1.branch, p1.flagged), (Some(0.0), SpectrumBranch::Linear, true));
        assert_eq!(spectrum_d(&c, Exponent::Finite(0.99)).branch, SpectrumBranch::Empty);
        assert_eq!(spectrum_d(&c, Exponent::Infinite).branch, SpectrumBranch::Empty);
    }

    #[test]
    fn riesz_nagy_peak_is_one() {
        let c = consts("riesz-nagy:0.3");
        let p = spectrum_d(&c, Exponent::Finite(c.alpha_hat));
        assert!(fabs(p.dim.unwrap() - 1.0) < 1e-9);
        assert_eq!(p.branch, SpectrumBranch::Legendre);
    }

    #[test]
    fn infinite_exponent_with_a_zero_branch_has_full_dimension() {
        let c = consts("okamoto:0.5");
        let p = spectrum_d(&c, Exponent::Infinite);
        assert_eq!(p.dim, Some(1.0));
    }

    #[test]
    fn uniform_ratio_system_maximiser_is_s_hat_weights() {
        let c = consts("takagi:1.5");
        let m = duality_maximizer(&c, c.alpha_hat).unwrap();
        for k in 1..=2 {
            assert!(fabs(m.p[k - 1] - pow(c.a[k - 1], c.s_hat)) < 1e-14);
        }
    }

    #[test]
    fn degenerate_takagi_table_is_a_single_point() {
        let c = consts("takagi:1");
        let t = spectrum_table(&c, 3);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].alpha, Exponent::Finite(1.0));
        assert!(fabs(t[0].dim.unwrap() - 1.0) < 1e-14);
    }

    #[test]
    fn table_contains_landmarks() {
        let c = consts("skew-takagi:0.3,0.5,0.25");
        let xs = table_abscissae(&c, 11);
        for v in [1.0, c.alpha0.unwrap(), c.alpha_hat, c.alpha_max, c.alpha_min] {
            assert!(xs.contains(&v));
        }
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }
}
