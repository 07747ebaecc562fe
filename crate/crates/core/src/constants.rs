//! Static constants of a system: exponent range, dimension constants,
//! run corrections, the index set Lambda and the spectrum regime.

use alloc::vec::Vec;
use libm::{fabs, log, pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::is_polynomial;
use crate::roots::solve_exp_sum;
use crate::system::SelfAffineSystem;

/// Absolute tolerance for ties between the ratios `rho_k`.
pub const TIE_TOL: f64 = 1e-12;
/// A Lambda expression larger than this in absolute value puts `k` in Lambda.
pub const LAMBDA_TOL: f64 = 1e-10;
/// Below [`LAMBDA_TOL`] but above this, `k` is left out of Lambda with a
/// warning: the value is too large to be rounding noise.
pub const LAMBDA_WARN: f64 = 1e-13;
/// Threshold below which a shear coefficient or `a - d` counts as zero.
const ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    CaseA,
    CaseB,
}

/// Constants derived from a system. Indices in `lambda`, `index_plus`,
/// `argmin`, `argmax` and `lambda_warnings` are 1-based; vectors of
/// length `r` are indexed by `k - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConstants {
    pub r: usize,
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub index_plus: Vec<usize>,
    /// `ln|d_k| / ln a_k`, absent for `d_k = 0`.
    pub rho: Vec<Option<f64>>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Branches attaining `alpha_min` / `alpha_max` (ties within [`TIE_TOL`]).
    pub argmin: Vec<usize>,
    pub argmax: Vec<usize>,
    pub s_min: f64,
    pub s_max: f64,
    pub s_hat: f64,
    pub alpha_hat: f64,
    pub k1: f64,
    pub k2: f64,
    /// Run corrections with the roles of the digits 1 and r exchanged.
    pub k1_left: f64,
    pub k2_left: f64,
    pub lambda: Vec<usize>,
    /// Indices left out of Lambda although their test expression was
    /// above rounding level.
    pub lambda_warnings: Vec<usize>,
    pub regime: Regime,
    pub sigma: Option<f64>,
    pub p_star: Option<Vec<f64>>,
    pub alpha0: Option<f64>,
    /// phi is a polynomial of degree at most 3, so pointwise exponent
    /// formulas do not apply.
    pub polynomial: bool,
}

impl SpectrumConstants {
    #[inline]
    pub fn is_plus(&self, k: usize) -> bool {
        k >= 1 && k <= self.r && self.d[k - 1] != 0.0
    }

    #[inline]
    pub fn in_lambda(&self, k: usize) -> bool {
        self.lambda.contains(&k)
    }

    /// `(ln|d_k|, ln a_k)` for every `k` in `I_+`.
    pub fn log_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.index_plus
            .iter()
            .map(move |&k| (log(fabs(self.d[k - 1])), log(self.a[k - 1])))
    }

    /// Checks internal consistency of constants read from outside.
    pub fn check(&self) -> Result<()> {
        if self.a.len() != self.r || self.d.len() != self.r || self.rho.len() != self.r {
            return Err(Error::DimensionMismatch { expected: self.r, found: self.a.len() });
        }
        if self.index_plus.len() < 2 {
            return Err(Error::DegenerateSystem { nonzero: self.index_plus.len() });
        }
        for (i, (&a, &d)) in self.a.iter().zip(&self.d).enumerate() {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::HorizontalRatioOutOfRange { k: i + 1, a });
            }
            if !(fabs(d) < 1.0) {
                return Err(Error::ContractionOutOfRange { k: i + 1, d });
            }
        }
        Ok(())
    }
}

/// Value of the Lambda test expression for `k` in `1..r`, with `0/0`
/// read as zero, or `None` when `k` is declared a member by the special
/// rules for `a_1 = d_1` or `a_r = d_r`.
pub fn lambda_expression(system: &SelfAffineSystem, k: usize) -> Option<f64> {
    let r = system.r();
    let (b1, br) = (system.branch(1), system.branch(r));
    let (bk, bk1) = (system.branch(k), system.branch(k + 1));
    let first_eq = fabs(b1.a - b1.d) <= ZERO_TOL;
    let last_eq = fabs(br.a - br.d) <= ZERO_TOL;
    let nonzero = |v: f64| fabs(v) > ZERO_TOL;
    if (first_eq && nonzero(b1.c) && bk1.d != 0.0) || (last_eq && nonzero(br.c) && bk.d != 0.0) {
        return None;
    }
    let t1 = if first_eq { 0.0 } else { b1.c * bk1.d * bk.a / (b1.a - b1.d) };
    let t2 = if last_eq { 0.0 } else { br.c * bk.d * bk1.a / (br.a - br.d) };
    Some(bk1.c * bk.a - bk.c * bk1.a + t1 - t2)
}

/// Lambda and the indices flagged as borderline.
pub fn lambda_set(system: &SelfAffineSystem) -> (Vec<usize>, Vec<usize>) {
    let mut members = Vec::new();
    let mut warnings = Vec::new();
    for k in 1..system.r() {
        if system.branch(k).d == 0.0 && system.branch(k + 1).d == 0.0 {
            continue;
        }
        match lambda_expression(system, k) {
            None => members.push(k),
            Some(v) if fabs(v) > LAMBDA_TOL => members.push(k),
            Some(v) if fabs(v) > LAMBDA_WARN => warnings.push(k),
            Some(_) => {}
        }
    }
    (members, warnings)
}

/// Solution `s` of `sum_{k in set} a_k^s = 1`; zero for a single branch.
fn dimension_of(a: &[f64], set: &[usize]) -> f64 {
    let terms: Vec<(f64, f64)> = set.iter().map(|&k| (0.0, log(a[k - 1]))).collect();
    solve_exp_sum(&terms)
}

pub fn compute_constants(system: &SelfAffineSystem) -> Result<SpectrumConstants> {
    let r = system.r();
    let a = system.a();
    let d = system.d();
    let plus: Vec<usize> = system.index_plus().to_vec();
    if plus.len() < 2 {
        return Err(Error::DegenerateSystem { nonzero: plus.len() });
    }
    let rho: Vec<Option<f64>> = (0..r)
        .map(|i| (d[i] != 0.0).then(|| log(fabs(d[i])) / log(a[i])))
        .collect();
    let rho_plus = |k: usize| rho[k - 1].unwrap_or(f64::NAN);
    let alpha_min = plus.iter().map(|&k| rho_plus(k)).fold(f64::INFINITY, f64::min);
    let alpha_max = plus.iter().map(|&k| rho_plus(k)).fold(f64::NEG_INFINITY, f64::max);
    let argmin: Vec<usize> =
        plus.iter().copied().filter(|&k| fabs(rho_plus(k) - alpha_min) <= TIE_TOL).collect();
    let argmax: Vec<usize> =
        plus.iter().copied().filter(|&k| fabs(rho_plus(k) - alpha_max) <= TIE_TOL).collect();
    let s_min = dimension_of(&a, &argmin);
    let s_max = dimension_of(&a, &argmax);
    let s_hat = dimension_of(&a, &plus);
    let (num, den) = plus.iter().fold((0.0, 0.0), |(n, m), &k| {
        let w = pow(a[k - 1], s_hat);
        (n + w * log(fabs(d[k - 1])), m + w * log(a[k - 1]))
    });
    let alpha_hat = (num / den).clamp(alpha_min, alpha_max);

    let (a1, ar, d1, dr) = (a[0], a[r - 1], d[0], d[r - 1]);
    let k1 = if d1 == 0.0 || dr == 0.0 {
        0.0
    } else {
        (log(ar) / log(a1)) * log(fabs(d1)) - log(fabs(dr))
    };
    let k2 = if dr == 0.0 { 0.0 } else { log(ar) - log(fabs(dr)) };
    let k1_left = if d1 == 0.0 || dr == 0.0 {
        0.0
    } else {
        (log(a1) / log(ar)) * log(fabs(dr)) - log(fabs(d1))
    };
    let k2_left = if d1 == 0.0 { 0.0 } else { log(a1) - log(fabs(d1)) };

    let (lambda, lambda_warnings) = lambda_set(system);
    let below = (0..r).all(|i| fabs(d[i]) < a[i]);
    let regime = if below && !lambda.is_empty() { Regime::CaseB } else { Regime::CaseA };
    let (sigma, p_star, alpha0) = if regime == Regime::CaseB {
        let terms: Vec<(f64, f64)> =
            plus.iter().map(|&k| (0.0, log(fabs(d[k - 1]) / a[k - 1]))).collect();
        let sigma = solve_exp_sum(&terms);
        let p: Vec<f64> = (0..r)
            .map(|i| if d[i] == 0.0 { 0.0 } else { pow(fabs(d[i]) / a[i], sigma) })
            .collect();
        let (num, den) = plus.iter().fold((0.0, 0.0), |(n, m), &k| {
            (n + p[k - 1] * log(fabs(d[k - 1])), m + p[k - 1] * log(a[k - 1]))
        });
        (Some(sigma), Some(p), Some(num / den))
    } else {
        (None, None, None)
    };

    Ok(SpectrumConstants {
        r,
        a,
        d,
        index_plus: plus,
        rho,
        alpha_min,
        alpha_max,
        argmin,
        argmax,
        s_min,
        s_max,
        s_hat,
        alpha_hat,
        k1,
        k2,
        k1_left,
        k2_left,
        lambda,
        lambda_warnings,
        regime,
        sigma,
        p_star,
        alpha0,
        polynomial: is_polynomial(system),
    })
}
