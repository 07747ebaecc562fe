//! Pointwise Hölder exponents from codings.
//!
//! For the right exponent the relevant runs are terminal runs of the digit
//! `r`; for the left exponent the roles of `1` and `r` are exchanged.

use libm::{ceil, fabs, log};
use serde::{Deserialize, Serialize};

use crate::coding::{in_t, Coding, CutPoint, RunTracker, TStatus};
use crate::constants::SpectrumConstants;
use crate::error::{Error, Result};
use crate::evaluator::{derivative_series, DerivativeValue};
use crate::spectrum::Exponent;
use crate::system::SelfAffineSystem;

/// Smallest horizon accepted for finite-horizon estimates.
pub const MIN_HORIZON: usize = 16;
/// Fraction of the horizon over which running minima are taken.
pub const DEFAULT_TAIL: f64 = 0.25;
/// Absolute tolerance for derivative series tails.
pub const DERIVATIVE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Right,
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Closed form over the period of an eventually periodic coding.
    ExactPeriodic,
    /// Minimum of the ratio sequences over `[ceil((1 - tail) n), n]`.
    FiniteHorizon(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gammas {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma: f64,
    pub method: Method,
}

/// Options for finite-horizon estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizonOptions {
    pub horizon: Option<usize>,
    pub tail: f64,
}

impl Default for HorizonOptions {
    fn default() -> Self {
        Self { horizon: None, tail: DEFAULT_TAIL }
    }
}

impl HorizonOptions {
    pub fn horizon(n: usize) -> Self {
        Self { horizon: Some(n), ..Self::default() }
    }
}

/// Orientation-dependent ingredients of the ratio sequences.
struct Orientation<'a> {
    c: &'a SpectrumConstants,
    side: Side,
}

impl Orientation<'_> {
    fn run_digit(&self) -> usize {
        match self.side {
            Side::Right => self.c.r,
            Side::Left => 1,
        }
    }

    fn k1(&self) -> f64 {
        match self.side {
            Side::Right => self.c.k1,
            Side::Left => self.c.k1_left,
        }
    }

    fn k2(&self) -> f64 {
        match self.side {
            Side::Right => self.c.k2,
            Side::Left => self.c.k2_left,
        }
    }

    /// `(chi, zeta)` for the digit preceding the terminal run.
    fn indicators(&self, pivot: Option<usize>) -> (f64, f64) {
        let Some(k) = pivot else { return (0.0, 0.0) };
        let (neighbour, lambda_index) = match self.side {
            Side::Right => (k + 1, Some(k)),
            Side::Left => (k - 1, k.checked_sub(1)),
        };
        let chi = self.c.is_plus(neighbour);
        let zeta = lambda_index.is_some_and(|j| self.c.in_lambda(j));
        (chi as u8 as f64, zeta as u8 as f64)
    }

    fn pivot(&self, t: &RunTracker) -> Option<usize> {
        match self.side {
            Side::Right => t.pivot_right(),
            Side::Left => t.pivot_left(),
        }
    }

    fn run(&self, t: &RunTracker) -> usize {
        match self.side {
            Side::Right => t.l_plus(),
            Side::Left => t.l_minus(),
        }
    }
}

fn logs(c: &SpectrumConstants, k: usize) -> (f64, f64) {
    (log(fabs(c.d[k - 1])), log(c.a[k - 1]))
}

fn first_zero_digit(c: &SpectrumConstants, coding: &Coding, limit: Option<usize>) -> Option<usize> {
    let n = limit.unwrap_or(coding.prefix.len() + coding.period.len());
    coding
        .digits()
        .take(n)
        .position(|k| !c.is_plus(k))
        .map(|i| i + 1)
}

/// The three ratio values at depth `n` (not their liminf).
pub fn gamma_ratios_at(c: &SpectrumConstants, coding: &Coding, n: usize, side: Side) -> Result<[f64; 3]> {
    if let Some(position) = first_zero_digit(c, coding, Some(n)) {
        return Err(Error::InfiniteExponent { position });
    }
    let o = Orientation { c, side };
    let mut t = RunTracker::new(c.r);
    let (mut num, mut den) = (0.0, 0.0);
    let mut digits = coding.digits();
    for _ in 0..n {
        let k = digits.next().ok_or(Error::HorizonTooSmall { horizon: t.n() })?;
        let (ld, la) = logs(c, k);
        num += ld;
        den += la;
        t.push(k);
    }
    let run = o.run(&t) as f64;
    let (chi, zeta) = o.indicators(o.pivot(&t));
    Ok([num / den, (num + o.k1() * chi * run) / den, (num + o.k2() * zeta * run) / den])
}

/// `gamma_0, gamma_1, gamma_2` and their minimum for one side.
///
/// Eventually periodic codings are resolved in closed form unless a
/// horizon is forced; finite words use running minima over the last
/// `tail` fraction of the horizon.
pub fn gammas(c: &SpectrumConstants, coding: &Coding, side: Side, opts: HorizonOptions) -> Result<Gammas> {
    let o = Orientation { c, side };
    if coding.is_periodic() && opts.horizon.is_none() {
        if let Some(position) = first_zero_digit(c, coding, None) {
            return Err(Error::InfiniteExponent { position });
        }
        let canon = coding.canonical();
        let (num, den) = canon.period.iter().fold((0.0, 0.0), |(n, d), &k| {
            let (ld, la) = logs(c, k);
            (n + ld, d + la)
        });
        let g0 = num / den;
        let (g1, g2) = if canon.constant_tail() == Some(o.run_digit()) {
            // The terminal run grows linearly: L_n / n -> 1.
            let pivot = canon.prefix.last().copied();
            let (chi, zeta) = o.indicators(pivot);
            ((num + o.k1() * chi) / den, (num + o.k2() * zeta) / den)
        } else {
            (g0, g0)
        };
        return Ok(Gammas { gamma0: g0, gamma1: g1, gamma2: g2, gamma: g0.min(g1).min(g2), method: Method::ExactPeriodic });
    }

    let available = coding.len().unwrap_or(usize::MAX);
    let horizon = opts.horizon.unwrap_or(available).min(available);
    if horizon < MIN_HORIZON {
        return Err(Error::HorizonTooSmall { horizon });
    }
    if let Some(position) = first_zero_digit(c, coding, Some(horizon)) {
        return Err(Error::InfiniteExponent { position });
    }
    let start = (ceil(horizon as f64 * (1.0 - opts.tail.clamp(0.0, 1.0))) as usize).max(1);
    let mut t = RunTracker::new(c.r);
    let (mut num, mut den) = (0.0, 0.0);
    let mut mins = [f64::INFINITY; 3];
    for k in coding.digits().take(horizon) {
        let (ld, la) = logs(c, k);
        num += ld;
        den += la;
        t.push(k);
        if t.n() >= start {
            let run = o.run(&t) as f64;
            let (chi, zeta) = o.indicators(o.pivot(&t));
            let r = [num / den, (num + o.k1() * chi * run) / den, (num + o.k2() * zeta * run) / den];
            for (m, v) in mins.iter_mut().zip(r) {
                *m = m.min(v);
            }
        }
    }
    let [g0, g1, g2] = mins;
    Ok(Gammas { gamma0: g0, gamma1: g1, gamma2: g2, gamma: g0.min(g1).min(g2), method: Method::FiniteHorizon(horizon) })
}

/// One-sided exponent with the derivative when it exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneSided {
    pub alpha: Exponent,
    /// `None` when a zero branch makes the exponent infinite.
    pub gammas: Option<Gammas>,
    pub derivative: Option<DerivativeValue>,
}

fn holder(
    system: &SelfAffineSystem,
    c: &SpectrumConstants,
    coding: &Coding,
    side: Side,
    opts: HorizonOptions,
) -> Result<OneSided> {
    if c.polynomial {
        return Err(Error::PolynomialDegenerate);
    }
    coding.check_digits(c.r)?;
    match in_t(system, coding) {
        TStatus::Cut(_) => return Err(Error::CutPoint),
        TStatus::Endpoint(_) => return Err(Error::Endpoint),
        TStatus::Regular | TStatus::Undecided => {}
    }
    let (alpha, gammas) = match gammas(c, coding, side, opts) {
        Ok(g) => (Exponent::Finite(g.gamma), Some(g)),
        Err(Error::InfiniteExponent { .. }) => (Exponent::Infinite, None),
        Err(e) => return Err(e),
    };
    let derivative = if alpha.to_f64() > 1.0 {
        derivative_series(system, coding, DERIVATIVE_TOL).ok()
    } else {
        None
    };
    Ok(OneSided { alpha, gammas, derivative })
}

/// Right exponent at a point outside the cut-point set.
pub fn holder_right(
    system: &SelfAffineSystem,
    c: &SpectrumConstants,
    coding: &Coding,
    opts: HorizonOptions,
) -> Result<OneSided> {
    holder(system, c, coding, Side::Right, opts)
}

/// Left exponent: digits 1 and r exchange roles in the run corrections.
pub fn holder_left(
    system: &SelfAffineSystem,
    c: &SpectrumConstants,
    coding: &Coding,
    opts: HorizonOptions,
) -> Result<OneSided> {
    holder(system, c, coding, Side::Left, opts)
}

/// Exponents at a cut point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    pub alpha_plus: Exponent,
    pub alpha_minus: Exponent,
    pub alpha: Exponent,
    pub differentiable: bool,
    pub k_n0: usize,
    pub k_n0_in_lambda: bool,
    pub left: Coding,
    pub right: Coding,
}

fn ratio_exponent(d: f64, a: f64) -> Exponent {
    if d == 0.0 {
        Exponent::Infinite
    } else {
        Exponent::Finite(log(fabs(d)) / log(a))
    }
}

pub fn cut_point_exponents(c: &SpectrumConstants, cut: &CutPoint) -> CutReport {
    let r = c.r;
    let alpha_plus = ratio_exponent(c.d[0], c.a[0]);
    let alpha_minus = ratio_exponent(c.d[r - 1], c.a[r - 1]);
    let (ap, am) = (alpha_plus.to_f64(), alpha_minus.to_f64());
    let in_lambda = c.in_lambda(cut.k_n0);
    let (alpha, differentiable) = if ap > 1.0 && am > 1.0 {
        if in_lambda {
            (Exponent::Finite(1.0), false)
        } else {
            (Exponent::from_f64(ap.min(am)), true)
        }
    } else {
        (Exponent::from_f64(ap.min(am)), false)
    };
    CutReport {
        alpha_plus,
        alpha_minus,
        alpha,
        differentiable,
        k_n0: cut.k_n0,
        k_n0_in_lambda: in_lambda,
        left: cut.left.clone(),
        right: cut.right.clone(),
    }
}

/// Full report at a point given by a coding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub gamma0: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub gamma: Exponent,
    pub alpha_right: Exponent,
    pub alpha_left: Exponent,
    pub alpha: Exponent,
    pub derivative: Option<f64>,
    pub derivative_left: Option<f64>,
    pub method: Option<Method>,
    pub cut_point: Option<CutReport>,
}

pub fn exponent_report(
    system: &SelfAffineSystem,
    c: &SpectrumConstants,
    coding: &Coding,
    opts: HorizonOptions,
) -> Result<ExponentReport> {
    if c.polynomial {
        return Err(Error::PolynomialDegenerate);
    }
    coding.check_digits(c.r)?;
    match in_t(system, coding) {
        TStatus::Endpoint(_) => Err(Error::Endpoint),
        TStatus::Cut(cut) => {
            let rep = cut_point_exponents(c, &cut);
            let d_right = derivative_series(system, &cut.right, DERIVATIVE_TOL).ok().map(|d| d.value);
            let d_left = derivative_series(system, &cut.left, DERIVATIVE_TOL).ok().map(|d| d.value);
            Ok(ExponentReport {
                gamma0: None,
                gamma1: None,
                gamma2: None,
                gamma: rep.alpha_plus,
                alpha_right: rep.alpha_plus,
                alpha_left: rep.alpha_minus,
                alpha: rep.alpha,
                derivative: d_right.filter(|_| rep.alpha_plus.to_f64() > 1.0),
                derivative_left: d_left.filter(|_| rep.alpha_minus.to_f64() > 1.0),
                method: Some(Method::ExactPeriodic),
                cut_point: Some(rep),
            })
        }
        TStatus::Regular | TStatus::Undecided => {
            let right = holder_right(system, c, coding, opts)?;
            let left = holder_left(system, c, coding, opts)?;
            let g = right.gammas;
            Ok(ExponentReport {
                gamma0: g.map(|g| g.gamma0),
                gamma1: g.map(|g| g.gamma1),
                gamma2: g.map(|g| g.gamma2),
                gamma: right.alpha,
                alpha_right: right.alpha,
                alpha_left: left.alpha,
                alpha: Exponent::from_f64(right.alpha.to_f64().min(left.alpha.to_f64())),
                derivative: right.derivative.map(|d| d.value),
                derivative_left: left.derivative.map(|d| d.value),
                method: g.map(|g| g.method),
                cut_point: None,
            })
        }
    }
}
