//! Evaluation of phi, its one-sided derivative series, and polynomial
//! detection.

use alloc::vec::Vec;
use libm::{fabs, log};
use serde::{Deserialize, Serialize};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coding::Coding;
use crate::error::{Error, Result};
use crate::rational;
use crate::system::SelfAffineSystem;

/// Default cap on the number of digits composed by [`evaluate`].
pub const MAX_DEPTH: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    /// Guaranteed radius around `value` containing phi(x), up to rounding.
    pub error_bound: f64,
    pub depth_used: usize,
}

/// Affine form `phi(g(t)) = shift + slope * t + scale * phi(t)` built by
/// composing branch maps digit by digit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Composition {
    pub shift: f64,
    pub slope: f64,
    pub scale: f64,
}

impl Composition {
    pub const IDENTITY: Composition = Composition { shift: 0.0, slope: 0.0, scale: 1.0 };

    /// Composition after appending digit `k`.
    #[inline]
    pub fn push(self, system: &SelfAffineSystem, k: usize) -> Composition {
        let b = system.branch(k);
        Composition {
            shift: self.shift + self.slope * b.b + self.scale * b.e,
            slope: self.slope * b.a + self.scale * b.c,
            scale: self.scale * b.d,
        }
    }

    #[inline]
    pub fn apply(&self, t: f64, phi_t: f64) -> f64 {
        self.shift + self.slope * t + self.scale * phi_t
    }
}

/// Evaluator with the range enclosure of phi precomputed.
#[derive(Clone, Debug)]
pub struct Evaluator<'a> {
    system: &'a SelfAffineSystem,
    partition: Vec<f64>,
    mid: f64,
    half: f64,
    max_depth: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(system: &'a SelfAffineSystem) -> Self {
        let (lo, hi) = system.range_enclosure();
        Self {
            system,
            partition: system.partition().collect(),
            mid: 0.5 * (lo + hi),
            half: 0.5 * (hi - lo),
            max_depth: MAX_DEPTH,
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn system(&self) -> &SelfAffineSystem {
        self.system
    }

    /// Half-width of the enclosure of the range of phi.
    pub fn oscillation_bound(&self) -> f64 {
        self.half
    }

    /// phi(x) with `|value - phi(x)| <= error_bound <= tol` in exact
    /// arithmetic. In floating point the digits followed are those of a
    /// point within a few ulp of `x`; see [`Evaluator::evaluate_exact`].
    pub fn evaluate(&self, x: f64, tol: f64) -> Result<EvalResult> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain { x });
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument { reason: "tolerance must be positive" });
        }
        let part = &self.partition;
        let r = self.system.r();
        let mut comp = Composition::IDENTITY;
        let mut t = x;
        let mut depth = 0;
        loop {
            if let Some(k) = part.iter().position(|&v| v == t) {
                let y = self.system.vertices()[k][1];
                return Ok(EvalResult { value: comp.apply(t, y), error_bound: 0.0, depth_used: depth });
            }
            let bound = fabs(comp.scale) * self.half;
            if bound <= tol {
                return Ok(EvalResult {
                    value: comp.apply(t, self.mid),
                    error_bound: bound,
                    depth_used: depth,
                });
            }
            if depth >= self.max_depth {
                return Err(Error::NonConvergence { depth, bound });
            }
            let mut k = 1;
            while k < r && t > part[k] {
                k += 1;
            }
            let b = self.system.branch(k);
            comp = comp.push(self.system, k);
            t = ((t - b.b) / b.a).clamp(0.0, 1.0);
            depth += 1;
        }
    }

    /// Like [`Evaluator::evaluate`], but renormalises the point in exact
    /// rational arithmetic when the partition is rational, so the digits
    /// followed are exactly those of `x`. The float path follows the digits
    /// of a point within a few ulp of `x`, which matters for functions of
    /// low regularity near partitions that are not dyadic.
    pub fn evaluate_exact(&self, x: &BigRational, tol: f64) -> Result<EvalResult> {
        let Some(part) = self.system.exact_partition() else {
            return self.evaluate(rational::to_f64(x), tol);
        };
        if *x < BigRational::zero() || *x > BigRational::one() {
            return Err(Error::OutOfDomain { x: rational::to_f64(x) });
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument { reason: "tolerance must be positive" });
        }
        let r = self.system.r();
        let mut comp = Composition::IDENTITY;
        let mut t = x.clone();
        let mut depth = 0;
        loop {
            if let Some(k) = part.iter().position(|v| *v == t) {
                let y = self.system.vertices()[k][1];
                let value = comp.apply(self.partition[k], y);
                return Ok(EvalResult { value, error_bound: 0.0, depth_used: depth });
            }
            let bound = fabs(comp.scale) * self.half;
            if bound <= tol {
                let value = comp.apply(rational::to_f64(&t), self.mid);
                return Ok(EvalResult { value, error_bound: bound, depth_used: depth });
            }
            if depth >= self.max_depth {
                return Err(Error::NonConvergence { depth, bound });
            }
            let mut k = 1;
            while k < r && t > part[k] {
                k += 1;
            }
            comp = comp.push(self.system, k);
            t = (&t - &part[k - 1]) / (&part[k] - &part[k - 1]);
            depth += 1;
        }
    }

    /// phi at the point addressed by `coding`. Periodic codings are closed
    /// exactly through the fixed point of the period map; finite words
    /// address the left end of their basic interval.
    pub fn evaluate_coding(&self, coding: &Coding) -> f64 {
        let s = self.system;
        let (_, h) = horizontal_and_vertical(s, &coding.prefix);
        if coding.period.is_empty() {
            return h.apply(0.0, s.vertices()[0][1]);
        }
        let (pg, ph) = horizontal_and_vertical(s, &coding.period);
        let t = pg.1 / (1.0 - pg.0);
        let phi_t = (ph.shift + ph.slope * t) / (1.0 - ph.scale);
        h.apply(t, phi_t)
    }
}

fn horizontal_and_vertical(s: &SelfAffineSystem, digits: &[usize]) -> ((f64, f64), Composition) {
    let mut scale = 1.0;
    let mut shift = 0.0;
    let mut comp = Composition::IDENTITY;
    for &k in digits {
        let b = s.branch(k);
        shift += scale * b.b;
        scale *= b.a;
        comp = comp.push(s, k);
    }
    ((scale, shift), comp)
}

/// One-shot evaluation; prefer [`Evaluator`] for repeated calls.
pub fn evaluate(system: &SelfAffineSystem, x: f64, tol: f64) -> Result<EvalResult> {
    Evaluator::new(system).evaluate(x, tol)
}

/// `n_points` evaluations on the uniform grid `i / (n_points - 1)`.
pub fn sample(system: &SelfAffineSystem, n_points: usize, tol: f64) -> Result<Vec<(f64, EvalResult)>> {
    if n_points < 2 {
        return Err(Error::InvalidArgument { reason: "at least two sample points are required" });
    }
    let ev = Evaluator::new(system);
    let m = (n_points - 1) as f64;
    (0..n_points)
        .map(|i| {
            let x = if i == n_points - 1 { 1.0 } else { i as f64 / m };
            ev.evaluate(x, tol).map(|v| (x, v))
        })
        .collect()
}

/// A one-sided derivative with the bound on the neglected tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Sum of `(c_{k_m}/a_{k_m}) prod_{i<m} (d_{k_i}/a_{k_i})` over the coding.
///
/// Periodic codings are summed in closed form (geometric series over the
/// period). Finite words rely on a decay margin estimated from the second
/// half of the word and fail with `TailBoundUnavailable` when none is
/// visible, or `NonConvergence` when the bound never drops below `tol`.
pub fn derivative_series(system: &SelfAffineSystem, coding: &Coding, tol: f64) -> Result<DerivativeValue> {
    let term_ratio = |k: usize| {
        let b = system.branch(k);
        (b.c / b.a, b.d / b.a)
    };
    let partial = |digits: &[usize]| {
        let mut sum = 0.0;
        let mut prod = 1.0;
        for &k in digits {
            let (ca, da) = term_ratio(k);
            sum += ca * prod;
            prod *= da;
        }
        (sum, prod)
    };
    let (pre_sum, pre_prod) = partial(&coding.prefix);
    if coding.is_periodic() {
        let (per_sum, ratio) = partial(&coding.period);
        if pre_prod == 0.0 {
            return Ok(DerivativeValue { value: pre_sum, tail_bound: 0.0, terms: coding.prefix.len() });
        }
        if fabs(ratio) >= 1.0 {
            let (num, den) = coding.period.iter().fold((0.0, 0.0), |(n, d), &k| {
                let b = system.branch(k);
                (n + log(fabs(b.d)), d + log(b.a))
            });
            return Err(Error::NotDifferentiable { gamma: num / den });
        }
        let value = pre_sum + pre_prod * per_sum / (1.0 - ratio);
        let terms = coding.prefix.len() + coding.period.len();
        return Ok(DerivativeValue { value, tail_bound: 0.0, terms });
    }

    let digits = &coding.prefix;
    let n = digits.len();
    if n < 2 {
        return Err(Error::TailBoundUnavailable);
    }
    let a_max = system.branches().iter().map(|b| b.a).fold(0.0, f64::max);
    let ln_a_max = log(a_max);
    let c_max = system.branches().iter().map(|b| fabs(b.c / b.a)).fold(0.0, f64::max);
    // log of |prod_{i<=m} d/a| for every m.
    let mut log_prod = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &k in digits {
        acc += log(fabs(term_ratio(k).1));
        log_prod.push(acc);
    }
    if acc == f64::NEG_INFINITY {
        // A zero branch terminates the series exactly.
        let (sum, _) = partial(digits);
        return Ok(DerivativeValue { value: sum, tail_bound: 0.0, terms: n });
    }
    let eps = (n / 2..n)
        .map(|m| log_prod[m] / ((m + 1) as f64 * ln_a_max))
        .fold(f64::INFINITY, f64::min);
    if !(eps > 0.0) {
        return Err(Error::TailBoundUnavailable);
    }
    let q = libm::pow(a_max, eps);
    let mut sum = 0.0;
    let mut prod = 1.0;
    let mut bound = f64::INFINITY;
    for (m, &k) in digits.iter().enumerate() {
        let (ca, da) = term_ratio(k);
        sum += ca * prod;
        prod *= da;
        // Terms beyond m+1 are bounded by c_max * q^(j-1), j > m+1.
        bound = c_max * libm::pow(q, (m + 1) as f64) / (1.0 - q);
        if m + 1 >= n / 2 && bound <= tol {
            return Ok(DerivativeValue { value: sum, tail_bound: bound, terms: m + 1 });
        }
    }
    Err(Error::NonConvergence { depth: n, bound })
}

/// True when phi agrees with a polynomial of degree at most 3: the cubic
/// through phi at 0, 1/3, 2/3, 1 reproduces phi at three further points to
/// within `1e-10`.
pub fn is_polynomial(system: &SelfAffineSystem) -> bool {
    let ev = Evaluator::new(system);
    let nodes = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
    let mut vals = [0.0; 4];
    for (v, &x) in vals.iter_mut().zip(&nodes) {
        match ev.evaluate(x, 1e-13) {
            Ok(r) => *v = r.value,
            Err(_) => return false,
        }
    }
    [1.0 / 7.0, 0.5, 0.9].iter().all(|&x| {
        let p = lagrange(&nodes, &vals, x);
        ev.evaluate(x, 1e-13).is_ok_and(|r| fabs(r.value - p) <= 1e-10)
    })
}

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut w = yi;
        for (j, &xj) in xs.iter().enumerate() {
            if i != j {
                w *= (x - xj) / (xi - xj);
            }
        }
        total += w;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;
    use alloc::vec;

    #[test]
    fn takagi_two_is_a_parabola() {
        let s = preset("takagi:2").unwrap();
        let r = evaluate(&s, 0.25, 1e-12).unwrap();
        assert!(fabs(r.value - 0.375) <= 1e-12);
        assert!(r.error_bound <= 1e-12);
        let r = evaluate(&s, 0.1, 1e-12).unwrap();
        assert!(fabs(r.value - 2.0 * 0.1 * 0.9) <= 1e-12);
    }

    #[test]
    fn vertices_are_interpolated_exactly() {
        let s = preset("skew-takagi:0.3,0.5,0.25").unwrap();
        for v in s.vertices() {
            let r = evaluate(&s, v[0], 1e-9).unwrap();
            assert_eq!(r.value, v[1]);
            assert_eq!(r.depth_used, 0);
        }
    }

    #[test]
    fn cantor_function_at_one_third() {
        let s = preset("okamoto:0.5").unwrap();
        assert!(fabs(evaluate(&s, 1.0 / 3.0, 1e-12).unwrap().value - 0.5) <= 1e-12);
        assert!(fabs(evaluate(&s, 0.5, 1e-12).unwrap().value - 0.5) <= 1e-12);
        // 1/4 = 0.(02) in base 3, phi(1/4) = 1/3. Thirds are not dyadic, so
        // the float path is only good to the modulus of continuity at ulp
        // scale.
        let ev = Evaluator::new(&s);
        let quarter = BigRational::new(1.into(), 4.into());
        assert!(fabs(ev.evaluate_exact(&quarter, 1e-12).unwrap().value - 1.0 / 3.0) <= 1e-12);
        assert!(fabs(ev.evaluate(0.25, 1e-12).unwrap().value - 1.0 / 3.0) <= 1e-8);
    }

    #[test]
    fn sample_grid_matches_parabola() {
        let s = preset("takagi:2").unwrap();
        let t = sample(&s, 5, 1e-12).unwrap();
        let expect = [0.0, 0.375, 0.5, 0.375, 0.0];
        for ((x, r), e) in t.iter().zip(expect) {
            assert!(fabs(r.value - e) <= 1e-12, "{x}");
        }
        assert!(sample(&s, 1, 1e-12).is_err());
    }

    #[test]
    fn slow_contraction_hits_the_depth_cap() {
        let s = preset("riesz-nagy:0.3").unwrap();
        let ev = Evaluator::new(&s).with_max_depth(5);
        let err = ev.evaluate(0.123456, 1e-15).unwrap_err();
        assert_eq!(err.name(), "NonConvergence");
    }

    #[test]
    fn coding_evaluation_matches_point_evaluation() {
        let s = preset("skew-takagi:0.3,0.5,0.25").unwrap();
        let ev = Evaluator::new(&s);
        let c = Coding::new(vec![2], vec![1, 2]);
        let x = crate::coding::project(&s, &c);
        let direct = ev.evaluate(x, 1e-14).unwrap().value;
        assert!(fabs(ev.evaluate_coding(&c) - direct) < 1e-13);
    }

    #[test]
    fn derivative_of_parabola_at_zero() {
        let s = preset("takagi:2").unwrap();
        let d = derivative_series(&s, &Coding::periodic(vec![1]), 1e-12).unwrap();
        assert!(fabs(d.value - 2.0) < 1e-14);
        // 2 - 4/3 at 1/3 = (1,2) repeated.
        let d = derivative_series(&s, &Coding::periodic(vec![1, 2]), 1e-12).unwrap();
        assert!(fabs(d.value - 2.0 / 3.0) < 1e-14);
    }

    #[test]
    fn derivative_of_singular_function_vanishes() {
        let s = preset("riesz-nagy:0.3").unwrap();
        let d = derivative_series(&s, &Coding::periodic(vec![1, 1, 2]), 1e-12).unwrap();
        assert!(fabs(d.value) < 1e-15);
    }

    #[test]
    fn expanding_period_is_not_differentiable() {
        let s = preset("takagi:1").unwrap();
        let err = derivative_series(&s, &Coding::periodic(vec![1, 2]), 1e-12).unwrap_err();
        assert_eq!(err.name(), "NotDifferentiable");
    }

    #[test]
    fn finite_word_uses_estimated_margin() {
        let s = preset("takagi:2").unwrap();
        let word: Vec<usize> = (0..200).map(|i| 1 + i % 2).collect();
        let d = derivative_series(&s, &Coding::finite(word), 1e-10).unwrap();
        assert!(fabs(d.value - 2.0 / 3.0) < 1e-10);
        let s = preset("takagi:1").unwrap();
        let err = derivative_series(&s, &Coding::finite(vec![1, 2, 1, 2]), 1e-10).unwrap_err();
        assert_eq!(err.name(), "TailBoundUnavailable");
    }

    #[test]
    fn polynomial_detection() {
        assert!(is_polynomial(&preset("takagi:2").unwrap()));
        assert!(is_polynomial(&preset("riesz-nagy:0.5").unwrap()));
        assert!(is_polynomial(&preset("okamoto:0.3333333333333333").unwrap()));
        assert!(!is_polynomial(&preset("takagi:1").unwrap()));
        assert!(!is_polynomial(&preset("riesz-nagy:0.3").unwrap()));
        assert!(!is_polynomial(&preset("skew-takagi:0.3,0.5,0.25").unwrap()));
    }
}
