//! Empirical checks: log-log regression of local oscillations, difference
//! quotients, and exponents at almost every point.
//!
//! Window samples are left endpoints of basic intervals, where phi is known
//! exactly from the branch compositions, so no point renormalisation (and
//! its rounding) is involved.

use alloc::vec::Vec;
use libm::{fabs, log, pow, round};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::{project, Coding};
use crate::constants::SpectrumConstants;
use crate::error::{Error, Result};
use crate::evaluator::{Composition, Evaluator};
use crate::exponent::{exponent_report, gammas, HorizonOptions, Side};
use crate::spectrum::Exponent;
use crate::system::SelfAffineSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Window {
    Left,
    Right,
    Both,
}

/// Polynomial removed before measuring oscillation: `phi(xi)`, plus
/// `D (x - xi)` when a derivative is supplied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Baseline {
    pub xi: f64,
    pub phi_xi: f64,
    pub derivative: Option<f64>,
}

impl Baseline {
    fn at(&self, x: f64) -> f64 {
        self.phi_xi + self.derivative.map_or(0.0, |d| d * (x - self.xi))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOptions {
    /// Window radii; `None` uses [`admissible_scales`].
    pub scales: Option<Vec<f64>>,
    pub samples_per_scale: usize,
    /// Number of largest scales left out of the fit.
    pub drop_largest: usize,
    /// Basic intervals down to `h / refine` contribute their vertices.
    pub refine: f64,
    /// Scales `i` and `i + phases` share an intercept in the fit; see
    /// [`periodic_scales`]. `1` is a plain least-squares line.
    pub phases: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { scales: None, samples_per_scale: 64, drop_largest: 2, refine: 64.0, phases: 1, seed: 0 }
    }
}

/// Smallest default radius.
pub const MIN_SCALE: f64 = 1.0 / (1u64 << 24) as f64;

/// Half-octave radii `2^(-j/2)` from the largest one fitting inside
/// `[0, 1]` around `xi` (at most `1/4`) down to `2^-24`.
pub fn admissible_scales(xi: f64, window: Window) -> Vec<f64> {
    let dist = window_room(xi, window);
    (4..=48).map(|j| pow(2.0, -0.5 * j as f64)).filter(|&h| h <= dist).collect()
}

/// Radii for a point whose coding is eventually periodic with period
/// contraction `q = prod a_k`: `m` radii per factor `q`, spaced close to
/// half an octave, from the largest admissible one down to about `2^-24`.
/// Returns the radii and `m`; near the point `M(q h) / M(h)` is then the
/// same for every phase, which the grouped fit exploits.
pub fn periodic_scales(xi: f64, window: Window, q: f64) -> (Vec<f64>, usize) {
    periodic_scales_within(xi, window, q, window_room(xi, window))
}

fn periodic_scales_within(xi: f64, window: Window, q: f64, room: f64) -> (Vec<f64>, usize) {
    let room = room.min(window_room(xi, window)).min(0.25);
    let half_octave = core::f64::consts::FRAC_1_SQRT_2;
    let m = round(log(q) / log(half_octave)).max(1.0) as usize;
    let ratio = pow(q, 1.0 / m as f64);
    let mut out = Vec::new();
    let mut h = room;
    while h >= MIN_SCALE * half_octave {
        out.push(h);
        h *= ratio;
    }
    (out, m)
}

fn window_room(xi: f64, window: Window) -> f64 {
    match window {
        Window::Left => xi,
        Window::Right => 1.0 - xi,
        Window::Both => xi.min(1.0 - xi),
    }
}

/// Polynomial removed before the fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Subtracted {
    Constant,
    Linear(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Scales used in the fit with their measured oscillations.
    pub scales: Vec<f64>,
    pub oscillations: Vec<f64>,
    pub subtracted: Subtracted,
}

const MAX_NODES: usize = 1 << 20;

struct Cylinder {
    left: f64,
    len: f64,
    comp: Composition,
}

/// `max |phi - P|` over samples in `[lo, hi]`.
fn window_max(
    system: &SelfAffineSystem,
    base: &Baseline,
    lo: f64,
    hi: f64,
    opts: &OracleOptions,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let part: Vec<f64> = system.partition().collect();
    let verts = system.vertices();
    let r = system.r();
    let min_len = (hi - lo) / opts.refine;
    let mut best: f64 = 0.0;
    let mut take = |x: f64, y: f64| {
        if x >= lo && x <= hi {
            best = best.max(fabs(y - base.at(x)));
        }
    };

    let mut stack = alloc::vec![Cylinder { left: 0.0, len: 1.0, comp: Composition::IDENTITY }];
    let mut visited = 0;
    while let Some(cy) = stack.pop() {
        if cy.left > hi || cy.left + cy.len < lo {
            continue;
        }
        visited += 1;
        for (k, v) in verts.iter().enumerate() {
            take(cy.left + cy.len * part[k], cy.comp.apply(v[0], v[1]));
        }
        if visited >= MAX_NODES {
            break;
        }
        for k in 1..=r {
            let b = system.branch(k);
            if cy.len * b.a >= min_len {
                stack.push(Cylinder { left: cy.left + cy.len * b.b, len: cy.len * b.a, comp: cy.comp.push(system, k) });
            }
        }
    }

    // Random points: follow the digits of a uniform target down to a basic
    // interval far below the window scale and take its left end.
    let resolution = (hi - lo) * 1e-9;
    for _ in 0..opts.samples_per_scale {
        let u = rng.gen_range(lo..=hi);
        let mut cy = Cylinder { left: 0.0, len: 1.0, comp: Composition::IDENTITY };
        let mut depth = 0;
        while cy.len > resolution && depth < 10_000 {
            let mut k = 1;
            while k < r && u >= cy.left + cy.len * part[k] {
                k += 1;
            }
            let b = system.branch(k);
            cy = Cylinder { left: cy.left + cy.len * b.b, len: cy.len * b.a, comp: cy.comp.push(system, k) };
            depth += 1;
        }
        take(cy.left, cy.comp.apply(0.0, verts[0][1]));
    }
    best
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r2)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    least_squares_grouped(x, y, 1)
}

/// Common slope with one intercept per class `i mod groups`. Returns the
/// slope, the mean intercept, and `r2` against the overall mean.
pub fn least_squares_grouped(x: &[f64], y: &[f64], groups: usize) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let groups = groups.max(1);
    if x.len() < groups + 1 {
        return Err(Error::InvalidArgument { reason: "too few points for the number of groups" });
    }
    let mut mean = alloc::vec![(0.0, 0.0, 0usize); groups];
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        let g = &mut mean[i % groups];
        g.0 += a;
        g.1 += b;
        g.2 += 1;
    }
    for g in &mut mean {
        g.0 /= g.2 as f64;
        g.1 /= g.2 as f64;
    }
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        let (mx, my, _) = mean[i % groups];
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument { reason: "abscissae are constant within groups" });
    }
    let slope = sxy / sxx;
    let n = x.len() as f64;
    let my_all = y.iter().sum::<f64>() / n;
    let mx_all = x.iter().sum::<f64>() / n;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        let (mx, my, _) = mean[i % groups];
        let e = b - my - slope * (a - mx);
        ss_res += e * e;
        ss_tot += (b - my_all) * (b - my_all);
    }
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok((slope, my_all - slope * mx_all, r2))
}

/// Slope of `log M(h)` against `log h`, `M(h)` the largest deviation from
/// the baseline over the window of radius `h`.
pub fn estimate_exponent(
    system: &SelfAffineSystem,
    base: &Baseline,
    window: Window,
    opts: &OracleOptions,
) -> Result<RegressionEstimate> {
    if !(base.xi > 0.0 && base.xi < 1.0) {
        return Err(Error::OutOfDomain { x: base.xi });
    }
    let mut scales = opts.scales.clone().unwrap_or_else(|| admissible_scales(base.xi, window));
    scales.sort_by(|a, b| b.total_cmp(a));
    scales.dedup();
    let room = window_room(base.xi, window);
    if scales.iter().any(|&h| !(h > 0.0 && h <= room)) {
        return Err(Error::DegenerateWindow);
    }
    let scales: Vec<f64> = scales.into_iter().skip(opts.drop_largest).collect();
    if scales.len() < 2 {
        return Err(Error::DegenerateWindow);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut osc = Vec::with_capacity(scales.len());
    for &h in &scales {
        let (lo, hi) = match window {
            Window::Left => (base.xi - h, base.xi),
            Window::Right => (base.xi, base.xi + h),
            Window::Both => (base.xi - h, base.xi + h),
        };
        let m = window_max(system, base, lo, hi, opts, &mut rng);
        if !(m > 0.0) {
            return Err(Error::ZeroOscillation);
        }
        osc.push(m);
    }
    let lx: Vec<f64> = scales.iter().map(|&h| log(h)).collect();
    let ly: Vec<f64> = osc.iter().map(|&m| log(m)).collect();
    let (slope, intercept, r2) = least_squares_grouped(&lx, &ly, opts.phases)?;
    let subtracted = base.derivative.map_or(Subtracted::Constant, Subtracted::Linear);
    Ok(RegressionEstimate { slope, intercept, r2, scales, oscillations: osc, subtracted })
}

/// Constant term `A` of the partial sums `A + B q^m` of the derivative
/// series along the period of an eventually periodic coding, i.e. the
/// closed-form series value continued past `|q| >= 1`. Removing `A (x - xi)`
/// leaves the exponent unchanged when it is below 1 and cancels the
/// slowly decaying `h^(1 - alpha)` bias of the fit. `None` when `q = 1`.
pub fn linear_coefficient(system: &SelfAffineSystem, coding: &Coding) -> Option<f64> {
    if !coding.is_periodic() {
        return None;
    }
    let partial = |digits: &[usize]| {
        digits.iter().fold((0.0, 1.0), |(sum, prod), &k| {
            let b = system.branch(k);
            (sum + prod * b.c / b.a, prod * b.d / b.a)
        })
    };
    let (pre_sum, pre_prod) = partial(&coding.prefix);
    let (per_sum, q) = partial(&coding.period);
    if fabs(q - 1.0) < 1e-12 {
        return None;
    }
    Some(pre_sum + pre_prod * per_sum / (1.0 - q))
}

/// Baseline at the point addressed by an eventually periodic coding.
pub fn baseline_at(system: &SelfAffineSystem, coding: &Coding, derivative: Option<f64>) -> Baseline {
    let ev = Evaluator::new(system);
    Baseline { xi: project(system, coding), phi_xi: ev.evaluate_coding(coding), derivative }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodingCheck {
    pub coding: Coding,
    pub xi: f64,
    pub exact: Exponent,
    pub estimate: RegressionEstimate,
}

/// Exact exponent and regression estimate at an eventually periodic coding
/// off the cut-point set. Unless scales are given, they follow
/// [`periodic_scales`] with one intercept per phase.
pub fn estimate_at_coding(
    system: &SelfAffineSystem,
    c: &SpectrumConstants,
    coding: &Coding,
    window: Window,
    opts: &OracleOptions,
) -> Result<CodingCheck> {
    if !coding.is_periodic() {
        return Err(Error::InvalidArgument { reason: "coding must be eventually periodic" });
    }
    let coding = coding.canonical();
    let rep = exponent_report(system, c, &coding, HorizonOptions::default())?;
    if rep.cut_point.is_some() {
        return Err(Error::CutPoint);
    }
    let exact = match window {
        Window::Right => rep.alpha_right,
        Window::Left => rep.alpha_left,
        Window::Both => rep.alpha,
    };
    let derivative = if exact.to_f64() > 1.0 {
        match window {
            Window::Left => rep.derivative_left,
            _ => rep.derivative,
        }
    } else {
        linear_coefficient(system, &coding)
    };
    let base = baseline_at(system, &coding, derivative);
    let mut opts = opts.clone();
    if opts.scales.is_none() {
        let q: f64 = coding.period.iter().map(|&k| system.branch(k).a).product();
        // Self-similarity around xi starts inside the prefix cylinder.
        let (mut left, mut len) = (0.0, 1.0);
        for &k in &coding.prefix {
            let b = system.branch(k);
            left += len * b.b;
            len *= b.a;
        }
        let room = match window {
            Window::Left => base.xi - left,
            Window::Right => left + len - base.xi,
            Window::Both => (base.xi - left).min(left + len - base.xi),
        };
        let (scales, m) = periodic_scales_within(base.xi, window, q, room);
        opts.scales = Some(scales);
        opts.phases = m;
    }
    let estimate = estimate_exponent(system, &base, window, &opts)?;
    Ok(CodingCheck { coding, xi: base.xi, exact, estimate })
}

/// `count` distinct eventually periodic codings over the digits of `I_+`
/// (prefix up to 2 digits, period up to `max_period`), avoiding the
/// constant tails of cut points and endpoints.
pub fn random_periodic_codings(c: &SpectrumConstants, count: usize, max_period: usize, seed: u64) -> Vec<Coding> {
    let plus: Vec<usize> = (1..=c.r).filter(|&k| c.is_plus(k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Coding> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 1000 * count.max(1) {
        attempts += 1;
        let prefix_len = rng.gen_range(0..=2);
        let period_len = rng.gen_range(1..=max_period.max(1));
        let mut draw = |len: usize| (0..len).map(|_| plus[rng.gen_range(0..plus.len())]).collect::<Vec<_>>();
        let prefix = draw(prefix_len);
        let coding = Coding::new(prefix, draw(period_len)).canonical();
        let tail = coding.constant_tail();
        if tail == Some(1) || tail == Some(c.r) || out.contains(&coding) {
            continue;
        }
        out.push(coding);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    /// `(h, |(phi(xi + h) - phi(xi)) / h - D|)` per step.
    pub steps: Vec<(f64, f64)>,
    pub h: f64,
    pub discrepancy: f64,
}

/// Forward difference quotients against a claimed derivative `d`.
pub fn check_derivative(system: &SelfAffineSystem, xi: f64, d: f64, steps: &[f64]) -> Result<DerivativeCheck> {
    let ev = Evaluator::new(system);
    let tol = 1e-15;
    let phi_xi = ev.evaluate(xi, tol)?.value;
    let mut out = Vec::with_capacity(steps.len());
    for &h in steps {
        if !(h > 0.0) || xi + h > 1.0 {
            return Err(Error::InvalidArgument { reason: "steps must be positive and stay inside [0, 1]" });
        }
        let q = (ev.evaluate(xi + h, tol)?.value - phi_xi) / h;
        out.push((h, fabs(q - d)));
    }
    let &(h, discrepancy) = out.last().ok_or(Error::InvalidArgument { reason: "no steps" })?;
    Ok(DerivativeCheck { steps: out, h, discrepancy })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AeSummary {
    pub points: usize,
    pub horizon: usize,
    /// `sum a_k log|d_k| / sum a_k log a_k`.
    pub expected: f64,
    pub fraction_finite: f64,
    pub median: f64,
    /// 10%, 20%, ..., 90% quantiles of the finite exponents.
    pub deciles: Vec<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Exponents at points drawn from Lebesgue measure, i.e. codings with
/// independent digits of law `a`, truncated at `horizon`.
pub fn ae_exponent_sample(c: &SpectrumConstants, points: usize, horizon: usize, seed: u64) -> Result<AeSummary> {
    if points == 0 {
        return Err(Error::InvalidArgument { reason: "no points requested" });
    }
    let law = WeightedIndex::new(&c.a).map_err(|_| Error::InvalidProbability)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = HorizonOptions::horizon(horizon);
    let mut finite = Vec::with_capacity(points);
    for _ in 0..points {
        let digits: Vec<usize> = (0..horizon).map(|_| law.sample(&mut rng) + 1).collect();
        let coding = Coding::finite(digits);
        let right = gammas(c, &coding, Side::Right, opts);
        let left = gammas(c, &coding, Side::Left, opts);
        match (right, left) {
            (Ok(r), Ok(l)) => finite.push(r.gamma.min(l.gamma)),
            (Err(Error::InfiniteExponent { .. }), _) | (_, Err(Error::InfiniteExponent { .. })) => {}
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    let (num, den) = c
        .a
        .iter()
        .zip(&c.d)
        .filter(|(_, d)| **d != 0.0)
        .fold((0.0, 0.0), |(n, m), (&a, &d)| (n + a * log(fabs(d)), m + a * log(a)));
    let fraction_finite = finite.len() as f64 / points as f64;
    finite.sort_by(f64::total_cmp);
    let (median, deciles) = if finite.is_empty() {
        (f64::INFINITY, Vec::new())
    } else {
        (quantile(&finite, 0.5), (1..10).map(|i| quantile(&finite, i as f64 / 10.0)).collect())
    };
    let expected = if c.a.iter().zip(&c.d).any(|(_, d)| *d == 0.0) { f64::INFINITY } else { num / den };
    Ok(AeSummary { points, horizon, expected, fraction_finite, median, deciles })
}
