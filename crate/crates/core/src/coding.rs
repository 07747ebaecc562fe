//! Symbolic addresses of points: digit codings, basic intervals, the
//! countable set of cut points and terminal-run statistics.
//!
//! Digits are 1-based: a coding over `r` branches uses digits `1..=r`, and
//! the point with coding `(k_1, k_2, ...)` is
//! `lim S_{k_1} o ... o S_{k_n}(0)`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use libm::fabs;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational;
use crate::system::SelfAffineSystem;

/// Absolute tolerance for recognising a float as a partition vertex image.
pub const CUT_TOL: f64 = 1e-14;

/// Orbit search in [`exact_coding`] gives up once a denominator exceeds
/// this many bits; orbits that keep growing never repeat.
pub const MAX_ORBIT_BITS: u64 = 4096;

/// Digit sequence: a finite prefix followed by a period repeated forever.
/// An empty period denotes a finite word.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coding {
    pub prefix: Vec<usize>,
    #[serde(default)]
    pub period: Vec<usize>,
}

impl Coding {
    pub fn new(prefix: Vec<usize>, period: Vec<usize>) -> Self {
        Self { prefix, period }
    }

    /// Purely periodic coding.
    pub fn periodic(period: Vec<usize>) -> Self {
        Self { prefix: Vec::new(), period }
    }

    /// Finite word without a period.
    pub fn finite(prefix: Vec<usize>) -> Self {
        Self { prefix, period: Vec::new() }
    }

    pub fn is_periodic(&self) -> bool {
        !self.period.is_empty()
    }

    /// Digit at 1-based position `i`, or `None` past the end of a finite word.
    #[inline]
    pub fn digit(&self, i: usize) -> Option<usize> {
        debug_assert!(i >= 1);
        let j = i - 1;
        if j < self.prefix.len() {
            Some(self.prefix[j])
        } else if self.period.is_empty() {
            None
        } else {
            Some(self.period[(j - self.prefix.len()) % self.period.len()])
        }
    }

    /// Digits in order; infinite for periodic codings.
    pub fn digits(&self) -> impl Iterator<Item = usize> + '_ {
        let tail = if self.period.is_empty() {
            None
        } else {
            Some(self.period.iter().copied().cycle())
        };
        self.prefix.iter().copied().chain(tail.into_iter().flatten())
    }

    /// Number of digits available: `None` when infinite.
    pub fn len(&self) -> Option<usize> {
        if self.is_periodic() {
            None
        } else {
            Some(self.prefix.len())
        }
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.period.is_empty()
    }

    pub fn check_digits(&self, r: usize) -> Result<()> {
        for &digit in self.prefix.iter().chain(&self.period) {
            if digit == 0 || digit > r {
                return Err(Error::InvalidDigit { digit, r });
            }
        }
        Ok(())
    }

    /// Shortest equivalent representation: minimal period, then the prefix
    /// shortened as far as the period can absorb it.
    pub fn canonical(&self) -> Coding {
        if self.period.is_empty() {
            return self.clone();
        }
        let mut period = minimal_period(&self.period);
        let mut prefix = self.prefix.clone();
        while let (Some(&p), Some(&q)) = (prefix.last(), period.last()) {
            if p != q {
                break;
            }
            prefix.pop();
            period.rotate_right(1);
        }
        Coding { prefix, period }
    }

    /// `Some(k)` when the period is the single digit `k` repeated.
    pub fn constant_tail(&self) -> Option<usize> {
        let first = *self.period.first()?;
        self.period.iter().all(|&d| d == first).then_some(first)
    }

    /// Whether any digit of the coding (prefix or period) equals `k`.
    pub fn contains(&self, k: usize) -> bool {
        self.prefix.contains(&k) || self.period.contains(&k)
    }

    /// Parses the shorthand `"1,2,(1,2)"`: comma separated digits with an
    /// optional trailing parenthesised period.
    pub fn parse(s: &str) -> Result<Coding> {
        let bad = Error::InvalidArgument { reason: "malformed coding shorthand" };
        let s = s.trim();
        let (head, period) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..].strip_suffix(')').ok_or(bad.clone())?;
                if inner.contains(['(', ')']) {
                    return Err(bad);
                }
                let period = parse_digits(inner).ok_or(bad.clone())?;
                if period.is_empty() {
                    return Err(Error::EmptyPeriod);
                }
                let head = s[..i].trim().trim_end_matches(',');
                (head, period)
            }
            None => (s, Vec::new()),
        };
        if head.contains(')') {
            return Err(bad);
        }
        let prefix = parse_digits(head).ok_or(bad)?;
        Ok(Coding { prefix, period })
    }
}

fn parse_digits(s: &str) -> Option<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse::<usize>().ok()).collect()
}

fn minimal_period(p: &[usize]) -> Vec<usize> {
    let n = p.len();
    for len in 1..=n {
        if n.is_multiple_of(len) && (len..n).all(|i| p[i] == p[i - len]) {
            return p[..len].to_vec();
        }
    }
    p.to_vec()
}

impl fmt::Display for Coding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, d) in self.prefix.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{d}");
        }
        if !self.period.is_empty() {
            if !self.prefix.is_empty() {
                out.push(',');
            }
            out.push('(');
            for (i, d) in self.period.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{d}");
            }
            out.push(')');
        }
        f.write_str(&out)
    }
}

/// Basic interval `S_{k_1} o ... o S_{k_order}([0,1])`; its digits are the
/// first `order` digits of the coding it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicInterval {
    pub order: usize,
    pub left: f64,
    pub right: f64,
    pub length: f64,
}

/// Location of a cut point in its left coding `(k_1..k_{n0}, r, r, ...)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutPoint {
    pub n0: usize,
    /// `k_{n0}`: the digit whose membership in the index set Lambda decides
    /// differentiability.
    pub k_n0: usize,
    pub left: Coding,
    pub right: Coding,
}

/// Classification of a point with respect to the cut-point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TStatus {
    /// Not a cut point; a unique coding.
    Regular,
    /// Interior cut point with two codings.
    Cut(CutPoint),
    /// `0` or `1`.
    Endpoint(u8),
    /// Not decidable from the input (finite word, or exact orbit without a
    /// repeat before the step limit).
    Undecided,
}

/// A point of `[0,1]`, either exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Exact(BigRational),
    Float(f64),
}

impl Point {
    pub fn to_f64(&self) -> f64 {
        match self {
            Point::Exact(q) => rational::to_f64(q),
            Point::Float(x) => *x,
        }
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::Float(x)
    }
}

/// Result of coding a point to a finite depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCoding {
    /// The first `depth` digits (right coding at cut points).
    pub coding: Coding,
    pub intervals: Vec<BasicInterval>,
    /// Set when the point was found to be a cut point.
    pub cut: Option<CutPoint>,
    /// True when the float path ran out of resolution before `depth`.
    pub precision_exhausted: bool,
    /// True when exact rational arithmetic decided the digits.
    pub exact: bool,
}

fn left_coding_of_cut(prefix: &[usize], k_n0: usize, r: usize) -> Coding {
    let mut p = prefix.to_vec();
    p.push(k_n0);
    Coding::new(p, alloc::vec![r])
}

fn right_coding_of_cut(prefix: &[usize], k_n0: usize) -> Coding {
    let mut p = prefix.to_vec();
    p.push(k_n0 + 1);
    Coding::new(p, alloc::vec![1])
}

/// Digits of `x` up to `depth`, with the chain of basic intervals.
///
/// Exact rational input over a system whose partition is rational is coded
/// exactly; everything else uses floating arithmetic with the absolute
/// tolerance [`CUT_TOL`] for vertex hits. Cut points get the right coding
/// (tail of 1s after the incremented digit).
pub fn coding_of_point(system: &SelfAffineSystem, x: &Point, depth: usize) -> Result<PointCoding> {
    let xf = x.to_f64();
    if !(xf > 0.0 && xf < 1.0) {
        return Err(Error::OutOfDomain { x: xf });
    }
    match (x, system.exact_partition()) {
        (Point::Exact(q), Some(part)) => Ok(exact_prefix(system, part, q, depth)),
        _ => Ok(float_prefix(system, xf, depth)),
    }
}

fn float_prefix(system: &SelfAffineSystem, x: f64, depth: usize) -> PointCoding {
    let r = system.r();
    let part: Vec<f64> = system.partition().collect();
    let a_min = system.branches().iter().map(|b| b.a).fold(1.0, f64::min);
    let mut digits = Vec::with_capacity(depth);
    let mut intervals = Vec::with_capacity(depth);
    let (mut left, mut len) = (0.0f64, 1.0f64);
    let mut cut: Option<CutPoint> = None;
    let mut exhausted = false;
    for n in 1..=depth {
        let k = if cut.is_some() {
            1
        } else {
            if len * a_min <= 100.0 * CUT_TOL {
                exhausted = true;
            }
            // Largest k whose left vertex image is <= x, treating near hits
            // as exact.
            let k = 1 + part[1..r].iter().filter(|&&p| x >= left + len * p - CUT_TOL).count();
            let v = left + len * part[k - 1];
            if k >= 2 && fabs(x - v) <= CUT_TOL && !exhausted {
                cut = Some(CutPoint {
                    n0: n,
                    k_n0: k - 1,
                    left: left_coding_of_cut(&digits, k - 1, r),
                    right: right_coding_of_cut(&digits, k - 1),
                });
            }
            k
        };
        left += len * part[k - 1];
        len *= system.branch(k).a;
        digits.push(k);
        intervals.push(BasicInterval { order: n, left, right: left + len, length: len });
    }
    PointCoding {
        coding: Coding::finite(digits),
        intervals,
        cut,
        precision_exhausted: exhausted,
        exact: false,
    }
}

/// Locates `t` in the exact partition: largest `k` with `X_{k-1} <= t`.
fn locate_exact(part: &[BigRational], t: &BigRational) -> usize {
    let r = part.len() - 1;
    1 + part[1..r].iter().filter(|&p| t >= p).count()
}

fn exact_prefix(
    system: &SelfAffineSystem,
    part: &[BigRational],
    x: &BigRational,
    depth: usize,
) -> PointCoding {
    let r = system.r();
    let mut digits = Vec::with_capacity(depth);
    let mut intervals = Vec::with_capacity(depth);
    let mut t = x.clone();
    let (mut left, mut len) = (BigRational::zero(), BigRational::one());
    let mut cut = None;
    for n in 1..=depth {
        let k = locate_exact(part, &t);
        if cut.is_none() && k >= 2 && t == part[k - 1] {
            cut = Some(CutPoint {
                n0: n,
                k_n0: k - 1,
                left: left_coding_of_cut(&digits, k - 1, r),
                right: right_coding_of_cut(&digits, k - 1),
            });
        }
        let width = &part[k] - &part[k - 1];
        t = (&t - &part[k - 1]) / &width;
        left += &len * &part[k - 1];
        len *= &width;
        digits.push(k);
        let (l, w) = (rational::to_f64(&left), rational::to_f64(&len));
        intervals.push(BasicInterval { order: n, left: l, right: l + w, length: w });
    }
    PointCoding {
        coding: Coding::finite(digits),
        intervals,
        cut,
        precision_exhausted: false,
        exact: true,
    }
}

/// Full coding of an exact rational point, found by detecting a repeat in
/// the orbit of the renormalised coordinate.
///
/// Returns `(coding, status)`; the coding is periodic when a repeat was
/// found within `max_steps` (and before the denominator outgrows
/// [`MAX_ORBIT_BITS`]), finite otherwise (status `Undecided`).
pub fn exact_coding(
    system: &SelfAffineSystem,
    x: &BigRational,
    max_steps: usize,
) -> Result<(Coding, TStatus)> {
    let part = system
        .exact_partition()
        .ok_or(Error::InvalidArgument { reason: "partition is not rational" })?;
    if *x <= BigRational::zero() || *x >= BigRational::one() {
        if x.is_zero() {
            return Ok((Coding::periodic(alloc::vec![1]), TStatus::Endpoint(0)));
        }
        if x.is_one() {
            return Ok((Coding::periodic(alloc::vec![system.r()]), TStatus::Endpoint(1)));
        }
        return Err(Error::OutOfDomain { x: rational::to_f64(x) });
    }
    let mut seen: BTreeMap<BigRational, usize> = BTreeMap::new();
    let mut digits = Vec::new();
    let mut t = x.clone();
    for step in 0..max_steps {
        if let Some(&start) = seen.get(&t) {
            let coding = Coding::new(digits[..start].to_vec(), digits[start..].to_vec());
            let status = in_t(system, &coding);
            return Ok((coding, status));
        }
        if t.denom().bits() > MAX_ORBIT_BITS {
            break;
        }
        seen.insert(t.clone(), step);
        let k = locate_exact(part, &t);
        let width = &part[k] - &part[k - 1];
        t = (&t - &part[k - 1]) / &width;
        digits.push(k);
    }
    Ok((Coding::finite(digits), TStatus::Undecided))
}

/// Cut-point status of a coding. Eventually periodic codings are decided
/// exactly; finite words are `Undecided`.
pub fn in_t(system: &SelfAffineSystem, coding: &Coding) -> TStatus {
    let r = system.r();
    if !coding.is_periodic() {
        return TStatus::Undecided;
    }
    let c = coding.canonical();
    match c.constant_tail() {
        Some(k) if k == r => match c.prefix.split_last() {
            None => TStatus::Endpoint(1),
            Some((&last, head)) => TStatus::Cut(CutPoint {
                n0: c.prefix.len(),
                k_n0: last,
                left: c.clone(),
                right: right_coding_of_cut(head, last),
            }),
        },
        Some(1) => match c.prefix.split_last() {
            None => TStatus::Endpoint(0),
            Some((&last, head)) => TStatus::Cut(CutPoint {
                n0: c.prefix.len(),
                k_n0: last - 1,
                left: left_coding_of_cut(head, last - 1, r),
                right: c.clone(),
            }),
        },
        _ => TStatus::Regular,
    }
}

/// Cut-point status of a point. Exact points over a rational partition are
/// decided exactly (up to `max_steps` of orbit search); floats use the
/// vertex tolerance [`CUT_TOL`] while resolution lasts.
pub fn point_in_t(system: &SelfAffineSystem, x: &Point, max_steps: usize) -> Result<TStatus> {
    let xf = x.to_f64();
    if xf == 0.0 || xf == 1.0 {
        return Ok(TStatus::Endpoint(xf as u8));
    }
    if let (Point::Exact(q), Some(_)) = (x, system.exact_partition()) {
        return Ok(exact_coding(system, q, max_steps)?.1);
    }
    let pc = coding_of_point(system, x, 64)?;
    Ok(match pc.cut {
        Some(c) => TStatus::Cut(c),
        None if pc.precision_exhausted => TStatus::Undecided,
        None => TStatus::Regular,
    })
}

/// Affine horizontal composition `t -> scale * t + shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Horizontal {
    scale: f64,
    shift: f64,
}

impl Horizontal {
    const IDENTITY: Horizontal = Horizontal { scale: 1.0, shift: 0.0 };

    fn then_digit(self, system: &SelfAffineSystem, k: usize) -> Horizontal {
        let b = system.branch(k);
        Horizontal { scale: self.scale * b.a, shift: self.scale * b.b + self.shift }
    }

    fn apply(self, t: f64) -> f64 {
        self.scale * t + self.shift
    }
}

/// The point addressed by a coding. Periodic tails are resolved through the
/// fixed point of the period map; a finite word maps to the left endpoint
/// of its basic interval.
pub fn project(system: &SelfAffineSystem, coding: &Coding) -> f64 {
    let g = coding
        .prefix
        .iter()
        .fold(Horizontal::IDENTITY, |g, &k| g.then_digit(system, k));
    if coding.period.is_empty() {
        return g.apply(0.0);
    }
    let p = coding
        .period
        .iter()
        .fold(Horizontal::IDENTITY, |g, &k| g.then_digit(system, k));
    let fixed = p.shift / (1.0 - p.scale);
    g.apply(fixed)
}

/// Exact version of [`project`] over a rational partition.
pub fn project_exact(system: &SelfAffineSystem, coding: &Coding) -> Option<BigRational> {
    let part = system.exact_partition()?;
    let compose = |digits: &[usize]| {
        let mut scale = BigRational::one();
        let mut shift = BigRational::zero();
        for &k in digits {
            let a = &part[k] - &part[k - 1];
            shift += &scale * &part[k - 1];
            scale *= a;
        }
        (scale, shift)
    };
    let (gs, gt) = compose(&coding.prefix);
    if coding.period.is_empty() {
        return Some(gt);
    }
    let (ps, pt) = compose(&coding.period);
    let fixed = pt / (BigRational::one() - ps);
    Some(gs * fixed + gt)
}

/// Digit statistics of a coding at depth `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub n: usize,
    /// `s[k-1]` counts occurrences of digit `k` among the first `n` digits.
    pub s: Vec<usize>,
    /// Terminal run of the digit `r`.
    pub l_plus: usize,
    /// Terminal run of the digit `1`.
    pub l_minus: usize,
    pub chi: bool,
    pub zeta: bool,
}

/// Streaming digit statistics; `push` is O(1).
#[derive(Clone, Debug)]
pub struct RunTracker {
    r: usize,
    n: usize,
    s: Vec<usize>,
    l_plus: usize,
    l_minus: usize,
    /// Most recent digit different from `r` (that is, `k_{n - L_n^+}`).
    last_not_r: Option<usize>,
    /// Most recent digit different from `1`.
    last_not_1: Option<usize>,
}

impl RunTracker {
    pub fn new(r: usize) -> Self {
        Self {
            r,
            n: 0,
            s: alloc::vec![0; r],
            l_plus: 0,
            l_minus: 0,
            last_not_r: None,
            last_not_1: None,
        }
    }

    #[inline]
    pub fn push(&mut self, k: usize) {
        self.n += 1;
        self.s[k - 1] += 1;
        if k == self.r {
            self.l_plus += 1;
        } else {
            self.l_plus = 0;
            self.last_not_r = Some(k);
        }
        if k == 1 {
            self.l_minus += 1;
        } else {
            self.l_minus = 0;
            self.last_not_1 = Some(k);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.s
    }

    pub fn l_plus(&self) -> usize {
        self.l_plus
    }

    pub fn l_minus(&self) -> usize {
        self.l_minus
    }

    /// `k_{n - L_n^+}`, absent when the run of `r` reaches the first digit.
    pub fn pivot_right(&self) -> Option<usize> {
        if self.l_plus == self.n {
            None
        } else {
            self.last_not_r
        }
    }

    /// `k_{n - L_n^-}` for the mirrored statistics.
    pub fn pivot_left(&self) -> Option<usize> {
        if self.l_minus == self.n {
            None
        } else {
            self.last_not_1
        }
    }

    /// Snapshot in the right orientation: `chi` tests `k_{n-L}+1` in `I_+`,
    /// `zeta` tests `k_{n-L}` in `Lambda`.
    pub fn stats(&self, is_plus: impl Fn(usize) -> bool, in_lambda: impl Fn(usize) -> bool) -> RunStats {
        let pivot = self.pivot_right();
        RunStats {
            n: self.n,
            s: self.s.clone(),
            l_plus: self.l_plus,
            l_minus: self.l_minus,
            chi: pivot.is_some_and(|k| is_plus(k + 1)),
            zeta: pivot.is_some_and(&in_lambda),
        }
    }

    /// Snapshot in the mirrored orientation: runs of `1`, `chi` tests
    /// `k_{n-L}-1` in `I_+`, `zeta` tests `k_{n-L}-1` in `Lambda`.
    pub fn stats_left(
        &self,
        is_plus: impl Fn(usize) -> bool,
        in_lambda: impl Fn(usize) -> bool,
    ) -> RunStats {
        let pivot = self.pivot_left();
        RunStats {
            n: self.n,
            s: self.s.clone(),
            l_plus: self.l_plus,
            l_minus: self.l_minus,
            chi: pivot.is_some_and(|k| is_plus(k - 1)),
            zeta: pivot.is_some_and(|k| in_lambda(k - 1)),
        }
    }
}

/// Statistics of the first `n` digits of `coding`; `None` when a finite
/// coding is shorter than `n`.
pub fn run_stats(
    r: usize,
    coding: &Coding,
    n: usize,
    is_plus: impl Fn(usize) -> bool,
    in_lambda: impl Fn(usize) -> bool,
) -> Option<RunStats> {
    let tracker = track(r, coding, n)?;
    Some(tracker.stats(is_plus, in_lambda))
}

/// Mirrored statistics (roles of the digits `1` and `r` exchanged).
pub fn run_stats_left(
    r: usize,
    coding: &Coding,
    n: usize,
    is_plus: impl Fn(usize) -> bool,
    in_lambda: impl Fn(usize) -> bool,
) -> Option<RunStats> {
    let tracker = track(r, coding, n)?;
    Some(tracker.stats_left(is_plus, in_lambda))
}

fn track(r: usize, coding: &Coding, n: usize) -> Option<RunTracker> {
    let mut t = RunTracker::new(r);
    let mut it = coding.digits();
    for _ in 0..n {
        t.push(it.next()?);
    }
    Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;
    use alloc::vec;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn binary_expansion_of_one_third() {
        // 1/3 = 0.010101..._2, digit = bit + 1.
        let s = preset("riesz-nagy:0.3").unwrap();
        let pc = coding_of_point(&s, &Point::Exact(q(1, 3)), 6).unwrap();
        assert_eq!(pc.coding.prefix, vec![1, 2, 1, 2, 1, 2]);
        assert!(pc.cut.is_none());
        let pf = coding_of_point(&s, &Point::Float(1.0 / 3.0), 6).unwrap();
        assert_eq!(pf.coding.prefix, vec![1, 2, 1, 2, 1, 2]);
    }

    #[test]
    fn ternary_expansion_of_one_quarter() {
        // 1/4 = 0.020202..._3.
        let s = preset("okamoto:0.6").unwrap();
        let pc = coding_of_point(&s, &Point::Exact(q(1, 4)), 4).unwrap();
        assert_eq!(pc.coding.prefix, vec![1, 3, 1, 3]);
        let pf = coding_of_point(&s, &Point::Float(0.25), 4).unwrap();
        assert_eq!(pf.coding.prefix, vec![1, 3, 1, 3]);
    }

    #[test]
    fn first_vertex_is_a_cut_point_with_right_coding() {
        let s = preset("skew-takagi:0.3,0.5,0.25").unwrap();
        for x in [Point::Exact(q(3, 10)), Point::Float(0.3)] {
            let pc = coding_of_point(&s, &x, 5).unwrap();
            assert_eq!(pc.coding.prefix, vec![2, 1, 1, 1, 1]);
            let cut = pc.cut.unwrap();
            assert_eq!((cut.n0, cut.k_n0), (1, 1));
            assert_eq!(cut.left, Coding::new(vec![1], vec![2]));
            assert_eq!(cut.right, Coding::new(vec![2], vec![1]));
        }
    }

    #[test]
    fn interval_chain_nests_and_has_product_lengths() {
        let s = preset("skew-takagi:0.3,0.5,0.25").unwrap();
        let pc = coding_of_point(&s, &Point::Float(0.61803), 20).unwrap();
        let mut prev = BasicInterval { order: 0, left: 0.0, right: 1.0, length: 1.0 };
        for (iv, &k) in pc.intervals.iter().zip(&pc.coding.prefix) {
            assert!(iv.left >= prev.left - 1e-15 && iv.right <= prev.right + 1e-15);
            assert!(fabs(iv.length - prev.length * s.branch(k).a) <= 1e-15 * prev.length);
            assert!(iv.left <= 0.61803 && 0.61803 <= iv.right);
            prev = *iv;
        }
    }

    #[test]
    fn out_of_domain_points_are_rejected() {
        let s = preset("takagi:1").unwrap();
        assert_eq!(coding_of_point(&s, &Point::Float(0.0), 3).unwrap_err().name(), "OutOfDomain");
        assert!(coding_of_point(&s, &Point::Float(1.5), 3).is_err());
    }

    #[test]
    fn projections_of_constant_and_periodic_codings() {
        let s = preset("riesz-nagy:0.3").unwrap();
        assert_eq!(project(&s, &Coding::periodic(vec![1])), 0.0);
        assert_eq!(project(&s, &Coding::periodic(vec![2])), 1.0);
        assert!(fabs(project(&s, &Coding::periodic(vec![1, 2])) - 1.0 / 3.0) < 1e-16);
        assert_eq!(project_exact(&s, &Coding::periodic(vec![1, 2])), Some(q(1, 3)));
    }

    #[test]
    fn exact_orbit_recovers_periodic_coding() {
        let s = preset("riesz-nagy:0.3").unwrap();
        let (c, st) = exact_coding(&s, &q(1, 3), 100).unwrap();
        assert_eq!(c, Coding::periodic(vec![1, 2]));
        assert_eq!(st, TStatus::Regular);
        let (c, st) = exact_coding(&s, &q(3, 8), 100).unwrap();
        assert_eq!(c.canonical(), Coding::new(vec![1, 2, 2], vec![1]));
        assert!(matches!(st, TStatus::Cut(_)));
    }

    #[test]
    fn t_membership_examples() {
        let s = preset("okamoto:0.6").unwrap();
        assert!(matches!(
            point_in_t(&s, &Point::Exact(q(1, 3)), 100).unwrap(),
            TStatus::Cut(_)
        ));
        assert_eq!(in_t(&s, &Coding::periodic(vec![1, 2])), TStatus::Regular);
        match in_t(&s, &Coding::new(vec![2], vec![3])) {
            TStatus::Cut(c) => {
                assert_eq!(c.left, Coding::new(vec![2], vec![3]));
                assert_eq!(c.right, Coding::new(vec![3], vec![1]));
                assert_eq!(c.k_n0, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(in_t(&s, &Coding::periodic(vec![1])), TStatus::Endpoint(0));
        assert_eq!(in_t(&s, &Coding::finite(vec![1, 2])), TStatus::Undecided);
    }

    #[test]
    fn canonical_form_shortens_prefix_and_period() {
        let c = Coding::new(vec![1, 2, 1, 2], vec![1, 2, 1, 2]);
        assert_eq!(c.canonical(), Coding::periodic(vec![1, 2]));
        let c = Coding::new(vec![3, 2, 2], vec![2, 2]);
        assert_eq!(c.canonical(), Coding::new(vec![3], vec![2]));
    }

    #[test]
    fn shorthand_parse_and_display() {
        let c = Coding::parse("1,2,(1,2)").unwrap();
        assert_eq!(c, Coding::new(vec![1, 2], vec![1, 2]));
        assert_eq!(alloc::format!("{c}"), "1,2,(1,2)");
        assert_eq!(Coding::parse("(1,2)").unwrap(), Coding::periodic(vec![1, 2]));
        assert_eq!(Coding::parse("3,1").unwrap(), Coding::finite(vec![3, 1]));
        assert!(Coding::parse("1,(2").is_err());
        assert!(Coding::parse("1,()").is_err());
        assert!(Coding::parse("1,x").is_err());
    }

    #[test]
    fn run_stats_examples() {
        let plus = |k: usize| (1..=2).contains(&k);
        let st = run_stats(2, &Coding::periodic(vec![1, 2]), 6, plus, |_| false).unwrap();
        assert_eq!(st.s, vec![3, 3]);
        assert_eq!(st.l_plus, 1);
        let st = run_stats(2, &Coding::finite(vec![1, 2, 2, 2]), 4, plus, |k| k == 1).unwrap();
        assert_eq!(st.l_plus, 3);
        assert!(st.chi && st.zeta);
        let st = run_stats(2, &Coding::finite(vec![1; 5]), 5, plus, |_| true).unwrap();
        assert_eq!((st.l_minus, st.l_plus), (5, 0));
        // Run reaching the first digit: indicators are zero.
        let st = run_stats(2, &Coding::finite(vec![2, 2]), 2, plus, |_| true).unwrap();
        assert!(!st.chi && !st.zeta);
        let st = run_stats_left(2, &Coding::finite(vec![2, 1, 1]), 3, plus, |k| k == 1).unwrap();
        assert_eq!(st.l_minus, 2);
        assert!(st.chi && st.zeta);
        assert!(run_stats(2, &Coding::finite(vec![1]), 2, plus, |_| true).is_none());
    }

    #[test]
    fn non_repeating_orbit_stops_at_the_size_cap() {
        // Partition point 3/10: the orbit of 2/7 never repeats.
        let s = preset("skew-takagi:0.3,0.5,0.25").unwrap();
        let (c, status) = exact_coding(&s, &q(2, 7), usize::MAX).unwrap();
        assert_eq!(status, TStatus::Undecided);
        assert!(!c.is_periodic() && c.prefix.len() > 1000);
        assert_eq!(&c.prefix[..4], &[1, 2, 2, 2]);
    }
}
