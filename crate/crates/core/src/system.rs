//! Self-affine systems: branch parameters, the interpolated polygon and the
//! consistency relations tying them together.

use alloc::vec::Vec;
use libm::fabs;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational;

/// Tolerance on the linear relations between branches and polygon vertices.
pub const LINEAR_TOL: f64 = 1e-12;

/// One affine map `(x, y) -> (a x + b, c x + d y + e)` of the system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl Branch {
    /// Horizontal map `S_k(x) = a x + b`.
    #[inline]
    pub fn horizontal(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

/// A validated self-affine system with `r >= 2` branches.
///
/// Branch indices exposed through the API (`index_zero`, `index_plus`,
/// digits of codings) are 1-based.
#[derive(Clone, Debug)]
pub struct SelfAffineSystem {
    branches: Vec<Branch>,
    vertices: Vec<[f64; 2]>,
    index_zero: Vec<usize>,
    index_plus: Vec<usize>,
    exact_partition: Option<Vec<BigRational>>,
}

impl SelfAffineSystem {
    /// Builds a system from the polygon vertices `(x_k, y_k)`, `k = 0..=r`,
    /// and the free vertical ratios `d_1..d_r`.
    pub fn from_polygon(vertices: &[[f64; 2]], d: &[f64]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::TooFewBranches {
                r: vertices.len().saturating_sub(1),
            });
        }
        let r = vertices.len() - 1;
        if d.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: d.len(),
            });
        }
        for (k, v) in vertices.iter().enumerate() {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::NonFinite { k });
            }
        }
        let mut vertices = vertices.to_vec();
        if fabs(vertices[0][0]) > LINEAR_TOL {
            return Err(Error::NonMonotonePartition { k: 0 });
        }
        if fabs(vertices[r][0] - 1.0) > LINEAR_TOL {
            return Err(Error::NonMonotonePartition { k: r });
        }
        vertices[0][0] = 0.0;
        vertices[r][0] = 1.0;
        for k in 1..=r {
            if vertices[k][0] <= vertices[k - 1][0] {
                return Err(Error::NonMonotonePartition { k });
            }
        }
        for (i, &dk) in d.iter().enumerate() {
            if !dk.is_finite() {
                return Err(Error::NonFinite { k: i + 1 });
            }
            if fabs(dk) >= 1.0 {
                return Err(Error::ContractionOutOfRange { k: i + 1, d: dk });
            }
        }
        let (y0, yr) = (vertices[0][1], vertices[r][1]);
        let branches = (1..=r)
            .map(|k| {
                let (x_prev, y_prev) = (vertices[k - 1][0], vertices[k - 1][1]);
                let (x_k, y_k) = (vertices[k][0], vertices[k][1]);
                let dk = d[k - 1];
                Branch {
                    a: x_k - x_prev,
                    b: x_prev,
                    c: (y_k - y_prev) - dk * (yr - y0),
                    d: dk,
                    e: y_prev - dk * y0,
                }
            })
            .collect();
        let system = Self::assemble(branches, vertices);
        validate(&system)?;
        Ok(system)
    }

    /// Builds a system from raw branch tuples, deriving the polygon from
    /// the fixed points of the first and last branch and checking every
    /// connectivity relation.
    pub fn from_branches(branches: &[Branch]) -> Result<Self> {
        let r = branches.len();
        if r < 2 {
            return Err(Error::TooFewBranches { r });
        }
        check_branch_ranges(branches)?;
        let first = branches[0];
        let last = branches[r - 1];
        // phi(0) and phi(1) are fixed points of the extreme branches.
        let y0 = first.e / (1.0 - first.d);
        let yr = (last.c + last.e) / (1.0 - last.d);
        // Partition from cumulative widths, so offsets b_k are checked
        // against it rather than trusted.
        let mut vertices = Vec::with_capacity(r + 1);
        vertices.push([0.0, first.d * y0 + first.e]);
        let mut x = 0.0;
        for br in branches {
            x += br.a;
            vertices.push([x, br.c + br.d * yr + br.e]);
        }
        if fabs(x - 1.0) <= LINEAR_TOL {
            vertices[r][0] = 1.0;
        }
        let system = Self::assemble(branches.to_vec(), vertices);
        validate(&system)?;
        Ok(system)
    }

    /// Assembles a system without checking any invariant. Use [`validate`]
    /// before relying on it.
    pub fn new_unchecked(branches: Vec<Branch>, vertices: Vec<[f64; 2]>) -> Self {
        Self::assemble(branches, vertices)
    }

    fn assemble(branches: Vec<Branch>, vertices: Vec<[f64; 2]>) -> Self {
        let index_zero = (1..=branches.len())
            .filter(|&k| branches[k - 1].d == 0.0)
            .collect();
        let index_plus = (1..=branches.len())
            .filter(|&k| branches[k - 1].d != 0.0)
            .collect();
        let exact_partition = vertices
            .iter()
            .map(|v| rational::recognize(v[0]))
            .collect::<Option<Vec<_>>>();
        Self {
            branches,
            vertices,
            index_zero,
            index_plus,
            exact_partition,
        }
    }

    /// Number of branches `r`.
    pub fn r(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Branch `k` (1-based).
    #[inline]
    pub fn branch(&self, k: usize) -> &Branch {
        &self.branches[k - 1]
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Partition points `x_0 = 0 < x_1 < ... < x_r = 1`.
    pub fn partition(&self) -> impl Iterator<Item = f64> + '_ {
        self.vertices.iter().map(|v| v[0])
    }

    pub fn index_zero(&self) -> &[usize] {
        &self.index_zero
    }

    pub fn index_plus(&self) -> &[usize] {
        &self.index_plus
    }

    #[inline]
    pub fn is_plus(&self, k: usize) -> bool {
        k >= 1 && k <= self.r() && self.branches[k - 1].d != 0.0
    }

    /// The partition as exact rationals, when every partition point is
    /// recognised as a rational with a small denominator.
    pub fn exact_partition(&self) -> Option<&[BigRational]> {
        self.exact_partition.as_deref()
    }

    /// Horizontal ratios `a_k` in branch order.
    pub fn a(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.a).collect()
    }

    /// Vertical ratios `d_k` in branch order.
    pub fn d(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.d).collect()
    }

    /// Enclosure `[lo, hi]` of the range of phi over `[0, 1]`.
    ///
    /// Starts from the contraction bound `max(|c|+|e|) / (1 - max|d|)` and
    /// iterates the interval form of the functional equation, which maps
    /// valid enclosures to valid enclosures.
    pub fn range_enclosure(&self) -> (f64, f64) {
        let dmax = self.branches.iter().map(|b| fabs(b.d)).fold(0.0, f64::max);
        let ce = self
            .branches
            .iter()
            .map(|b| fabs(b.c) + fabs(b.e))
            .fold(0.0, f64::max);
        let m = ce / (1.0 - dmax);
        let (mut lo, mut hi) = (-m, m);
        for _ in 0..4096 {
            let mut nlo = f64::INFINITY;
            let mut nhi = f64::NEG_INFINITY;
            for b in &self.branches {
                let (p, q) = (b.d * lo, b.d * hi);
                let (dl, dh) = if p <= q { (p, q) } else { (q, p) };
                nlo = nlo.min(b.e + b.c.min(0.0) + dl);
                nhi = nhi.max(b.e + b.c.max(0.0) + dh);
            }
            // Intersecting keeps the enclosure monotonically shrinking.
            let (nlo, nhi) = (nlo.max(lo), nhi.min(hi));
            let done = fabs(nlo - lo) <= 1e-17 && fabs(nhi - hi) <= 1e-17;
            lo = nlo;
            hi = nhi;
            if done {
                break;
            }
        }
        let ymin = self.vertices.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
        let ymax = self.vertices.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
        // Absorb rounding so the vertex values always lie inside.
        let pad = 4.0 * f64::EPSILON * (fabs(lo).max(fabs(hi)).max(1.0));
        ((lo - pad).min(ymin), (hi + pad).max(ymax))
    }
}

fn check_branch_ranges(branches: &[Branch]) -> Result<()> {
    for (i, b) in branches.iter().enumerate() {
        let k = i + 1;
        if ![b.a, b.b, b.c, b.d, b.e].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { k });
        }
        if !(b.a > 0.0 && b.a < 1.0) {
            return Err(Error::HorizontalRatioOutOfRange { k, a: b.a });
        }
        if fabs(b.d) >= 1.0 {
            return Err(Error::ContractionOutOfRange { k, d: b.d });
        }
    }
    Ok(())
}

/// Checks every structural invariant of a system: parameter ranges, the
/// partition relations `a_k = x_k - x_{k-1}`, `b_k = x_{k-1}`, `sum a_k = 1`,
/// the vertical relations joining each branch to the polygon, and
/// `#I_+ >= 2`.
pub fn validate(system: &SelfAffineSystem) -> Result<()> {
    let branches = system.branches();
    let r = branches.len();
    if r < 2 {
        return Err(Error::TooFewBranches { r });
    }
    check_branch_ranges(branches)?;
    let sum: f64 = branches.iter().map(|b| b.a).sum();
    if fabs(sum - 1.0) > LINEAR_TOL {
        return Err(Error::SumNotOne { sum });
    }
    let v = system.vertices();
    if v.len() != r + 1 {
        return Err(Error::DimensionMismatch {
            expected: r + 1,
            found: v.len(),
        });
    }
    if fabs(v[0][0]) > LINEAR_TOL || fabs(v[r][0] - 1.0) > LINEAR_TOL {
        return Err(Error::NonMonotonePartition { k: if fabs(v[0][0]) > LINEAR_TOL { 0 } else { r } });
    }
    for k in 1..=r {
        if v[k][0] <= v[k - 1][0] {
            return Err(Error::NonMonotonePartition { k });
        }
        let b = &branches[k - 1];
        if fabs(b.b - v[k - 1][0]) > LINEAR_TOL || fabs(b.a - (v[k][0] - v[k - 1][0])) > LINEAR_TOL
        {
            return Err(Error::PartitionMismatch { k });
        }
    }
    let (y0, yr) = (v[0][1], v[r][1]);
    for k in 1..=r {
        let b = &branches[k - 1];
        let lhs_c = b.d * (yr - y0) + b.c;
        let lhs_e = b.d * y0 + b.e;
        if fabs(lhs_c - (v[k][1] - v[k - 1][1])) > LINEAR_TOL
            || fabs(lhs_e - v[k - 1][1]) > LINEAR_TOL
        {
            return Err(Error::VertexMismatch { k });
        }
    }
    let nonzero = branches.iter().filter(|b| b.d != 0.0).count();
    if nonzero < 2 {
        return Err(Error::DegenerateSystem { nonzero });
    }
    Ok(())
}
