//! Run-structured codings: blocks of random digits separated by long runs
//! of the digit `r`, each run preceded and followed by a pivot digit.
//!
//! With block ends `n_j` and run lengths `l_j` (and `n_0 = -1`), position
//! `i` is
//!
//! * random with law `p` on `[n_{j-1}+2, n_j-l_j-1]`,
//! * the pivot `k*` at `n_j - l_j` and at `n_j + 1`,
//! * `r` on `[n_j-l_j+1, n_j]`.

use alloc::vec::Vec;
use libm::{ceil, fabs, round};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::Coding;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStructure {
    /// Limit of `l_j / n_j`, in `(0, 1)`.
    pub lambda: f64,
    pub k_star: usize,
    /// Block ends `n_1 < n_2 < ...`.
    pub n: Vec<usize>,
    /// Run lengths `l_1, l_2, ...`.
    pub l: Vec<usize>,
    /// Digit law on the random positions; `p[k-1]` is the weight of `k`.
    pub p: Vec<f64>,
}

/// Role of a position in a run-structured coding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Random,
    Pivot,
    Run,
}

/// Default schedule covering positions up to `length`:
/// `n_j = (j + j0) n_{j-1} + j` with `j0 = ceil(2 / (1 - lambda))`,
/// `l_j = round(lambda n_j)`.
pub fn default_schedule(lambda: f64, length: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidSchedule { reason: "lambda must lie in (0, 1)" });
    }
    let j0 = ceil(2.0 / (1.0 - lambda)) as usize;
    let (mut n, mut l) = (Vec::new(), Vec::new());
    let mut prev: i64 = -1;
    let mut j = 1;
    while prev + 1 < length as i64 {
        let base = prev.max(1) as usize;
        let mut nj = (j + j0) * base + j;
        let mut lj;
        loop {
            lj = round(lambda * nj as f64) as usize;
            if prev + 1 < nj as i64 - lj as i64 && lj >= 1 {
                break;
            }
            nj += 1;
        }
        n.push(nj);
        l.push(lj);
        prev = nj as i64;
        j += 1;
    }
    Ok((n, l))
}

impl RunStructure {
    /// Structure with the default schedule long enough for `length` digits.
    pub fn with_default_schedule(lambda: f64, k_star: usize, p: Vec<f64>, length: usize) -> Result<Self> {
        let (n, l) = default_schedule(lambda, length)?;
        Ok(Self { lambda, k_star, n, l, p })
    }

    /// Checks the schedule constraints: `n_{j-1} + 1 < n_j - l_j`,
    /// `|l_j / n_j - lambda| < 1/j`, `n_{j-1} / n_j <= 1/j`, and that `p`
    /// is a probability vector over `r` digits with a valid pivot.
    pub fn check(&self, r: usize) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidSchedule { reason: "lambda must lie in (0, 1)" });
        }
        if self.n.is_empty() || self.n.len() != self.l.len() {
            return Err(Error::InvalidSchedule { reason: "n and l must be nonempty and of equal length" });
        }
        if self.k_star == 0 || self.k_star > r {
            return Err(Error::InvalidDigit { digit: self.k_star, r });
        }
        if self.p.len() != r {
            return Err(Error::DimensionMismatch { expected: r, found: self.p.len() });
        }
        if self.p.iter().any(|&v| !(v >= 0.0)) || fabs(self.p.iter().sum::<f64>() - 1.0) > 1e-9 {
            return Err(Error::InvalidProbability);
        }
        let mut prev: i64 = -1;
        for (i, (&nj, &lj)) in self.n.iter().zip(&self.l).enumerate() {
            let j = (i + 1) as f64;
            if !(prev + 1 < nj as i64 - lj as i64) {
                return Err(Error::InvalidSchedule { reason: "blocks overlap: need n_(j-1) + 1 < n_j - l_j" });
            }
            if !(fabs(lj as f64 / nj as f64 - self.lambda) < 1.0 / j) {
                return Err(Error::InvalidSchedule { reason: "l_j / n_j too far from lambda" });
            }
            if prev > 0 && prev as f64 / nj as f64 > 1.0 / j {
                return Err(Error::InvalidSchedule { reason: "n_j grows too slowly" });
            }
            prev = nj as i64;
        }
        Ok(())
    }

    /// Role of the 1-based position `i`, or `None` past the schedule.
    pub fn slot(&self, i: usize) -> Option<Slot> {
        let mut prev: i64 = -1;
        for (&nj, &lj) in self.n.iter().zip(&self.l) {
            let i = i as i64;
            let (nj, lj) = (nj as i64, lj as i64);
            if i == prev + 1 && prev >= 0 {
                return Some(Slot::Pivot);
            }
            if i < nj - lj {
                return Some(Slot::Random);
            }
            if i == nj - lj {
                return Some(Slot::Pivot);
            }
            if i <= nj {
                return Some(Slot::Run);
            }
            prev = nj;
        }
        (i as i64 == prev + 1).then_some(Slot::Pivot)
    }
}

/// First `length` digits of a run-structured coding; the random positions
/// are drawn from a ChaCha generator seeded with `seed`.
pub fn generate_run_structured(rs: &RunStructure, length: usize, seed: u64) -> Result<Coding> {
    let r = rs.p.len();
    rs.check(r)?;
    let last = *rs.n.last().unwrap_or(&0);
    if length > last + 1 {
        return Err(Error::InvalidSchedule { reason: "schedule shorter than the requested length" });
    }
    let law = WeightedIndex::new(&rs.p).map_err(|_| Error::InvalidProbability)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits = Vec::with_capacity(length);
    let mut prev: usize = 0;
    'blocks: for (&nj, &lj) in rs.n.iter().zip(&rs.l) {
        // Random block, pivot, run, pivot.
        for i in (if prev == 0 { 1 } else { prev + 2 })..=nj {
            if digits.len() == length {
                break 'blocks;
            }
            let k = if i < nj - lj {
                law.sample(&mut rng) + 1
            } else if i == nj - lj {
                rs.k_star
            } else {
                r
            };
            digits.push(k);
        }
        if digits.len() == length {
            break;
        }
        digits.push(rs.k_star);
        prev = nj;
    }
    Ok(Coding::finite(digits))
}
