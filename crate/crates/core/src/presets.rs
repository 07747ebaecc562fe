//! Named example systems.
//!
//! | name                 | polygon                          | vertical ratios        |
//! |----------------------|----------------------------------|------------------------|
//! | `takagi:w`           | (0,0) (1/2,1/2) (1,0)            | `2^-w`, `2^-w`         |
//! | `riesz-nagy:a`       | (0,0) (1/2,a) (1,1)              | `a`, `1-a`             |
//! | `okamoto:a`          | (0,0) (1/3,a) (2/3,1-a) (1,1)    | `a`, `1-2a`, `a`       |
//! | `skew-takagi:a,h,d`  | (0,0) (a,h) (1,0)                | `d`, `d`               |

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::system::{Branch, SelfAffineSystem};

/// Preset family with its numeric parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    Takagi { w: f64 },
    RieszNagy { a: f64 },
    Okamoto { a: f64 },
    SkewTakagi { a: f64, h: f64, d: f64 },
}

impl Preset {
    /// Parses `family:p1,p2,...`.
    pub fn parse(name: &str) -> Result<Self> {
        let (family, args) = name
            .split_once(':')
            .ok_or(Error::InvalidPreset { reason: "expected family:parameters" })?;
        let params: Vec<f64> = args
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<core::result::Result<_, _>>()
            .map_err(|_| Error::InvalidPreset { reason: "parameters must be numbers" })?;
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidPreset { reason: "wrong number of parameters" })
            }
        };
        let preset = match family.trim() {
            "takagi" => {
                arity(1)?;
                Preset::Takagi { w: params[0] }
            }
            "riesz-nagy" => {
                arity(1)?;
                Preset::RieszNagy { a: params[0] }
            }
            "okamoto" => {
                arity(1)?;
                Preset::Okamoto { a: params[0] }
            }
            "skew-takagi" => {
                arity(3)?;
                Preset::SkewTakagi { a: params[0], h: params[1], d: params[2] }
            }
            _ => return Err(Error::InvalidPreset { reason: "unknown family" }),
        };
        Ok(preset)
    }

    pub fn build(&self) -> Result<SelfAffineSystem> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        match *self {
            Preset::Takagi { w } => {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidPreset { reason: "takagi needs w > 0" });
                }
                let d = libm::exp2(-w);
                SelfAffineSystem::from_polygon(&[[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]], &[d, d])
            }
            Preset::RieszNagy { a } => {
                if !open_unit(a) {
                    return Err(Error::InvalidPreset { reason: "riesz-nagy needs 0 < a < 1" });
                }
                SelfAffineSystem::from_polygon(&[[0.0, 0.0], [0.5, a], [1.0, 1.0]], &[a, 1.0 - a])
            }
            Preset::Okamoto { a } => {
                if !open_unit(a) {
                    return Err(Error::InvalidPreset { reason: "okamoto needs 0 < a < 1" });
                }
                SelfAffineSystem::from_polygon(
                    &[[0.0, 0.0], [1.0 / 3.0, a], [2.0 / 3.0, 1.0 - a], [1.0, 1.0]],
                    &[a, 1.0 - 2.0 * a, a],
                )
            }
            Preset::SkewTakagi { a, h, d } => {
                if !open_unit(a) || !open_unit(d) || !h.is_finite() {
                    return Err(Error::InvalidPreset {
                        reason: "skew-takagi needs 0 < a < 1, 0 < d < 1 and finite h",
                    });
                }
                SelfAffineSystem::from_polygon(&[[0.0, 0.0], [a, h], [1.0, 0.0]], &[d, d])
            }
        }
    }
}

/// The antiderivative `psi(x) = int_0^x phi` of a system without shear
/// (every `c_k = 0`), which is again self-affine with branches
/// `(a, b, a e, a d, psi(b))`.
pub fn integrate(system: &SelfAffineSystem) -> Result<SelfAffineSystem> {
    let br = system.branches();
    if br.iter().any(|b| libm::fabs(b.c) > crate::system::LINEAR_TOL) {
        return Err(Error::InvalidArgument { reason: "integration needs c_k = 0 for every branch" });
    }
    // Mean of phi over [0,1] from the functional equation.
    let ae: f64 = br.iter().map(|b| b.a * b.e).sum();
    let ad: f64 = br.iter().map(|b| b.a * b.d).sum();
    let mean = ae / (1.0 - ad);
    let mut psi_b = 0.0;
    let mut out = Vec::with_capacity(br.len());
    for b in br {
        out.push(Branch { a: b.a, b: b.b, c: b.a * b.e, d: b.a * b.d, e: psi_b });
        psi_b += b.a * (b.d * mean + b.e);
    }
    SelfAffineSystem::from_branches(&out)
}

/// Parses and builds a preset in one step.
pub fn preset(name: &str) -> Result<SelfAffineSystem> {
    Preset::parse(name)?.build()
}
