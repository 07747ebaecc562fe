//! Pointwise and multifractal analysis of self-affine functions
//! `phi(a_k x + b_k) = c_k x + d_k phi(x) + e_k` on `[0, 1]`.
//!
//! The crate is `no_std` (with `alloc`); IO and the command line live in
//! the `affine-spectra` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod coding;
pub mod constants;
pub mod divdiff;
pub mod error;
pub mod evaluator;
pub mod exponent;
pub mod oracle;
pub mod presets;
pub mod rational;
pub mod roots;
pub mod runs;
pub mod spectrum;
pub mod system;

pub use coding::{BasicInterval, Coding, CutPoint, Point, PointCoding, RunStats, TStatus};
pub use constants::{compute_constants, Regime, SpectrumConstants};
pub use error::{Error, Result};
pub use evaluator::{derivative_series, evaluate, sample, EvalResult, Evaluator};
pub use presets::{preset, Preset};
pub use system::{validate, Branch, SelfAffineSystem};
pub use exponent::{cut_point_exponents, exponent_report, gammas, holder_left, holder_right, ExponentReport, Side};
pub use spectrum::{spectrum_d, Exponent, SpectrumBranch, SpectrumPoint};
