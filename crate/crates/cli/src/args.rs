use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "affine-spectra", version, about = "Self-affine functions: evaluation, Hölder exponents, spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Preset such as `takagi:0.5`, `riesz-nagy:0.3`, `okamoto:0.5`,
    /// `skew-takagi:0.3,0.5,0.25`.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON system description.
    #[arg(long)]
    pub system: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SpectrumSource {
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Constants previously written by the `constants` command.
    #[arg(long)]
    pub constants: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Out {
    /// Output file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exponent,
    Derivative,
    Ae,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowArg {
    Left,
    Right,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a system and print its branches and polygon.
    Validate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Out,
    },
    /// Spectrum constants as JSON.
    Constants {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Out,
    },
    /// Evaluate phi at given points (`0.3`, `1/3`).
    Eval {
        #[command(flatten)]
        source: Source,
        #[arg(long = "x", required = true, num_args = 1..)]
        x: Vec<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Evaluate phi on a uniform grid of `[0, 1]`.
    Sample {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1025)]
        points: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Digits and cut-point status of a point.
    Coding {
        #[command(flatten)]
        source: Source,
        #[arg(long = "x")]
        x: String,
        #[arg(long, default_value_t = 32)]
        depth: usize,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Exact pointwise exponent at a point given by a coding or a rational.
    Exponent {
        #[command(flatten)]
        source: Source,
        /// Coding such as `1,2,(1,2)`; parentheses mark the period.
        #[arg(long, conflicts_with = "x", required_unless_present = "x")]
        coding: Option<String>,
        #[arg(long = "x")]
        x: Option<String>,
        /// Force the finite-horizon estimate at this depth.
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Multifractal spectrum table.
    Spectrum {
        #[command(flatten)]
        source: SpectrumSource,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Cross-check exact results against empirical estimates.
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Codings to check (exponent and derivative modes).
        #[arg(long = "coding")]
        codings: Vec<String>,
        /// Additional random periodic codings (exponent mode).
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, value_enum, default_value_t = WindowArg::Both)]
        window: WindowArg,
        /// Allowed slope error (exponent mode) or median error (ae mode).
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = 0.98)]
        min_r2: f64,
        /// Sample points (ae mode).
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Run-structured coding with prescribed run proportion.
    GenCoding {
        #[command(flatten)]
        source: Source,
        /// Run proportion in `(0, 1)`.
        #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
        lambda: Option<f64>,
        /// Target exponent in `(1, alpha0)`; sets lambda from the optimal law.
        #[arg(long)]
        alpha: Option<f64>,
        /// Digit law on the random positions, comma separated (default: the
        /// optimal law in the second regime, `a` otherwise).
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        /// Pivot digit (default: the first index of Lambda, else 1).
        #[arg(long)]
        k_star: Option<usize>,
        /// Block ends; the default schedule is used when absent.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// Number of digits; defaults to `n_last + 1` with explicit block
        /// ends and to 10000 otherwise.
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
}
