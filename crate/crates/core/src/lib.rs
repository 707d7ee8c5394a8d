//! Dimension theory of base-`b` missing-digit carpets.
//!
//! A *missing-digit carpet* is the attractor of the IFS that keeps only a
//! subset `A` of the `b × b` subdivision cells of the unit square. This crate
//! computes, for such carpets:
//!
//! - the multifractal spectrum of the vertical projection of the natural
//!   measure (Legendre pair `(kappa_q, theta_q)`, large-deviation packing
//!   counts),
//! - closed-form Hausdorff dimensions of limsup sets of shrinking rectangles
//!   (random covering and shrinking-target variants), together with a
//!   grid-search oracle over the variational formula,
//! - Hausdorff contents of stripes and b-adic rectangles intersected with the
//!   carpet, with an exact dynamic-programming covering oracle,
//! - a Monte Carlo estimator of the critical exponent of the rectangle
//!   content series, the empirical counterpart of the closed forms.
//!
//! All contents are taken in the b-adic-restricted gauge (covers by b-adic
//! cubes only), which makes every inequality exact with no unknown constants.

pub mod carpet;
pub mod content;
pub mod dim_formulas;
pub mod multifractal;
pub mod simulator;

pub use carpet::{Degeneracy, DigitPattern, WeightVector};
pub use content::DigitSequence;
pub use dim_formulas::{CaseTag, Rates};
pub use multifractal::SpectrumCurve;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    BaseTooSmall(u32),
    #[error("pattern must contain at least one cell")]
    EmptyPattern,
    #[error("cell ({0}, {1}) out of range for base {2}")]
    OutOfRangeCell(i64, i64, u32),
    #[error("weights must be non-negative and sum to 1 (sum deviates by {0:e})")]
    InvalidWeights(f64),
    #[error("weight vector has empty support")]
    EmptySupport,
    #[error("alpha {alpha} outside the spectrum [{min}, {max}]")]
    AlphaOutOfRange { alpha: f64, min: f64, max: f64 },
    #[error("projected measure is a Dirac mass; the spectrum is degenerate")]
    DegenerateSpectrum,
    #[error("tau1 = tau2 leaves beta undefined")]
    TauDegenerate,
    #[error("rates out of range: require {requirement}, got tau1 = {tau1}, tau2 = {tau2}")]
    RatesOutOfRange {
        requirement: &'static str,
        tau1: f64,
        tau2: f64,
    },
    #[error("row frequency vector puts mass {0} on row {1} which has zero weight")]
    UnsupportedRow(f64, usize),
    #[error("cell weight vector puts mass on ({0}, {1}) which is not a pattern cell")]
    WeightOffPattern(usize, usize),
    #[error("rate sequences are empty")]
    EmptyHorizon,
    #[error("s = {0} outside (0, s0 = {1}]")]
    SOutOfRange(f64, f64),
    #[error("digit {0} selects a row of zero weight; the stripe misses the carpet")]
    RowNotInCarpet(u8),
    #[error("y-digit string (len {ylen}) must be at least as long as the x-digit string (len {xlen})")]
    LengthMismatch { xlen: usize, ylen: usize },
    #[error("digit {0} invalid for base {1}")]
    InvalidDigit(u8, u32),
    #[error("digit pair ({0}, {1}) is not a pattern cell; the anchor point leaves the carpet")]
    PointOffCarpet(u8, u8),
    #[error("oracle budget exceeded: generation {requested} > max_gen {max_gen}")]
    BudgetExceeded { requested: usize, max_gen: usize },
    #[error("slope has the same sign at both ends of the s-bracket [{0}, {1}]")]
    BracketNotStraddling(f64, f64),
}

pub type Result<T> = std::result::Result<T, Error>;
