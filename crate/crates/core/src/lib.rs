//! Estimating versus achieving fundamental limits on finite alphabets.
//!
//! Three ways to learn the Bayes error of a binary classification problem, or
//! the Shannon entropy of a memoryless source, from `n` samples:
//!
//! 1. **Estimate** the limit directly with a minimax-style estimator built on
//!    best polynomial approximation ([`estimate::optimal_l1_estimator`],
//!    [`estimate::optimal_entropy_estimator`]).
//! 2. **Plug in** the empirical distribution ([`estimate::plugin_bayes_error`],
//!    [`estimate::plugin_entropy`]). Biased downward in expectation.
//! 3. **Achieve** the limit with an explicit classifier or coder and measure
//!    its performance ([`classify`], [`estimate::compression_entropy_estimator`]).
//!    Biased upward in expectation.
//!
//! The optimal estimator with `n` samples behaves like the other two routes
//! with roughly `n ln n` samples. The [`experiments`] module runs the Monte
//! Carlo comparisons; [`oracle`] holds exact probability kernels and
//! numerical checks of the supporting tail inequalities.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dist;
pub mod envelope;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod oracle;
pub mod polyapprox;

mod sum;

pub use classify::{DecisionRegime, RegretMethod, RegretReport, ThresholdRule};
pub use dist::{EmpiricalCounts, FiniteDistribution, RngSeed, SamplingMode};
pub use envelope::{LabeledDistribution, RedundancyBounds};
pub use error::{Error, Result};
pub use estimate::{CodingScheme, EstimateReport, EstimatorParams};
pub use polyapprox::PolyApprox;
