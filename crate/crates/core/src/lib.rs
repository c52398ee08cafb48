//! Risk-sensitive policy evaluation toolkit.
//!
//! The exact risk-sensitive cost of a stationary policy on a finite Markov
//! chain is `ln λ`, where `λ` is the Perron value of the multiplicative matrix
//! `γ_ij = exp(c(i,j)) p(j|i)`. Linear function approximation replaces that
//! matrix by its D-weighted projection `Q = Π (C∘P)`, whose Perron value `μ`
//! gives the approximate cost `ln μ`. This crate computes both, every upper
//! bound on `ln(λ/μ)` implemented in [`bounds`], the conditions under which
//! the error vanishes, and simulates the stochastic-approximation learners
//! whose limits are `μ`, `λ` and the average cost.
//!
//! Module map:
//! - [`chain`]: chain validation, stationary distribution, `C∘P`.
//! - [`spectral`]: Perron pairs, induced 1-norm, Gram solves.
//! - [`approximation`]: feature checks, projection, `Q` and `μ`.
//! - [`bounds`]: actual error, bounds, validity and ordering checks.
//! - [`learners`]: trajectories and the three recursions.
//! - [`families`], [`report`], [`cli`]: example generators and the command-line front end.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approximation;
pub mod bounds;
pub mod chain;
pub mod cli;
pub mod error;
pub mod families;
pub mod learners;
pub mod linalg;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};

pub use approximation::{FeatureFlags, FeatureMatrix, ProjectedSystem};
pub use bounds::{BoundReport, ZeroErrorCertificate};
pub use chain::{ChainSpec, ChainValidationReport, MultiplicativeMatrix, StationaryDistribution};
pub use learners::{LearnerTrace, StepSchedule};
pub use spectral::{Normalization, PerronPair};
