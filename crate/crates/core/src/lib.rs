//! Minimal-complexity margin classifiers trained by linear programming.
//!
//! This crate implements a family of hyperplane classifiers whose training
//! problem is a single linear program: a hard-margin variant for separable
//! data, a soft-margin variant with per-sample slacks, a fuzzy variant that
//! weights each slack by a membership in (0, 1], and kernelized versions of
//! the soft and fuzzy forms built on an expansion over training samples.
//!
//! Everything needed to train and evaluate the classifiers lives here:
//!
//! * [`lp`] — a self-contained two-phase dense simplex solver,
//! * [`kernels`] — linear and Gaussian kernels plus Gram matrices,
//! * [`dataset`] — in-memory datasets and feature standardization,
//! * [`membership`] — distance-to-class-center fuzzy memberships,
//! * [`mcm`] — the LP formulations, training, and prediction,
//! * [`io`] — CSV ingestion, model persistence, closed-form export,
//! * [`eval`] — stratified cross-validation and grid search.
//!
//! The companion `fatmargin` binary wraps these into a benchmark CLI.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod io;
pub mod kernels;
pub mod lp;
pub mod mcm;
pub mod membership;

pub use dataset::{Dataset, StandardizationParams};
pub use error::Error;
pub use kernels::KernelSpec;
pub use mcm::{KernelModel, LinearModel, McmOptions};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
