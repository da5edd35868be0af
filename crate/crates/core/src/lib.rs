//! Globally optimal least-squares realization of autonomous, single-output,
//! discrete-time LTI models, with optional a-priori fixed poles.
//!
//! The library reformulates the first-order optimality conditions of the
//! constrained realization problem as a rectangular multiparameter eigenvalue
//! problem and enumerates all of its affine eigenvalues, which yields every
//! real critical point of the misfit objective. Heuristic prefiltering
//! baselines (NPF, TSD) and a seeded Monte Carlo harness are included for
//! comparison experiments.

pub mod baselines;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod gridsearch;
pub mod mepsolve;
pub mod optimality;
pub mod report;
pub mod signalmodel;

pub use error::{Error, Result};
