//! Monte Carlo and finite-difference tools for decoupled forward–backward SDEs
//! with degenerate volatility and discontinuous terminal data.
//!
//! The forward state solves `dX = b dt + σ dW`; the backward pair satisfies
//! `Y_t = u(t, X_t)` and `Z_t = u_x(t, X_t) σ(t, X_t)`. The crate estimates `u`,
//! `u_x` and `Z` by simulation with Malliavin weights and checks them against an
//! explicit finite-difference solver and closed forms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degeneracy;
pub mod error;
pub mod estimators;
pub mod interp;
pub mod model;
pub mod oracles;
pub mod pde;
pub mod quadrature;
pub mod sde;
pub mod stats;
pub mod weights;

pub use degeneracy::{
    characteristic, check_gamma_equivalence, gamma_report, locate_tau, sample_grid,
    CharacteristicPath, DegeneracyReport, Gamma0Classifier, GammaEquivalenceReport,
    DEFAULT_EPS_SIGMA, DEFAULT_ODE_STEPS,
};
pub use error::{FbsdeError, Result};
pub use estimators::{
    empirical_lambda_moment, estimate_u, estimate_ux_pathwise, estimate_ux_weighted,
    picard_value_iteration, reconstruct_z, Estimate, McOptions, PicardResult, ValueProvider, ZPath,
};
pub use interp::GridInterpolant;
pub use model::{
    builtin_model, girsanov_const, transformed_drift, CoefficientModel, Driver, ModelBuilder,
    ModelSpec, Params, ProblemPoint, BUILTIN_MODELS,
};
pub use oracles::Example1Params;
pub use pde::{cfl_check, solve_fd, CflReport, PdeGrid, PdeSolution};
pub use sde::{simulate_batch, simulate_path, Batch, PathBundle, PathStepper, TimeGrid};
pub use weights::{WeightKind, WeightSample};
