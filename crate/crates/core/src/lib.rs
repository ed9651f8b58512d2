//! Function-on-function linear regression by functional principal
//! components.
//!
//! Given paired curves (Xᵢ, Yᵢ) on I = [0, 1] with
//! E(Y | X)(s) = E Y(s) + ∫ b(s,t) {X(t) − E X(t)} dt, the crate estimates
//! the coefficient surface b with two series estimators built on the
//! eigenbasis of the empirical covariance of X, selects truncation levels
//! by leave-one-out cross-validation, and ships the Monte Carlo harness used
//! to check the estimators' convergence rates.

pub mod error;
pub mod fpca;
pub mod grid;
pub mod io;
pub mod regression;
pub mod selection;
pub mod simulation;

pub use error::{FofError, Result};
pub use fpca::{
    compute_scores, eigendecompose, empirical_covariance, empirical_mean, fix_signs, EigenSystem,
    ScoreMatrix,
};
pub use grid::{
    apply_kernel, inner_product, l2_norm, surface_norm, tensor, FunctionSample, Grid, Surface,
};
pub use regression::{
    estimation_error, fit_double, fit_single, fit_with_eigen, population_coefficient, predict,
    CoefficientSurface, Coefficients, Estimator, FitStatus, FittedModel, Truncation,
};
pub use selection::{cross_validate, cv_double, cv_single, CvResult, CvScore};
pub use simulation::{
    cosine_basis, generate_dataset, mise_sweep, run_study, slope_check, theory_slope, DgpConfig,
    MiseSweep, Region, SimResult, SlopeCheck,
};
