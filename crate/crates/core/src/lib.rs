//! Structured varying-coefficient regression.
//!
//! The response is modelled as
//! `y = β₀ + Zθ₀ + Σⱼ (βⱼ + Zθⱼ) ∘ xⱼ + ε`, with a hierarchical sparse-group
//! penalty over predictor groups, modifier groups and single interactions.
//!
//! - [`model`]: data, coefficients, groups, configuration, objective
//! - [`kernels`]: thresholding, screening, closed-form block updates
//! - [`solver`]: svReg, pliable Lasso and interaction Lasso fits
//! - [`tuning`]: λ grids, warm-started paths, cross-validation
//! - [`simgen`]: seeded simulation designs
//! - [`metrics`]: selection rates, ROC and difference curves
//! - [`study`]: replicated simulation runs

pub mod error;
pub mod io;
pub mod kernels;
pub mod metrics;
pub mod model;
pub mod simgen;
pub mod solver;
pub mod study;
pub mod tuning;

pub use error::{Error, Result};
pub use model::{
    CoefficientRecord, CoefficientSet, Dataset, FitConfig, GroupSpec, GroupSpecFile, PenaltyWeights,
    StandardizationRecord, WeightMode,
};
pub use solver::{fit_lasso_interactions, fit_plasso, fit_svreg, lambda_max, Design, FitResult};
pub use tuning::{Method, PathResult};
