//! Ordered weighted ℓ1 (OWL) regularized regression.
//!
//! The OWL norm `Ω_w(x) = Σᵢ wᵢ |x|_[i]` pairs the sorted coefficient
//! magnitudes with a non-increasing weight sequence. It contains ℓ1, ℓ∞,
//! OSCAR and SLOPE as special cases and, when consecutive weights differ,
//! pulls the coefficients of strongly correlated columns to a common
//! magnitude.
//!
//! This crate provides the norm and its proximal operator, solvers for the
//! squared- and absolute-loss problems in Lagrangian and constrained form,
//! a seeded generator for replicated Gaussian designs, clustering checks
//! and the expected-error bound, plus a Monte-Carlo experiment runner.

pub mod analysis;
pub mod datagen;
mod error;
pub mod experiment;
pub mod io;
pub mod isotonic;
mod norm;
pub mod par;
pub mod problem;
mod prox;
mod quantile;
pub mod solvers;
mod transfer;
mod weights;

pub use error::{OwlError, Result};
pub use norm::owl_norm;
pub use problem::{
    objective, Formulation, Initialization, Loss, ObjectiveValue, PrimalDualSteps,
    ProblemInstance, Solution, SolverConfig, StepRule,
};
pub use prox::prox_owl;
pub use quantile::standard_normal_quantile;
pub use solvers::{solve, solve_abs_lagrangian, solve_constrained, solve_sq_lagrangian};
pub use transfer::pigou_dalton_transfer;
pub use weights::{min_gap, oscar_weights, slope_weights, WeightVector};
