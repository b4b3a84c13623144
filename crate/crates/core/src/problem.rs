//! Problem instances, solver configuration and solution records.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, OwlError, Result};
use crate::norm::owl_norm_unchecked;
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// `½‖Ax − y‖₂²` (Lagrangian) or `(1/n)‖Ax − y‖₂² ≤ ε²` (constrained).
    SquaredL2,
    /// `‖Ax − y‖₁` (Lagrangian) or `(1/n)‖Ax − y‖₁ ≤ ε` (constrained).
    AbsoluteL1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Formulation {
    /// Minimize loss plus `Ω_w`.
    Lagrangian,
    /// Minimize `Ω_w` subject to the normalized residual bound `eps`.
    Constrained { eps: f64 },
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: Array2<f64>,
    y: Array1<f64>,
    w: WeightVector,
    loss: Loss,
    formulation: Formulation,
}

impl ProblemInstance {
    pub fn new(
        a: Array2<f64>,
        y: Array1<f64>,
        w: WeightVector,
        loss: Loss,
        formulation: Formulation,
    ) -> Result<Self> {
        check_len("observations vs design rows", a.nrows(), y.len())?;
        check_len("weights vs design columns", a.ncols(), w.len())?;
        if a.nrows() == 0 {
            return Err(OwlError::InvalidArgument("design has no rows".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(OwlError::NonFinite("design matrix"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(OwlError::NonFinite("observations"));
        }
        if let Formulation::Constrained { eps } = formulation {
            if !(eps >= 0.0) || !eps.is_finite() {
                return Err(OwlError::InvalidArgument(format!(
                    "constraint level must be finite and non-negative, got {eps}"
                )));
            }
        }
        Ok(Self {
            a,
            y,
            w,
            loss,
            formulation,
        })
    }

    pub fn design(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn observations(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn weights(&self) -> &WeightVector {
        &self.w
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn p(&self) -> usize {
        self.a.ncols()
    }

    pub(crate) fn residual(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.a.dot(&x) - &self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepRule {
    /// `1/L` with `L` from power iteration on `AᵀA`; a sufficient-decrease
    /// check still doubles `L` if the estimate turns out low.
    FixedFromSpectralNorm,
    /// Start from `L = 1` and double on every failed sufficient-decrease test.
    Backtracking,
}

/// Initial primal and dual step sizes for the primal-dual solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualSteps {
    pub tau: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Initialization {
    Zero,
    /// Small Gaussian perturbation drawn from `SolverConfig::seed`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub step_rule: StepRule,
    pub dual_params: Option<PrimalDualSteps>,
    pub init: Initialization,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            tol: 1e-8,
            step_rule: StepRule::FixedFromSpectralNorm,
            dual_params: None,
            init: Initialization::Zero,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(OwlError::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(OwlError::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if let Some(steps) = self.dual_params {
            if !(steps.tau > 0.0 && steps.sigma > 0.0) {
                return Err(OwlError::InvalidArgument(
                    "primal-dual step sizes must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x_hat: Array1<f64>,
    pub objective: f64,
    pub residual_l2_sq_over_n: f64,
    pub residual_l1_over_n: f64,
    pub fixed_point_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Solution {
    pub(crate) fn assemble(
        prob: &ProblemInstance,
        x_hat: Array1<f64>,
        fixed_point_residual: f64,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let r = prob.residual(x_hat.view());
        let n = prob.n() as f64;
        let objective = objective_unchecked(prob, x_hat.view()).value;
        Self {
            residual_l2_sq_over_n: r.dot(&r) / n,
            residual_l1_over_n: r.iter().map(|v| v.abs()).sum::<f64>() / n,
            x_hat,
            objective,
            fixed_point_residual,
            iterations,
            converged,
        }
    }
}

/// Objective value and, for constrained problems, whether `x` satisfies the
/// residual bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    pub feasible: bool,
}

/// Evaluates the problem's objective at `x`.
///
/// Lagrangian forms return loss plus `Ω_w(x)` (always feasible).
/// Constrained forms return `Ω_w(x)` with the feasibility of the
/// normalized residual bound.
pub fn objective(prob: &ProblemInstance, x: ArrayView1<f64>) -> Result<ObjectiveValue> {
    check_len("objective", prob.p(), x.len())?;
    Ok(objective_unchecked(prob, x))
}

pub(crate) fn objective_unchecked(prob: &ProblemInstance, x: ArrayView1<f64>) -> ObjectiveValue {
    let xs = x.to_vec();
    let reg = owl_norm_unchecked(&xs, prob.w.as_slice());
    let r = prob.residual(x);
    let n = prob.n() as f64;
    match prob.formulation {
        Formulation::Lagrangian => {
            let loss = match prob.loss {
                Loss::SquaredL2 => 0.5 * r.dot(&r),
                Loss::AbsoluteL1 => r.iter().map(|v| v.abs()).sum(),
            };
            ObjectiveValue {
                value: loss + reg,
                feasible: true,
            }
        }
        Formulation::Constrained { eps } => {
            let (lhs, bound) = match prob.loss {
                Loss::SquaredL2 => (r.dot(&r) / n, eps * eps),
                Loss::AbsoluteL1 => (r.iter().map(|v| v.abs()).sum::<f64>() / n, eps),
            };
            ObjectiveValue {
                value: reg,
                feasible: lhs <= bound * (1.0 + 1e-9) + 1e-12,
            }
        }
    }
}
