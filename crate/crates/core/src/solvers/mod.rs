//! Solvers for the four OWL-regularized problems.
//!
//! | loss     | Lagrangian                       | constrained                 |
//! |----------|----------------------------------|-----------------------------|
//! | squared  | accelerated proximal gradient    | primal-dual, ℓ2-ball dual   |
//! | absolute | primal-dual, ℓ∞-clip dual        | primal-dual, ℓ1-ball dual   |
//!
//! Every solver starts from zero (unless configured otherwise) and touches
//! the regularizer only through [`crate::prox_owl`].

mod feasibility;
mod fista;
mod linalg;
mod primal_dual;

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use fista::certify_sq_fixed_point;

use crate::error::{OwlError, Result};
use crate::problem::{
    objective_unchecked, Formulation, Initialization, Loss, ProblemInstance, Solution,
    SolverConfig,
};
use primal_dual::DataTerm;

/// Dispatches on the problem's loss and formulation.
pub fn solve(prob: &ProblemInstance, cfg: &SolverConfig) -> Result<Solution> {
    match (prob.loss(), prob.formulation()) {
        (Loss::SquaredL2, Formulation::Lagrangian) => solve_sq_lagrangian(prob, cfg),
        (Loss::AbsoluteL1, Formulation::Lagrangian) => solve_abs_lagrangian(prob, cfg),
        (_, Formulation::Constrained { .. }) => solve_constrained(prob, cfg),
    }
}

/// `min ½‖Ax − y‖₂² + Ω_w(x)`.
pub fn solve_sq_lagrangian(prob: &ProblemInstance, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    expect_kind(prob, Loss::SquaredL2, false)?;
    Ok(fista::run(prob, cfg))
}

/// `min ‖Ax − y‖₁ + Ω_w(x)`.
pub fn solve_abs_lagrangian(prob: &ProblemInstance, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    expect_kind(prob, Loss::AbsoluteL1, false)?;
    Ok(primal_dual::run(prob, cfg, DataTerm::AbsoluteLoss))
}

/// `min Ω_w(x)` subject to `(1/n)‖Ax − y‖₂² ≤ ε²` or `(1/n)‖Ax − y‖₁ ≤ ε`.
///
/// Returns [`OwlError::Infeasible`] when no `x` meets the bound.
pub fn solve_constrained(prob: &ProblemInstance, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let Formulation::Constrained { eps } = prob.formulation() else {
        return Err(OwlError::InvalidArgument(
            "solve_constrained needs a constrained formulation".into(),
        ));
    };
    let zero = Array1::zeros(prob.p());
    if objective_unchecked(prob, zero.view()).feasible {
        return Ok(Solution::assemble(prob, zero, 0.0, 0, true));
    }
    let reference = feasibility::check(prob.design(), prob.observations(), prob.loss(), eps)?;
    let n = prob.n() as f64;
    let term = match prob.loss() {
        Loss::SquaredL2 => DataTerm::L2Ball {
            radius: n.sqrt() * eps,
        },
        Loss::AbsoluteL1 => DataTerm::L1Ball { radius: n * eps },
    };
    let mut sol = primal_dual::run(prob, cfg, term);
    if let Some(reference) = reference {
        restore_feasibility(prob, &mut sol, &reference);
    }
    Ok(sol)
}

/// Primal-dual iterates meet the constraint only in the limit. When the
/// returned point is marginally outside, move it toward a feasible
/// `reference` just far enough; the loss is convex along the segment.
fn restore_feasibility(prob: &ProblemInstance, sol: &mut Solution, reference: &Array1<f64>) {
    let feasible = |x: &Array1<f64>| objective_unchecked(prob, x.view()).feasible;
    if feasible(&sol.x_hat) || !feasible(reference) {
        return;
    }
    let blend = |t: f64| &sol.x_hat * (1.0 - t) + reference * t;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(&blend(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x = blend(hi);
    *sol = Solution::assemble(prob, x, sol.fixed_point_residual, sol.iterations, sol.converged);
}

fn expect_kind(prob: &ProblemInstance, loss: Loss, constrained: bool) -> Result<()> {
    let is_constrained = matches!(prob.formulation(), Formulation::Constrained { .. });
    if prob.loss() != loss || is_constrained != constrained {
        return Err(OwlError::InvalidArgument(format!(
            "solver expects {loss:?} loss with {} formulation, got {:?} / {:?}",
            if constrained { "constrained" } else { "Lagrangian" },
            prob.loss(),
            prob.formulation()
        )));
    }
    Ok(())
}

pub(crate) fn initial_point(p: usize, cfg: &SolverConfig) -> Array1<f64> {
    match cfg.init {
        Initialization::Zero => Array1::zeros(p),
        Initialization::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(0x1e17);
            Array1::from_shape_fn(p, |_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                1e-2 * z
            })
        }
    }
}
