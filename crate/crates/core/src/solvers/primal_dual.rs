//! First-order primal-dual splitting for `min_x Ω_w(x) + h(Ax)`.
//!
//! The primal step is the OWL prox; the dual step is the prox of `h*`,
//! which for every `h` used here is a clip or a shifted ball projection.
//! Step sizes adapt to balance the primal and dual residuals, with a
//! backtracking guard that shrinks both when `τσ‖A‖²` is too large.

use ndarray::linalg::general_mat_vec_mul;
use ndarray::{Array1, Array2, Zip};

use super::fista::{slice, slice_mut, POWER_ITERS, POWER_REL_TOL};
use super::initial_point;
use super::linalg::{project_l1_ball, project_l2_ball, spectral_norm_sq};
use crate::problem::{ProblemInstance, Solution, SolverConfig};
use crate::prox::prox_owl_scaled_into;

/// The data-fit term `h(r)` applied to `r = Ax`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum DataTerm {
    /// `‖r − y‖₁`
    AbsoluteLoss,
    /// indicator of `‖r − y‖₂ ≤ radius`
    L2Ball { radius: f64 },
    /// indicator of `‖r − y‖₁ ≤ radius`
    L1Ball { radius: f64 },
}

impl DataTerm {
    /// `prox_{σh*}(z)` in place; `scratch` has the length of `z`.
    fn dual_prox(&self, z: &mut Array1<f64>, sigma: f64, y: &Array1<f64>, scratch: &mut Array1<f64>) {
        match *self {
            DataTerm::AbsoluteLoss => {
                z.zip_mut_with(y, |zi, &yi| *zi = (*zi - sigma * yi).clamp(-1.0, 1.0));
            }
            DataTerm::L2Ball { radius } | DataTerm::L1Ball { radius } => {
                // Moreau: z − σ·P_{y+B}(z/σ)
                Zip::from(&mut *scratch).and(&*z).and(y).for_each(|s, &zi, &yi| *s = zi / sigma - yi);
                match self {
                    DataTerm::L2Ball { .. } => project_l2_ball(scratch, radius),
                    _ => project_l1_ball(scratch, radius),
                }
                Zip::from(z).and(&*scratch).and(y).for_each(|zi, &pi, &yi| *zi -= sigma * (pi + yi));
            }
        }
    }
}

const ADAPT_ALPHA0: f64 = 0.5;
const ADAPT_ETA: f64 = 0.95;
const BALANCE_RATIO: f64 = 1.5;
const BACKTRACK_GAMMA: f64 = 0.95;
const BACKTRACK_BETA: f64 = 0.95;

/// Restarts are considered every this many iterations.
const RESTART_PERIOD: usize = 64;
/// Restart when the residual has fallen to this fraction of its value at
/// the last restart...
const RESTART_SUFFICIENT: f64 = 0.2;
/// ...or to this fraction while no longer improving.
const RESTART_NECESSARY: f64 = 0.8;

/// Primal-dual pair with cached products `Ax` and `Aᵀv`.
#[derive(Clone)]
struct State {
    x: Array1<f64>,
    ax: Array1<f64>,
    v: Array1<f64>,
    atv: Array1<f64>,
}

impl State {
    fn from_pair(a: &Array2<f64>, at: &Array2<f64>, x: Array1<f64>, v: Array1<f64>) -> Self {
        Self {
            ax: a.dot(&x),
            atv: at.dot(&v),
            x,
            v,
        }
    }
}

struct StepStats {
    primal: f64,
    dual: f64,
    dx_sq: f64,
    dv_sq: f64,
    /// `⟨A dx, dv⟩`
    cross: f64,
}

impl StepStats {
    fn residual(&self) -> f64 {
        self.primal.max(self.dual)
    }
}

struct Operator<'a> {
    a: &'a Array2<f64>,
    /// `Aᵀ` in standard layout, so both products stream through memory.
    at: Array2<f64>,
    y: &'a Array1<f64>,
    w: &'a [f64],
    term: DataTerm,
    point: Array1<f64>,
    scratch: Array1<f64>,
}

impl Operator<'_> {
    /// One primal-dual step from `from` into `to`.
    fn step(&mut self, from: &State, to: &mut State, tau: f64, sigma: f64) -> StepStats {
        Zip::from(&mut self.point)
            .and(&from.x)
            .and(&from.atv)
            .for_each(|p, &x, &g| *p = x - tau * g);
        prox_owl_scaled_into(slice(&self.point), self.w, tau, slice_mut(&mut to.x));
        general_mat_vec_mul(1.0, self.a, &to.x, 0.0, &mut to.ax);
        Zip::from(&mut to.v)
            .and(&from.v)
            .and(&to.ax)
            .and(&from.ax)
            .for_each(|vn, &v, &axn, &ax| *vn = v + sigma * (2.0 * axn - ax));
        self.term.dual_prox(&mut to.v, sigma, self.y, &mut self.scratch);
        general_mat_vec_mul(1.0, &self.at, &to.v, 0.0, &mut to.atv);

        let mut primal = 0.0;
        let mut dx_sq = 0.0;
        Zip::from(&to.x)
            .and(&from.x)
            .and(&to.atv)
            .and(&from.atv)
            .for_each(|&xn, &x, &gn, &g| {
                let dx = xn - x;
                dx_sq += dx * dx;
                let r = (gn - g) - dx / tau;
                primal += r * r;
            });
        let mut dual = 0.0;
        let mut dv_sq = 0.0;
        let mut cross = 0.0;
        Zip::from(&to.ax)
            .and(&from.ax)
            .and(&to.v)
            .and(&from.v)
            .for_each(|&axn, &ax, &vn, &v| {
                let (adx, dv) = (axn - ax, vn - v);
                dv_sq += dv * dv;
                cross += adx * dv;
                let r = adx - dv / sigma;
                dual += r * r;
            });
        StepStats {
            primal: primal.sqrt(),
            dual: dual.sqrt(),
            dx_sq,
            dv_sq,
            cross,
        }
    }
}

pub(crate) fn run(prob: &ProblemInstance, cfg: &SolverConfig, term: DataTerm) -> Solution {
    let a = prob.design();
    let (n, p) = (prob.n(), prob.p());

    let (mut tau, mut sigma) = match cfg.dual_params {
        Some(steps) => (steps.tau, steps.sigma),
        None => {
            let l = spectral_norm_sq(a, POWER_ITERS, POWER_REL_TOL, cfg.seed).sqrt();
            let l = if l > 0.0 { l } else { 1.0 };
            (0.95 / l, 0.95 / l)
        }
    };
    let mut alpha = ADAPT_ALPHA0;

    let mut op = Operator {
        a,
        at: a.t().as_standard_layout().into_owned(),
        y: prob.observations(),
        w: prob.weights().as_slice(),
        term,
        point: Array1::zeros(p),
        scratch: Array1::zeros(n),
    };
    let mut cur = State::from_pair(a, &op.at, initial_point(p, cfg), Array1::zeros(n));
    let mut next = cur.clone();
    let mut probe = cur.clone();
    let mut x_sum: Array1<f64> = Array1::zeros(p);
    let mut v_sum: Array1<f64> = Array1::zeros(n);
    let mut since_restart = 0usize;
    let mut restart_residual = f64::INFINITY;
    let mut last_candidate = f64::INFINITY;

    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for k in 1..=cfg.max_iters {
        iterations = k;
        let stats = op.step(&cur, &mut next, tau, sigma);
        residual = stats.residual();
        std::mem::swap(&mut cur, &mut next);
        if residual <= cfg.tol {
            converged = true;
            break;
        }

        x_sum += &cur.x;
        v_sum += &cur.v;
        since_restart += 1;
        if since_restart % RESTART_PERIOD == 0 {
            // Compare the current iterate with the average since the last
            // restart, scoring the average by the residual of one step
            // taken from it.
            let count = since_restart as f64;
            let avg = State::from_pair(a, &op.at, &x_sum / count, &v_sum / count);
            let avg_stats = op.step(&avg, &mut probe, tau, sigma);
            let (candidate, use_average) = if avg_stats.residual() < residual {
                (avg_stats.residual(), true)
            } else {
                (residual, false)
            };
            if use_average && candidate <= cfg.tol {
                std::mem::swap(&mut cur, &mut probe);
                residual = candidate;
                converged = true;
                break;
            }
            let restart = candidate <= RESTART_SUFFICIENT * restart_residual
                || (candidate <= RESTART_NECESSARY * restart_residual && candidate > last_candidate)
                || !restart_residual.is_finite();
            if restart {
                if use_average {
                    std::mem::swap(&mut cur, &mut probe);
                    residual = candidate;
                }
                restart_residual = candidate;
                last_candidate = f64::INFINITY;
                x_sum.fill(0.0);
                v_sum.fill(0.0);
                since_restart = 0;
                continue;
            }
            last_candidate = candidate;
        }

        let denom = BACKTRACK_GAMMA * (sigma * stats.dx_sq + tau * stats.dv_sq);
        let cross = 2.0 * tau * sigma * stats.cross;
        if denom > 0.0 && cross > denom {
            let shrink = BACKTRACK_BETA * denom / cross;
            tau *= shrink;
            sigma *= shrink;
        } else if stats.primal > BALANCE_RATIO * stats.dual {
            tau /= 1.0 - alpha;
            sigma *= 1.0 - alpha;
            alpha *= ADAPT_ETA;
        } else if stats.dual > BALANCE_RATIO * stats.primal {
            tau *= 1.0 - alpha;
            sigma /= 1.0 - alpha;
            alpha *= ADAPT_ETA;
        }
    }

    Solution::assemble(prob, cur.x, residual, iterations, converged)
}
