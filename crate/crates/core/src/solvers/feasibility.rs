//! Decides whether a normalized residual bound can be met at all.
//!
//! Squared loss: the least-squares residual is the exact minimum. Absolute
//! loss: least squares gives an upper bound and a dual certificate
//! `v ∈ null(Aᵀ)`, `‖v‖∞ ≤ 1` gives lower bounds `vᵀy`; when the two do not
//! separate the bound, a short least-absolute-deviation run tightens both.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};

use super::linalg::{norm2, spectral_norm_sq};
use crate::error::{OwlError, Result};
use crate::problem::Loss;

const REFINE_ITERS: usize = 20_000;
const REFINE_CHECK_EVERY: usize = 50;

/// Orthogonal projector onto `range(A)`, held as an orthonormal basis, plus
/// the pseudo-inverse map to least-squares coefficients.
struct RangeBasis {
    basis: Array2<f64>,
    /// `V_k Σ_k⁻¹`, so that `x_ls = coef · (basisᵀ y)`.
    coef: Array2<f64>,
}

impl RangeBasis {
    fn new(a: &Array2<f64>) -> Self {
        let (n, p) = a.dim();
        let m = DMatrix::from_row_iterator(n, p, a.iter().copied());
        let svd = m.svd(true, true);
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cutoff = n.max(p) as f64 * top * f64::EPSILON;
        let keep: Vec<usize> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s > cutoff)
            .map(|(k, _)| k)
            .collect();
        let basis = Array2::from_shape_fn((n, keep.len()), |(i, c)| u[(i, keep[c])]);
        let coef = Array2::from_shape_fn((p, keep.len()), |(j, c)| {
            v_t[(keep[c], j)] / svd.singular_values[keep[c]]
        });
        Self { basis, coef }
    }

    fn least_squares(&self, y: &Array1<f64>) -> Array1<f64> {
        self.coef.dot(&self.basis.t().dot(y))
    }

    /// `v − P_range(A) v`
    fn complement(&self, v: &Array1<f64>) -> Array1<f64> {
        let coeffs = self.basis.t().dot(v);
        v - &self.basis.dot(&coeffs)
    }
}

/// Errors when the bound cannot be met. Otherwise returns a point that meets
/// it (up to a `1e-9` relative slack) when one turned up along the way.
pub(crate) fn check(a: &Array2<f64>, y: &Array1<f64>, loss: Loss, eps: f64) -> Result<Option<Array1<f64>>> {
    let n = y.len() as f64;
    let y_inf = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let range = RangeBasis::new(a);
    let r_ls = range.complement(y);
    match loss {
        Loss::SquaredL2 => {
            let min_rms = norm2(r_ls.view()) / n.sqrt();
            let tol = 1e-9 * (1.0 + y_inf);
            if min_rms > eps + tol {
                return Err(OwlError::Infeasible {
                    min_residual: min_rms,
                    bound: eps,
                });
            }
            Ok(Some(range.least_squares(y)))
        }
        Loss::AbsoluteL1 => {
            let tol = 1e-9 * (1.0 + y_inf);
            let mut upper = r_ls.iter().map(|v| v.abs()).sum::<f64>() / n;
            if upper <= eps + tol {
                return Ok(Some(range.least_squares(y)));
            }
            let r_inf = r_ls.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut lower = r_ls.dot(&r_ls) / r_inf / n;
            if lower > eps + tol {
                return Err(OwlError::Infeasible {
                    min_residual: lower,
                    bound: eps,
                });
            }
            refine_lad(a, y, &range, eps, tol, &mut upper, &mut lower)
        }
    }
}

/// Primal-dual iterations on `min ‖Ax − y‖₁`, tracking the best primal
/// value and the best projected dual value.
fn refine_lad(
    a: &Array2<f64>,
    y: &Array1<f64>,
    range: &RangeBasis,
    eps: f64,
    tol: f64,
    upper: &mut f64,
    lower: &mut f64,
) -> Result<Option<Array1<f64>>> {
    let n = y.len() as f64;
    let l = spectral_norm_sq(a, 100, 1e-9, 7).sqrt().max(f64::MIN_POSITIVE) * 1.05;
    let (tau, sigma) = (1.0 / l, 1.0 / l);
    let mut x: Array1<f64> = Array1::zeros(a.ncols());
    let mut v: Array1<f64> = Array1::zeros(a.nrows());
    for k in 1..=REFINE_ITERS {
        let x_new = &x - &(a.t().dot(&v) * tau);
        let x_bar = &x_new * 2.0 - &x;
        v = &v + &((a.dot(&x_bar) - y) * sigma);
        v.mapv_inplace(|t| t.clamp(-1.0, 1.0));
        x = x_new;
        if k % REFINE_CHECK_EVERY == 0 {
            let r = a.dot(&x) - y;
            let value = r.iter().map(|t| t.abs()).sum::<f64>() / n;
            *upper = upper.min(value);
            let certificate = range.complement(&v);
            let scale = certificate.iter().fold(1.0f64, |m, t| m.max(t.abs()));
            *lower = lower.max(-certificate.dot(y) / scale / n);
            if value <= eps + tol {
                return Ok(Some(x));
            }
            if *lower > eps + tol {
                return Err(OwlError::Infeasible {
                    min_residual: *lower,
                    bound: eps,
                });
            }
        }
    }
    // undecided: let the solver try
    Ok(None)
}
