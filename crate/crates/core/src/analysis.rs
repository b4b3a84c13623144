//! Cluster detection, sufficient clustering conditions, error metrics and
//! the theoretical error-bound calculator.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::datagen::GroupStructure;
use crate::error::{check_len, OwlError, Result};
use crate::problem::{Formulation, Loss, ProblemInstance};

/// Default magnitude tolerance for deciding that two coefficients cluster.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

/// Sign used in the clustering conditions; zero counts as positive.
pub fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// Column indices per cluster, each sorted; clusters ordered by their
    /// smallest index.
    pub clusters: Vec<Vec<usize>>,
    /// Mean magnitude of each cluster.
    pub magnitudes: Vec<f64>,
    pub tol: f64,
}

impl ClusterReport {
    pub fn cluster_of(&self, j: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&j))
    }
}

/// Single-linkage grouping of coefficient magnitudes: after sorting, a new
/// cluster starts wherever consecutive magnitudes differ by more than `tol`.
pub fn detect_clusters(x: ArrayView1<f64>, tol: f64) -> Result<ClusterReport> {
    if !(tol >= 0.0) {
        return Err(OwlError::InvalidArgument(format!(
            "cluster tolerance must be non-negative, got {tol}"
        )));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<f64> = None;
    for &j in &order {
        let m = x[j].abs();
        match (prev, clusters.last_mut()) {
            (Some(last), Some(cluster)) if m - last <= tol => cluster.push(j),
            _ => clusters.push(vec![j]),
        }
        prev = Some(m);
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    let magnitudes = clusters
        .iter()
        .map(|c| c.iter().map(|&j| x[j].abs()).sum::<f64>() / c.len() as f64)
        .collect();
    Ok(ClusterReport {
        clusters,
        magnitudes,
        tol,
    })
}

fn signed_difference(ai: ArrayView1<f64>, aj: ArrayView1<f64>, si: f64, sj: f64) -> Array1<f64> {
    &ai * si - &aj * sj
}

/// `‖y‖₂ · ‖sᵢaᵢ − sⱼaⱼ‖₂ < Δ`, the sufficient condition for
/// `|x̂ᵢ| = |x̂ⱼ|` under the squared loss.
pub fn check_sq_condition(
    y: ArrayView1<f64>,
    ai: ArrayView1<f64>,
    aj: ArrayView1<f64>,
    si: f64,
    sj: f64,
    delta: f64,
) -> bool {
    let d = signed_difference(ai, aj, si, sj);
    y.dot(&y).sqrt() * d.dot(&d).sqrt() < delta
}

/// The squared-loss condition for every sign combination; use when the
/// solution signs are unknown.
pub fn check_sq_condition_all_signs(
    y: ArrayView1<f64>,
    ai: ArrayView1<f64>,
    aj: ArrayView1<f64>,
    delta: f64,
) -> bool {
    SIGN_PAIRS
        .iter()
        .all(|&(si, sj)| check_sq_condition(y, ai, aj, si, sj, delta))
}

/// `‖sᵢaᵢ − sⱼaⱼ‖₁ < Δ`, the sufficient condition under the absolute loss.
pub fn check_abs_condition(
    ai: ArrayView1<f64>,
    aj: ArrayView1<f64>,
    si: f64,
    sj: f64,
    delta: f64,
) -> bool {
    let d = signed_difference(ai, aj, si, sj);
    d.iter().map(|v| v.abs()).sum::<f64>() < delta
}

pub fn check_abs_condition_all_signs(ai: ArrayView1<f64>, aj: ArrayView1<f64>, delta: f64) -> bool {
    SIGN_PAIRS
        .iter()
        .all(|&(si, sj)| check_abs_condition(ai, aj, si, sj, delta))
}

const SIGN_PAIRS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Post-hoc verdict for one column pair of a solved problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub i: usize,
    pub j: usize,
    /// The sufficient condition, evaluated with the solution's signs.
    pub condition: bool,
    /// `||x̂ᵢ| − |x̂ⱼ|| ≤ tol`.
    pub clustered: bool,
}

impl PairVerdict {
    /// The condition holds but the magnitudes differ: the solution
    /// contradicts the clustering guarantee.
    pub fn is_violation(&self) -> bool {
        self.condition && !self.clustered
    }
}

/// Evaluates the clustering guarantee matching the problem's form for every
/// column pair `i < j`.
///
/// Squared-loss Lagrangian: `‖y‖₂‖sᵢaᵢ − sⱼaⱼ‖₂ < Δ`. Absolute-loss
/// Lagrangian: `‖sᵢaᵢ − sⱼaⱼ‖₁ < Δ`. Constrained forms: `aᵢ = ±aⱼ` exactly
/// and `Δ > 0`.
pub fn verify_pairs(prob: &ProblemInstance, x_hat: ArrayView1<f64>, tol: f64) -> Result<Vec<PairVerdict>> {
    check_len("verify_pairs", prob.p(), x_hat.len())?;
    let a = prob.design();
    let y = prob.observations().view();
    let delta = prob.weights().delta();
    let p = prob.p();
    let mut out = Vec::with_capacity(p * p.saturating_sub(1) / 2);
    for i in 0..p {
        for j in i + 1..p {
            let (si, sj) = (sign(x_hat[i]), sign(x_hat[j]));
            let (ai, aj) = (a.column(i), a.column(j));
            let condition = match (prob.loss(), prob.formulation()) {
                (Loss::SquaredL2, Formulation::Lagrangian) => {
                    check_sq_condition(y, ai, aj, si, sj, delta)
                }
                (Loss::AbsoluteL1, Formulation::Lagrangian) => {
                    check_abs_condition(ai, aj, si, sj, delta)
                }
                (_, Formulation::Constrained { .. }) => {
                    delta > 0.0 && (ai == aj || ai.iter().zip(aj).all(|(u, v)| *u == -*v))
                }
            };
            let clustered = (x_hat[i].abs() - x_hat[j].abs()).abs() <= tol;
            out.push(PairVerdict {
                i,
                j,
                condition,
                clustered,
            });
        }
    }
    Ok(out)
}

/// `‖C(x̂ − x*)‖₂`, the error measure blind to the nullspace of `C`.
pub fn c_metric(x_hat: ArrayView1<f64>, x_star: ArrayView1<f64>, c: &Array2<f64>) -> Result<f64> {
    check_len("c_metric estimate vs truth", x_star.len(), x_hat.len())?;
    check_len("c_metric columns of C", c.ncols(), x_hat.len())?;
    let diff = &x_hat - &x_star;
    let cd = c.dot(&diff);
    Ok(cd.dot(&cd).sqrt())
}

/// Sign-adjusted group sums `zᵢ = Σ_{j∈Gᵢ} sⱼ xⱼ`.
pub fn group_z(x: ArrayView1<f64>, gs: &GroupStructure) -> Result<Array1<f64>> {
    check_len("group_z", gs.p(), x.len())?;
    Ok(gs
        .groups()
        .iter()
        .map(|g| g.iter().map(|&j| gs.signs()[j] * x[j]).sum())
        .collect())
}

/// Maximum column ℓ1 norm.
pub fn matrix_l1_norm(c: &Array2<f64>) -> f64 {
    c.columns()
        .into_iter()
        .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub s: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub w1_over_wbar: f64,
    pub c_l1_norm: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundVariant {
    /// General mixing matrix: `‖C‖₁` and `log q`.
    GeneralQ,
    /// Plain design (`C = I`): `log p`, `‖C‖₁ = 1`.
    IdentityP,
    /// Replication matrix: `log q`, `‖C‖₁ = 1`.
    GroupedQ,
}

/// `√(2π)·(4√2·‖C‖₁·(w₁/w̄)·√(s·ln(dim)/n) + ε)`.
pub fn bound_rhs(b: &BoundInputs, variant: BoundVariant) -> Result<f64> {
    if b.n == 0 {
        return Err(OwlError::InvalidArgument("bound needs n ≥ 1".into()));
    }
    let (dim, c_norm) = match variant {
        BoundVariant::GeneralQ => (b.q, b.c_l1_norm),
        BoundVariant::IdentityP => (b.p, 1.0),
        BoundVariant::GroupedQ => (b.q, 1.0),
    };
    if dim < 2 {
        return Err(OwlError::InvalidArgument(format!(
            "bound needs a dimension of at least 2 so that its log is positive, got {dim}"
        )));
    }
    if !(b.w1_over_wbar >= 1.0) {
        return Err(OwlError::InvalidArgument(format!(
            "w1/w̄ must be at least 1, got {}",
            b.w1_over_wbar
        )));
    }
    if !(c_norm > 0.0) || !(b.eps >= 0.0) {
        return Err(OwlError::InvalidArgument(
            "‖C‖₁ must be positive and ε non-negative".into(),
        ));
    }
    let rate = (b.s as f64 * (dim as f64).ln() / b.n as f64).sqrt();
    let core = 4.0 * std::f64::consts::SQRT_2 * c_norm * b.w1_over_wbar * rate;
    Ok((2.0 * std::f64::consts::PI).sqrt() * (core + b.eps))
}
