#![allow(dead_code)]

use ndarray::{Array1, Array2};
use owl_core::{ProblemInstance, WeightVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.random_range(-scale..scale))
}

pub fn random_weights(rng: &mut ChaCha8Rng, p: usize, max: f64) -> WeightVector {
    let mut w: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..max)).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    WeightVector::new(w).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn norm(x: &[f64], w: &[f64]) -> f64 {
    let mut m: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// An element of the OWL subdifferential: the k-th largest magnitude gets
/// weight `w_k` with its sign, zero entries get 0.
pub fn owl_subgradient(x: &[f64], w: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    let mut g = vec![0.0; x.len()];
    for (rank, &i) in idx.iter().enumerate() {
        g[i] = if x[i] > 0.0 {
            w[rank]
        } else if x[i] < 0.0 {
            -w[rank]
        } else {
            0.0
        };
    }
    g
}

/// Minimizes `½‖x − u‖² + Ω_w(x)` with `steps` subgradient steps of size `1/k`.
pub fn subgradient_prox(u: &[f64], w: &[f64], steps: usize) -> Vec<f64> {
    let mut x = vec![0.0; u.len()];
    for k in 1..=steps {
        let g = owl_subgradient(&x, w);
        let t = 1.0 / k as f64;
        for i in 0..x.len() {
            x[i] -= t * (x[i] - u[i] + g[i]);
        }
    }
    x
}

fn matvec(a: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    a.rows().into_iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

fn tmatvec(a: &Array2<f64>, r: &[f64]) -> Vec<f64> {
    a.columns().into_iter().map(|c| c.iter().zip(r).map(|(p, q)| p * q).sum()).collect()
}

/// Diminishing-step subgradient descent on `loss(Ax − y) + Ω_w(x)`, returning
/// the best iterate found. `loss_grad` maps a residual to a loss subgradient.
pub fn subgradient_minimize(
    a: &Array2<f64>,
    y: &Array1<f64>,
    w: &[f64],
    steps: usize,
    step0: f64,
    loss: impl Fn(&[f64]) -> f64,
    loss_grad: impl Fn(&[f64]) -> Vec<f64>,
) -> Vec<f64> {
    let p = a.ncols();
    let mut x = vec![0.0; p];
    let f = |x: &[f64]| {
        let r: Vec<f64> = matvec(a, x).iter().zip(y).map(|(ax, yy)| ax - yy).collect();
        loss(&r) + norm(x, w)
    };
    let mut best = x.clone();
    let mut best_f = f(&x);
    for k in 1..=steps {
        let r: Vec<f64> = matvec(a, &x).iter().zip(y).map(|(ax, yy)| ax - yy).collect();
        let gl = tmatvec(a, &loss_grad(&r));
        let gr = owl_subgradient(&x, w);
        let t = step0 / k as f64;
        for i in 0..p {
            x[i] -= t * (gl[i] + gr[i]);
        }
        let fx = f(&x);
        if fx < best_f {
            best_f = fx;
            best.clone_from(&x);
        }
    }
    best
}

pub fn instance(
    a: Array2<f64>,
    y: Array1<f64>,
    w: WeightVector,
    loss: owl_core::Loss,
    formulation: owl_core::Formulation,
) -> ProblemInstance {
    ProblemInstance::new(a, y, w, loss, formulation).unwrap()
}

/// Non-increasing isotonic regression by the min-max formula
/// `x_i = min_{k≤i} max_{l≥i} mean(v[k..=l])`; cubic but independent of PAV.
pub fn isotonic_minmax(v: &[f64]) -> Vec<f64> {
    let p = v.len();
    let mean = |k: usize, l: usize| v[k..=l].iter().sum::<f64>() / (l - k + 1) as f64;
    (0..p)
        .map(|i| {
            (0..=i)
                .map(|k| (i..p).map(|l| mean(k, l)).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

pub fn naive_prox(u: &[f64], w: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..u.len()).collect();
    idx.sort_by(|&a, &b| u[b].abs().total_cmp(&u[a].abs()));
    let shifted: Vec<f64> = idx.iter().zip(w).map(|(&i, wi)| u[i].abs() - wi).collect();
    let iso = isotonic_minmax(&shifted);
    let mut x = vec![0.0; u.len()];
    for (&i, v) in idx.iter().zip(iso) {
        x[i] = u[i].signum() * v.max(0.0);
    }
    x
}

/// Unaccelerated proximal gradient on `½‖Ax − y‖² + τ·Ω_w(x)` with step
/// `1/‖A‖_F²` and the naive prox above.
pub fn ista(a: &Array2<f64>, y: &Array1<f64>, w: &[f64], tau: f64, steps: usize) -> Vec<f64> {
    let p = a.ncols();
    let lf: f64 = a.iter().map(|v| v * v).sum();
    let t = 1.0 / lf;
    let tw: Vec<f64> = w.iter().map(|v| v * tau * t).collect();
    let mut x = vec![0.0; p];
    for _ in 0..steps {
        let r: Vec<f64> = matvec(a, &x).iter().zip(y).map(|(ax, yy)| ax - yy).collect();
        let g = tmatvec(a, &r);
        let u: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
        let next = naive_prox(&u, &tw);
        let moved = dist(&next, &x);
        x = next;
        if moved == 0.0 {
            break;
        }
    }
    x
}

/// Linear program for absolute-loss problems. Minimizes
/// `data_weight·‖Ax − y‖₁ + Ω_w(x)`, or `Ω_w(x)` subject to
/// `‖Ax − y‖₁ ≤ l1_budget` when a budget is given. `Ω_w` is written as
/// `Σ_k (w_k − w_{k+1}) T_k(|x|)` with `T_k` the top-k sum, and
/// `T_k(v) = min_θ kθ + Σ_i (v_i − θ)_+`.
pub fn lp_abs(
    a: &Array2<f64>,
    y: &Array1<f64>,
    w: &[f64],
    l1_budget: Option<f64>,
) -> (Vec<f64>, f64) {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let (n, p) = a.dim();
    let free = (f64::NEG_INFINITY, f64::INFINITY);
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let x: Vec<_> = (0..p).map(|_| lp.add_var(0.0, free)).collect();
    let v: Vec<_> = (0..p).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for i in 0..p {
        lp.add_constraint([(v[i], 1.0), (x[i], -1.0)], ComparisonOp::Ge, 0.0);
        lp.add_constraint([(v[i], 1.0), (x[i], 1.0)], ComparisonOp::Ge, 0.0);
    }
    for k in 0..p {
        let c = w[k] - w.get(k + 1).copied().unwrap_or(0.0);
        if c <= 0.0 {
            continue;
        }
        let theta = lp.add_var(c * (k + 1) as f64, free);
        for i in 0..p {
            let s = lp.add_var(c, (0.0, f64::INFINITY));
            lp.add_constraint([(s, 1.0), (v[i], -1.0), (theta, 1.0)], ComparisonOp::Ge, 0.0);
        }
    }
    let data_weight = if l1_budget.is_some() { 0.0 } else { 1.0 };
    let t: Vec<_> = (0..n).map(|_| lp.add_var(data_weight, (0.0, f64::INFINITY))).collect();
    for r in 0..n {
        let mut plus: Vec<_> = (0..p).map(|j| (x[j], a[[r, j]])).collect();
        plus.push((t[r], -1.0));
        lp.add_constraint(plus.clone(), ComparisonOp::Le, y[r]);
        let mut minus: Vec<_> = (0..p).map(|j| (x[j], a[[r, j]])).collect();
        minus.push((t[r], 1.0));
        lp.add_constraint(minus, ComparisonOp::Ge, y[r]);
    }
    if let Some(budget) = l1_budget {
        lp.add_constraint(t.iter().map(|&ti| (ti, 1.0)), ComparisonOp::Le, budget);
    }
    let outcome = lp.solve().expect("oracle LP solves");
    let sol = outcome.solution().expect("oracle LP has a solution");
    let xs: Vec<f64> = x.iter().map(|&xi| sol.var_value(xi)).collect();
    (xs, sol.objective())
}
