use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub(crate) fn norm2(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Estimate of `‖A‖₂²` (largest eigenvalue of `AᵀA`) by power iteration
/// from a seeded random start. Stops after `max_iters` or once the relative
/// change drops below `rel_tol`. The estimate is a lower bound.
pub(crate) fn spectral_norm_sq(a: &Array2<f64>, max_iters: usize, rel_tol: f64, seed: u64) -> f64 {
    let p = a.ncols();
    if p == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x5043_u64);
    let mut v: Array1<f64> = Array1::from_shape_fn(p, |_| StandardNormal.sample(&mut rng));
    let nv = norm2(v.view());
    if nv == 0.0 {
        v.fill(1.0);
    }
    v /= norm2(v.view());
    let mut estimate = 0.0;
    for _ in 0..max_iters {
        let av = a.dot(&v);
        let mut next = a.t().dot(&av);
        let rayleigh = av.dot(&av);
        let len = norm2(next.view());
        if len == 0.0 {
            return rayleigh;
        }
        next /= len;
        let converged = (rayleigh - estimate).abs() <= rel_tol * rayleigh;
        estimate = rayleigh;
        v = next;
        if converged {
            break;
        }
    }
    // one more Rayleigh quotient at the final vector
    let av = a.dot(&v);
    estimate.max(av.dot(&av))
}

/// Euclidean projection onto `{r : ‖r‖₂ ≤ radius}`, in place.
pub(crate) fn project_l2_ball(r: &mut Array1<f64>, radius: f64) {
    let len = norm2(r.view());
    if len > radius {
        if radius == 0.0 {
            r.fill(0.0);
        } else {
            *r *= radius / len;
        }
    }
}

/// Euclidean projection onto `{r : ‖r‖₁ ≤ radius}`, in place (sort-based
/// soft-threshold search).
pub(crate) fn project_l1_ball(r: &mut Array1<f64>, radius: f64) {
    let l1: f64 = r.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return;
    }
    if radius == 0.0 {
        r.fill(0.0);
        return;
    }
    let mut mags: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, m) in mags.iter().enumerate() {
        cumulative += m;
        let candidate = (cumulative - radius) / (k + 1) as f64;
        if *m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    r.mapv_inplace(|v| v.signum() * (v.abs() - theta).max(0.0));
}
