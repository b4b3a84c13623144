//! Synthetic data from the correlated Gaussian model `A = B·C`.
//!
//! `B` is `n × q` with i.i.d. standard normal entries and `C` is a `q × p`
//! mixing matrix; replication matrices (1-sparse unit columns) produce
//! groups of identical (or sign-flipped) columns in `A`.
//!
//! All draws come from ChaCha8, a counter-based generator. The design, the
//! signal, the noise and random group layouts read separate streams of the
//! same seed, so each can be varied on its own.

use ndarray::{Array1, Array2};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{OwlError, Result};

const STREAM_DESIGN: u64 = 1;
const STREAM_SIGNAL: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_GROUPS: u64 = 4;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Partition of the column indices `0..p` into groups, with a `±1` sign
/// per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStructure {
    groups: Vec<Vec<usize>>,
    signs: Vec<f64>,
}

impl GroupStructure {
    /// Validates that `groups` partitions `0..p` into non-empty sets.
    /// `signs` defaults to all `+1`.
    pub fn new(groups: Vec<Vec<usize>>, signs: Option<Vec<f64>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(OwlError::InvalidArgument("no groups given".into()));
        }
        let p: usize = groups.iter().map(Vec::len).sum();
        let mut seen = vec![false; p];
        for group in &groups {
            if group.is_empty() {
                return Err(OwlError::InvalidArgument("empty group".into()));
            }
            for &j in group {
                if j >= p || seen[j] {
                    return Err(OwlError::InvalidArgument(format!(
                        "groups must partition 0..{p}; index {j} is out of range or repeated"
                    )));
                }
                seen[j] = true;
            }
        }
        let signs = match signs {
            Some(s) => {
                if s.len() != p {
                    return Err(OwlError::DimensionMismatch {
                        what: "column signs",
                        expected: p,
                        got: s.len(),
                    });
                }
                if s.iter().any(|v| *v != 1.0 && *v != -1.0) {
                    return Err(OwlError::InvalidArgument("signs must be ±1".into()));
                }
                s
            }
            None => vec![1.0; p],
        };
        Ok(Self { groups, signs })
    }

    /// Every column in its own group.
    pub fn singletons(p: usize) -> Result<Self> {
        Self::new((0..p).map(|j| vec![j]).collect(), None)
    }

    /// `q` contiguous groups whose sizes differ by at most one.
    pub fn balanced(q: usize, p: usize) -> Result<Self> {
        check_qp(q, p)?;
        let mut groups = Vec::with_capacity(q);
        let mut start = 0;
        for g in 0..q {
            let size = p / q + usize::from(g < p % q);
            groups.push((start..start + size).collect());
            start += size;
        }
        Self::new(groups, None)
    }

    /// Uniformly shuffled columns; each group receives at least one column
    /// and the remaining columns land in uniformly chosen groups.
    pub fn random(q: usize, p: usize, seed: u64) -> Result<Self> {
        check_qp(q, p)?;
        let mut rng = rng_for(seed, STREAM_GROUPS);
        let mut cols: Vec<usize> = (0..p).collect();
        cols.shuffle(&mut rng);
        let mut groups: Vec<Vec<usize>> = cols[..q].iter().map(|&j| vec![j]).collect();
        for &j in &cols[q..] {
            let g = rng.random_range(0..q);
            groups[g].push(j);
        }
        for g in &mut groups {
            g.sort_unstable();
        }
        Self::new(groups, None)
    }

    /// Same partition with independent random column signs.
    pub fn with_random_signs(mut self, seed: u64) -> Self {
        let mut rng = rng_for(seed, STREAM_GROUPS ^ 0xff);
        for s in &mut self.signs {
            *s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        self
    }

    pub fn p(&self) -> usize {
        self.signs.len()
    }

    pub fn q(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// All unordered column pairs sharing a group, with the product of
    /// their signs (`+1` for identical columns, `-1` for flipped ones).
    pub fn duplicate_pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut pairs = Vec::new();
        for group in &self.groups {
            for (k, &i) in group.iter().enumerate() {
                for &j in &group[k + 1..] {
                    pairs.push((i, j, self.signs[i] * self.signs[j]));
                }
            }
        }
        pairs
    }
}

fn check_qp(q: usize, p: usize) -> Result<()> {
    if q == 0 || q > p {
        return Err(OwlError::InvalidArgument(format!(
            "need 1 ≤ q ≤ p, got q = {q}, p = {p}"
        )));
    }
    Ok(())
}

/// The `q × p` replication matrix: column `j` is `signs[j]·e_g` for the
/// group `g` containing `j`.
pub fn replication_matrix(gs: &GroupStructure) -> Array2<f64> {
    let mut c = Array2::zeros((gs.q(), gs.p()));
    for (g, group) in gs.groups.iter().enumerate() {
        for &j in group {
            c[[g, j]] = gs.signs[j];
        }
    }
    c
}

/// Draws `B` (`n × q`, i.i.d. N(0, 1), row-major order) and returns `B·C`.
pub fn sample_design(n: usize, c: &Array2<f64>, seed: u64) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(OwlError::InvalidArgument("n must be at least 1".into()));
    }
    let mut rng = rng_for(seed, STREAM_DESIGN);
    let b = Array2::from_shape_simple_fn((n, c.nrows()), || StandardNormal.sample(&mut rng));
    Ok(b.dot(c))
}

/// `s`-group sparse signal with `‖x*‖₁ = √s`.
///
/// Picks `s` distinct groups uniformly; every column of a chosen group gets
/// magnitude `1 / (√s·|G|)` times its column sign, so each active group
/// carries the same ℓ1 mass.
pub fn sample_signal(gs: &GroupStructure, s: usize, seed: u64) -> Result<Array1<f64>> {
    sample_signal_with(gs, s, seed, false)
}

/// Like [`sample_signal`]; with `perturbed` the within-group magnitudes are
/// jittered by up to ±10% before the final ℓ1 rescaling.
pub fn sample_signal_with(
    gs: &GroupStructure,
    s: usize,
    seed: u64,
    perturbed: bool,
) -> Result<Array1<f64>> {
    if s > gs.q() {
        return Err(OwlError::InvalidArgument(format!(
            "sparsity {s} exceeds the number of groups {}",
            gs.q()
        )));
    }
    let mut x = Array1::zeros(gs.p());
    if s == 0 {
        return Ok(x);
    }
    let mut rng = rng_for(seed, STREAM_SIGNAL);
    let mut chosen = index::sample(&mut rng, gs.q(), s).into_vec();
    chosen.sort_unstable();
    for g in chosen {
        let group = &gs.groups[g];
        let per_column = 1.0 / group.len() as f64;
        for &j in group {
            let jitter = if perturbed {
                1.0 + rng.random_range(-0.1..0.1)
            } else {
                1.0
            };
            x[j] = gs.signs[j] * per_column * jitter;
        }
    }
    let l1: f64 = x.iter().map(|v: &f64| v.abs()).sum();
    x *= (s as f64).sqrt() / l1;
    Ok(x)
}

/// Gaussian noise rescaled so that `(1/n)‖ν‖₁ = eps` exactly.
pub fn sample_noise(n: usize, eps: f64, seed: u64) -> Result<Array1<f64>> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(OwlError::InvalidArgument(format!(
            "noise level must be finite and non-negative, got {eps}"
        )));
    }
    if eps == 0.0 {
        return Ok(Array1::zeros(n));
    }
    let mut rng = rng_for(seed, STREAM_NOISE);
    let mut nu = Array1::from_shape_simple_fn(n, || StandardNormal.sample(&mut rng));
    let l1: f64 = nu.iter().map(|v: &f64| v.abs()).sum();
    nu *= eps * n as f64 / l1;
    Ok(nu)
}

/// One draw `(A, x*, ν, y = A x* + ν)`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub a: Array2<f64>,
    pub x_star: Array1<f64>,
    pub noise: Array1<f64>,
    pub y: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct GenerativeModel {
    pub c: Array2<f64>,
    pub groups: GroupStructure,
    pub n: usize,
    pub s: usize,
    pub eps: f64,
    pub seed: u64,
}

impl GenerativeModel {
    /// Replication model for `groups`. Logs a warning when `q < n`, where
    /// the latent design `B` is no longer wide.
    pub fn replication(groups: GroupStructure, n: usize, s: usize, eps: f64, seed: u64) -> Result<Self> {
        let model = Self::quiet(groups, n, s, eps, seed)?;
        if model.c.nrows() < n {
            log::warn!(
                "latent dimension q = {} is smaller than n = {}; the error bound analysis assumes q ≥ n",
                model.c.nrows(),
                n
            );
        }
        Ok(model)
    }

    /// As [`GenerativeModel::replication`] without the `q < n` warning, for
    /// Monte-Carlo loops that build thousands of models.
    pub fn quiet(groups: GroupStructure, n: usize, s: usize, eps: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(OwlError::InvalidArgument("n must be at least 1".into()));
        }
        if s > groups.q() {
            return Err(OwlError::InvalidArgument(format!(
                "sparsity {s} exceeds the number of groups {}",
                groups.q()
            )));
        }
        if !(eps >= 0.0) {
            return Err(OwlError::InvalidArgument("noise level must be non-negative".into()));
        }
        Ok(Self {
            c: replication_matrix(&groups),
            groups,
            n,
            s,
            eps,
            seed,
        })
    }

    pub fn sample(&self) -> Result<Dataset> {
        let a = sample_design(self.n, &self.c, self.seed)?;
        let x_star = sample_signal(&self.groups, self.s, self.seed)?;
        let noise = sample_noise(self.n, self.eps, self.seed)?;
        let y = a.dot(&x_star) + &noise;
        Ok(Dataset { a, x_star, noise, y })
    }
}
