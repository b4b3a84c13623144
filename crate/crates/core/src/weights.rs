//! Weight sequences for the OWL norm.
//!
//! A [`WeightVector`] is a non-increasing, non-negative sequence with a
//! strictly positive leading entry. Construction validates these conditions
//! once and caches the quantities the analysis code keeps asking for: the
//! minimum consecutive gap, the mean and the leading weight.

use serde::{Deserialize, Serialize};

use crate::error::{OwlError, Result};
use crate::quantile::standard_normal_quantile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    w: Vec<f64>,
    delta: f64,
    mean: f64,
}

impl WeightVector {
    /// Validates `w` and caches the derived quantities.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(OwlError::InvalidWeights("weight vector is empty".into()));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(OwlError::NonFinite("weights"));
        }
        if let Some(k) = w.windows(2).position(|pair| pair[0] < pair[1]) {
            return Err(OwlError::InvalidWeights(format!(
                "weights must be non-increasing, but w[{}] = {} < w[{}] = {}",
                k,
                w[k],
                k + 1,
                w[k + 1]
            )));
        }
        let last = w[w.len() - 1];
        if last < 0.0 {
            return Err(OwlError::InvalidWeights(format!(
                "weights must be non-negative, last entry is {last}"
            )));
        }
        if w[0] <= 0.0 {
            return Err(OwlError::InvalidWeights(
                "leading weight must be strictly positive".into(),
            ));
        }
        // With a single weight there is no consecutive pair; the gap is w₁.
        let delta = if w.len() == 1 {
            w[0]
        } else {
            w.windows(2)
                .map(|pair| pair[0] - pair[1])
                .fold(f64::INFINITY, f64::min)
        };
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        Ok(Self { w, delta, mean })
    }

    /// Constant weights `(λ, …, λ)`; the OWL norm becomes `λ‖·‖₁`.
    pub fn uniform(p: usize, lambda: f64) -> Result<Self> {
        if p == 0 {
            return Err(OwlError::InvalidArgument("p must be positive".into()));
        }
        Self::new(vec![lambda; p])
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    /// Minimum gap between consecutive weights.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn max(&self) -> f64 {
        self.w[0]
    }

    /// `w₁ / w̄`, at least one for any valid weight vector.
    pub fn max_over_mean(&self) -> f64 {
        self.w[0] / self.mean
    }

    /// The same weights multiplied by `t > 0`, as needed by `prox_{tΩ}`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(OwlError::InvalidArgument(format!(
                "weight scale must be positive and finite, got {t}"
            )));
        }
        Self::new(self.w.iter().map(|v| v * t).collect())
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = OwlError;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.w
    }
}

/// OSCAR weights `wᵢ = λ₁ + λ₂ (p − i)` for `i = 1..p`.
pub fn oscar_weights(p: usize, lambda1: f64, lambda2: f64) -> Result<WeightVector> {
    if p == 0 {
        return Err(OwlError::InvalidArgument("p must be positive".into()));
    }
    if lambda1 < 0.0 || lambda2 < 0.0 {
        return Err(OwlError::InvalidWeights(format!(
            "OSCAR parameters must be non-negative, got λ1 = {lambda1}, λ2 = {lambda2}"
        )));
    }
    if lambda1 + lambda2 <= 0.0 {
        return Err(OwlError::InvalidWeights(
            "OSCAR parameters λ1 = λ2 = 0 do not define a norm".into(),
        ));
    }
    let w = (1..=p)
        .map(|i| lambda1 + lambda2 * (p - i) as f64)
        .collect();
    WeightVector::new(w)
}

/// Quantile weights `wᵢ = Φ⁻¹(1 − i·q / (2p))`, clamped at zero.
pub fn slope_weights(p: usize, q: f64) -> Result<WeightVector> {
    if p == 0 {
        return Err(OwlError::InvalidArgument("p must be positive".into()));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(OwlError::InvalidArgument(format!(
            "SLOPE level q must lie in (0, 1), got {q}"
        )));
    }
    let w = (1..=p)
        .map(|i| {
            let level = 1.0 - i as f64 * q / (2.0 * p as f64);
            standard_normal_quantile(level).max(0.0)
        })
        .collect();
    WeightVector::new(w)
}

/// Minimum consecutive gap `Δ` of `w` (`w₁` when `p = 1`).
pub fn min_gap(w: &WeightVector) -> f64 {
    w.delta()
}
