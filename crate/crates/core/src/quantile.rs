//! Standard normal quantile function.

use statrs::distribution::{ContinuousCDF, Normal};

/// `Φ⁻¹(prob)`; returns `±∞` at the endpoints and NaN outside `[0, 1]`.
pub fn standard_normal_quantile(prob: f64) -> f64 {
    if !(0.0..=1.0).contains(&prob) {
        return f64::NAN;
    }
    if prob == 0.0 {
        return f64::NEG_INFINITY;
    }
    if prob == 1.0 {
        return f64::INFINITY;
    }
    Normal::standard().inverse_cdf(prob)
}
