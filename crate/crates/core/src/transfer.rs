use crate::error::{check_len, OwlError, Result};

/// Moves `eps` of mass from coordinate `i` to coordinate `j` of a
/// non-negative vector (indices are zero-based).
///
/// Requires `x[i] > x[j] ≥ 0` and `0 < eps < (x[i] − x[j]) / 2`, so the
/// ordering of the two coordinates is preserved.
pub fn pigou_dalton_transfer(x: &[f64], i: usize, j: usize, eps: f64) -> Result<Vec<f64>> {
    let p = x.len();
    if i >= p || j >= p {
        check_len("pigou_dalton_transfer index", p, i.max(j) + 1)?;
    }
    if i == j {
        return Err(OwlError::InvalidArgument("transfer indices must differ".into()));
    }
    if x.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(OwlError::InvalidArgument(
            "transfer requires finite non-negative entries".into(),
        ));
    }
    if !(x[i] > x[j]) {
        return Err(OwlError::InvalidArgument(format!(
            "transfer requires x[{i}] > x[{j}], got {} and {}",
            x[i], x[j]
        )));
    }
    if !(eps > 0.0 && eps < (x[i] - x[j]) / 2.0) {
        return Err(OwlError::InvalidArgument(format!(
            "transfer size {eps} must lie in (0, {})",
            (x[i] - x[j]) / 2.0
        )));
    }
    let mut z = x.to_vec();
    z[i] -= eps;
    z[j] += eps;
    Ok(z)
}
