//! Proximal operator of the OWL norm.

use crate::error::{check_len, Result};
use crate::isotonic::project_monotone_nonnegative;
use crate::weights::WeightVector;

/// `argmin_x ½‖x − u‖₂² + Ω_w(x)`.
///
/// Sorts `|u|` non-increasingly (stable, so ties keep their input order),
/// subtracts the weights, projects onto the monotone non-negative cone and
/// scatters the result back with the original signs. O(p log p).
pub fn prox_owl(u: &[f64], w: &WeightVector) -> Result<Vec<f64>> {
    check_len("prox_owl", w.len(), u.len())?;
    let mut out = vec![0.0; u.len()];
    prox_owl_into(u, w.as_slice(), &mut out);
    Ok(out)
}

/// Same as [`prox_owl`] with the weights multiplied by `scale`, i.e. the
/// prox of `scale · Ω_w`. Writes into `out`.
pub(crate) fn prox_owl_scaled_into(u: &[f64], w: &[f64], scale: f64, out: &mut [f64]) {
    let p = u.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| u[b].abs().total_cmp(&u[a].abs()));
    let shifted: Vec<f64> = order
        .iter()
        .zip(w)
        .map(|(&i, &wi)| u[i].abs() - scale * wi)
        .collect();
    let magnitudes = project_monotone_nonnegative(&shifted);
    for (&i, m) in order.iter().zip(magnitudes) {
        out[i] = if u[i] < 0.0 { -m } else { m };
    }
}

fn prox_owl_into(u: &[f64], w: &[f64], out: &mut [f64]) {
    prox_owl_scaled_into(u, w, 1.0, out)
}
