//! Least-squares projection onto non-increasing sequences (pool adjacent
//! violators).

/// Projects `v` onto `{z : z₁ ≥ z₂ ≥ … ≥ z_p}` in the Euclidean sense.
///
/// Single left-to-right pass; each incoming value starts a block and
/// merges backwards while the previous block mean is smaller. Pooled
/// entries receive the same value bit for bit.
pub fn project_nonincreasing(v: &[f64]) -> Vec<f64> {
    // (sum, len) per block
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &value in v {
        let mut sum = value;
        let mut len = 1usize;
        while let Some(&(prev_sum, prev_len)) = blocks.last() {
            if prev_sum / prev_len as f64 <= sum / len as f64 {
                sum += prev_sum;
                len += prev_len;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push((sum, len));
    }
    let mut out = Vec::with_capacity(v.len());
    for (sum, len) in blocks {
        let mean = sum / len as f64;
        out.extend(std::iter::repeat_n(mean, len));
    }
    out
}

/// Projection onto non-increasing, non-negative sequences: PAV then clamp.
pub fn project_monotone_nonnegative(v: &[f64]) -> Vec<f64> {
    let mut out = project_nonincreasing(v);
    for z in &mut out {
        if *z < 0.0 {
            *z = 0.0;
        }
    }
    out
}
