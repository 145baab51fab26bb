//! Small numeric helpers shared by the estimators.

/// Ordinary least-squares fit `y = slope * x + intercept`.
///
/// Returns `(slope, intercept, max_abs_residual)`. With fewer than two
/// distinct abscissae the slope is 0 and the intercept is the mean.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0, 0.0);
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let (slope, intercept) = if sxx > 0.0 {
        let s = sxy / sxx;
        (s, my - s * mx)
    } else {
        (0.0, my)
    };
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    (slope, intercept, residual)
}

/// Median of a nonempty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// `-x ln x` with the convention `0 ln 0 = 0`.
#[inline]
pub fn xlogx_neg(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    xlogx_neg(p) + xlogx_neg(1.0 - p)
}

/// Indices of the upper half of a range of length `len` (at least two points
/// when `len >= 2`).
pub fn upper_half(len: usize) -> std::ops::Range<usize> {
    if len <= 2 {
        0..len
    } else {
        (len / 2).min(len - 2)..len
    }
}
