//! Binomial confidence intervals.

/// Wilson score interval for `k` successes out of `n` trials at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the bounds touch 0 and 1 exactly at the edges; rounding would miss them
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// 95% Wilson interval.
pub fn wilson95(k: u64, n: u64) -> (f64, f64) {
    wilson_interval(k, n, 1.959_963_984_540_054)
}
