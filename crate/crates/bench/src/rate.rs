//! Linear-rate fits of gap sequences.

/// Values below this are clamped when gaps are prepared for log-scale plots.
pub const GAP_FLOOR: f64 = 1e-15;

/// Least-squares slope of `log(gap_k)` against `k` over the inclusive
/// 1-based window, reported as `q = e^slope`. `gaps[k − 1]` is the gap after
/// iteration `k`. Nonpositive and non-finite entries are dropped; fewer
/// than three remaining points give `None`.
pub fn fit_linear_rate(gaps: &[f64], window: (usize, usize)) -> Option<f64> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = (lo.max(1)..=hi)
        .filter_map(|k| gaps.get(k - 1).map(|g| (k as f64, *g)))
        .filter(|(_, g)| *g > 0.0 && g.is_finite())
        .map(|(k, g)| (k, g.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(k, l)| (k - mk) * (l - ml)).sum();
    let sxx: f64 = pts.iter().map(|(k, _)| (k - mk) * (k - mk)).sum();
    Some((sxy / sxx).exp())
}

/// Copy of `gaps` with values below [`GAP_FLOOR`] (including negative
/// ones) raised to it, for log plots. Raw values stay in the CSV logs.
pub fn floor_for_plot(gaps: &[f64]) -> Vec<f64> {
    gaps.iter().map(|g| if g.is_nan() { *g } else { g.max(GAP_FLOOR) }).collect()
}

/// First 1-based iteration whose gap is at most `target`.
pub fn first_below(gaps: &[f64], target: f64) -> Option<usize> {
    gaps.iter().position(|g| *g <= target).map(|i| i + 1)
}
