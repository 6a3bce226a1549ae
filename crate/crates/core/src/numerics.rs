//! Small log-space helpers shared by the pressure and measure code.

/// `log Σ exp(x_i)`; `-∞` for an empty input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `-t · x` with the convention `0 · ∞ = 0`.
pub fn potential(t: f64, log_deriv: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        -t * log_deriv
    }
}

/// `log(e^a - e^b)` for `a ≥ b`.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp()).ln_1p()
}
