//! Legendre–Fenchel transform of the hidden pressure and the exponent range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pressure::PressureCurve;

/// Outward slope of `P̃(t) + tα` beyond which the infimum is taken as `-∞`.
pub const OUT_OF_RANGE_SLOPE: f64 = 0.05;
/// Largest slope change between the two outermost grid cells accepted as stable.
pub const SLOPE_STABILITY: f64 = 0.02;
/// Exponent ranges narrower than this are reported as degenerate.
pub const DEGENERATE_WIDTH: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridEnd {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LegendreValue {
    Value { f: f64, t_star: f64 },
    /// The infimum over `t` is unbounded below: `α` lies off the spectrum.
    OutOfRange { end: GridEnd, slope: f64 },
}

impl LegendreValue {
    pub fn value(&self) -> Option<f64> {
        match *self {
            LegendreValue::Value { f, .. } => Some(f),
            LegendreValue::OutOfRange { .. } => None,
        }
    }
}

/// `(1/α) min_t (P̃(t) + tα)` over the grid, refined by three-point parabolic
/// fits. Every fit is minimized over its own bracket and the smallest value
/// wins, so `α·F̃(α)` stays an infimum of affine functions of `α`.
pub fn legendre_f(curve: &PressureCurve, alpha: f64) -> Result<LegendreValue> {
    legendre_f_with(&curve.t_grid, &curve.hidden, alpha, OUT_OF_RANGE_SLOPE)
}

pub fn legendre_f_with(t: &[f64], hidden: &[f64], alpha: f64, slope_tol: f64) -> Result<LegendreValue> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if t.len() < 3 || t.len() != hidden.len() || hidden.iter().any(|h| !h.is_finite()) {
        return Err(Error::InvalidInput("pressure curve needs at least three finite samples".into()));
    }
    let g: Vec<f64> = t.iter().zip(hidden).map(|(&t, &h)| h + t * alpha).collect();
    let n = g.len();
    let i = (0..n).min_by(|&a, &b| g[a].total_cmp(&g[b])).expect("nonempty");
    if i == 0 {
        let slope = (g[1] - g[0]) / (t[1] - t[0]);
        if slope > slope_tol {
            return Ok(LegendreValue::OutOfRange { end: GridEnd::Left, slope });
        }
    }
    if i == n - 1 {
        let slope = (g[n - 1] - g[n - 2]) / (t[n - 1] - t[n - 2]);
        if slope < -slope_tol {
            return Ok(LegendreValue::OutOfRange { end: GridEnd::Right, slope });
        }
    }
    let (mut t_star, mut g_min) = (t[i], g[i]);
    for j in 1..n - 1 {
        let (x, y) = parabolic_min((t[j - 1], g[j - 1]), (t[j], g[j]), (t[j + 1], g[j + 1]));
        if y < g_min {
            (t_star, g_min) = (x, y);
        }
    }
    Ok(LegendreValue::Value { f: g_min / alpha, t_star })
}

/// Vertex of the parabola through three points, clamped to the bracket; falls
/// back to the middle sample when the fit is not convex.
fn parabolic_min(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> (f64, f64) {
    let d1 = (b.1 - a.1) / (b.0 - a.0);
    let d2 = (c.1 - b.1) / (c.0 - b.0);
    let curv = (d2 - d1) / (c.0 - a.0);
    if !(curv > 0.0) {
        return b;
    }
    // p(x) = b.1 + s (x - b.0) + curv (x - b.0)^2 with s the slope at b
    let s = d1 + curv * (b.0 - a.0);
    let x = (b.0 - s / (2.0 * curv)).clamp(a.0, c.0);
    let y = b.1 + s * (x - b.0) + curv * (x - b.0).powi(2);
    (x, y.min(b.1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeEnd {
    pub slope: f64,
    /// Change between the two outermost grid cells.
    pub change: f64,
    pub stabilized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRange {
    /// From the slope of `P̃` at the positive end of the grid.
    pub alpha_minus: SlopeEnd,
    /// From the slope of `P̃` at the negative end of the grid.
    pub alpha_tilde_plus: SlopeEnd,
    /// `χ_sup`.
    pub alpha_plus: f64,
}

impl ExponentRange {
    pub fn width(&self) -> f64 {
        self.alpha_tilde_plus.slope - self.alpha_minus.slope
    }

    pub fn is_degenerate(&self) -> bool {
        self.width().abs() < DEGENERATE_WIDTH
    }
}

fn cell_slope(t: &[f64], h: &[f64], i: usize) -> f64 {
    -(h[i + 1] - h[i]) / (t[i + 1] - t[i])
}

/// Endpoint slopes without the stability requirement.
pub fn exponent_range_report(curve: &PressureCurve) -> Result<ExponentRange> {
    let (t, h) = (&curve.t_grid, &curve.hidden);
    let n = t.len();
    if n < 3 {
        return Err(Error::InvalidInput("pressure curve needs at least three samples".into()));
    }
    let end = |outer: usize, inner: usize| {
        let slope = cell_slope(t, h, outer);
        let change = (slope - cell_slope(t, h, inner)).abs();
        SlopeEnd { slope, change, stabilized: change < SLOPE_STABILITY }
    };
    Ok(ExponentRange { alpha_minus: end(n - 2, n - 3), alpha_tilde_plus: end(0, 1), alpha_plus: curve.chi_sup })
}

/// `(α⁻, α̃⁺)` from the limiting slopes of `P̃`, and `α⁺ = χ_sup`.
pub fn exponent_range(curve: &PressureCurve) -> Result<ExponentRange> {
    let r = exponent_range_report(curve)?;
    if !r.alpha_tilde_plus.stabilized {
        return Err(Error::SlopeNotStabilized { end: "negative", change: r.alpha_tilde_plus.change });
    }
    if !r.alpha_minus.stabilized {
        return Err(Error::SlopeNotStabilized { end: "positive", change: r.alpha_minus.change });
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub alpha_grid: Vec<f64>,
    pub f_values: Vec<f64>,
    pub alpha_minus: f64,
    pub alpha_tilde_plus: f64,
    pub alpha_plus: f64,
    pub f_zero: Option<f64>,
    pub degenerate: bool,
    /// Grid exponents for which the transform was unbounded.
    pub out_of_range: Vec<f64>,
}

/// Evaluates the transform over `[α⁻, α̃⁺]` (a single midpoint when the range
/// is degenerate).
pub fn spectrum_curve(curve: &PressureCurve, range: &ExponentRange, samples: usize) -> Result<SpectrumCurve> {
    let lo = range.alpha_minus.slope.min(range.alpha_tilde_plus.slope);
    let hi = range.alpha_minus.slope.max(range.alpha_tilde_plus.slope);
    let degenerate = range.is_degenerate();
    let grid: Vec<f64> = if degenerate || samples < 2 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect()
    };
    let mut alpha_grid = Vec::new();
    let mut f_values = Vec::new();
    let mut out_of_range = Vec::new();
    for a in grid {
        if a <= 0.0 {
            continue;
        }
        match legendre_f(curve, a)? {
            LegendreValue::Value { f, .. } => {
                alpha_grid.push(a);
                f_values.push(f);
            }
            LegendreValue::OutOfRange { .. } => out_of_range.push(a),
        }
    }
    let f_zero = if lo.abs() < 1e-3 { f_values.first().copied() } else { None };
    Ok(SpectrumCurve {
        alpha_grid,
        f_values,
        alpha_minus: lo,
        alpha_tilde_plus: hi,
        alpha_plus: range.alpha_plus,
        f_zero,
        degenerate,
        out_of_range,
    })
}

/// Smallest second difference of `α·F̃(α)` (concavity requires it to be ≤ 0 up to noise).
pub fn concavity_defect(s: &SpectrumCurve) -> f64 {
    let y: Vec<f64> = s.alpha_grid.iter().zip(&s.f_values).map(|(a, f)| a * f).collect();
    let a = &s.alpha_grid;
    let mut worst = f64::NEG_INFINITY;
    for i in 1..a.len().saturating_sub(1) {
        let left = (y[i] - y[i - 1]) / (a[i] - a[i - 1]);
        let right = (y[i + 1] - y[i]) / (a[i + 1] - a[i]);
        worst = worst.max(right - left);
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionEquivalence {
    pub transition_found: bool,
    pub chi_sup_exceeds: bool,
    pub exceptional: bool,
    /// `t₋` exists exactly when `χ_sup > α̃⁺` and Σ is nonempty.
    pub consistent: bool,
}

/// Checks `t₋ exists ⇔ (χ_sup > α̃⁺ and Σ ≠ ∅)` on computed data.
pub fn transition_equivalence(curve: &PressureCurve, range: &ExponentRange, exceptional: bool) -> TransitionEquivalence {
    let transition_found = curve.t_minus.is_some();
    let chi_sup_exceeds = range.alpha_plus > range.alpha_tilde_plus.slope + DEGENERATE_WIDTH;
    TransitionEquivalence {
        transition_found,
        chi_sup_exceeds,
        exceptional,
        consistent: transition_found == (chi_sup_exceeds && exceptional),
    }
}
