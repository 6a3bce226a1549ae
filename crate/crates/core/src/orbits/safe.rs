//! Finite-horizon tests for safe and expanding basepoints.

use serde::Serialize;

use crate::map::RationalMap;
use crate::sphere::{Metric, SpherePoint, POINT_TOL};

#[derive(Clone, Debug, Serialize)]
pub struct SafetyReport {
    pub safe: bool,
    /// `min_n dist(z, f^n(Crit)) / β^n`; below 1 means the test failed at `worst_step`.
    pub worst_margin: f64,
    pub worst_step: usize,
    pub min_distance: f64,
    pub on_critical_orbit: bool,
    pub horizon: usize,
    /// Always true: the test only inspects `horizon` iterates.
    pub finite_horizon: bool,
}

/// Critical-orbit membership is tested over at least this many iterates.
pub const ORBIT_CHECK_STEPS: usize = 64;

/// Checks `dist(z, f^n(c)) ≥ β^n` for `1 ≤ n ≤ horizon` and all critical `c`.
pub fn is_safe_point(map: &RationalMap, z: SpherePoint, horizon: usize, beta: f64) -> SafetyReport {
    let horizon = horizon.max(1);
    let mut worst_margin = f64::INFINITY;
    let mut worst_step = 0;
    let mut min_distance = f64::INFINITY;
    for c in map.critical_points() {
        let mut w = c.point;
        for n in 1..=horizon.max(ORBIT_CHECK_STEPS) {
            w = map.eval(w);
            let d = z.chordal(&w);
            min_distance = min_distance.min(d);
            if n > horizon {
                continue;
            }
            let margin = d / beta.powi(n as i32);
            if margin < worst_margin {
                worst_margin = margin;
                worst_step = n;
            }
        }
    }
    let on_critical_orbit = min_distance <= POINT_TOL.max(1e-6);
    SafetyReport {
        safe: worst_margin >= 1.0 && !on_critical_orbit,
        worst_margin,
        worst_step,
        min_distance,
        on_critical_orbit,
        horizon,
        finite_horizon: true,
    }
}

/// Checks `|(f^n)'(z)| ≥ λ^n` for every `1 ≤ n ≤ horizon`.
pub fn is_expanding_point(map: &RationalMap, z: SpherePoint, horizon: usize, lambda: f64, metric: Metric) -> bool {
    let log_lambda = lambda.ln();
    let mut w = z;
    let mut acc = 0.0;
    for n in 1..=horizon {
        acc += map.log_derivative(w, metric);
        if acc < n as f64 * log_lambda - 1e-9 {
            return false;
        }
        w = map.eval(w);
    }
    true
}
