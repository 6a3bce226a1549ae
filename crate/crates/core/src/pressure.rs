//! Tree pressure, hidden tree pressure and the phase transition of the
//! negative spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exceptional::ExceptionalSet;
use crate::map::RationalMap;
use crate::orbits::{BackwardTree, ExclusionMode, PeriodicOrbit, TreeOptions};
use crate::region::Region;
use crate::sphere::SpherePoint;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default gap used to decide that the linear branch `-t·χ_sup` dominates.
pub const TRANSITION_TOL: f64 = 0.02;

/// `[min, max]` sampled at `step`, endpoints included.
pub fn t_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(min <= max) || !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidInput(format!("bad grid [{min}, {max}] step {step}")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| min + i as f64 * step).collect())
}

/// Default grid `[-3, 2]` with step `0.25`.
pub fn default_t_grid() -> Vec<f64> {
    t_grid(-3.0, 2.0, 0.25).expect("valid default grid")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub t: f64,
    pub value: f64,
    /// `|P_n - P_{n-2}|`, infinite when the depth is below 3.
    pub convergence: f64,
    pub depth: usize,
}

fn level_pressure(tree: &BackwardTree, n: usize, t: f64) -> f64 {
    tree.log_partition(n, t) / n as f64
}

/// Pressure estimate at the tree's depth over admissible leaves.
pub fn pressure_from_tree(tree: &BackwardTree, t: f64) -> Result<PressureEstimate> {
    let n = tree.depth;
    if n == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let value = level_pressure(tree, n, t);
    if value == f64::NEG_INFINITY {
        return Err(Error::EmptyTree);
    }
    let convergence = if n >= 3 { (value - level_pressure(tree, n - 2, t)).abs() } else { f64::INFINITY };
    Ok(PressureEstimate { t, value, convergence, depth: n })
}

/// `(1/n) log Σ_{x ∈ f^{-n}(z)} |(f^n)'(x)|^{-t}` at `n = depth`.
pub fn tree_pressure(map: &RationalMap, z: SpherePoint, t: f64, depth: usize) -> Result<PressureEstimate> {
    let tree = BackwardTree::build(map, z, depth, &TreeOptions::for_map(map))?;
    pressure_from_tree(&tree, t)
}

/// Tree pressure restricted to preimages outside `v`.
pub fn hidden_tree_pressure(
    map: &RationalMap,
    z: SpherePoint,
    t: f64,
    v: &Region,
    depth: usize,
    mode: ExclusionMode,
) -> Result<PressureEstimate> {
    let opts = TreeOptions::for_map(map).exclude(v.clone(), mode);
    let tree = BackwardTree::build(map, z, depth, &opts)?;
    pressure_from_tree(&tree, t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSup {
    pub value: f64,
    /// A cycle attaining the maximum.
    pub attained_by: Vec<SpherePoint>,
    /// Largest exponent among cycles inside Σ, if any.
    pub sigma_max: Option<f64>,
    /// Largest exponent among cycles disjoint from Σ.
    pub outside_max: Option<f64>,
    pub cycles_examined: usize,
}

/// Largest cycle exponent, with the Σ and non-Σ parts reported separately.
pub fn chi_sup_estimate(sigma: &ExceptionalSet, orbits: &[PeriodicOrbit]) -> Result<ChiSup> {
    let best = orbits
        .iter()
        .filter(|o| o.exponent.is_finite())
        .max_by(|a, b| a.exponent.total_cmp(&b.exponent))
        .ok_or(Error::EmptySample)?;
    let in_sigma = |o: &PeriodicOrbit| o.points.iter().all(|p| sigma.contains(p));
    let max_of = |it: &mut dyn Iterator<Item = &PeriodicOrbit>| {
        it.filter(|o| o.exponent.is_finite()).map(|o| o.exponent).reduce(f64::max)
    };
    Ok(ChiSup {
        value: best.exponent,
        attained_by: best.points.clone(),
        sigma_max: max_of(&mut orbits.iter().filter(|o| in_sigma(o))),
        outside_max: max_of(&mut orbits.iter().filter(|o| o.points.iter().all(|p| !sigma.contains(p)))),
        cycles_examined: orbits.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDiagnostics {
    /// Smallest second difference of `full` (negative values break convexity).
    pub min_second_difference: f64,
    pub convexity_tolerance: f64,
    pub convex: bool,
    pub hidden_le_full: bool,
    /// Smallest and largest `-ΔP̃/Δt` over grid cells.
    pub slope_range: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureCurve {
    pub t_grid: Vec<f64>,
    pub hidden: Vec<f64>,
    pub full: Vec<f64>,
    pub convergence: Vec<f64>,
    pub chi_sup: f64,
    pub t_minus: Option<f64>,
    pub basepoint: SpherePoint,
    pub exclusion: Region,
    pub mode: ExclusionMode,
    pub depth: usize,
    pub diagnostics: CurveDiagnostics,
}

impl PressureCurve {
    /// Builds a curve from sampled hidden pressures; `full = max(hidden, -t·χ_sup)`.
    pub fn from_samples(
        samples: &[PressureEstimate],
        chi_sup: f64,
        basepoint: SpherePoint,
        exclusion: Region,
        mode: ExclusionMode,
        depth: usize,
    ) -> Self {
        let t_grid: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let hidden: Vec<f64> = samples.iter().map(|s| s.value).collect();
        let convergence: Vec<f64> = samples.iter().map(|s| s.convergence).collect();
        let full: Vec<f64> = t_grid.iter().zip(&hidden).map(|(&t, &h)| h.max(-t * chi_sup)).collect();
        let diagnostics = diagnose(&t_grid, &hidden, &full, &convergence);
        let mut curve =
            PressureCurve { t_grid, hidden, full, convergence, chi_sup, t_minus: None, basepoint, exclusion, mode, depth, diagnostics };
        curve.t_minus = phase_transition(&curve, TRANSITION_TOL).ok().flatten();
        curve
    }

    pub fn max_convergence(&self) -> f64 {
        self.convergence.iter().copied().filter(|c| c.is_finite()).fold(0.0, f64::max)
    }

    /// `hidden(t)` by linear interpolation on the grid.
    pub fn hidden_at(&self, t: f64) -> Option<f64> {
        interpolate(&self.t_grid, &self.hidden, t)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let i = xs.windows(2).position(|w| w[0] <= x && x <= w[1])?;
    let (x0, x1, y0, y1) = (xs[i], xs[i + 1], ys[i], ys[i + 1]);
    Some(if x1 == x0 { y0 } else { y0 + (y1 - y0) * (x - x0) / (x1 - x0) })
}

fn diagnose(t: &[f64], hidden: &[f64], full: &[f64], convergence: &[f64]) -> CurveDiagnostics {
    let mut min_second = f64::INFINITY;
    for i in 1..t.len().saturating_sub(1) {
        let left = (full[i] - full[i - 1]) / (t[i] - t[i - 1]);
        let right = (full[i + 1] - full[i]) / (t[i + 1] - t[i]);
        min_second = min_second.min(right - left);
    }
    let max_conv = convergence.iter().copied().filter(|c| c.is_finite()).fold(0.0, f64::max);
    let tol = (10.0 * max_conv).max(1e-9);
    let mut slope_range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 1..t.len() {
        let s = -(hidden[i] - hidden[i - 1]) / (t[i] - t[i - 1]);
        slope_range = (slope_range.0.min(s), slope_range.1.max(s));
    }
    CurveDiagnostics {
        min_second_difference: min_second,
        convexity_tolerance: tol,
        convex: min_second >= -tol,
        hidden_le_full: hidden.iter().zip(full).all(|(h, f)| h <= f),
        slope_range,
    }
}

/// Samples the hidden pressure on `grid` from one backward tree rooted at `z`
/// with exclusion `v`, and refines `t₋` by bisection on the same tree.
pub fn assemble_curve(
    map: &RationalMap,
    z: SpherePoint,
    grid: &[f64],
    v: &Region,
    depth: usize,
    mode: ExclusionMode,
    chi_sup: f64,
) -> Result<PressureCurve> {
    let opts = TreeOptions::for_map(map).exclude(v.clone(), mode);
    let tree = BackwardTree::build(map, z, depth, &opts)?;
    curve_from_tree(&tree, grid, chi_sup)
}

/// As [`assemble_curve`] on an existing tree.
pub fn curve_from_tree(tree: &BackwardTree, grid: &[f64], chi_sup: f64) -> Result<PressureCurve> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("t grid must be strictly increasing".into()));
    }
    #[cfg(feature = "parallel")]
    let samples: Vec<PressureEstimate> =
        grid.par_iter().map(|&t| pressure_from_tree(tree, t)).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let samples: Vec<PressureEstimate> = grid.iter().map(|&t| pressure_from_tree(tree, t)).collect::<Result<_>>()?;
    let mut curve =
        PressureCurve::from_samples(&samples, chi_sup, tree.root, tree.exclusion.clone(), tree.mode, tree.depth);
    if let Some((lo, hi)) = transition_bracket(&curve, TRANSITION_TOL)? {
        curve.t_minus = Some(bisect_transition(tree, chi_sup, lo, hi));
    }
    Ok(curve)
}

/// Grid cell `[t_i, t_{i+1}]` whose left end is the largest `t < 0` with
/// `hidden < -t·χ_sup - tol`.
fn transition_bracket(curve: &PressureCurve, tol: f64) -> Result<Option<(f64, f64)>> {
    let t = &curve.t_grid;
    let below = |i: usize| curve.hidden[i] < -t[i] * curve.chi_sup - tol;
    let Some(i) = (0..t.len()).rfind(|&i| t[i] < 0.0 && below(i)) else {
        return Ok(None);
    };
    if i + 1 >= t.len() {
        return Err(Error::GridTooCoarse { t: t[i] });
    }
    // The linear branch must not reappear to the right of the bracket.
    if (i + 1..t.len()).any(|j| t[j] < 0.0 && below(j)) {
        return Err(Error::GridTooCoarse { t: t[i] });
    }
    Ok(Some((t[i], t[i + 1])))
}

fn bisect_transition(tree: &BackwardTree, chi_sup: f64, mut lo: f64, mut hi: f64) -> f64 {
    let gap = |t: f64| level_pressure(tree, tree.depth, t) + t * chi_sup;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `t₋` from the sampled curve: the bracketing cell is located on the grid
/// and the crossing of `hidden` with `-t·χ_sup` is found by bisection on the
/// linear interpolant of the two bracketing samples.
pub fn phase_transition(curve: &PressureCurve, tol: f64) -> Result<Option<f64>> {
    let Some((lo, hi)) = transition_bracket(curve, tol)? else { return Ok(None) };
    let gap = |t: f64| curve.hidden_at(t).unwrap_or(f64::NAN) + t * curve.chi_sup;
    let (mut a, mut b) = (lo, hi);
    if gap(b) < 0.0 {
        return Ok(Some(b));
    }
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if gap(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
