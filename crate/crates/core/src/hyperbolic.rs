//! Hyperbolic times along orbits, the supremum exponent away from a region,
//! periodic shadowing and periodic points accumulating on critical points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exceptional::{chi_ess, ExceptionalSet};
use crate::map::RationalMap;
use crate::orbits::{close_pseudo_orbit, BackwardTree, CycleClass, ExclusionMode, PeriodicOrbit, TreeOptions};
use crate::region::Region;
use crate::sphere::{Metric, SpherePoint};

/// Slack on the hyperbolic-time inequality so that equality cases count.
pub const PLISS_TOL: f64 = 1e-9;
/// Orbits passing closer than this to a critical point are refused.
pub const CRITICAL_GUARD: f64 = 1e-9;
/// First index of the shadowing table.
pub const SHADOW_START: usize = 4;
const CLOSING_ITER: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitAnalysis {
    pub base: SpherePoint,
    pub length: usize,
    pub metric: Metric,
    /// `points[m] = f^m(x)` for `m = 0..=length`.
    pub points: Vec<SpherePoint>,
    /// `log_derivs[m] = a(x, m) = log |(f^m)'(x)|`.
    pub log_derivs: Vec<f64>,
    /// `itinerary[m]` is true when `f^m(x)` lies in the region.
    pub itinerary: Vec<bool>,
}

impl OrbitAnalysis {
    pub fn new(map: &RationalMap, x: SpherePoint, length: usize, metric: Metric, region: &Region) -> Result<Self> {
        let mut points = Vec::with_capacity(length + 1);
        let mut log_derivs = Vec::with_capacity(length + 1);
        let mut z = x;
        let mut acc = 0.0;
        points.push(z);
        log_derivs.push(0.0);
        for step in 0..length {
            if let Some(c) = map.critical_points().iter().find(|c| c.point.chordal(&z) < CRITICAL_GUARD) {
                return Err(Error::OrbitHitsCritical { step, distance: c.point.chordal(&z) });
            }
            acc += map.log_derivative(z, metric);
            z = map.eval(z);
            points.push(z);
            log_derivs.push(acc);
        }
        let itinerary = points.iter().map(|p| region.contains(p)).collect();
        Ok(OrbitAnalysis { base: x, length, metric, points, log_derivs, itinerary })
    }

    /// All `n ≤ length` with `a(x,n) - a(x,m) ≥ (n-m)χ` for every `m < n`.
    ///
    /// Equivalent to `b(n) ≥ max_{m<n} b(m)` with `b(m) = a(x,m) - mχ`,
    /// which a single running maximum checks.
    pub fn pliss_times(&self, chi: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut running = self.log_derivs[0];
        for n in 1..=self.length {
            let b = self.log_derivs[n] - n as f64 * chi;
            if b >= running - PLISS_TOL {
                out.push(n);
            }
            running = running.max(b);
        }
        out
    }

    pub fn exponent(&self, n: usize) -> f64 {
        self.log_derivs[n] / n as f64
    }

    pub fn enters_region(&self, upto: usize) -> Option<usize> {
        self.itinerary[..=upto].iter().position(|&b| b)
    }
}

/// Hyperbolic times of `x` up to `n` at rate `chi`.
pub fn pliss_times(map: &RationalMap, x: SpherePoint, n: usize, chi: f64) -> Result<Vec<usize>> {
    Ok(OrbitAnalysis::new(map, x, n, map.default_metric(), &Region::empty())?.pliss_times(chi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentSample {
    pub depth: usize,
    pub mode: ExclusionMode,
    /// `(1/depth) log |(f^depth)'(x)|` for each admissible leaf `x`.
    pub exponents: Vec<f64>,
}

impl SegmentSample {
    pub fn max(&self) -> Option<f64> {
        self.exponents.iter().copied().reduce(f64::max)
    }
}

/// Exponents of the orbit segments `x → f^depth(x) = z` over backward-tree
/// leaves. In terminal mode only the starting point must avoid `v`; in strict
/// mode the whole segment must.
pub fn segment_exponents(
    map: &RationalMap,
    z: SpherePoint,
    v: &Region,
    depth: usize,
    mode: ExclusionMode,
) -> Result<SegmentSample> {
    if depth == 0 {
        return Err(Error::InvalidInput("segment length must be positive".into()));
    }
    let opts = TreeOptions::for_map(map).exclude(v.clone(), mode);
    let tree = BackwardTree::build(map, z, depth, &opts)?;
    let exponents = tree.admissible(depth).map(|x| x.log_deriv / depth as f64).collect();
    Ok(SegmentSample { depth, mode, exponents })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiPlusEstimate {
    pub value: f64,
    pub samples: usize,
    pub depth: usize,
    /// The estimate is a maximum over finitely many segments, hence a lower bound.
    pub lower_estimate: bool,
}

/// `max (1/n) log |(f^n)'(x)|` over at most `sample_size` segments starting in `J ∖ V`.
pub fn chi_plus(
    map: &RationalMap,
    z: SpherePoint,
    v: &Region,
    depth: usize,
    sample_size: usize,
) -> Result<ChiPlusEstimate> {
    let sample = segment_exponents(map, z, v, depth, ExclusionMode::Terminal)?;
    let n = sample.exponents.len();
    if n == 0 || sample_size == 0 {
        return Err(Error::EmptySample);
    }
    let stride = n.div_ceil(sample_size).max(1);
    let picked: Vec<f64> = sample.exponents.iter().copied().step_by(stride).collect();
    let value = picked.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ChiPlusEstimate { value, samples: picked.len(), depth, lower_estimate: true })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowRow {
    pub j: usize,
    pub dist: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowRecord {
    pub orbit: PeriodicOrbit,
    /// Hyperbolic time used as the shadowing horizon.
    pub m: usize,
    /// Length of the connecting path back to `x`.
    pub connector: usize,
    /// Distance between `f^m(x)` and the start of the connecting path.
    pub gap: f64,
    pub rate: f64,
    pub table: Vec<ShadowRow>,
    pub bound_holds: bool,
    pub exponent_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum ShadowOutcome {
    Shadowed(Box<ShadowRecord>),
    /// A precondition or a conclusion failed; the text says which.
    NoShadow(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowOptions {
    pub eps: f64,
    /// `χ⁺(J ∖ V)`.
    pub chi_plus: f64,
    pub max_connector: usize,
    /// Connecting paths closer than this end the search early.
    pub target_gap: f64,
}

impl ShadowOptions {
    pub fn new(eps: f64, chi_plus: f64) -> Self {
        ShadowOptions { eps, chi_plus, max_connector: 14, target_gap: 1e-3 }
    }
}

/// Periodic orbit following `x` up to its last hyperbolic time `m ≤ n`.
///
/// The pseudo-orbit `x, …, f^{m-1}(x), y, …, f^{N-1}(y)` with `f^N(y) = x` and
/// `y` close to `f^m(x)` is closed by pulling back along the inverse branches
/// that follow it. The result is then checked against the shadowing bound
/// `dist(f^j(x), f^j(p)) ≤ exp(-(m-j)(χ⁺ - ε))` for `j = 4..=m` and against
/// `χ(p) ≥ χ⁺ - ε`. Both `x` and `f^n(x)` must lie outside `v`.
pub fn shadow_periodic(
    map: &RationalMap,
    x: SpherePoint,
    n: usize,
    v: &Region,
    opts: &ShadowOptions,
) -> Result<ShadowOutcome> {
    let metric = map.default_metric();
    let orbit = OrbitAnalysis::new(map, x, n, metric, v)?;
    if let Some(k) = [0, n].into_iter().find(|&k| orbit.itinerary[k]) {
        return Ok(ShadowOutcome::NoShadow(format!("f^{k}(x) lies in the excluded region")));
    }
    let rate = opts.chi_plus - opts.eps;
    if orbit.exponent(n) < rate {
        return Ok(ShadowOutcome::NoShadow(format!(
            "exponent {:.6} over {n} steps is below chi_plus - eps = {rate:.6}",
            orbit.exponent(n)
        )));
    }
    let Some(&m) = orbit.pliss_times(rate).last() else {
        return Ok(ShadowOutcome::NoShadow("no hyperbolic time".into()));
    };
    let target = orbit.points[m];
    let mut best: Option<(f64, Vec<SpherePoint>)> = None;
    for depth in 1..=opts.max_connector {
        let tree = match BackwardTree::build(map, x, depth, &TreeOptions::new(metric).unchecked()) {
            Ok(t) => t,
            Err(Error::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        };
        let (idx, gap) = tree
            .leaves()
            .iter()
            .enumerate()
            .map(|(i, l)| (i, l.point.distance(&target, metric)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("tree has leaves");
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            let mut path = tree.branch(depth, idx);
            path.pop();
            best = Some((gap, path));
        }
        if gap < opts.target_gap {
            break;
        }
    }
    let (gap, connector) = best.expect("at least one connector depth");
    let mut targets: Vec<SpherePoint> = orbit.points[..m].to_vec();
    targets.extend(&connector);
    let Some(p) = close_pseudo_orbit(map, &targets, CLOSING_ITER) else {
        return Ok(ShadowOutcome::NoShadow("pseudo-orbit did not close".into()));
    };
    let mut table = Vec::new();
    let mut w = p.points[0];
    for j in 0..=m {
        if j >= SHADOW_START {
            let dist = orbit.points[j].distance(&w, metric);
            let bound = (-((m - j) as f64) * rate).exp();
            table.push(ShadowRow { j, dist, bound });
        }
        w = map.eval(w);
    }
    let bound_holds = table.iter().all(|r| r.dist <= r.bound);
    let exponent_holds = p.exponent >= rate;
    Ok(ShadowOutcome::Shadowed(Box::new(ShadowRecord {
        orbit: p,
        m,
        connector: connector.len(),
        gap,
        rate,
        table,
        bound_holds,
        exponent_holds,
    })))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearCriticalPoint {
    pub n: usize,
    pub period: usize,
    pub point: SpherePoint,
    pub exponent: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearCriticalReport {
    pub critical_point: SpherePoint,
    pub chi_ess: f64,
    /// Backward steps from `c` to the neighbourhood of the cycle.
    pub approach: usize,
    pub found: Vec<NearCriticalPoint>,
    /// Values of `n` for which the pseudo-orbit did not close.
    pub failed: Vec<usize>,
}

impl NearCriticalReport {
    pub fn min_exponent(&self) -> Option<f64> {
        self.found.iter().map(|q| q.exponent).reduce(f64::min)
    }
}

/// Periodic points near an exceptional critical preimage `c`.
///
/// With `f^k(c) = p` on a cycle of period `ℓ` in Σ₊ and `w ∈ f^{-a}(c)` close
/// to `p`, the pseudo-orbit `w → … → c → … → p → (cycle n times) → w` of
/// period `a + k + nℓ` is closed by inverse-branch pullback. The periodic
/// point shadowing `c` approaches `c` as `n` grows.
pub fn periodic_near_critical(
    map: &RationalMap,
    sigma: &ExceptionalSet,
    c: SpherePoint,
    n_list: &[usize],
) -> Result<NearCriticalReport> {
    let ess = chi_ess(map, sigma, c)?;
    let root = sigma.root_of(&map.eval(c)).ok_or(Error::NotAnExceptionalPreimage)?;
    if root.cycle.class != CycleClass::Expanding {
        return Err(Error::NotAnExceptionalPreimage);
    }
    let metric = map.default_metric();
    // Forward part: c, f(c), …, f^{k-1}(c); f^k(c) is the cycle point p.
    let mut forward = vec![c];
    for _ in 1..ess.k {
        forward.push(map.eval(*forward.last().expect("nonempty")));
    }
    let p = map.iterate(c, ess.k);
    let cycle_start = root.cycle.points.iter().position(|q| q.approx_eq(&p, 1e-6)).unwrap_or(0);
    let ell = root.cycle.period;
    let cycle: Vec<SpherePoint> = (0..ell).map(|i| root.cycle.points[(cycle_start + i) % ell]).collect();

    // Backward approach from c to p, leaving Σ as soon as possible.
    let mut approach: Option<(f64, Vec<SpherePoint>)> = None;
    for depth in 1..=12 {
        let tree = match BackwardTree::build(map, c, depth, &TreeOptions::new(metric).unchecked()) {
            Ok(t) => t,
            Err(Error::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        };
        let candidate = tree
            .leaves()
            .iter()
            .enumerate()
            .filter(|(_, l)| !sigma.contains(&l.point))
            .map(|(i, l)| (i, l.point.chordal(&p)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((idx, d)) = candidate {
            if approach.as_ref().is_none_or(|(best, _)| d < *best) {
                let mut path = tree.branch(depth, idx);
                path.pop();
                approach = Some((d, path));
            }
            if d < 0.05 {
                break;
            }
        }
    }
    let (_, path) = approach.ok_or(Error::EmptySample)?;

    let mut found = Vec::new();
    let mut failed = Vec::new();
    for &n in n_list {
        let mut targets = path.clone();
        let c_index = targets.len();
        targets.extend(&forward);
        for _ in 0..n {
            targets.extend(&cycle);
        }
        let period = targets.len();
        // Rotate so that the pullback starts at the target c.
        targets.rotate_left(c_index);
        match close_pseudo_orbit(map, &targets, CLOSING_ITER) {
            Some(orbit) => {
                let q = orbit.points[0];
                found.push(NearCriticalPoint {
                    n,
                    period,
                    point: q,
                    exponent: orbit.exponent,
                    distance: q.distance(&c, metric),
                });
            }
            None => failed.push(n),
        }
    }
    Ok(NearCriticalReport { critical_point: c, chi_ess: ess.chi_ess, approach: path.len(), found, failed })
}
