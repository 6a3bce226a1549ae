//! The maximal exceptional set: a finite forward-invariant subset of the
//! Julia set whose preimages outside itself are all critical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::RationalMap;
use crate::orbits::{find_periodic_orbits, CycleClass, PeriodicOrbit};
use crate::sphere::{dedup_points, SpherePoint};

/// No exceptional set has more points than this.
pub const MAX_CARDINALITY: usize = 4;
/// Chordal tolerance for set membership.
pub const SET_TOL: f64 = 1e-6;
/// Chordal tolerance for recognising a point as critical.
pub const CRITICAL_MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub max_period: usize,
    /// Backward steps from cycle points used to build the candidate pool.
    pub pool_depth: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { max_period: 4, pool_depth: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreimageEntry {
    pub point: SpherePoint,
    pub in_set: bool,
    pub critical: bool,
}

/// The full preimage multiset of one point with its classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreimageAudit {
    pub point: SpherePoint,
    pub image: SpherePoint,
    pub image_in_set: bool,
    pub preimages: Vec<PreimageEntry>,
}

impl PreimageAudit {
    pub fn passes(&self) -> bool {
        self.image_in_set && self.preimages.iter().all(|e| e.in_set || e.critical)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRoot {
    pub point: SpherePoint,
    /// Iterates needed to land on the cycle.
    pub steps: usize,
    pub cycle: PeriodicOrbit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub points: Vec<SpherePoint>,
    pub sigma_plus: Vec<SpherePoint>,
    pub sigma_zero: Vec<SpherePoint>,
    pub cycle_roots: Vec<CycleRoot>,
    pub certificate: Vec<PreimageAudit>,
    pub bounds: SearchBounds,
    pub pool_size: usize,
    /// False when the periodic-orbit search missed fixed points of some iterate.
    pub enumeration_complete: bool,
}

impl ExceptionalSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, z: &SpherePoint) -> bool {
        contains(&self.points, z)
    }

    pub fn empty(bounds: SearchBounds) -> Self {
        ExceptionalSet {
            points: Vec::new(),
            sigma_plus: Vec::new(),
            sigma_zero: Vec::new(),
            cycle_roots: Vec::new(),
            certificate: Vec::new(),
            bounds,
            pool_size: 0,
            enumeration_complete: true,
        }
    }

    pub fn root_of(&self, z: &SpherePoint) -> Option<&CycleRoot> {
        self.cycle_roots.iter().find(|r| r.point.approx_eq(z, SET_TOL))
    }
}

fn contains(set: &[SpherePoint], z: &SpherePoint) -> bool {
    set.iter().any(|p| p.approx_eq(z, SET_TOL))
}

fn near_critical(map: &RationalMap, z: &SpherePoint) -> bool {
    map.critical_points().iter().any(|c| c.point.approx_eq(z, CRITICAL_MATCH_TOL))
}

/// Audits `set` against forward invariance and the critical-preimage condition.
pub fn audit(map: &RationalMap, set: &[SpherePoint]) -> Result<Vec<PreimageAudit>> {
    set.iter()
        .map(|&s| {
            let image = map.eval(s);
            let preimages = map
                .preimages(s)?
                .into_iter()
                .map(|x| PreimageEntry { point: x, in_set: contains(set, &x), critical: near_critical(map, &x) })
                .collect();
            Ok(PreimageAudit { point: s, image, image_in_set: contains(set, &image), preimages })
        })
        .collect()
}

/// True when `set` is forward invariant and `f⁻¹(set) ∖ set` is critical.
pub fn is_exceptional_candidate(map: &RationalMap, set: &[SpherePoint]) -> Result<bool> {
    Ok(audit(map, set)?.iter().all(PreimageAudit::passes))
}

/// Smallest set containing `seed` that is closed under `f` and under
/// non-critical preimages. `None` once it exceeds [`MAX_CARDINALITY`] points.
fn closure(map: &RationalMap, seed: SpherePoint) -> Result<Option<Vec<SpherePoint>>> {
    let mut set = vec![seed];
    let mut next = 0;
    while next < set.len() {
        let s = set[next];
        next += 1;
        let mut forced = vec![map.eval(s)];
        forced.extend(map.preimages(s)?.into_iter().filter(|x| !near_critical(map, x)));
        for x in forced {
            if !contains(&set, &x) {
                set.push(x);
                if set.len() > MAX_CARDINALITY {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(set))
}

/// Follows the forward orbit of `z` inside `set` until it repeats.
fn cycle_root(map: &RationalMap, set: &[SpherePoint], z: SpherePoint) -> Option<CycleRoot> {
    let mut orbit = vec![z];
    for _ in 0..=set.len() {
        let w = map.eval(*orbit.last().expect("nonempty"));
        if let Some(i) = orbit.iter().position(|p| p.approx_eq(&w, SET_TOL)) {
            let period = orbit.len() - i;
            return Some(CycleRoot { point: z, steps: i, cycle: PeriodicOrbit::through(map, orbit[i], period) });
        }
        orbit.push(w);
    }
    None
}

/// Candidate pool: non-attracting cycle points and their iterated preimages.
fn candidate_pool(map: &RationalMap, cycles: &[PeriodicOrbit], depth: usize) -> Result<Vec<SpherePoint>> {
    let mut pool: Vec<SpherePoint> = Vec::new();
    let mut frontier: Vec<SpherePoint> =
        cycles.iter().filter(|o| !o.is_attracting()).flat_map(|o| o.points.iter().copied()).collect();
    frontier = dedup_points(&frontier, SET_TOL);
    for step in 0..=depth {
        let mut fresh = Vec::new();
        for p in frontier {
            if !contains(&pool, &p) {
                pool.push(p);
                fresh.push(p);
            }
        }
        if step == depth {
            break;
        }
        let mut pre = Vec::new();
        for p in fresh {
            pre.extend(map.preimages(p)?);
        }
        frontier = dedup_points(&pre, SET_TOL);
    }
    Ok(pool)
}

/// Maximal exceptional set within the search bounds.
///
/// Every exceptional set containing a point contains that point's closure
/// under `f` and non-critical preimages, and such closures are themselves
/// exceptional. The maximal set is therefore the union of the closures of
/// pool points that stay within four points and avoid attracting cycles.
pub fn detect_exceptional(map: &RationalMap, bounds: SearchBounds) -> Result<ExceptionalSet> {
    let search = find_periodic_orbits(map, bounds.max_period, 1e-8)?;
    let pool = candidate_pool(map, &search.orbits, bounds.pool_depth)?;
    let mut union: Vec<SpherePoint> = Vec::new();
    let mut roots: Vec<CycleRoot> = Vec::new();
    for &seed in &pool {
        if contains(&union, &seed) {
            continue;
        }
        let Some(set) = closure(map, seed)? else { continue };
        let set_roots: Option<Vec<CycleRoot>> = set.iter().map(|&z| cycle_root(map, &set, z)).collect();
        let Some(set_roots) = set_roots else { continue };
        if set_roots.iter().any(|r| r.cycle.is_attracting()) {
            continue;
        }
        for (z, r) in set.into_iter().zip(set_roots) {
            if !contains(&union, &z) {
                union.push(z);
                roots.push(r);
            }
        }
    }
    if union.len() > MAX_CARDINALITY {
        return Err(Error::NonConvergence { what: "exceptional set exceeds four points", residual: union.len() as f64 });
    }
    let certificate = audit(map, &union)?;
    debug_assert!(certificate.iter().all(PreimageAudit::passes));
    let (mut sigma_plus, mut sigma_zero) = (Vec::new(), Vec::new());
    for r in &roots {
        match r.cycle.class {
            CycleClass::Neutral => sigma_zero.push(r.point),
            _ => sigma_plus.push(r.point),
        }
    }
    Ok(ExceptionalSet {
        points: union,
        sigma_plus,
        sigma_zero,
        cycle_roots: roots,
        certificate,
        bounds,
        pool_size: pool.len(),
        enumeration_complete: search.complete,
    })
}

/// Critical points `c` with `f(c) ∈ Σ` and `c ∉ Σ`.
pub fn exceptional_preimages(map: &RationalMap, sigma: &ExceptionalSet) -> Vec<SpherePoint> {
    map.critical_points()
        .iter()
        .map(|c| c.point)
        .filter(|c| !sigma.contains(c) && sigma.contains(&map.eval(*c)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssentialExponent {
    pub critical_point: SpherePoint,
    /// Minimal `k` with `f^k(c)` periodic.
    pub k: usize,
    pub local_degree: usize,
    pub cycle_exponent: f64,
    pub chi_ess: f64,
}

/// `χ(p) / deg_{f^k}(c)` for the cycle `p` reached first by `c`; zero for neutral cycles.
pub fn chi_ess(map: &RationalMap, sigma: &ExceptionalSet, c: SpherePoint) -> Result<EssentialExponent> {
    if sigma.contains(&c) || !sigma.contains(&map.eval(c)) {
        return Err(Error::NotAnExceptionalPreimage);
    }
    let image = map.eval(c);
    let root = sigma.root_of(&image).ok_or(Error::NotAnExceptionalPreimage)?;
    let k = root.steps + 1;
    let local_degree = map.local_degree_iterate(c, k);
    let cycle_exponent = root.cycle.exponent;
    let chi_ess = match root.cycle.class {
        CycleClass::Neutral => 0.0,
        _ => cycle_exponent / local_degree as f64,
    };
    Ok(EssentialExponent { critical_point: c, k, local_degree, cycle_exponent, chi_ess })
}

/// Table of essential exponents over all exceptional critical preimages.
pub fn chi_ess_table(map: &RationalMap, sigma: &ExceptionalSet) -> Result<Vec<EssentialExponent>> {
    exceptional_preimages(map, sigma).into_iter().map(|c| chi_ess(map, sigma, c)).collect()
}

/// `max χ_ess(c)` over exceptional critical preimages.
pub fn chi_ess_plus(map: &RationalMap, sigma: &ExceptionalSet) -> Result<f64> {
    if sigma.is_empty() {
        return Err(Error::MapNotExceptional);
    }
    let table = chi_ess_table(map, sigma)?;
    table.iter().map(|e| e.chi_ess).reduce(f64::max).ok_or(Error::MapNotExceptional)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeConstant {
    pub d: usize,
    /// `α⁺ ≤ D·α̃⁺` when both exponents are supplied.
    pub inequality_holds: Option<bool>,
    pub slack: Option<f64>,
}

/// Tolerance applied to the inequality `α⁺ ≤ D·α̃⁺`.
pub const INEQUALITY_TOL: f64 = 1e-6;

/// `D = max deg_{f^k(c)}(c)` over exceptional critical preimages, `1` when Σ is empty.
pub fn degree_constant(
    map: &RationalMap,
    sigma: &ExceptionalSet,
    exponents: Option<(f64, f64)>,
) -> Result<DegreeConstant> {
    let d = if sigma.is_empty() {
        1
    } else {
        chi_ess_table(map, sigma)?.iter().map(|e| e.local_degree).max().unwrap_or(1)
    };
    let (inequality_holds, slack) = match exponents {
        Some((alpha_plus, alpha_tilde_plus)) => {
            let slack = d as f64 * alpha_tilde_plus - alpha_plus;
            (Some(slack >= -INEQUALITY_TOL), Some(slack))
        }
        None => (None, None),
    };
    Ok(DegreeConstant { d, inequality_holds, slack })
}
