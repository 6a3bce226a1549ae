//! Periodic orbits: enumeration by simultaneous iteration on `f^n(z) - z`,
//! and closing of pseudo-orbits by inverse-branch pullback.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::map::RationalMap;
use crate::sphere::SpherePoint;

/// Width of the band around `|multiplier| = 1` classified as neutral.
pub const NEUTRAL_BAND: f64 = 1e-6;
const ROOT_RESIDUAL: f64 = 1e-8;
const PERIOD_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleClass {
    Attracting,
    Expanding,
    Neutral,
}

impl CycleClass {
    pub fn from_multiplier(m: Complex64) -> Self {
        let r = m.norm();
        if r < 1.0 - NEUTRAL_BAND {
            CycleClass::Attracting
        } else if r > 1.0 + NEUTRAL_BAND {
            CycleClass::Expanding
        } else {
            CycleClass::Neutral
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub points: Vec<SpherePoint>,
    pub period: usize,
    pub multiplier: Complex64,
    /// `(1/n) log |multiplier|`, in nats per iterate.
    pub exponent: f64,
    pub class: CycleClass,
}

impl PeriodicOrbit {
    /// The cycle through `p`, assumed to have exact period `period`.
    pub fn through(map: &RationalMap, p: SpherePoint, period: usize) -> Self {
        let mut points = Vec::with_capacity(period);
        let mut z = p;
        // Chart derivatives compose along the cycle because the output chart
        // of each step is the input chart of the next.
        let mut multiplier = Complex64::new(1.0, 0.0);
        for _ in 0..period {
            points.push(z);
            let e = map.eval_chart(z);
            multiplier *= e.derivative;
            z = e.value;
        }
        let exponent = multiplier.norm().ln() / period as f64;
        PeriodicOrbit { points, period, multiplier, exponent, class: CycleClass::from_multiplier(multiplier) }
    }

    pub fn contains(&self, z: &SpherePoint, tol: f64) -> bool {
        self.points.iter().any(|p| p.approx_eq(z, tol))
    }

    pub fn is_attracting(&self) -> bool {
        self.class == CycleClass::Attracting
    }
}

/// Counts of fixed points of `f^n` found versus expected (`d^n + 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointCount {
    pub period: usize,
    pub expected: usize,
    pub found: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitSearch {
    pub orbits: Vec<PeriodicOrbit>,
    pub counts: Vec<FixedPointCount>,
    /// False when some `f^n` had fewer fixed points than `d^n + 1`.
    pub complete: bool,
}

impl OrbitSearch {
    pub fn exact_period(&self, n: usize) -> impl Iterator<Item = &PeriodicOrbit> {
        self.orbits.iter().filter(move |o| o.period == n)
    }

    pub fn cycle_containing(&self, z: &SpherePoint, tol: f64) -> Option<&PeriodicOrbit> {
        self.orbits.iter().find(|o| o.contains(z, tol))
    }
}

/// Exact period of `z` if it divides `n` (within `tol`), else `None`.
pub fn exact_period(map: &RationalMap, z: SpherePoint, n: usize, tol: f64) -> Option<usize> {
    let mut w = z;
    for m in 1..=n {
        w = map.eval(w);
        if n.is_multiple_of(m) && w.approx_eq(&z, tol) {
            return Some(m);
        }
    }
    None
}

/// `g/g'` for `g(z) = f^n(z) - z`, or `None` when the orbit overflows.
fn newton_ratio(map: &RationalMap, z: Complex64, n: usize) -> Option<Complex64> {
    let d = map.degree() as f64;
    let mut w = z;
    let mut dw = Complex64::new(1.0, 0.0);
    for k in 0..n {
        if map.is_polynomial() && w.norm() > 1e30 {
            // Near ∞ a polynomial iterate satisfies f^m(w)/(f^m)'(w) ≈ w/d^m.
            return Some(w / dw / d.powi((n - k) as i32));
        }
        let e = map.eval_chart(SpherePoint::Finite(w));
        let next = e.value.finite()?;
        dw *= e.planar_derivative();
        w = next;
        if !(dw.re.is_finite() && dw.im.is_finite()) {
            return None;
        }
    }
    let ratio = (w - z) / (dw - 1.0);
    (ratio.re.is_finite() && ratio.im.is_finite()).then_some(ratio)
}

fn residual(map: &RationalMap, z: SpherePoint, n: usize) -> f64 {
    map.iterate(z, n).chordal(&z)
}

fn polish(map: &RationalMap, z: Complex64, n: usize) -> Complex64 {
    let mut best = z;
    let mut best_res = residual(map, SpherePoint::Finite(z), n);
    let mut cur = z;
    for _ in 0..8 {
        let Some(r) = newton_ratio(map, cur, n) else { break };
        cur -= r;
        let res = residual(map, SpherePoint::new(cur), n);
        if res < best_res {
            best = cur;
            best_res = res;
        }
        if best_res < 1e-15 {
            break;
        }
    }
    best
}

/// Escape radius for polynomials: `|z| > R` implies `|f(z)| > |z|`.
fn escape_radius(map: &RationalMap) -> f64 {
    let num = map.numerator();
    let d = map.degree();
    let lead = num[d].norm() / map.denominator()[0].norm();
    let rest: f64 = num[..d].iter().map(|c| c.norm()).sum::<f64>() / map.denominator()[0].norm();
    ((1.0 + rest) / lead).max(1.0)
}

/// Finite fixed points of `f^n` by Aberth iteration on `f^n(z) - z`, whose
/// logarithmic derivative is corrected by the finite poles of `f^n`.
fn fixed_points_of_iterate(map: &RationalMap, n: usize) -> Result<(Vec<Complex64>, bool)> {
    let d = map.degree();
    let inf_fixed = map.iterate(SpherePoint::Infinity, n).is_infinite();
    let k = d.pow(n as u32) + 1 - usize::from(inf_fixed);
    let poles: Vec<Complex64> = if map.is_polynomial() {
        Vec::new()
    } else {
        let mut level = vec![SpherePoint::Infinity];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * d);
            for w in &level {
                next.extend(map.preimages(*w)?);
            }
            level = next;
        }
        level.iter().filter_map(|p| p.finite()).collect()
    };
    let radius = if map.is_polynomial() { 1.05 * escape_radius(map) } else { 1.0 };
    let mut z: Vec<Complex64> = (0..k)
        .map(|i| Complex64::from_polar(radius, std::f64::consts::TAU * i as f64 / k as f64 + 0.37))
        .collect();
    let mut done = vec![false; k];
    let max_iter = 400 + 2 * k;
    for sweep in 0..max_iter {
        let mut all_done = true;
        for i in 0..k {
            if done[i] {
                continue;
            }
            let Some(ratio) = newton_ratio(map, z[i], n) else {
                let bump = Complex64::from_polar(1e-3 * (1.0 + z[i].norm()), sweep as f64 + i as f64);
                z[i] += bump;
                all_done = false;
                continue;
            };
            if ratio.norm_sqr() == 0.0 {
                done[i] = true;
                continue;
            }
            let mut log_deriv = ratio.inv();
            for q in &poles {
                let diff = z[i] - q;
                if diff.norm_sqr() > 0.0 {
                    log_deriv += diff.inv();
                }
            }
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let diff = z[i] - zj;
                    if diff.norm_sqr() > 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let step = (log_deriv - repulsion).inv();
            if !(step.re.is_finite() && step.im.is_finite()) {
                all_done = false;
                continue;
            }
            z[i] -= step;
            if step.norm() <= 1e-14 * (1.0 + z[i].norm()) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    let roots: Vec<Complex64> = z.into_iter().map(|zi| polish(map, zi, n)).collect();
    Ok((roots, inf_fixed))
}

/// All cycles of period at most `max_period`, deduplicated with `dedup_tol`.
pub fn find_periodic_orbits(map: &RationalMap, max_period: usize, dedup_tol: f64) -> Result<OrbitSearch> {
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    let mut counts = Vec::new();
    let d = map.degree();
    for n in 1..=max_period {
        let (roots, inf_fixed) = fixed_points_of_iterate(map, n)?;
        let mut distinct: Vec<SpherePoint> = Vec::new();
        for r in roots {
            let p = SpherePoint::new(r);
            if residual(map, p, n) < ROOT_RESIDUAL && !distinct.iter().any(|q| q.approx_eq(&p, dedup_tol)) {
                distinct.push(p);
            }
        }
        if inf_fixed {
            distinct.push(SpherePoint::Infinity);
        }
        counts.push(FixedPointCount { period: n, expected: d.pow(n as u32) + 1, found: distinct.len() });
        for p in distinct {
            if exact_period(map, p, n, PERIOD_TOL) != Some(n) {
                continue;
            }
            if orbits.iter().any(|o| o.period == n && o.contains(&p, dedup_tol.max(1e-9))) {
                continue;
            }
            orbits.push(PeriodicOrbit::through(map, p, n));
        }
    }
    let complete = counts.iter().all(|c| c.found >= c.expected);
    Ok(OrbitSearch { orbits, counts, complete })
}

/// Closes a pseudo-orbit `targets[0] → targets[1] → … → targets[P-1] → targets[0]`
/// by iterating the inverse branch of `f^P` that follows the targets backward.
/// Returns the resulting periodic orbit (its period divides `P`).
pub fn close_pseudo_orbit(map: &RationalMap, targets: &[SpherePoint], max_iter: usize) -> Option<PeriodicOrbit> {
    let period = targets.len();
    if period == 0 {
        return None;
    }
    // The first pass follows the targets; later passes follow the previous
    // pass so that branch choices near critical points stay consistent.
    let mut guide: Vec<SpherePoint> = targets.to_vec();
    let mut z = targets[0];
    let mut converged = false;
    for _ in 0..max_iter {
        let mut w = z;
        let mut pass = vec![SpherePoint::Infinity; period];
        for i in (0..period).rev() {
            let pre = map.preimages(w).ok()?;
            let g = guide[i];
            w = *pre.iter().min_by(|a, b| a.chordal(&g).total_cmp(&b.chordal(&g)))?;
            pass[i] = w;
        }
        let step = w.chordal(&z);
        z = w;
        guide = pass;
        if step < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged && residual(map, z, period) > ROOT_RESIDUAL {
        return None;
    }
    if let SpherePoint::Finite(c) = z {
        z = SpherePoint::new(polish(map, c, period));
    }
    if residual(map, z, period) > ROOT_RESIDUAL {
        return None;
    }
    let exact = exact_period(map, z, period, PERIOD_TOL)?;
    Some(PeriodicOrbit::through(map, z, exact))
}
