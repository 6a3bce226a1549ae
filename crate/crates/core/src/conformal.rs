//! Truncated Patterson–Sullivan sums: atomic measures on backward orbits
//! weighted by `b_n e^{-np} |(f^n)'|^{-t}`, with mass and conformality checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::RationalMap;
use crate::numerics::{log_sum_exp, potential};
use crate::orbits::{BackwardTree, TreeOptions};
use crate::region::{Ball, Region};
use crate::sphere::{Metric, SpherePoint};

/// Smallest accepted gap `p - P̃`.
pub const MIN_PRESSURE_GAP: f64 = 0.01;

/// The sequence `b_n` of the construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BSequence {
    /// `b_n = 1`.
    #[default]
    Constant,
    /// `b_n = n^gamma`.
    Power { gamma: f64 },
}

impl BSequence {
    pub fn log_b(&self, n: usize) -> f64 {
        match *self {
            BSequence::Constant => 0.0,
            BSequence::Power { gamma } => gamma * (n as f64).ln(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: SpherePoint,
    pub weight: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub t: f64,
    pub p: f64,
    pub depth: usize,
    pub w: Region,
    pub v: Region,
    pub b: BSequence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<Atom>,
    pub params: MeasureParams,
    /// `log M_{t,p}` of the truncated sum over preimages outside `V`.
    pub log_normalizer: f64,
    pub metric: Metric,
}

impl AtomicMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn mass_where(&self, pred: impl Fn(&SpherePoint) -> bool) -> f64 {
        self.atoms.iter().filter(|a| pred(&a.point)).map(|a| a.weight).sum()
    }

    pub fn mass_in(&self, region: &Region) -> f64 {
        self.mass_where(|p| region.contains(p))
    }

    /// Mass of `B(center, outer) ∖ B(center, inner)`.
    pub fn mass_in_annulus(&self, center: SpherePoint, inner: f64, outer: f64) -> f64 {
        self.mass_where(|p| {
            let d = p.distance(&center, self.metric);
            d < outer && d >= inner
        })
    }
}

/// Builds `μ_{t,W,p}` truncated at `depth` from an existing backward tree.
pub fn measure_from_tree(tree: &BackwardTree, params: MeasureParams) -> Result<AtomicMeasure> {
    if params.depth == 0 || params.depth > tree.depth {
        return Err(Error::InvalidInput(format!("truncation depth {} outside 1..={}", params.depth, tree.depth)));
    }
    if !params.w.is_subset_of(&params.v) {
        return Err(Error::InvalidInput("W must be contained in V".into()));
    }
    let log_term = |n: usize, ld: f64| params.b.log_b(n) - n as f64 * params.p + potential(params.t, ld);
    let log_normalizer = log_sum_exp((1..=params.depth).flat_map(|n| {
        tree.level(n).iter().filter(|x| !params.v.contains(&x.point)).map(move |x| log_term(n, x.log_deriv))
    }));
    if !log_normalizer.is_finite() {
        return Err(Error::EmptyTree);
    }
    let mut atoms = Vec::new();
    for n in 1..=params.depth {
        for x in tree.level(n) {
            if params.w.contains(&x.point) {
                continue;
            }
            let weight = (log_term(n, x.log_deriv) - log_normalizer).exp();
            atoms.push(Atom { point: x.point, weight, n });
        }
    }
    Ok(AtomicMeasure { atoms, params, log_normalizer, metric: tree.metric })
}

/// `μ_{t,W,p}` truncated at `depth`, normalized with the reference region `V`.
/// Requires `p ≥ P̃ + 0.01`.
#[allow(clippy::too_many_arguments)]
pub fn patterson_sullivan(
    map: &RationalMap,
    z: SpherePoint,
    t: f64,
    p: f64,
    p_tilde: f64,
    w: &Region,
    v: &Region,
    depth: usize,
    b: BSequence,
) -> Result<AtomicMeasure> {
    let gap = p - p_tilde;
    if !(gap >= MIN_PRESSURE_GAP) {
        return Err(Error::PressureGapTooSmall { gap });
    }
    let tree = BackwardTree::build(map, z, depth, &TreeOptions::for_map(map))?;
    measure_from_tree(&tree, MeasureParams { t, p, depth, w: w.clone(), v: v.clone(), b })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    /// `(largest radius of W, total mass)` in the order supplied.
    pub masses: Vec<(f64, f64)>,
    pub all_at_least_one: bool,
    /// Masses grow as W shrinks.
    pub monotone: bool,
    pub max_mass: f64,
}

/// Checks `|μ_{t,W,p}| ≥ 1` over a family of shrinking `W` and reports the growth.
pub fn mass_bounds_check(measures: &[AtomicMeasure]) -> MassReport {
    let masses: Vec<(f64, f64)> = measures
        .iter()
        .map(|m| (m.params.w.balls.iter().map(|b| b.radius).fold(0.0, f64::max), m.total_mass()))
        .collect();
    let all_at_least_one = masses.iter().all(|&(_, m)| m >= 1.0 - 1e-9);
    let mut sorted = masses.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    let max_mass = masses.iter().map(|m| m.1).fold(0.0, f64::max);
    MassReport { masses, all_at_least_one, monotone, max_mass }
}

/// A disk on which the map is injective, away from the excluded sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialDisk {
    pub ball: Ball,
    pub metric: Metric,
}

impl SpecialDisk {
    pub fn region(&self) -> Region {
        Region { balls: vec![self.ball], metric: self.metric }
    }

    fn samples(&self) -> Vec<SpherePoint> {
        let mut out = vec![self.ball.center];
        let Some(c) = self.ball.center.finite() else { return out };
        for &frac in &[0.5, 0.999] {
            for k in 0..24 {
                let theta = std::f64::consts::TAU * k as f64 / 24.0;
                let r = offset_radius(c, self.ball.radius * frac, self.metric);
                out.push(SpherePoint::new(c + num_complex::Complex64::from_polar(r, theta)));
            }
        }
        out
    }
}

/// Planar offset that moves `c` by roughly `r` in `metric`.
fn offset_radius(c: num_complex::Complex64, r: f64, metric: Metric) -> f64 {
    match metric {
        Metric::Planar => r,
        // The chordal metric scales planar lengths by 2 / (1 + |c|^2).
        Metric::Spherical => r * (1.0 + c.norm_sqr()) / 2.0 * 0.999,
    }
}

/// Verifies that `B(center, radius)` avoids `Crit`, `W` and `f⁻¹(W)`, and
/// that no two sample points of the disk share an image.
pub fn special_disk(
    map: &RationalMap,
    center: SpherePoint,
    radius: f64,
    metric: Metric,
    w: &Region,
) -> Result<SpecialDisk> {
    if center.is_infinite() {
        return Err(Error::NotSpecial("disks must have a finite center".into()));
    }
    let disk = SpecialDisk { ball: Ball { center, radius }, metric };
    let region = disk.region();
    if let Some(c) = map.critical_points().iter().find(|c| region.contains(&c.point)) {
        return Err(Error::NotSpecial(format!("contains the critical point {}", c.point)));
    }
    for b in &w.balls {
        if b.radius > 0.0 && center.distance(&b.center, w.metric) < radius + b.radius {
            return Err(Error::RegionTouchesExcluded(format!("meets W near {}", b.center)));
        }
    }
    for u in disk.samples() {
        let image = map.eval(u);
        if w.contains(&image) {
            return Err(Error::RegionTouchesExcluded(format!("f({u}) lies in W")));
        }
        let others = map.preimages(image)?.into_iter().filter(|x| x.chordal(&u) > 1e-9);
        if let Some(x) = others.into_iter().find(|x| region.contains(x)) {
            return Err(Error::NotSpecial(format!("{u} and {x} have the same image")));
        }
    }
    Ok(disk)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub image_mass: f64,
    pub jacobian_integral: f64,
    pub defect: f64,
}

/// `|μ(f(A)) - ∫_A e^{P̃ - φ_t} dμ|` evaluated on the atoms.
pub fn conformality_defect(
    measure: &AtomicMeasure,
    map: &RationalMap,
    t: f64,
    p_tilde: f64,
    a: &SpecialDisk,
) -> Result<Defect> {
    let region = a.region();
    let mut image_terms = Vec::new();
    let mut jacobian_terms = Vec::new();
    for atom in &measure.atoms {
        if atom.weight <= 0.0 {
            continue;
        }
        let lw = atom.weight.ln();
        if region.contains(&atom.point) {
            let ld = map.log_derivative(atom.point, measure.metric);
            jacobian_terms.push(lw + p_tilde - potential(t, ld));
        }
        if map.preimages(atom.point)?.iter().any(|x| region.contains(x)) {
            image_terms.push(lw);
        }
    }
    let image_mass = log_sum_exp(image_terms).exp();
    let jacobian_integral = log_sum_exp(jacobian_terms).exp();
    Ok(Defect { image_mass, jacobian_integral, defect: (image_mass - jacobian_integral).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub p: f64,
    pub depth: usize,
    pub defect: f64,
}

/// Defect on `a` over all `(p, depth)` pairs, sharing one tree of the largest depth.
#[allow(clippy::too_many_arguments)]
pub fn defect_sweep(
    map: &RationalMap,
    tree: &BackwardTree,
    t: f64,
    p_tilde: f64,
    p_values: &[f64],
    depths: &[usize],
    w: &Region,
    v: &Region,
    a: &SpecialDisk,
) -> Result<Vec<DefectRow>> {
    let mut rows = Vec::new();
    for &p in p_values {
        let gap = p - p_tilde;
        if !(gap >= MIN_PRESSURE_GAP) {
            return Err(Error::PressureGapTooSmall { gap });
        }
        for &depth in depths {
            let params = MeasureParams { t, p, depth, w: w.clone(), v: v.clone(), b: BSequence::Constant };
            let m = measure_from_tree(tree, params)?;
            rows.push(DefectRow { p, depth, defect: conformality_defect(&m, map, t, p_tilde, a)?.defect });
        }
    }
    Ok(rows)
}
