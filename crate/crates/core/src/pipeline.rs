//! End-to-end runs shared by the command-line tool and the browser demo.
//!
//! Every run starts from a [`RunConfig`], resolves the map, detects the
//! exceptional set, estimates `χ_sup` and picks a basepoint; the individual
//! runs then build the backward trees they need. Results are plain
//! serializable structs; writing them out is left to the caller.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conformal::{
    conformality_defect, defect_sweep, mass_bounds_check, measure_from_tree, special_disk, Atom, BSequence,
    Defect, DefectRow, MassReport, MeasureParams, SpecialDisk, MIN_PRESSURE_GAP,
};
use crate::error::{Error, Result};
use crate::exceptional::{
    chi_ess_plus, chi_ess_table, degree_constant, detect_exceptional, DegreeConstant, EssentialExponent,
    ExceptionalSet, SearchBounds,
};
use crate::hyperbolic::{chi_plus, shadow_periodic, OrbitAnalysis, ShadowOptions, ShadowOutcome, ShadowRow};
use crate::map::{CriticalPoint, NamedFamily, RationalMap};
use crate::mapspec::MapSpec;
use crate::orbits::tree::SAFE_BETA;
use crate::orbits::{
    find_periodic_orbits, is_safe_point, julia_sample, BackwardTree, ExclusionMode, FixedPointCount, TreeOptions,
};
use crate::pressure::{chi_sup_estimate, curve_from_tree, t_grid, ChiSup, CurveDiagnostics, PressureCurve};
use crate::region::Region;
use crate::spectrum::{
    concavity_defect, exponent_range_report, legendre_f, spectrum_curve, transition_equivalence, ExponentRange,
    SpectrumCurve, TransitionEquivalence,
};
use crate::sphere::{Metric, SpherePoint};

/// Largest number of period-`n` points the orbit search is allowed to solve for.
const ORBIT_POINT_CAP: usize = 512;
const MAX_ORBIT_PERIOD: usize = 8;
const ORBIT_DEDUP_TOL: f64 = 1e-8;
/// Start of the backward iteration used to find a basepoint.
const SAMPLE_START: Complex64 = Complex64 { re: 0.31, im: 0.17 };
const BASEPOINT_CANDIDATES: usize = 32;
const CRITICAL_CLEARANCE: f64 = 1e-3;
/// Slack allowed above `α̃⁺` by the gap spot check.
pub const GAP_SLACK: f64 = 0.1;
/// Offset of `p` above the pressure when no `p` is given.
pub const DEFAULT_P_OFFSET: f64 = 0.05;
/// Depth difference between the two truncations compared for blow-up.
pub const BLOW_UP_STEP: usize = 4;
pub const BLOW_UP_OUTER: f64 = 0.1;
pub const BLOW_UP_INNER: f64 = 1e-6;
pub const DEFECT_DISKS: usize = 5;
pub const DEFECT_DISK_RADIUS: f64 = 0.05;
const DEFECT_ATTEMPTS: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapSpec,
    pub depth: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    /// Number of α samples of the spectrum.
    pub alpha_samples: usize,
    /// Radius of the neighbourhood `V` of the exceptional set.
    pub radius: f64,
    pub seed: u64,
    pub strict_exclusion: bool,
    /// Defaults to the map's own metric.
    pub metric: Option<Metric>,
    /// Defaults to a safe point sampled from the Julia set.
    pub basepoint: Option<SpherePoint>,
    /// Parameter of the measure run.
    pub t: f64,
    /// Defaults to the pressure at `t` plus [`DEFAULT_P_OFFSET`].
    pub p: Option<f64>,
    /// Rate of the Pliss run; defaults to the exponent of the orbit.
    pub chi: Option<f64>,
    /// Orbit length of the Pliss run.
    pub length: usize,
}

impl RunConfig {
    pub fn new(map: MapSpec) -> Self {
        RunConfig {
            map,
            depth: 14,
            t_min: -3.0,
            t_max: 2.0,
            t_step: 0.25,
            alpha_samples: 41,
            radius: 0.2,
            seed: 0,
            strict_exclusion: false,
            metric: None,
            basepoint: None,
            t: 1.0,
            p: None,
            chi: None,
            length: 50,
        }
    }

    pub fn t_grid(&self) -> Result<Vec<f64>> {
        t_grid(self.t_min, self.t_max, self.t_step)
    }

    pub fn mode(&self) -> ExclusionMode {
        if self.strict_exclusion {
            ExclusionMode::Strict
        } else {
            ExclusionMode::Terminal
        }
    }

    /// Checks everything that can be checked without numerics.
    pub fn validate(&self) -> Result<RationalMap> {
        let map = self.map.resolve()?;
        self.t_grid()?;
        if self.depth == 0 {
            return Err(Error::InvalidInput("depth must be positive".into()));
        }
        let needed = (map.degree() as f64).powi(self.depth as i32);
        let budget = crate::orbits::tree::DEFAULT_BUDGET;
        if needed > budget as f64 {
            return Err(Error::BudgetExceeded { needed: needed.min(u64::MAX as f64) as u64, budget });
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        if self.alpha_samples < 2 {
            return Err(Error::InvalidInput("at least two alpha samples are needed".into()));
        }
        if self.length == 0 {
            return Err(Error::InvalidInput("orbit length must be positive".into()));
        }
        if !self.t.is_finite() || self.p.is_some_and(|p| !p.is_finite()) || self.chi.is_some_and(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("t, p and chi must be finite".into()));
        }
        if self.basepoint.is_some_and(|z| map.critical_points().iter().any(|c| c.point.chordal(&z) < CRITICAL_CLEARANCE)) {
            return Err(Error::InvalidInput("basepoint is a critical point".into()));
        }
        Ok(map)
    }
}

/// Shared state of a run: the map, its exceptional set and a basepoint.
#[derive(Clone, Debug)]
pub struct Context {
    pub config: RunConfig,
    pub map: RationalMap,
    pub metric: Metric,
    pub sigma: ExceptionalSet,
    pub chi_sup: ChiSup,
    pub orbit_counts: Vec<FixedPointCount>,
    pub orbits_complete: bool,
    /// `B(Σ, radius)`, empty when Σ is.
    pub v: Region,
    pub basepoint: SpherePoint,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self> {
        let map = config.validate()?;
        let metric = config.metric.unwrap_or_else(|| map.default_metric());
        let sigma = detect_exceptional(&map, SearchBounds::default())?;
        let max_period = (1..=MAX_ORBIT_PERIOD)
            .take_while(|&n| map.degree().checked_pow(n as u32).is_some_and(|k| k <= ORBIT_POINT_CAP))
            .last()
            .unwrap_or(1);
        let search = find_periodic_orbits(&map, max_period, ORBIT_DEDUP_TOL)?;
        let chi_sup = chi_sup_estimate(&sigma, &search.orbits)?;
        let v = Region::around(&sigma.points, config.radius, metric);
        let basepoint = match config.basepoint {
            Some(z) => z,
            None => choose_basepoint(&map, &v, config.depth, config.seed)?,
        };
        Ok(Context {
            map,
            metric,
            sigma,
            chi_sup,
            orbit_counts: search.counts,
            orbits_complete: search.complete,
            v,
            basepoint,
            config,
        })
    }

    pub fn tree(&self, exclusion: Region, mode: ExclusionMode) -> Result<BackwardTree> {
        let opts = TreeOptions::new(self.metric).exclude(exclusion, mode);
        BackwardTree::build(&self.map, self.basepoint, self.config.depth, &opts)
    }

    pub fn pressure_curve(&self) -> Result<PressureCurve> {
        let tree = self.tree(self.v.clone(), self.config.mode())?;
        curve_from_tree(&tree, &self.config.t_grid()?, self.chi_sup.value)
    }
}

/// First safe point of a seeded backward-iteration sample that avoids `v`.
pub fn choose_basepoint(map: &RationalMap, v: &Region, depth: usize, seed: u64) -> Result<SpherePoint> {
    let candidates = julia_sample(map, SpherePoint::new(SAMPLE_START), BASEPOINT_CANDIDATES, seed)?;
    let mut last = None;
    for z in candidates {
        if v.contains(&z) || map.critical_points().iter().any(|c| c.point.chordal(&z) < CRITICAL_CLEARANCE) {
            continue;
        }
        let report = is_safe_point(map, z, depth.max(1), SAFE_BETA);
        if report.safe {
            return Ok(z);
        }
        last = Some(Error::UnsafeBasepoint { distance: report.min_distance, step: report.worst_step });
    }
    Err(last.unwrap_or(Error::EmptySample))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub map: MapSpec,
    pub degree: usize,
    pub metric: Metric,
    pub critical_points: Vec<CriticalPoint>,
    pub exceptional: ExceptionalSet,
    pub chi_ess: Vec<EssentialExponent>,
    pub chi_ess_plus: Option<f64>,
    /// Largest segment exponent over branches avoiding `V`, a sampled stand-in for `α̃⁺`.
    pub alpha_tilde_plus_estimate: f64,
    pub degree_constant: DegreeConstant,
    pub chi_sup: ChiSup,
    pub orbit_counts: Vec<FixedPointCount>,
    pub orbits_complete: bool,
}

pub fn analyze(ctx: &Context) -> Result<AnalyzeReport> {
    let (chi_ess, chi_ess_plus) = if ctx.sigma.is_empty() {
        (Vec::new(), None)
    } else {
        (chi_ess_table(&ctx.map, &ctx.sigma)?, Some(chi_ess_plus(&ctx.map, &ctx.sigma)?))
    };
    let tree = ctx.tree(ctx.v.clone(), ExclusionMode::Strict)?;
    let depth = tree.depth;
    let alpha_tilde = tree
        .admissible(depth)
        .map(|x| x.log_deriv / depth as f64)
        .reduce(f64::max)
        .ok_or(Error::EmptyTree)?;
    // The inequality only says something when Σ is non-empty.
    let exponents = (!ctx.sigma.is_empty()).then_some((ctx.chi_sup.value, alpha_tilde));
    let dc = degree_constant(&ctx.map, &ctx.sigma, exponents)?;
    Ok(AnalyzeReport {
        map: ctx.config.map.clone(),
        degree: ctx.map.degree(),
        metric: ctx.metric,
        critical_points: ctx.map.critical_points().to_vec(),
        exceptional: ctx.sigma.clone(),
        chi_ess,
        chi_ess_plus,
        alpha_tilde_plus_estimate: alpha_tilde,
        degree_constant: dc,
        chi_sup: ctx.chi_sup.clone(),
        orbit_counts: ctx.orbit_counts.clone(),
        orbits_complete: ctx.orbits_complete,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureSummary {
    pub basepoint: SpherePoint,
    #[serde(rename = "V")]
    pub v: Region,
    pub depth: usize,
    pub mode: ExclusionMode,
    pub metric: Metric,
    pub chi_sup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_minus: Option<f64>,
    pub max_convergence: f64,
    pub diagnostics: CurveDiagnostics,
}

pub fn pressure(ctx: &Context) -> Result<(PressureCurve, PressureSummary)> {
    let curve = ctx.pressure_curve()?;
    let summary = PressureSummary {
        basepoint: curve.basepoint,
        v: curve.exclusion.clone(),
        depth: curve.depth,
        mode: curve.mode,
        metric: ctx.metric,
        chi_sup: curve.chi_sup,
        t_minus: curve.t_minus,
        max_convergence: curve.max_convergence(),
        diagnostics: curve.diagnostics.clone(),
    };
    Ok((curve, summary))
}

/// Known single-point spectrum `(α, F)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub alpha: f64,
    pub f: f64,
    /// `F̃(α)` from the sampled curve, absent when α lies outside it.
    pub computed: Option<f64>,
    pub error: Option<f64>,
}

/// Closed-form spectra: `z^d` and `z^2 - 2` have the single point `(log d, 1)`.
pub fn closed_form_alpha(spec: &MapSpec) -> Option<f64> {
    let two = 2f64.ln();
    match spec {
        MapSpec::Family(NamedFamily::Power { d }) => Some((*d as f64).ln()),
        MapSpec::Family(NamedFamily::Chebyshev) => Some(two),
        MapSpec::Family(NamedFamily::Quadratic { c }) if *c == Complex64::new(0.0, 0.0) => Some(two),
        MapSpec::Family(NamedFamily::Quadratic { c }) if *c == Complex64::new(-2.0, 0.0) => Some(two),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub depth: usize,
    pub samples: usize,
    pub max_exponent: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAudit {
    pub no_closed_form: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedForm>,
    pub range: ExponentRange,
    pub degenerate: bool,
    /// Sampled pressure is non-increasing in `t`.
    pub pressure_monotone: bool,
    pub concavity_defect: f64,
    pub concave: bool,
    pub transition: TransitionEquivalence,
    pub gap: GapCheck,
    pub out_of_range: Vec<f64>,
}

/// Tolerance on the concavity of `α F̃(α)` and on monotonicity of the pressure.
const SHAPE_TOL: f64 = 1e-6;

pub fn spectrum(ctx: &Context) -> Result<(SpectrumCurve, SpectrumAudit)> {
    let curve = ctx.pressure_curve()?;
    let range = exponent_range_report(&curve)?;
    let spec = spectrum_curve(&curve, &range, ctx.config.alpha_samples)?;
    let closed_form = match closed_form_alpha(&ctx.config.map) {
        Some(alpha) => {
            let computed = legendre_f(&curve, alpha)?.value();
            Some(ClosedForm { alpha, f: 1.0, computed, error: computed.map(|c| (c - 1.0).abs()) })
        }
        None => None,
    };
    // Segments starting outside V, as in χ⁺(J∖V).
    let segments = ctx.tree(ctx.v.clone(), ExclusionMode::Terminal)?;
    let depth = segments.depth;
    let exps: Vec<f64> = segments.admissible(depth).map(|x| x.log_deriv / depth as f64).collect();
    let max_exponent = exps.iter().copied().reduce(f64::max).ok_or(Error::EmptySample)?;
    let bound = range.alpha_tilde_plus.slope + GAP_SLACK;
    let gap = GapCheck { depth, samples: exps.len(), max_exponent, bound, holds: max_exponent <= bound };
    let defect = concavity_defect(&spec);
    let audit = SpectrumAudit {
        no_closed_form: closed_form.is_none(),
        closed_form,
        degenerate: range.is_degenerate(),
        pressure_monotone: curve.hidden.windows(2).all(|w| w[1] <= w[0] + SHAPE_TOL),
        concavity_defect: defect,
        concave: defect <= SHAPE_TOL,
        transition: transition_equivalence(&curve, &range, !ctx.sigma.is_empty()),
        gap,
        out_of_range: spec.out_of_range.clone(),
        range,
    };
    Ok((spec, audit))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub center: SpherePoint,
    pub inner: f64,
    pub outer: f64,
    pub depth_low: usize,
    pub depth_high: usize,
    pub mass_low: f64,
    pub mass_high: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskDefect {
    pub disk: SpecialDisk,
    pub defect: Defect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub t: f64,
    pub p: f64,
    pub p_tilde: f64,
    pub depth: usize,
    pub basepoint: SpherePoint,
    #[serde(rename = "V")]
    pub v: Region,
    #[serde(rename = "W")]
    pub w: Region,
    pub log_normalizer: f64,
    pub total_mass: f64,
    pub atoms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_bounds: Option<MassReport>,
    pub blow_up: Vec<BlowUp>,
    pub defects: Vec<DiskDefect>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureRun {
    pub summary: MeasureSummary,
    pub atoms: Vec<Atom>,
    pub sweep: Vec<DefectRow>,
}

/// Patterson–Sullivan measure at `config.t` with diagnostics.
///
/// `P̃` is the hidden tree pressure at `t`; `p` defaults to the full pressure
/// `max(P̃, -tχ_sup)` plus [`DEFAULT_P_OFFSET`]. `W` is the tiny ball
/// `B(Σ, 1e-6)`, so the measure sees everything except the exceptional points.
pub fn measure(ctx: &Context) -> Result<MeasureRun> {
    let cfg = &ctx.config;
    let t = cfg.t;
    let tree = ctx.tree(Region::empty(), ExclusionMode::Terminal)?;
    let hidden_tree = ctx.tree(ctx.v.clone(), cfg.mode())?;
    let p_tilde = crate::pressure::pressure_from_tree(&hidden_tree, t)?.value;
    let full = p_tilde.max(-t * ctx.chi_sup.value);
    let p = cfg.p.unwrap_or(full + DEFAULT_P_OFFSET);
    if !(p - p_tilde >= MIN_PRESSURE_GAP) {
        return Err(Error::PressureGapTooSmall { gap: p - p_tilde });
    }
    let w = Region::around(&ctx.sigma.points, BLOW_UP_INNER, ctx.metric);
    let params = |depth: usize, w: &Region| MeasureParams { t, p, depth, w: w.clone(), v: ctx.v.clone(), b: BSequence::Constant };
    let mu = measure_from_tree(&tree, params(cfg.depth, &w))?;

    let mass_bounds = if ctx.sigma.is_empty() {
        None
    } else {
        let family = [1.0, 0.5, 0.25]
            .iter()
            .map(|&k| measure_from_tree(&tree, params(cfg.depth, &Region::around(&ctx.sigma.points, k * cfg.radius, ctx.metric))))
            .collect::<Result<Vec<_>>>()?;
        Some(mass_bounds_check(&family))
    };

    let mut blow_up = Vec::new();
    if cfg.depth > BLOW_UP_STEP {
        let low = measure_from_tree(&tree, params(cfg.depth - BLOW_UP_STEP, &w))?;
        for root in ctx.sigma.cycle_roots.iter().filter(|r| r.steps == 0) {
            let mass_low = low.mass_in_annulus(root.point, BLOW_UP_INNER, BLOW_UP_OUTER);
            let mass_high = mu.mass_in_annulus(root.point, BLOW_UP_INNER, BLOW_UP_OUTER);
            blow_up.push(BlowUp {
                center: root.point,
                inner: BLOW_UP_INNER,
                outer: BLOW_UP_OUTER,
                depth_low: cfg.depth - BLOW_UP_STEP,
                depth_high: cfg.depth,
                mass_low,
                mass_high,
                ratio: mass_high / mass_low,
            });
        }
    }

    let disks = random_special_disks(ctx, &tree, &w, DEFECT_DISKS)?;
    let defects = disks
        .iter()
        .map(|d| Ok(DiskDefect { disk: d.clone(), defect: conformality_defect(&mu, &ctx.map, t, p_tilde, d)? }))
        .collect::<Result<Vec<_>>>()?;
    let sweep = match disks.first() {
        Some(d) => {
            let ps: Vec<f64> = [0.2, 0.1, 0.05, 0.02].iter().map(|g| p_tilde + g).filter(|q| *q <= p).collect();
            let ps = if ps.is_empty() { vec![p] } else { ps };
            let depths: Vec<usize> = [cfg.depth.saturating_sub(BLOW_UP_STEP), cfg.depth].into_iter().filter(|&n| n > 0).collect();
            defect_sweep(&ctx.map, &tree, t, p_tilde, &ps, &depths, &w, &ctx.v, d)?
        }
        None => Vec::new(),
    };

    let summary = MeasureSummary {
        t,
        p,
        p_tilde,
        depth: cfg.depth,
        basepoint: ctx.basepoint,
        v: ctx.v.clone(),
        w,
        log_normalizer: mu.log_normalizer,
        total_mass: mu.total_mass(),
        atoms: mu.atoms.len(),
        mass_bounds,
        blow_up,
        defects,
    };
    Ok(MeasureRun { summary, atoms: mu.atoms, sweep })
}

/// Up to `count` special disks centred at seeded random tree nodes.
fn random_special_disks(ctx: &Context, tree: &BackwardTree, w: &Region, count: usize) -> Result<Vec<SpecialDisk>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let pool: Vec<SpherePoint> = tree.leaves().iter().map(|x| x.point).filter(|z| !z.is_infinite()).collect();
    let mut out: Vec<SpecialDisk> = Vec::new();
    for _ in 0..DEFECT_ATTEMPTS {
        if out.len() == count {
            break;
        }
        let Some(&center) = pool.choose(&mut rng) else { break };
        if out.iter().any(|d| d.ball.center.distance(&center, ctx.metric) < 2.0 * DEFECT_DISK_RADIUS) {
            continue;
        }
        match special_disk(&ctx.map, center, DEFECT_DISK_RADIUS, ctx.metric, w) {
            Ok(d) => out.push(d),
            Err(Error::NotSpecial(_) | Error::RegionTouchesExcluded(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlissRow {
    pub n: usize,
    /// `log |(f^n)'(x)|`.
    pub a: f64,
    pub hyperbolic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlissSummary {
    pub basepoint: SpherePoint,
    pub length: usize,
    pub chi: f64,
    pub times: Vec<usize>,
    pub exponent: f64,
    pub chi_plus: f64,
    pub shadow: ShadowOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlissRun {
    pub summary: PlissSummary,
    pub rows: Vec<PlissRow>,
    pub shadow_table: Vec<ShadowRow>,
}

/// Pliss times of the basepoint orbit and an attempt to shadow it by a periodic orbit.
pub fn pliss(ctx: &Context) -> Result<PlissRun> {
    let cfg = &ctx.config;
    let orbit = OrbitAnalysis::new(&ctx.map, ctx.basepoint, cfg.length, ctx.metric, &ctx.v)?;
    let exponent = orbit.exponent(cfg.length);
    let chi = cfg.chi.unwrap_or(exponent);
    let times = orbit.pliss_times(chi);
    let rows = (1..=cfg.length)
        .map(|n| PlissRow { n, a: orbit.log_derivs[n], hyperbolic: times.binary_search(&n).is_ok() })
        .collect();
    let cp = chi_plus(&ctx.map, ctx.basepoint, &ctx.v, cfg.depth, 1 << 12)?;
    let shadow = shadow_periodic(&ctx.map, ctx.basepoint, cfg.length, &ctx.v, &ShadowOptions::new(0.05, cp.value))?;
    let shadow_table = match &shadow {
        ShadowOutcome::Shadowed(r) => r.table.clone(),
        ShadowOutcome::NoShadow(_) => Vec::new(),
    };
    Ok(PlissRun {
        summary: PlissSummary { basepoint: ctx.basepoint, length: cfg.length, chi, times, exponent, chi_plus: cp.value, shadow },
        rows,
        shadow_table,
    })
}
