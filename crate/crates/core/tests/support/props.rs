#![allow(dead_code)]

//! Property checks shared by the property suite and the acceptance run.

use lyapspec::conformal::{measure_from_tree, AtomicMeasure, BSequence, MeasureParams};
use lyapspec::mapspec::MapSpec;
use lyapspec::orbits::{julia_sample, BackwardTree, ExclusionMode, TreeOptions};
use lyapspec::pipeline::{self, Context, RunConfig};
use lyapspec::pressure::{curve_from_tree, pressure_from_tree, t_grid};
use lyapspec::spectrum::{concavity_defect, exponent_range_report, spectrum_curve};
use lyapspec::{Metric, NamedFamily, RationalMap, Region, SpherePoint};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = Result<(), TestCaseError>;

pub fn family() -> impl Strategy<Value = NamedFamily> {
    prop_oneof![
        (2usize..=4).prop_map(|d| NamedFamily::Power { d }),
        Just(NamedFamily::Chebyshev),
        (-1.5f64..0.3, -0.8f64..0.8).prop_map(|(re, im)| NamedFamily::Quadratic { c: Complex64::new(re, im) }),
        (1.5f64..5.0, -1.0f64..1.0, 2usize..=3)
            .prop_map(|(re, im, d)| NamedFamily::Reciprocal { lambda: Complex64::new(re, im), d }),
    ]
}

pub fn point() -> impl Strategy<Value = SpherePoint> {
    prop_oneof![
        9 => (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| SpherePoint::new(Complex64::new(re, im))),
        1 => Just(SpherePoint::Infinity),
    ]
}

/// `z ↦ 1/f(1/z)`: reversing both coefficient lists after padding to `d + 1`.
fn inverted(f: &RationalMap) -> RationalMap {
    let d = f.degree();
    let pad = |c: &[Complex64]| {
        let mut v = c.to_vec();
        v.resize(d + 1, Complex64::new(0.0, 0.0));
        v.reverse();
        v
    };
    RationalMap::new(pad(f.denominator()), pad(f.numerator())).unwrap()
}

fn julia_point(f: &RationalMap, seed: u64) -> SpherePoint {
    julia_sample(f, SpherePoint::new(Complex64::new(0.31, 0.17)), 1, seed).unwrap()[0]
}

fn chebyshev_sigma() -> [SpherePoint; 2] {
    [SpherePoint::real(2.0), SpherePoint::real(-2.0)]
}

pub fn preimages_round_trip(fam: NamedFamily, w: SpherePoint) -> Check {
    let f = fam.resolve().unwrap();
    let pre = f.preimages(w).unwrap();
    prop_assert_eq!(pre.len(), f.degree());
    for x in pre {
        prop_assert!(f.eval(x).chordal(&w) < 1e-7, "f({}) = {} vs {}", x, f.eval(x), w);
    }
    Ok(())
}

pub fn chart_consistency_under_inversion(fam: NamedFamily, z: SpherePoint) -> Check {
    let f = fam.resolve().unwrap();
    let g = inverted(&f);
    prop_assert!(g.eval(z.recip()).chordal(&f.eval(z).recip()) < 1e-9);
    let (a, b) = (f.log_derivative(z, Metric::Spherical), g.log_derivative(z.recip(), Metric::Spherical));
    if a.is_finite() && a > -20.0 {
        prop_assert!((a - b).abs() < 1e-7 * (1.0 + a.abs()), "{} vs {}", a, b);
    }
    Ok(())
}

pub fn multiplier_chain_rule(fam: NamedFamily, seed: u64, n: usize) -> Check {
    let f = fam.resolve().unwrap();
    let z = julia_point(&f, seed);
    for metric in [Metric::Spherical, f.default_metric()] {
        let mut w = z;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += f.log_derivative(w, metric);
            w = f.eval(w);
        }
        let direct = f.log_derivative_iterate(z, n, metric);
        if sum.is_finite() {
            prop_assert!((direct - sum).abs() < 1e-9 * (1.0 + sum.abs()));
        }
    }
    Ok(())
}

pub fn exclusion_is_monotone(seed: u64, r: f64, t: f64) -> Check {
    let f = NamedFamily::Chebyshev.resolve().unwrap();
    let z = julia_point(&f, seed);
    let sigma = chebyshev_sigma();
    let small = Region::around(&sigma, r / 2.0, Metric::Planar);
    let large = Region::around(&sigma, r, Metric::Planar);
    prop_assume!(!large.contains(&z));
    let tree = |v: &Region, mode| {
        BackwardTree::build(&f, z, 8, &TreeOptions::for_map(&f).exclude(v.clone(), mode).unchecked()).unwrap()
    };
    let none = tree(&Region::empty(), ExclusionMode::Terminal);
    let (ts, tl) = (tree(&small, ExclusionMode::Terminal), tree(&large, ExclusionMode::Terminal));
    let (ss, sl) = (tree(&small, ExclusionMode::Strict), tree(&large, ExclusionMode::Strict));
    for n in 1..=8 {
        let z = |tr: &BackwardTree| tr.log_partition(n, t);
        prop_assert!(z(&tl) <= z(&ts) + 1e-12);
        prop_assert!(z(&ts) <= z(&none) + 1e-12);
        prop_assert!(z(&sl) <= z(&ss) + 1e-12);
        prop_assert!(z(&sl) <= z(&tl) + 1e-12);
        prop_assert!(z(&ss) <= z(&ts) + 1e-12);
    }
    Ok(())
}

pub fn pressure_curve_is_convex(fam: NamedFamily, seed: u64, step: f64) -> Check {
    let f = fam.resolve().unwrap();
    let z = julia_point(&f, seed);
    let tree = BackwardTree::build(&f, z, 6, &TreeOptions::for_map(&f).unchecked()).unwrap();
    let grid = t_grid(-3.0, 2.0, step).unwrap();
    let p: Vec<f64> = grid.iter().map(|&t| pressure_from_tree(&tree, t).unwrap().value).collect();
    for i in 1..p.len() - 1 {
        let second = p[i + 1] - 2.0 * p[i] + p[i - 1];
        prop_assert!(second >= -1e-9 * (1.0 + p[i].abs()), "t = {} second difference {}", grid[i], second);
    }
    Ok(())
}

pub fn alpha_times_spectrum_is_concave(fam: NamedFamily, seed: u64) -> Check {
    let f = fam.resolve().unwrap();
    let z = julia_point(&f, seed);
    let tree = BackwardTree::build(&f, z, 8, &TreeOptions::for_map(&f).unchecked()).unwrap();
    let curve = curve_from_tree(&tree, &t_grid(-3.0, 2.0, 0.25).unwrap(), 0.0).unwrap();
    let range = exponent_range_report(&curve).unwrap();
    let spec = spectrum_curve(&curve, &range, 25).unwrap();
    prop_assert!(concavity_defect(&spec) <= 1e-6, "defect {}", concavity_defect(&spec));
    Ok(())
}

pub fn restriction_identity_atomwise(seed: u64, r: f64, k: f64, t: f64) -> Check {
    let f = NamedFamily::Chebyshev.resolve().unwrap();
    let z = julia_point(&f, seed);
    let sigma = chebyshev_sigma();
    let v = Region::around(&sigma, r, Metric::Planar);
    prop_assume!(!v.contains(&z));
    let tree = BackwardTree::build(&f, z, 9, &TreeOptions::for_map(&f).unchecked()).unwrap();
    let p = 2.0 - t;
    let measure = |w: Region| {
        measure_from_tree(&tree, MeasureParams { t, p, depth: 9, w, v: v.clone(), b: BSequence::Constant }).unwrap()
    };
    let w = Region::around(&sigma, r, Metric::Planar);
    let w_small = Region::around(&sigma, k * r, Metric::Planar);
    let (mu, mu_small) = (measure(w.clone()), measure(w_small));
    prop_assert!((mu.total_mass() - 1.0).abs() < 1e-9);
    prop_assert_eq!(mu.log_normalizer, mu_small.log_normalizer);
    let outside = |m: &AtomicMeasure| -> Vec<(SpherePoint, f64, usize)> {
        m.atoms.iter().filter(|a| w.margin(&a.point) > 0.0).map(|a| (a.point, a.weight, a.n)).collect()
    };
    prop_assert_eq!(outside(&mu), outside(&mu_small));
    Ok(())
}

pub fn fixed_seeds_are_deterministic(seed: u64, fam: NamedFamily) -> Check {
    let f = fam.resolve().unwrap();
    let a = julia_sample(&f, SpherePoint::new(Complex64::new(0.31, 0.17)), 64, seed).unwrap();
    let b = julia_sample(&f, SpherePoint::new(Complex64::new(0.31, 0.17)), 64, seed).unwrap();
    prop_assert_eq!(a, b);

    let mut cfg = RunConfig::new(MapSpec::Family(fam));
    cfg.depth = 6;
    cfg.seed = seed;
    let run = || Context::new(cfg.clone()).and_then(|ctx| pipeline::pressure(&ctx));
    match (run(), run()) {
        (Ok((c1, s1)), Ok((c2, s2))) => {
            prop_assert_eq!(c1, c2);
            prop_assert_eq!(s1, s2);
        }
        (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
        (r1, r2) => prop_assert!(false, "runs disagree: {:?} vs {:?}", r1.is_ok(), r2.is_ok()),
    }
    Ok(())
}
