use lyapspec::*;
use num_complex::Complex64;
use lyapspec::orbits::periodic::*;
use lyapspec::map::NamedFamily;
use std::f64::consts::LN_2;

fn cheb() -> RationalMap {
    NamedFamily::Chebyshev.resolve().unwrap()
}

#[test]
fn chebyshev_cycles_of_period_two() {
    let f = cheb();
    let s = find_periodic_orbits(&f, 2, 1e-9).unwrap();
    assert!(s.complete, "{:?}", s.counts);
    let fixed: Vec<_> = s.exact_period(1).collect();
    // 2, -1 and the superattracting fixed point at infinity
    assert_eq!(fixed.len(), 3);
    let two = s.cycle_containing(&SpherePoint::real(2.0), 1e-9).unwrap();
    assert!((two.multiplier - Complex64::new(4.0, 0.0)).norm() < 1e-9);
    let m1 = s.cycle_containing(&SpherePoint::real(-1.0), 1e-9).unwrap();
    assert!((m1.multiplier - Complex64::new(-2.0, 0.0)).norm() < 1e-9);
    let two_cycles: Vec<_> = s.exact_period(2).collect();
    assert_eq!(two_cycles.len(), 1);
    let c = two_cycles[0];
    let s5 = 5f64.sqrt();
    assert!(c.contains(&SpherePoint::real((-1.0 + s5) / 2.0), 1e-9));
    assert!(c.contains(&SpherePoint::real((-1.0 - s5) / 2.0), 1e-9));
    assert!((c.multiplier - Complex64::new(-4.0, 0.0)).norm() < 1e-8);
    assert!((c.exponent - LN_2).abs() < 1e-9);
}

#[test]
fn squaring_map_fixed_points() {
    let f = NamedFamily::Power { d: 2 }.resolve().unwrap();
    let s = find_periodic_orbits(&f, 1, 1e-9).unwrap();
    let fixed: Vec<_> = s.exact_period(1).collect();
    assert_eq!(fixed.len(), 3);
    let zero = s.cycle_containing(&SpherePoint::ZERO, 1e-9).unwrap();
    assert_eq!(zero.class, CycleClass::Attracting);
    let inf = s.cycle_containing(&SpherePoint::Infinity, 1e-9).unwrap();
    assert_eq!(inf.class, CycleClass::Attracting);
    let one = s.cycle_containing(&SpherePoint::real(1.0), 1e-9).unwrap();
    assert!((one.multiplier - Complex64::new(2.0, 0.0)).norm() < 1e-9);
    assert_eq!(one.class, CycleClass::Expanding);
}

#[test]
fn rational_map_counts_are_complete() {
    let f = NamedFamily::Reciprocal { lambda: Complex64::new(4.0, 0.0), d: 2 }.resolve().unwrap();
    let s = find_periodic_orbits(&f, 4, 1e-9).unwrap();
    assert!(s.complete, "{:?}", s.counts);
    let one = s.cycle_containing(&SpherePoint::real(1.0), 1e-9).unwrap();
    assert!((one.multiplier - Complex64::new(-4.0, 0.0)).norm() < 1e-8);
}

#[test]
fn enumeration_counts_for_period_six() {
    for f in [cheb(), NamedFamily::Quadratic { c: Complex64::new(-1.0, 0.0) }.resolve().unwrap()] {
        let s = find_periodic_orbits(&f, 6, 1e-9).unwrap();
        for c in &s.counts {
            assert!(c.found as f64 >= 0.95 * c.expected as f64, "{c:?}");
        }
    }
}

#[test]
fn multiplier_matches_derivative_product() {
    let f = NamedFamily::Quadratic { c: Complex64::new(-0.12, 0.74) }.resolve().unwrap();
    let s = find_periodic_orbits(&f, 5, 1e-9).unwrap();
    for o in &s.orbits {
        if o.points.iter().any(|p| p.is_infinite()) {
            continue;
        }
        let prod = o.points.iter().fold(Complex64::new(1.0, 0.0), |acc, p| acc * f.derivative(*p));
        assert!((prod - o.multiplier).norm() <= 1e-8 * (1.0 + prod.norm()), "{o:?}");
        let sum: f64 = o.points.iter().map(|p| f.log_derivative(*p, lyapspec::Metric::Planar)).sum();
        assert!((sum / o.period as f64 - o.exponent).abs() < 1e-9);
    }
}

#[test]
fn closing_a_pseudo_orbit() {
    // Targets near the 2-cycle of z^2 - 2.
    let f = cheb();
    let s5 = 5f64.sqrt();
    let targets = [SpherePoint::real((-1.0 + s5) / 2.0 + 0.01), SpherePoint::real((-1.0 - s5) / 2.0 - 0.02)];
    let o = close_pseudo_orbit(&f, &targets, 200).unwrap();
    assert_eq!(o.period, 2);
    assert!((o.exponent - LN_2).abs() < 1e-9);
}
