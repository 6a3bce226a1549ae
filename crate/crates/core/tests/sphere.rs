use lyapspec::*;
use num_complex::Complex64;

#[test]
fn chordal_distance_to_infinity() {
    let z = SpherePoint::ZERO;
    assert!((z.chordal(&SpherePoint::Infinity) - 2.0).abs() < 1e-15);
    let one = SpherePoint::real(1.0);
    assert!((one.chordal(&SpherePoint::Infinity) - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(one.planar(&SpherePoint::Infinity), f64::INFINITY);
}

#[test]
fn chordal_is_invariant_under_inversion() {
    let a = SpherePoint::new(Complex64::new(0.3, -1.7));
    let b = SpherePoint::new(Complex64::new(-2.0, 0.4));
    let d1 = a.chordal(&b);
    let d2 = a.recip().chordal(&b.recip());
    assert!((d1 - d2).abs() < 1e-14);
}

#[test]
fn non_finite_becomes_infinity() {
    assert!(SpherePoint::new(Complex64::new(f64::NAN, 0.0)).is_infinite());
    assert!(SpherePoint::new(Complex64::new(f64::INFINITY, 1.0)).is_infinite());
}
