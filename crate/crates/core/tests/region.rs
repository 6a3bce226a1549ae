use lyapspec::*;

#[test]
fn membership_and_subsets() {
    let v = Region::around(&[SpherePoint::real(2.0), SpherePoint::real(-2.0)], 0.3, Metric::Planar);
    assert!(v.contains(&SpherePoint::real(1.8)));
    assert!(!v.contains(&SpherePoint::real(1.0)));
    assert!(v.scaled(0.5).is_subset_of(&v));
    assert!(!v.is_subset_of(&v.scaled(0.5)));
    assert!(Region::empty().is_subset_of(&Region::empty()));
    assert!(!Region::empty().contains(&SpherePoint::ZERO));
}
