use lyapspec::*;
use lyapspec::exceptional::*;
use lyapspec::map::NamedFamily;
use std::f64::consts::LN_2;

fn detect(f: &NamedFamily) -> (RationalMap, ExceptionalSet) {
    let map = f.resolve().unwrap();
    let sigma = detect_exceptional(&map, SearchBounds::default()).unwrap();
    (map, sigma)
}

#[test]
fn chebyshev_set_and_exponents() {
    let (map, sigma) = detect(&NamedFamily::Chebyshev);
    assert_eq!(sigma.points.len(), 2);
    assert!(sigma.contains(&SpherePoint::real(2.0)) && sigma.contains(&SpherePoint::real(-2.0)));
    assert_eq!(sigma.sigma_plus.len(), 2);
    assert!(sigma.sigma_zero.is_empty());
    assert!(sigma.certificate.iter().all(|a| a.passes() && a.preimages.len() == 2));
    let e = chi_ess(&map, &sigma, SpherePoint::ZERO).unwrap();
    assert_eq!((e.k, e.local_degree), (2, 2));
    assert!((e.chi_ess - LN_2).abs() < 1e-9);
    assert!((chi_ess_plus(&map, &sigma).unwrap() - LN_2).abs() < 1e-9);
    let dc = degree_constant(&map, &sigma, Some((4f64.ln(), LN_2))).unwrap();
    assert_eq!(dc.d, 2);
    assert_eq!(dc.inequality_holds, Some(true));
    assert!(dc.slack.unwrap().abs() < 1e-9);
}

#[test]
fn reciprocal_family_contains_zero_and_one() {
    for lambda in [3.0, 4.0].map(num_complex::Complex64::from) {
        let (map, sigma) = detect(&NamedFamily::Reciprocal { lambda, d: 2 });
        assert!(sigma.contains(&SpherePoint::ZERO));
        assert!(sigma.contains(&SpherePoint::real(1.0)));
        let table = chi_ess_table(&map, &sigma).unwrap();
        assert!(!table.is_empty());
    }
    // λ = 3: Σ = {0, 1} reached from the critical point at infinity.
    let (map, sigma) = detect(&NamedFamily::Reciprocal { lambda: 3.0.into(), d: 2 });
    assert_eq!(sigma.points.len(), 2);
    let e = chi_ess(&map, &sigma, SpherePoint::Infinity).unwrap();
    assert_eq!((e.k, e.local_degree), (2, 2));
    assert!((e.chi_ess - 3f64.ln() / 2.0).abs() < 1e-9);
    // λ = 4: f = (2z - 1)^{-2}, so infinity joins Σ and 1/2 is the critical entry point.
    let (map, sigma) = detect(&NamedFamily::Reciprocal { lambda: 4.0.into(), d: 2 });
    assert_eq!(sigma.points.len(), 3);
    assert!(sigma.contains(&SpherePoint::Infinity));
    assert_eq!(chi_ess(&map, &sigma, SpherePoint::Infinity), Err(Error::NotAnExceptionalPreimage));
    let e = chi_ess(&map, &sigma, SpherePoint::real(0.5)).unwrap();
    assert_eq!((e.k, e.local_degree), (3, 4));
    assert!((e.chi_ess - LN_2 / 2.0).abs() < 1e-9);
    assert_eq!(degree_constant(&map, &sigma, None).unwrap().d, 4);
}

#[test]
fn non_exceptional_maps() {
    for f in [NamedFamily::Power { d: 2 }, NamedFamily::Quadratic { c: num_complex::Complex64::new(-1.0, 0.0) }] {
        let (map, sigma) = detect(&f);
        assert!(sigma.is_empty(), "{f:?}: {:?}", sigma.points);
        assert_eq!(chi_ess_plus(&map, &sigma), Err(Error::MapNotExceptional));
        assert_eq!(degree_constant(&map, &sigma, None).unwrap().d, 1);
    }
    let (map, sigma) = detect(&NamedFamily::Power { d: 2 });
    assert_eq!(chi_ess(&map, &sigma, SpherePoint::ZERO), Err(Error::NotAnExceptionalPreimage));
}
