//! Running-maximum Pliss times against the direct double loop.

use lyapspec::hyperbolic::{pliss_times, OrbitAnalysis, PLISS_TOL};
use lyapspec::orbits::julia_sample;
use lyapspec::{NamedFamily, Region, SpherePoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` is a Pliss time when `a(n) - a(m) ≥ (n - m)χ` for every `m < n`.
fn direct_scan(log_derivs: &[f64], chi: f64) -> Vec<usize> {
    (1..log_derivs.len())
        .filter(|&n| (0..n).all(|m| log_derivs[n] - log_derivs[m] >= (n - m) as f64 * chi - PLISS_TOL))
        .collect()
}

#[test]
fn chebyshev_example() {
    let f = NamedFamily::Chebyshev.resolve().unwrap();
    let x = SpherePoint::real(2.0 * 1f64.cos());
    let times = pliss_times(&f, x, 30, 0.5).unwrap();
    let orbit = OrbitAnalysis::new(&f, x, 30, f.default_metric(), &Region::empty()).unwrap();
    assert!(!times.is_empty());
    assert_eq!(times, direct_scan(&orbit.log_derivs, 0.5));
}

#[test]
fn random_triples_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let families = [
        NamedFamily::Chebyshev,
        NamedFamily::Power { d: 2 },
        NamedFamily::Power { d: 3 },
        NamedFamily::Quadratic { c: Complex64::new(-1.0, 0.0) },
        NamedFamily::Quadratic { c: Complex64::new(-0.12, 0.74) },
        NamedFamily::Reciprocal { lambda: Complex64::new(4.0, 0.0), d: 2 },
    ];
    let mut checked = 0;
    while checked < 100 {
        let family = families[rng.gen_range(0..families.len())];
        let f = family.resolve().unwrap();
        let x = julia_sample(&f, SpherePoint::new(Complex64::new(0.3, 0.2)), 1, rng.gen()).unwrap()[0];
        let chi = rng.gen_range(-0.5..1.5);
        let Ok(orbit) = OrbitAnalysis::new(&f, x, 50, f.default_metric(), &Region::empty()) else { continue };
        assert_eq!(orbit.pliss_times(chi), direct_scan(&orbit.log_derivs, chi), "{family:?} x = {x} chi = {chi}");
        checked += 1;
    }
}
