//! Rational maps of the Riemann sphere: evaluation in charts, derivatives,
//! critical points and preimages.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::sphere::{dedup_points, Metric, SpherePoint};

const CRITICAL_TOL: f64 = 1e-7;
const PREIMAGE_RESIDUAL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub point: SpherePoint,
    pub local_degree: usize,
}

/// `f = num / den` with coprime numerator and denominator, both stored with
/// `degree + 1` ascending coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalMap {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
    degree: usize,
    critical: Vec<CriticalPoint>,
    polynomial: bool,
}

/// Value and chart derivative of `f` at a point, together with the chart
/// bookkeeping needed to convert the derivative to either metric.
#[derive(Clone, Copy, Debug)]
pub struct ChartEval {
    pub value: SpherePoint,
    /// Input chart coordinate (`z` or `1/z`).
    pub input: Complex64,
    pub input_inverted: bool,
    /// Output chart coordinate (`f` or `1/f`).
    pub output: Complex64,
    pub output_inverted: bool,
    /// Derivative of the output coordinate with respect to the input coordinate.
    pub derivative: Complex64,
}

impl ChartEval {
    /// Logarithm of the spherical derivative `|f'(z)|(1+|z|^2)/(1+|f(z)|^2)`.
    pub fn log_spherical(&self) -> f64 {
        self.derivative.norm().ln() + self.input.norm_sqr().ln_1p() - self.output.norm_sqr().ln_1p()
    }

    /// Logarithm of `|f'(z)|`; falls back to the spherical value where the
    /// planar derivative is undefined (`z = ∞` or `f(z) = ∞`).
    pub fn log_planar(&self) -> f64 {
        let mut v = self.derivative.norm().ln();
        if self.input_inverted {
            v += 2.0 * self.input.norm().ln();
        }
        if self.output_inverted {
            v -= 2.0 * self.output.norm().ln();
        }
        if v.is_nan() {
            self.log_spherical()
        } else {
            v
        }
    }

    /// Complex derivative `f'(z)` in the plane (may be infinite or NaN at ∞).
    pub fn planar_derivative(&self) -> Complex64 {
        let mut d = self.derivative;
        if self.input_inverted {
            d *= -(self.input * self.input);
        }
        if self.output_inverted {
            d *= -(self.output * self.output).inv();
        }
        d
    }
}

fn trim(mut v: Vec<Complex64>) -> Vec<Complex64> {
    while v.len() > 1 && v.last().is_some_and(|c| c.norm_sqr() == 0.0) {
        v.pop();
    }
    v
}

fn pad(mut v: Vec<Complex64>, len: usize) -> Vec<Complex64> {
    v.resize(len, Complex64::new(0.0, 0.0));
    v
}

impl RationalMap {
    /// Builds `num/den` from ascending coefficient lists.
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidMap("non-finite coefficient".into()));
        }
        let num = trim(if num.is_empty() { vec![Complex64::new(0.0, 0.0)] } else { num });
        let den = trim(if den.is_empty() { vec![Complex64::new(0.0, 0.0)] } else { den });
        let dn = poly::effective_degree(&num, 0.0);
        let dd = poly::effective_degree(&den, 0.0);
        let (dn, dd) = match (dn, dd) {
            (Some(a), Some(b)) => (a, b),
            (_, None) => return Err(Error::InvalidMap("denominator is zero".into())),
            (None, _) => return Err(Error::InvalidMap("numerator is zero".into())),
        };
        let degree = dn.max(dd);
        if degree < 2 {
            return Err(Error::InvalidMap(format!("degree {degree} < 2")));
        }
        // Common roots: test the roots of the lower-degree factor against the other.
        let (small, big) = if dd <= dn { (&den, &num) } else { (&num, &den) };
        if small.len() > 1 {
            let solve = poly::roots(small);
            for r in solve.roots {
                let scale: f64 = big.iter().rev().fold(0.0, |acc, c| acc * r.norm() + c.norm());
                if poly::eval(big, r).norm() <= 1e-10 * scale.max(1e-300) {
                    return Err(Error::InvalidMap(format!(
                        "numerator and denominator share the root {r}"
                    )));
                }
            }
        }
        let polynomial = dd == 0;
        let mut map = RationalMap {
            num: pad(num, degree + 1),
            den: pad(den, degree + 1),
            degree,
            critical: Vec::new(),
            polynomial,
        };
        map.critical = map.compute_critical_points()?;
        Ok(map)
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs, vec![Complex64::new(1.0, 0.0)])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    /// Planar for polynomials (bounded Julia set), spherical otherwise.
    pub fn default_metric(&self) -> Metric {
        if self.polynomial {
            Metric::Planar
        } else {
            Metric::Spherical
        }
    }

    pub fn critical_points(&self) -> &[CriticalPoint] {
        &self.critical
    }

    fn reversed(v: &[Complex64]) -> Vec<Complex64> {
        v.iter().rev().copied().collect()
    }

    /// Evaluates `f` and its chart derivative.
    pub fn eval_chart(&self, z: SpherePoint) -> ChartEval {
        let (u, inverted) = match z {
            SpherePoint::Infinity => (Complex64::new(0.0, 0.0), true),
            SpherePoint::Finite(z) if z.norm_sqr() > 1.0 => (z.inv(), true),
            SpherePoint::Finite(z) => (z, false),
        };
        let (a, da, b, db) = if inverted {
            let (a, da) = eval_reversed(&self.num, u);
            let (b, db) = eval_reversed(&self.den, u);
            (a, da, b, db)
        } else {
            let (a, da) = poly::eval_with_derivative(&self.num, u);
            let (b, db) = poly::eval_with_derivative(&self.den, u);
            (a, da, b, db)
        };
        if a.norm_sqr() <= b.norm_sqr() {
            let w = a / b;
            ChartEval {
                value: SpherePoint::new(w),
                input: u,
                input_inverted: inverted,
                output: w,
                output_inverted: false,
                derivative: (da * b - a * db) / (b * b),
            }
        } else {
            let v = b / a;
            ChartEval {
                value: if v.norm_sqr() == 0.0 { SpherePoint::Infinity } else { SpherePoint::new(v.inv()) },
                input: u,
                input_inverted: inverted,
                output: v,
                output_inverted: true,
                derivative: (db * a - b * da) / (a * a),
            }
        }
    }

    pub fn eval(&self, z: SpherePoint) -> SpherePoint {
        self.eval_chart(z).value
    }

    /// `f^n(z)`.
    pub fn iterate(&self, z: SpherePoint, n: usize) -> SpherePoint {
        (0..n).fold(z, |w, _| self.eval(w))
    }

    /// `log |f'(z)|` in the requested metric; `-∞` at critical points.
    pub fn log_derivative(&self, z: SpherePoint, metric: Metric) -> f64 {
        let e = self.eval_chart(z);
        match metric {
            Metric::Planar => e.log_planar(),
            Metric::Spherical => e.log_spherical(),
        }
    }

    /// `log |(f^n)'(z)|` by the chain rule.
    pub fn log_derivative_iterate(&self, z: SpherePoint, n: usize, metric: Metric) -> f64 {
        let mut w = z;
        let mut acc = 0.0;
        for _ in 0..n {
            let e = self.eval_chart(w);
            acc += match metric {
                Metric::Planar => e.log_planar(),
                Metric::Spherical => e.log_spherical(),
            };
            w = e.value;
        }
        acc
    }

    /// Complex derivative of `f` at a finite point whose image is finite.
    pub fn derivative(&self, z: SpherePoint) -> Complex64 {
        self.eval_chart(z).planar_derivative()
    }

    /// Local degree of `f` at `z` (1 at non-critical points).
    pub fn local_degree(&self, z: SpherePoint) -> usize {
        self.critical
            .iter()
            .find(|c| c.point.approx_eq(&z, CRITICAL_TOL))
            .map_or(1, |c| c.local_degree)
    }

    pub fn is_critical(&self, z: SpherePoint, tol: f64) -> bool {
        self.critical.iter().any(|c| c.point.approx_eq(&z, tol))
    }

    /// Product of local degrees along `z, f(z), ..., f^{k-1}(z)`.
    pub fn local_degree_iterate(&self, z: SpherePoint, k: usize) -> usize {
        let mut w = z;
        let mut deg = 1;
        for _ in 0..k {
            deg *= self.local_degree(w);
            w = self.eval(w);
        }
        deg
    }

    fn compute_critical_points(&self) -> Result<Vec<CriticalPoint>> {
        // Finite critical points are the zeros of N'D - ND'.
        let dn = poly::derivative(&self.num);
        let dd = poly::derivative(&self.den);
        let wronskian = poly::sub(&poly::mul(&dn, &self.den), &poly::mul(&self.num, &dd));
        let expected = 2 * self.degree - 2;
        let finite_degree = poly::effective_degree(&wronskian, 1e-13).unwrap_or(0);
        let mut w = wronskian[..=finite_degree].to_vec();
        let mut out: Vec<CriticalPoint> = Vec::new();
        // Exact zeros at the origin.
        let zero_mult = w.iter().position(|c| c.norm_sqr() != 0.0).unwrap_or(0);
        if zero_mult > 0 {
            out.push(CriticalPoint { point: SpherePoint::ZERO, local_degree: zero_mult + 1 });
            w.drain(..zero_mult);
        }
        if w.len() > 1 {
            let solve = poly::roots(&w);
            let mut clusters: Vec<(Complex64, usize)> = Vec::new();
            for r in solve.roots {
                let p = SpherePoint::new(r);
                if let Some(c) = clusters.iter_mut().find(|(c, m)| {
                    SpherePoint::new(*c / *m as f64).chordal(&p) < 1e-4
                }) {
                    c.0 += r;
                    c.1 += 1;
                } else {
                    clusters.push((r, 1));
                }
            }
            for (sum, m) in clusters {
                out.push(CriticalPoint { point: SpherePoint::new(sum / m as f64), local_degree: m + 1 });
            }
        }
        let at_infinity = expected.saturating_sub(finite_degree);
        if at_infinity > 0 {
            out.push(CriticalPoint { point: SpherePoint::Infinity, local_degree: at_infinity + 1 });
        }
        let total: usize = out.iter().map(|c| c.local_degree - 1).sum();
        if total != expected {
            return Err(Error::NonConvergence {
                what: "critical points",
                residual: (total as f64 - expected as f64).abs(),
            });
        }
        Ok(out)
    }

    /// The `d` solutions of `f(x) = w`, counted with multiplicity.
    pub fn preimages(&self, w: SpherePoint) -> Result<Vec<SpherePoint>> {
        let q = match w {
            SpherePoint::Finite(w) if w.norm_sqr() <= 1.0 => {
                poly::sub(&self.num, &poly::scale(&self.den, w))
            }
            _ => {
                let v = w.recip().finite().unwrap_or_default();
                poly::sub(&self.den, &poly::scale(&self.num, v))
            }
        };
        let k = poly::effective_degree(&q, 1e-14).unwrap_or(0);
        let mut out = Vec::with_capacity(self.degree);
        if k > 0 {
            let solve = poly::roots(&q[..=k]);
            let qr = Self::reversed(&q);
            for r in solve.roots {
                let x = if r.norm_sqr() > 1.0 {
                    // Refine large roots in the chart at infinity.
                    let mut u = r.inv();
                    for _ in 0..2 {
                        let (p, dp) = poly::eval_with_derivative(&qr, u);
                        if dp.norm_sqr() == 0.0 {
                            break;
                        }
                        let next = u - p / dp;
                        if poly::relative_residual(&qr, next) < poly::relative_residual(&qr, u) {
                            u = next;
                        } else {
                            break;
                        }
                    }
                    from_inverse_chart(u)
                } else {
                    SpherePoint::new(r)
                };
                out.push(x);
            }
        }
        out.extend(std::iter::repeat_n(SpherePoint::Infinity, self.degree - k));
        let worst = out.iter().map(|x| self.eval(*x).chordal(&w)).fold(0.0, f64::max);
        if worst > PREIMAGE_RESIDUAL {
            return Err(Error::NonConvergence { what: "preimages", residual: worst });
        }
        Ok(out)
    }

    /// Preimages with duplicates (critical preimages) collapsed.
    pub fn distinct_preimages(&self, w: SpherePoint, tol: f64) -> Result<Vec<SpherePoint>> {
        Ok(dedup_points(&self.preimages(w)?, tol))
    }
}

fn from_inverse_chart(u: Complex64) -> SpherePoint {
    if u.norm_sqr() == 0.0 {
        SpherePoint::Infinity
    } else {
        SpherePoint::new(u.inv())
    }
}

/// Evaluates `u^d p(1/u)` for a padded coefficient list, with derivative.
fn eval_reversed(coeffs: &[Complex64], u: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter() {
        dp = dp * u + p;
        p = p * u + c;
    }
    (p, dp)
}

/// The built-in benchmark families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum NamedFamily {
    /// `z^d`
    Power { d: usize },
    /// `z^2 - 2`
    Chebyshev,
    /// `z^2 + c`
    Quadratic { c: Complex64 },
    /// `1 / (λ z^d - λ z^{d-1} + 1)`
    Reciprocal { lambda: Complex64, d: usize },
}

impl NamedFamily {
    pub fn resolve(&self) -> Result<RationalMap> {
        let c = |re: f64| Complex64::new(re, 0.0);
        match *self {
            NamedFamily::Power { d } => {
                let mut num = vec![c(0.0); d + 1];
                num[d] = c(1.0);
                RationalMap::polynomial(num)
            }
            NamedFamily::Chebyshev => RationalMap::polynomial(vec![c(-2.0), c(0.0), c(1.0)]),
            NamedFamily::Quadratic { c: k } => RationalMap::polynomial(vec![k, c(0.0), c(1.0)]),
            NamedFamily::Reciprocal { lambda, d } => {
                if d < 2 {
                    return Err(Error::InvalidMap(format!("degree {d} < 2")));
                }
                let mut den = vec![c(0.0); d + 1];
                den[0] = c(1.0);
                den[d - 1] = -lambda;
                den[d] = lambda;
                RationalMap::new(vec![c(1.0)], den)
            }
        }
    }
}
