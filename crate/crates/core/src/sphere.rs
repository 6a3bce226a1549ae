//! Points of the Riemann sphere and the distances used to compare them.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default tolerance for point equality, measured in the chordal metric.
pub const POINT_TOL: f64 = 1e-9;

/// A point of the extended complex plane.
///
/// Serialized as `[re, im]` for finite points and the string `"inf"` for infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PointRepr", try_from = "PointRepr")]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

/// How derivatives and distances are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Euclidean metric of the plane. Undefined at infinity.
    Planar,
    /// Chordal metric of the unit sphere, `2|z-w| / sqrt((1+|z|^2)(1+|w|^2))`.
    #[default]
    Spherical,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64 { re: 0.0, im: 0.0 });

    /// Builds a point from a complex number; non-finite values become infinity.
    pub fn new(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(Complex64::from_polar(r, theta))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    /// `1/z` with `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(&self) -> SpherePoint {
        match *self {
            SpherePoint::Infinity => SpherePoint::ZERO,
            SpherePoint::Finite(z) if z.norm_sqr() == 0.0 => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::new(z.inv()),
        }
    }

    /// Chordal distance; lies in `[0, 2]`.
    pub fn chordal(&self, other: &SpherePoint) -> f64 {
        match (*self, *other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
        }
    }

    /// Euclidean distance; infinite whenever exactly one point is at infinity.
    pub fn planar(&self, other: &SpherePoint) -> f64 {
        match (*self, *other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => (z - w).norm(),
            _ => f64::INFINITY,
        }
    }

    pub fn distance(&self, other: &SpherePoint, metric: Metric) -> f64 {
        match metric {
            Metric::Planar => self.planar(other),
            Metric::Spherical => self.chordal(other),
        }
    }

    /// Equality up to `tol` in the chordal metric.
    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        self.chordal(other) <= tol
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Finite([f64; 2]),
    Tag(String),
}

impl From<SpherePoint> for PointRepr {
    fn from(p: SpherePoint) -> Self {
        match p {
            SpherePoint::Finite(z) => PointRepr::Finite([z.re, z.im]),
            SpherePoint::Infinity => PointRepr::Tag("inf".into()),
        }
    }
}

impl TryFrom<PointRepr> for SpherePoint {
    type Error = String;

    fn try_from(r: PointRepr) -> Result<Self, String> {
        match r {
            PointRepr::Finite([re, im]) => Ok(SpherePoint::new(Complex64::new(re, im))),
            PointRepr::Tag(s) if s == "inf" => Ok(SpherePoint::Infinity),
            PointRepr::Tag(s) => Err(format!("expected [re, im] or \"inf\", got {s:?}")),
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::new(z)
    }
}

impl From<f64> for SpherePoint {
    fn from(x: f64) -> Self {
        SpherePoint::real(x)
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Infinity => write!(f, "inf"),
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

/// Removes near-duplicates (chordal distance below `tol`), keeping first occurrences.
pub fn dedup_points(points: &[SpherePoint], tol: f64) -> Vec<SpherePoint> {
    let mut out: Vec<SpherePoint> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| q.approx_eq(p, tol)) {
            out.push(*p);
        }
    }
    out
}
