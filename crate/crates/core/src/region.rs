//! Finite unions of balls, used for the neighborhoods excluded from trees
//! and measures.

use serde::{Deserialize, Serialize};

use crate::sphere::{Metric, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: SpherePoint,
    pub radius: f64,
}

/// A finite union of open balls, all measured in one metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Region {
    pub balls: Vec<Ball>,
    pub metric: Metric,
}

impl Region {
    pub fn empty() -> Self {
        Region::default()
    }

    /// `B(points, radius)`.
    pub fn around(points: &[SpherePoint], radius: f64, metric: Metric) -> Self {
        Region {
            balls: points.iter().map(|&center| Ball { center, radius }).collect(),
            metric,
        }
    }

    pub fn ball(center: SpherePoint, radius: f64, metric: Metric) -> Self {
        Self::around(&[center], radius, metric)
    }

    pub fn is_empty(&self) -> bool {
        self.balls.iter().all(|b| b.radius <= 0.0)
    }

    pub fn contains(&self, p: &SpherePoint) -> bool {
        self.balls.iter().any(|b| p.distance(&b.center, self.metric) < b.radius)
    }

    /// Distance from `p` to the complement-side boundary: positive outside,
    /// negative inside.
    pub fn margin(&self, p: &SpherePoint) -> f64 {
        self.balls
            .iter()
            .map(|b| p.distance(&b.center, self.metric) - b.radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// Same centers, radii multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Region {
            balls: self.balls.iter().map(|b| Ball { center: b.center, radius: b.radius * factor }).collect(),
            metric: self.metric,
        }
    }

    /// True when every ball of `self` lies inside some ball of `other`.
    pub fn is_subset_of(&self, other: &Region) -> bool {
        if self.is_empty() {
            return true;
        }
        self.metric == other.metric
            && self.balls.iter().filter(|b| b.radius > 0.0).all(|b| {
                other
                    .balls
                    .iter()
                    .any(|o| b.center.distance(&o.center, self.metric) + b.radius <= o.radius + 1e-15)
            })
    }
}
