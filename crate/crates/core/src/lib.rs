//! Thermodynamic formalism for rational maps of the Riemann sphere.
//!
//! The crate computes exceptional sets, tree and hidden tree pressures,
//! phase transitions of the negative spectrum, the Lyapunov dimension
//! spectrum as a Legendre–Fenchel transform, truncated conformal measures
//! and hyperbolic-time diagnostics.

// `!(x > y)` forms are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod exceptional;
pub mod hyperbolic;
pub mod map;
pub mod mapspec;
pub mod numerics;
pub mod orbits;
pub mod pipeline;
pub mod poly;
pub mod pressure;
pub mod region;
pub mod spectrum;
pub mod sphere;

pub use error::{Error, Result};
pub use map::{CriticalPoint, NamedFamily, RationalMap};
pub use region::{Ball, Region};
pub use sphere::{Metric, SpherePoint};
