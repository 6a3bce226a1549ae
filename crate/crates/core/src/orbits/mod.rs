//! Periodic orbits, backward trees, Julia-set sampling and basepoint checks.

pub mod periodic;
pub mod safe;
pub mod sample;
pub mod tree;

pub use periodic::{
    close_pseudo_orbit, exact_period, find_periodic_orbits, CycleClass, FixedPointCount, OrbitSearch,
    PeriodicOrbit,
};
pub use safe::{is_expanding_point, is_safe_point, SafetyReport};
pub use sample::julia_sample;
pub use tree::{BackwardTree, ExclusionMode, TreeNode, TreeOptions};
