//! Inverse-iteration sampling of the Julia set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::map::RationalMap;
use crate::sphere::SpherePoint;

/// Backward steps discarded before recording.
pub const BURN_IN: usize = 64;

/// `count` points on random backward branches from `z0` after a burn-in.
/// The output depends only on the map, `z0`, `count` and `seed`.
pub fn julia_sample(map: &RationalMap, z0: SpherePoint, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = z0;
    for _ in 0..BURN_IN {
        z = random_preimage(map, z, &mut rng)?;
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        z = random_preimage(map, z, &mut rng)?;
        out.push(z);
    }
    Ok(out)
}

fn random_preimage(map: &RationalMap, z: SpherePoint, rng: &mut ChaCha8Rng) -> Result<SpherePoint> {
    let pre = map.preimages(z)?;
    Ok(pre[rng.gen_range(0..pre.len())])
}
