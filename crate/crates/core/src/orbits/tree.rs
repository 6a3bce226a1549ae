//! Backward-orbit trees with per-node accumulated log-derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::RationalMap;
use crate::numerics::{log_sum_exp, potential};
use crate::orbits::safe::is_safe_point;
use crate::region::Region;
use crate::sphere::{Metric, SpherePoint};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default node budget per tree level.
pub const DEFAULT_BUDGET: u64 = 2_000_000;
/// Decay rate used when checking basepoints against the critical orbit.
pub const SAFE_BETA: f64 = 0.5;

/// How an exclusion region acts on the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExclusionMode {
    /// Only the terminal point of a branch must avoid the region.
    #[default]
    Terminal,
    /// Every node of a branch must avoid the region; branches entering it are pruned.
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub point: SpherePoint,
    /// `log |(f^n)'(x)|` for a node `x` at level `n`.
    pub log_deriv: f64,
    pub excluded: bool,
    /// Index of the image `f(x)` in the previous level.
    pub parent: u32,
}

#[derive(Clone, Debug)]
pub struct TreeOptions {
    pub metric: Metric,
    pub exclusion: Region,
    pub mode: ExclusionMode,
    pub budget: u64,
    pub check_basepoint: bool,
}

impl TreeOptions {
    pub fn new(metric: Metric) -> Self {
        TreeOptions {
            metric,
            exclusion: Region::empty(),
            mode: ExclusionMode::Terminal,
            budget: DEFAULT_BUDGET,
            check_basepoint: true,
        }
    }

    pub fn for_map(map: &RationalMap) -> Self {
        Self::new(map.default_metric())
    }

    pub fn exclude(mut self, region: Region, mode: ExclusionMode) -> Self {
        self.exclusion = region;
        self.mode = mode;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn unchecked(mut self) -> Self {
        self.check_basepoint = false;
        self
    }
}

/// Backward tree `f^{-k}(root)` for `k = 0..=depth`.
#[derive(Clone, Debug)]
pub struct BackwardTree {
    pub root: SpherePoint,
    pub depth: usize,
    pub metric: Metric,
    pub exclusion: Region,
    pub mode: ExclusionMode,
    levels: Vec<Vec<TreeNode>>,
    /// Strict mode: number of nodes pruned at each level.
    pub pruned: Vec<usize>,
}

fn expand(
    map: &RationalMap,
    idx: usize,
    node: &TreeNode,
    opts: &TreeOptions,
) -> Result<Vec<TreeNode>> {
    if node.excluded && opts.mode == ExclusionMode::Strict {
        return Ok(Vec::new());
    }
    let pre = map.preimages(node.point)?;
    Ok(pre
        .into_iter()
        .map(|x| TreeNode {
            point: x,
            log_deriv: node.log_deriv + map.log_derivative(x, opts.metric),
            excluded: opts.exclusion.contains(&x),
            parent: idx as u32,
        })
        .collect())
}

impl BackwardTree {
    pub fn build(map: &RationalMap, root: SpherePoint, depth: usize, opts: &TreeOptions) -> Result<Self> {
        if opts.check_basepoint {
            let report = is_safe_point(map, root, depth.max(1), SAFE_BETA);
            if !report.safe {
                return Err(Error::UnsafeBasepoint { distance: report.min_distance, step: report.worst_step });
            }
        }
        if opts.exclusion.contains(&root) {
            return Err(Error::InvalidInput("basepoint lies in the excluded region".into()));
        }
        if opts.mode == ExclusionMode::Terminal {
            let needed = (map.degree() as u64).checked_pow(depth as u32).unwrap_or(u64::MAX);
            if needed > opts.budget {
                return Err(Error::BudgetExceeded { needed, budget: opts.budget });
            }
        }
        let mut levels = vec![vec![TreeNode { point: root, log_deriv: 0.0, excluded: false, parent: 0 }]];
        let mut pruned = vec![0];
        for _ in 0..depth {
            let current = levels.last().expect("root level");
            let predicted = current.iter().filter(|n| !(n.excluded && opts.mode == ExclusionMode::Strict)).count() as u64
                * map.degree() as u64;
            if predicted > opts.budget {
                return Err(Error::BudgetExceeded { needed: predicted, budget: opts.budget });
            }
            #[cfg(feature = "parallel")]
            let children: Vec<Vec<TreeNode>> = current
                .par_iter()
                .enumerate()
                .map(|(i, n)| expand(map, i, n, opts))
                .collect::<Result<_>>()?;
            #[cfg(not(feature = "parallel"))]
            let children: Vec<Vec<TreeNode>> = current
                .iter()
                .enumerate()
                .map(|(i, n)| expand(map, i, n, opts))
                .collect::<Result<_>>()?;
            let cut = if opts.mode == ExclusionMode::Strict {
                current.iter().filter(|n| n.excluded).count()
            } else {
                0
            };
            pruned.push(cut);
            levels.push(children.into_iter().flatten().collect());
        }
        Ok(BackwardTree {
            root,
            depth,
            metric: opts.metric,
            exclusion: opts.exclusion.clone(),
            mode: opts.mode,
            levels,
            pruned,
        })
    }

    pub fn leaves(&self) -> &[TreeNode] {
        &self.levels[self.depth]
    }

    pub fn level(&self, n: usize) -> &[TreeNode] {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[Vec<TreeNode>] {
        &self.levels
    }

    /// Leaves that are admissible: outside the region (terminal mode) or on
    /// branches that never entered it (strict mode).
    pub fn admissible(&self, n: usize) -> impl Iterator<Item = &TreeNode> {
        self.levels[n].iter().filter(|x| !x.excluded)
    }

    /// `log Σ |(f^n)'(x)|^{-t}` over admissible nodes of level `n`.
    pub fn log_partition(&self, n: usize, t: f64) -> f64 {
        log_sum_exp(self.admissible(n).map(|x| potential(t, x.log_deriv)))
    }

    /// `log Σ |(f^n)'(x)|^{-t}` over nodes of level `n` outside `region`.
    pub fn log_partition_outside(&self, n: usize, t: f64, region: &Region) -> f64 {
        log_sum_exp(
            self.levels[n]
                .iter()
                .filter(|x| !region.contains(&x.point))
                .map(|x| potential(t, x.log_deriv)),
        )
    }

    /// Branch from the node `(n, idx)` to the root: `[x, f(x), …, root]`.
    pub fn branch(&self, n: usize, idx: usize) -> Vec<SpherePoint> {
        let mut out = Vec::with_capacity(n + 1);
        let mut i = idx;
        for level in (0..=n).rev() {
            let node = &self.levels[level][i];
            out.push(node.point);
            i = node.parent as usize;
        }
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }
}
