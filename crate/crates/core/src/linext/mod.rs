//! Linear extensions of partial preference orders.
//!
//! Extensions permute indifference classes, so every size parameter here
//! (caps, mixing times) is in classes, not outcomes.

mod diagnostics;
mod sampler;

use crate::error::{Error, Result};
use crate::orders::{HeightProfile, LinearExtension, PartialPreferenceOrder};

pub use diagnostics::{chi_square_uniform, empirical_distribution, total_variation, tv_to_uniform};
pub use sampler::{
    apply_move, chain_step, sample_extension, sample_many, Coin, Sampler, SamplerConfig,
    SwapDistribution,
};

/// Size guards for the exponential-time routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtensionLimits {
    /// Largest class count [`enumerate_extensions`] accepts.
    pub enumerate_max_classes: usize,
    /// Largest class count for the downset dynamic program (memory is
    /// `2^m` counters).
    pub count_max_classes: usize,
}

impl Default for ExtensionLimits {
    fn default() -> Self {
        Self {
            enumerate_max_classes: 10,
            count_max_classes: 20,
        }
    }
}

const HARD_COUNT_LIMIT: usize = 26;

fn predecessor_masks(poset: &PartialPreferenceOrder) -> Vec<u64> {
    let m = poset.class_count();
    (0..m)
        .map(|y| {
            (0..m)
                .filter(|&x| poset.class_precedes(x, y))
                .fold(0u64, |acc, x| acc | 1 << x)
        })
        .collect()
}

/// Calls `visit` on every linear extension, in lexicographic order of class
/// indices.
pub fn for_each_extension(
    poset: &PartialPreferenceOrder,
    limits: &ExtensionLimits,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    let m = poset.class_count();
    let cap = limits.enumerate_max_classes.min(64);
    if m > cap {
        return Err(Error::CapExceeded {
            what: "class count for enumeration",
            size: m as u128,
            cap: cap as u128,
        });
    }
    let pred = predecessor_masks(poset);
    let mut prefix = Vec::with_capacity(m);
    fn rec(pred: &[u64], placed: u64, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        let m = pred.len();
        if prefix.len() == m {
            visit(prefix);
            return;
        }
        for x in 0..m {
            if placed >> x & 1 == 0 && pred[x] & !placed == 0 {
                prefix.push(x);
                rec(pred, placed | 1 << x, prefix, visit);
                prefix.pop();
            }
        }
    }
    rec(&pred, 0, &mut prefix, &mut visit);
    Ok(())
}

/// Every linear extension exactly once, lexicographically ordered.
pub fn enumerate_extensions(
    poset: &PartialPreferenceOrder,
    limits: &ExtensionLimits,
) -> Result<Vec<LinearExtension>> {
    let mut out = Vec::new();
    for_each_extension(poset, limits, |ext| {
        out.push(LinearExtension::from_vec_unchecked(ext.to_vec()))
    })?;
    Ok(out)
}

/// Forward and backward path counts over the lattice of downsets.
struct DownsetTable {
    pred: Vec<u64>,
    // ways to order the downset as a prefix
    forward: Vec<u128>,
    // ways to complete an extension starting from the downset
    backward: Vec<u128>,
}

impl DownsetTable {
    fn check(poset: &PartialPreferenceOrder, limits: &ExtensionLimits) -> Result<usize> {
        let m = poset.class_count();
        let cap = limits.count_max_classes.min(HARD_COUNT_LIMIT);
        if m > cap {
            return Err(Error::CapExceeded {
                what: "class count for counting",
                size: m as u128,
                cap: cap as u128,
            });
        }
        Ok(m)
    }

    fn forward(poset: &PartialPreferenceOrder, limits: &ExtensionLimits) -> Result<Self> {
        let m = Self::check(poset, limits)?;
        let pred = predecessor_masks(poset);
        let mut forward = vec![0u128; 1 << m];
        forward[0] = 1;
        for mask in 0..(1usize << m) {
            let ways = forward[mask];
            if ways == 0 {
                continue;
            }
            for x in 0..m {
                if mask >> x & 1 == 0 && pred[x] & !(mask as u64) == 0 {
                    forward[mask | 1 << x] += ways;
                }
            }
        }
        Ok(Self {
            pred,
            forward,
            backward: Vec::new(),
        })
    }

    fn with_backward(mut self) -> Self {
        let m = self.pred.len();
        let full = (1usize << m) - 1;
        let mut backward = vec![0u128; 1 << m];
        backward[full] = 1;
        for mask in (0..full).rev() {
            if self.forward[mask] == 0 {
                continue;
            }
            let mut ways = 0;
            for x in 0..m {
                if mask >> x & 1 == 0 && self.pred[x] & !(mask as u64) == 0 {
                    ways += backward[mask | 1 << x];
                }
            }
            backward[mask] = ways;
        }
        self.backward = backward;
        self
    }

    fn total(&self) -> u128 {
        self.forward[self.forward.len() - 1]
    }
}

/// Number of linear extensions, by dynamic programming over downsets.
pub fn count_extensions(poset: &PartialPreferenceOrder, limits: &ExtensionLimits) -> Result<u128> {
    Ok(DownsetTable::forward(poset, limits)?.total())
}

/// How [`average_heights`] averages over extensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeightMode {
    /// Exact, via the downset table.
    Exact,
    /// Mean over this many sampled extensions.
    Sampled(usize),
}

/// Mean midrank height of every outcome over the linear extensions.
pub fn average_heights(
    poset: &PartialPreferenceOrder,
    mode: HeightMode,
    sampler: &SamplerConfig,
    limits: &ExtensionLimits,
) -> Result<HeightProfile> {
    let heights = match mode {
        HeightMode::Exact => exact_class_heights(poset, limits)?,
        HeightMode::Sampled(draws) => {
            let draws = sample_many(poset, draws, sampler)?;
            mean_class_heights(poset, &draws)
        }
    };
    Ok(outcome_heights(poset, &heights))
}

pub(crate) fn outcome_heights(poset: &PartialPreferenceOrder, class_heights: &[f64]) -> HeightProfile {
    let h = poset.class_indices().iter().map(|&c| class_heights[c]).collect();
    HeightProfile::new(poset.space().clone(), h)
}

/// Midrank height of every class within one extension.
pub(crate) fn extension_class_heights(poset: &PartialPreferenceOrder, ext: &[usize], out: &mut [f64]) {
    let mut below = 0usize;
    for &c in ext {
        let size = poset.classes()[c].len();
        out[c] = below as f64 + (size as f64 + 1.0) / 2.0;
        below += size;
    }
}

pub(crate) fn mean_class_heights(poset: &PartialPreferenceOrder, draws: &[LinearExtension]) -> Vec<f64> {
    let m = poset.class_count();
    let mut sum = vec![0.0; m];
    let mut h = vec![0.0; m];
    for d in draws {
        extension_class_heights(poset, d.classes(), &mut h);
        for (s, x) in sum.iter_mut().zip(&h) {
            *s += x;
        }
    }
    let k = draws.len().max(1) as f64;
    sum.iter().map(|s| s / k).collect()
}

/// `P(class x starts right after downset S) = forward[S]·backward[S ∪ x] / total`.
fn exact_class_heights(poset: &PartialPreferenceOrder, limits: &ExtensionLimits) -> Result<Vec<f64>> {
    let table = DownsetTable::forward(poset, limits)?.with_backward();
    let m = poset.class_count();
    let sizes: Vec<usize> = poset.classes().iter().map(Vec::len).collect();
    let total = table.total() as f64;
    let mut acc = vec![0.0; m];
    for mask in 0..(1usize << m) {
        let ways = table.forward[mask];
        if ways == 0 {
            continue;
        }
        let below: usize = (0..m).filter(|&x| mask >> x & 1 == 1).map(|x| sizes[x]).sum();
        for x in 0..m {
            if mask >> x & 1 == 0 && table.pred[x] & !(mask as u64) == 0 {
                let w = (ways * table.backward[mask | 1 << x]) as f64;
                acc[x] += w * (below as f64 + (sizes[x] as f64 + 1.0) / 2.0);
            }
        }
    }
    Ok(acc.iter().map(|a| a / total).collect())
}
