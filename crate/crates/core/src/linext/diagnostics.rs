use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linext::{enumerate_extensions, ExtensionLimits};
use crate::orders::{LinearExtension, PartialPreferenceOrder};

/// Half the L1 distance between two distributions on the same index set.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch(p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Frequency of each extension of `support` among `draws`. Draws outside the
/// support are an error.
pub fn empirical_distribution(
    support: &[LinearExtension],
    draws: &[LinearExtension],
) -> Result<Vec<f64>> {
    let index: HashMap<&LinearExtension, usize> =
        support.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut counts = vec![0usize; support.len()];
    for d in draws {
        let i = index.get(d).ok_or_else(|| {
            Error::InvalidParameter(format!("draw {:?} is not a linear extension", d.classes()))
        })?;
        counts[*i] += 1;
    }
    let k = draws.len().max(1) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / k).collect())
}

/// Total-variation distance between the draws' empirical law and the
/// uniform law on all extensions.
pub fn tv_to_uniform(
    poset: &PartialPreferenceOrder,
    draws: &[LinearExtension],
    limits: &ExtensionLimits,
) -> Result<f64> {
    let support = enumerate_extensions(poset, limits)?;
    let emp = empirical_distribution(&support, draws)?;
    let uniform = vec![1.0 / support.len() as f64; support.len()];
    total_variation(&emp, &uniform)
}

/// Pearson statistic of `counts` against equal expected cell counts.
pub fn chi_square_uniform(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}
