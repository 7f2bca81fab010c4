//! Distances between partial preference orders.
//!
//! The average-case distance is the mean of a complete-order metric over
//! pairs of linear extensions. It is computed exactly by enumeration when
//! both extension sets are small, and otherwise estimated by pairing the
//! `j`-th sampled extension of one order with the `j`-th of the other.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::complete::{half_l1, l2, probabilistic_from_tiers, MetricKind};
use crate::error::{Error, Result};
use crate::estimate::{
    chebyshev_sample_size, resolve_sample_count, DistanceEstimate, EstimationConfig, Mode,
    SampleCount, TauPolicy,
};
use crate::linext::{
    average_heights, count_extensions, extension_class_heights, for_each_extension,
    mean_class_heights, ExtensionLimits, HeightMode, Sampler, SamplerConfig,
};
use crate::orders::{LinearExtension, PartialPreferenceOrder};
use crate::rng::{derive_seed, stream_rng};
use crate::space::same_space;

/// One extension seen from the outcomes: the position of each outcome's
/// class, and its midrank height.
struct View {
    keys: Vec<usize>,
    heights: Vec<f64>,
}

impl View {
    fn new(poset: &PartialPreferenceOrder, ext: &[usize]) -> Self {
        let m = ext.len();
        let mut pos = vec![0; m];
        for (i, &c) in ext.iter().enumerate() {
            pos[c] = i;
        }
        let mut class_h = vec![0.0; m];
        extension_class_heights(poset, ext, &mut class_h);
        let classes = poset.class_indices();
        Self {
            keys: classes.iter().map(|&c| pos[c]).collect(),
            heights: classes.iter().map(|&c| class_h[c]).collect(),
        }
    }

    fn distance(&self, kind: MetricKind, other: &View) -> f64 {
        match kind {
            MetricKind::Footrule => half_l1(&self.heights, &other.heights),
            MetricKind::Euclidean => l2(&self.heights, &other.heights),
            MetricKind::Probabilistic => probabilistic_from_tiers(&self.keys, &other.keys),
        }
    }
}

/// Base metric between one extension of `p1` and one of `p2`.
pub fn extension_distance(
    kind: MetricKind,
    p1: &PartialPreferenceOrder,
    e1: &LinearExtension,
    p2: &PartialPreferenceOrder,
    e2: &LinearExtension,
) -> Result<f64> {
    same_space(p1.space(), p2.space())?;
    if !e1.is_valid_for(p1) || !e2.is_valid_for(p2) {
        return Err(Error::InvalidParameter("not a linear extension of its order".into()));
    }
    Ok(View::new(p1, e1.classes()).distance(kind, &View::new(p2, e2.classes())))
}

fn enumerate_views(poset: &PartialPreferenceOrder, limits: &ExtensionLimits) -> Result<Vec<(Vec<usize>, View)>> {
    let mut out = Vec::new();
    for_each_extension(poset, limits, |ext| out.push((ext.to_vec(), View::new(poset, ext))))?;
    Ok(out)
}

/// Decides whether the pair can be handled by enumeration. Returns the
/// limits to enumerate with, `None` to sample, or an error in forced-exact
/// mode.
fn exact_plan(
    p1: &PartialPreferenceOrder,
    p2: &PartialPreferenceOrder,
    config: &EstimationConfig,
) -> Result<Option<ExtensionLimits>> {
    if config.mode == Mode::Sampled {
        return Ok(None);
    }
    let counted = count_extensions(p1, &config.limits)
        .and_then(|a| Ok((a, count_extensions(p2, &config.limits)?)));
    let (a, b) = match counted {
        Ok(c) => c,
        Err(e) if config.mode == Mode::Exact => return Err(e),
        Err(_) => return Ok(None),
    };
    let pairs = a.saturating_mul(b);
    if pairs > config.max_exact_pairs {
        return if config.mode == Mode::Exact {
            Err(Error::CapExceeded {
                what: "extension pairs",
                size: pairs,
                cap: config.max_exact_pairs,
            })
        } else {
            Ok(None)
        };
    }
    // with the counts known to be small, backtracking costs at most
    // count · classes, so the class-count guard can be relaxed
    Ok(Some(ExtensionLimits {
        enumerate_max_classes: config.limits.count_max_classes.max(config.limits.enumerate_max_classes),
        ..config.limits
    }))
}

/// Stream seeds for the two posets. The smaller one under a fixed total
/// order always gets the first stream, so swapping the arguments mirrors
/// every sampled pair.
fn stream_seeds(p1: &PartialPreferenceOrder, p2: &PartialPreferenceOrder, seed: u64, offset: u64) -> (u64, u64) {
    let (a, b) = if p1.canonical_cmp(p2) != Ordering::Greater {
        (0, 1)
    } else {
        (1, 0)
    };
    (derive_seed(seed, offset + a), derive_seed(seed, offset + b))
}

const MAIN_OFFSET: u64 = 0;
const PILOT_OFFSET: u64 = 2;

struct PairSampler<'a> {
    kind: MetricKind,
    p1: &'a PartialPreferenceOrder,
    p2: &'a PartialPreferenceOrder,
    s1: Sampler<'a>,
    s2: Sampler<'a>,
}

impl<'a> PairSampler<'a> {
    fn new(
        kind: MetricKind,
        p1: &'a PartialPreferenceOrder,
        p2: &'a PartialPreferenceOrder,
        sampler: &SamplerConfig,
    ) -> Result<Self> {
        Ok(Self {
            kind,
            p1,
            p2,
            s1: Sampler::new(p1, sampler)?,
            s2: Sampler::new(p2, sampler)?,
        })
    }

    fn pair(&self, seeds: (u64, u64), j: usize) -> (LinearExtension, LinearExtension) {
        let e1 = self.s1.sample(&mut stream_rng(seeds.0, j as u64));
        let e2 = self.s2.sample(&mut stream_rng(seeds.1, j as u64));
        (e1, e2)
    }

    fn values(&self, seeds: (u64, u64), k: usize) -> Vec<f64> {
        (0..k)
            .into_par_iter()
            .map(|j| {
                let (e1, e2) = self.pair(seeds, j);
                View::new(self.p1, e1.classes()).distance(self.kind, &View::new(self.p2, e2.classes()))
            })
            .collect()
    }

    /// Main-run values, sized by the configuration.
    fn sampled(&self, config: &EstimationConfig) -> Result<Vec<f64>> {
        let pilot = stream_seeds(self.p1, self.p2, config.seed, PILOT_OFFSET);
        let k = resolve_sample_count(config, |len| self.values(pilot, len))?;
        Ok(self.values(stream_seeds(self.p1, self.p2, config.seed, MAIN_OFFSET), k))
    }
}

/// Mean of `kind` over pairs of linear extensions.
pub fn avg_distance(
    p1: &PartialPreferenceOrder,
    p2: &PartialPreferenceOrder,
    kind: MetricKind,
    config: &EstimationConfig,
) -> Result<DistanceEstimate> {
    same_space(p1.space(), p2.space())?;
    config.validate()?;
    if let Some(limits) = exact_plan(p1, p2, config)? {
        let v1 = enumerate_views(p1, &limits)?;
        let v2 = enumerate_views(p2, &limits)?;
        let mut sum = 0.0;
        for (_, a) in &v1 {
            for (_, b) in &v2 {
                sum += a.distance(kind, b);
            }
        }
        let pairs = v1.len() * v2.len();
        let mut est = DistanceEstimate::exact(kind.name(), sum / pairs as f64, pairs);
        est.seed = config.seed;
        return Ok(est);
    }
    let sampler = PairSampler::new(kind, p1, p2, &config.sampler)?;
    let values = sampler.sampled(config)?;
    Ok(DistanceEstimate::from_samples(kind.name(), &values, config))
}

const HEIGHT_BATCHES: usize = 20;

fn generalized(
    name: &str,
    aggregate: fn(&[f64], &[f64]) -> f64,
    p1: &PartialPreferenceOrder,
    p2: &PartialPreferenceOrder,
    config: &EstimationConfig,
) -> Result<DistanceEstimate> {
    same_space(p1.space(), p2.space())?;
    config.validate()?;
    let exact = match config.mode {
        Mode::Exact => true,
        Mode::Sampled => false,
        Mode::Auto => {
            p1.class_count() <= config.limits.count_max_classes
                && p2.class_count() <= config.limits.count_max_classes
        }
    };
    if exact {
        let h1 = average_heights(p1, HeightMode::Exact, &config.sampler, &config.limits)?;
        let h2 = average_heights(p2, HeightMode::Exact, &config.sampler, &config.limits)?;
        let mut est = DistanceEstimate::exact(name, aggregate(h1.values(), h2.values()), 0);
        est.seed = config.seed;
        return Ok(est);
    }
    let k = match config.samples {
        SampleCount::Fixed(k) => k,
        SampleCount::Auto => {
            let tau = match config.tau {
                TauPolicy::Fixed(t) => t,
                TauPolicy::Plugin => config.tau_floor,
            };
            chebyshev_sample_size(config.confidence_c, tau, config.epsilon)? as usize
        }
    };
    let seeds = stream_seeds(p1, p2, config.seed, MAIN_OFFSET);
    let d1 = Sampler::new(p1, &config.sampler)?.sample_many(k, seeds.0);
    let d2 = Sampler::new(p2, &config.sampler)?.sample_many(k, seeds.1);
    let profile = |p: &PartialPreferenceOrder, draws: &[LinearExtension]| -> Vec<f64> {
        let class_h = mean_class_heights(p, draws);
        p.class_indices().iter().map(|&c| class_h[c]).collect()
    };
    let value = aggregate(&profile(p1, &d1), &profile(p2, &d2));
    // spread of the statistic over disjoint batches of draws
    let batches = HEIGHT_BATCHES.min(k);
    let size = k / batches;
    let batch_values: Vec<f64> = (0..batches)
        .map(|b| {
            let r = b * size..(b + 1) * size;
            aggregate(&profile(p1, &d1[r.clone()]), &profile(p2, &d2[r]))
        })
        .collect();
    let (_, batch_var) = crate::estimate::mean_variance(&batch_values);
    let variance = batch_var * size as f64;
    Ok(DistanceEstimate::monte_carlo(name, value, variance, k, config))
}

/// Half the L1 distance between average height profiles.
pub fn generalized_footrule(
    p1: &PartialPreferenceOrder,
    p2: &PartialPreferenceOrder,
    config: &EstimationConfig,
) -> Result<DistanceEstimate> {
    generalized("generalized_footrule", half_l1, p1, p2, config)
}

/// Euclidean distance between average height profiles.
pub fn generalized_euclidean(
    p1: &PartialPreferenceOrder,
    p2: &PartialPreferenceOrder,
    config: &EstimationConfig,
) -> Result<DistanceEstimate> {
    generalized("generalized_euclidean", l2, p1, p2, config)
}

/// Range of the base metric over extension pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceInterval {
    pub low: f64,
    pub high: f64,
    pub low_witness: Option<(LinearExtension, LinearExtension)>,
    pub high_witness: Option<(LinearExtension, LinearExtension)>,
    /// False when the endpoints come from a sample and so lie inside the true
    /// range.
    pub exact: bool,
}

impl DistanceInterval {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low <= high) {
            return Err(Error::InvalidParameter(format!("interval [{low}, {high}] is empty")));
        }
        Ok(Self {
            low,
            high,
            low_witness: None,
            high_witness: None,
            exact: true,
        })
    }

    pub fn contains_interval(&self, other: &DistanceInterval) -> bool {
        self.low <= other.low && other.high <= self.high
    }
}

/// `[min, max]` of `kind` over pairs of linear extensions.
pub fn extreme_interval(
    p1: &PartialPreferenceOrder,
    p2: &PartialPreferenceOrder,
    kind: MetricKind,
    config: &EstimationConfig,
) -> Result<DistanceInterval> {
    same_space(p1.space(), p2.space())?;
    config.validate()?;
    if let Some(limits) = exact_plan(p1, p2, config)? {
        let v1 = enumerate_views(p1, &limits)?;
        let v2 = enumerate_views(p2, &limits)?;
        let (mut lo, mut hi) = ((f64::INFINITY, 0, 0), (f64::NEG_INFINITY, 0, 0));
        for (i, (_, a)) in v1.iter().enumerate() {
            for (j, (_, b)) in v2.iter().enumerate() {
                let d = a.distance(kind, b);
                if d < lo.0 {
                    lo = (d, i, j);
                }
                if d > hi.0 {
                    hi = (d, i, j);
                }
            }
        }
        let witness = |i: usize, j: usize| {
            Some((
                LinearExtension::from_vec_unchecked(v1[i].0.clone()),
                LinearExtension::from_vec_unchecked(v2[j].0.clone()),
            ))
        };
        return Ok(DistanceInterval {
            low: lo.0,
            high: hi.0,
            low_witness: witness(lo.1, lo.2),
            high_witness: witness(hi.1, hi.2),
            exact: true,
        });
    }
    let sampler = PairSampler::new(kind, p1, p2, &config.sampler)?;
    let values = sampler.sampled(config)?;
    let (mut lo, mut hi) = (0, 0);
    for (j, &v) in values.iter().enumerate() {
        if v < values[lo] {
            lo = j;
        }
        if v > values[hi] {
            hi = j;
        }
    }
    let seeds = stream_seeds(p1, p2, config.seed, MAIN_OFFSET);
    Ok(DistanceInterval {
        low: values[lo],
        high: values[hi],
        low_witness: Some(sampler.pair(seeds, lo)),
        high_witness: Some(sampler.pair(seeds, hi)),
        exact: false,
    })
}

/// How two distance intervals are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Closer only when the intervals are separated.
    Conservative,
    /// Compare lower bounds.
    Minimin,
    /// Compare upper bounds.
    Minimax,
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conservative" => Ok(Policy::Conservative),
            "minimin" => Ok(Policy::Minimin),
            "minimax" => Ok(Policy::Minimax),
            other => Err(Error::InvalidParameter(format!("unknown policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closeness {
    CloserB,
    CloserC,
    Undecided,
}

/// Whether `b` or `c` is closer to `a`, given `Δ(a, b)` and `Δ(a, c)`.
pub fn compare_closeness(d_ab: &DistanceInterval, d_ac: &DistanceInterval, policy: Policy) -> Closeness {
    let by = |x: f64, y: f64| match x.partial_cmp(&y) {
        Some(Ordering::Less) => Closeness::CloserB,
        Some(Ordering::Greater) => Closeness::CloserC,
        _ => Closeness::Undecided,
    };
    match policy {
        Policy::Minimin => by(d_ab.low, d_ac.low),
        Policy::Minimax => by(d_ab.high, d_ac.high),
        Policy::Conservative => {
            if d_ab.high < d_ac.low {
                Closeness::CloserB
            } else if d_ac.high < d_ab.low {
                Closeness::CloserC
            } else {
                Closeness::Undecided
            }
        }
    }
}
