//! Monte Carlo estimates with Chebyshev confidence intervals, and the
//! configuration shared by every estimator.

use std::fmt;

use crate::error::{Error, Result};
use crate::linext::{ExtensionLimits, SamplerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleCount {
    Fixed(usize),
    /// Sized by [`chebyshev_sample_size`] from `confidence_c`, `epsilon` and
    /// the τ policy.
    Auto,
}

/// Bound on `Var Y / (E Y)²` used for interval widths and sample sizing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauPolicy {
    Fixed(f64),
    /// Estimated from the samples themselves (a pilot run when sizing).
    Plugin,
}

/// Whether partial-order distances enumerate extensions or sample them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Exact when the enumeration caps allow it, sampled otherwise.
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationConfig {
    pub seed: u64,
    pub samples: SampleCount,
    pub confidence_c: f64,
    pub epsilon: f64,
    pub tau: TauPolicy,
    pub mode: Mode,
    pub sampler: SamplerConfig,
    pub limits: ExtensionLimits,
    /// Largest `|V1|·|V2|` evaluated exactly.
    pub max_exact_pairs: u128,
    pub pilot_samples: usize,
    pub tau_floor: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: SampleCount::Auto,
            confidence_c: 20.0,
            epsilon: 0.01,
            tau: TauPolicy::Plugin,
            mode: Mode::Auto,
            sampler: SamplerConfig::default(),
            limits: ExtensionLimits::default(),
            max_exact_pairs: 1_000_000,
            pilot_samples: 1000,
            tau_floor: 0.01,
        }
    }
}

impl EstimationConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, k: usize) -> Self {
        self.samples = SampleCount::Fixed(k);
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.confidence_c > 1.0) {
            return Err(Error::InvalidParameter("confidence c must exceed 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter("epsilon must lie in (0, 1)".into()));
        }
        if let SampleCount::Fixed(0) = self.samples {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        if let TauPolicy::Fixed(t) = self.tau {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter("tau must be positive".into()));
            }
        }
        self.sampler.validate()
    }
}

/// `⌈4cτ/ε²⌉`: samples needed for the mean to be within a factor `1 ± ε` of
/// the truth with probability at least `1 − 1/c`.
pub fn chebyshev_sample_size(c: f64, tau: f64, epsilon: f64) -> Result<u64> {
    if !(c > 1.0) || !(tau > 0.0) || !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need c > 1, tau > 0, 0 < epsilon <= 1 (got c={c}, tau={tau}, epsilon={epsilon})"
        )));
    }
    let x = 4.0 * c * tau / (epsilon * epsilon);
    // ε² is rarely exact in binary; snap results that are integers up to
    // rounding before taking the ceiling.
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
    if !k.is_finite() || k > u64::MAX as f64 {
        return Err(Error::InvalidParameter("sample size overflows".into()));
    }
    Ok(k as u64)
}

/// A point estimate with its sample metadata and confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEstimate {
    pub metric: String,
    pub method: Method,
    pub value: f64,
    pub sample_count: usize,
    pub sample_variance: f64,
    pub interval_low: f64,
    pub interval_high: f64,
    pub seed: u64,
    /// Set when an input made the estimate trivially determined (for
    /// example a constant utility function).
    pub degenerate: bool,
}

pub const CSV_HEADER: &str = "metric,method,value,k,variance,interval_low,interval_high,seed";

impl DistanceEstimate {
    pub fn exact(metric: impl Into<String>, value: f64, pairs: usize) -> Self {
        Self {
            metric: metric.into(),
            method: Method::Exact,
            value,
            sample_count: pairs,
            sample_variance: 0.0,
            interval_low: value,
            interval_high: value,
            seed: 0,
            degenerate: false,
        }
    }

    /// Builds a Monte Carlo estimate from its mean and unbiased sample
    /// variance over `k` samples, with interval
    /// `[v(1 − √(cτ/k)), v(1 + √(cτ/k))]` clipped below at 0.
    pub fn monte_carlo(
        metric: impl Into<String>,
        mean: f64,
        variance: f64,
        k: usize,
        config: &EstimationConfig,
    ) -> Self {
        let half_width = match config.tau {
            TauPolicy::Plugin => (config.confidence_c * variance / k as f64).sqrt(),
            TauPolicy::Fixed(tau) => mean * (config.confidence_c * tau / k as f64).sqrt(),
        };
        Self {
            metric: metric.into(),
            method: Method::MonteCarlo,
            value: mean,
            sample_count: k,
            sample_variance: variance,
            interval_low: (mean - half_width).max(0.0),
            interval_high: mean + half_width,
            seed: config.seed,
            degenerate: false,
        }
    }

    /// Estimate from per-sample values, summed in index order.
    pub fn from_samples(metric: impl Into<String>, values: &[f64], config: &EstimationConfig) -> Self {
        let (mean, var) = mean_variance(values);
        Self::monte_carlo(metric, mean, var, values.len(), config)
    }

    pub fn standard_error(&self) -> f64 {
        if self.sample_count == 0 {
            0.0
        } else {
            (self.sample_variance / self.sample_count as f64).sqrt()
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.interval_low <= x && x <= self.interval_high
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.interval_low <= other.interval_high && other.interval_low <= self.interval_high
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.metric,
            self.method,
            self.value,
            self.sample_count,
            self.sample_variance,
            self.interval_low,
            self.interval_high,
            self.seed
        )
    }
}

/// Mean and unbiased variance (0 for fewer than two values).
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (0.0, 0.0);
    }
    let mut sum = 0.0;
    for v in values {
        sum += v;
    }
    let mean = sum / k as f64;
    if k < 2 {
        return (mean, 0.0);
    }
    let mut ss = 0.0;
    for v in values {
        ss += (v - mean) * (v - mean);
    }
    (mean, ss / (k - 1) as f64)
}

/// τ̂ = variance / mean², floored; the floor also covers a zero mean.
pub(crate) fn plugin_tau(values: &[f64], floor: f64) -> f64 {
    let (mean, var) = mean_variance(values);
    if mean > 0.0 {
        (var / (mean * mean)).max(floor)
    } else {
        floor
    }
}

/// Resolves the main-run sample count, calling `pilot` for τ̂ when sizing
/// automatically with the plug-in policy.
pub(crate) fn resolve_sample_count(
    config: &EstimationConfig,
    pilot: impl FnOnce(usize) -> Vec<f64>,
) -> Result<usize> {
    match config.samples {
        SampleCount::Fixed(k) => Ok(k),
        SampleCount::Auto => {
            let tau = match config.tau {
                TauPolicy::Fixed(t) => t,
                TauPolicy::Plugin => plugin_tau(&pilot(config.pilot_samples), config.tau_floor),
            };
            Ok(chebyshev_sample_size(config.confidence_c, tau, config.epsilon)? as usize)
        }
    }
}
