//! Distances between utility functions over a finite outcome space.
//!
//! Utility functions are only meaningful up to a positive affine map, so the
//! vector distances work on the 0–1 representative of each class. The
//! probabilistic distance instead estimates how often the two functions rank
//! a pair of independent, uniformly random prospects in opposite ways.

use std::sync::Arc;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::complete::{half_l1, l2};
use crate::error::{Error, Result};
use crate::estimate::{resolve_sample_count, DistanceEstimate, EstimationConfig};
use crate::orders::WeakOrder;
use crate::rng::{derive_seed, stream_rng};
use crate::space::{same_space, OutcomeSpace};

const PROSPECT_SUM_TOLERANCE: f64 = 1e-9;
const EQUIVALENCE_TOLERANCE: f64 = 1e-9;
/// Samples per independent random stream in the Monte Carlo loop.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector {
    space: Arc<OutcomeSpace>,
    values: Vec<f64>,
}

impl UtilityVector {
    pub fn new(space: Arc<OutcomeSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidParameter(format!(
                "{} utilities for {} outcomes",
                values.len(),
                space.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "utility of `{}` is not finite",
                space.label(i)
            )));
        }
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    /// Parses `u(a)=0, u(b)=1.5, ...` (optionally prefixed by `name:`) or a
    /// positional list `0, 1.5, ...` in the space's outcome order.
    pub fn parse(space: &Arc<OutcomeSpace>, text: &str) -> Result<(Option<String>, Self)> {
        let syntax = |message: String| Error::Syntax { line: 1, message };
        let (name, body) = match text.split_once(':') {
            Some((n, b)) => (Some(n.trim().to_string()), b),
            None => (None, text),
        };
        let items: Vec<&str> = body.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| syntax(format!("`{s}` is not a number")))
        };
        let values = if items.iter().any(|s| s.contains('=')) {
            let mut values = vec![None; space.len()];
            for item in &items {
                let (lhs, rhs) = item
                    .split_once('=')
                    .ok_or_else(|| syntax(format!("expected `u(outcome)=value`, got `{item}`")))?;
                let label = lhs
                    .trim()
                    .strip_prefix("u(")
                    .and_then(|l| l.strip_suffix(')'))
                    .ok_or_else(|| syntax(format!("expected `u(outcome)`, got `{}`", lhs.trim())))?
                    .trim();
                let i = space.index_of(label)?;
                if values[i].replace(number(rhs.trim())?).is_some() {
                    return Err(Error::DuplicateOutcome(label.to_string()));
                }
            }
            values
                .into_iter()
                .enumerate()
                .map(|(i, v)| v.ok_or_else(|| Error::MissingOutcome(space.label(i).to_string())))
                .collect::<Result<Vec<f64>>>()?
        } else {
            items.iter().map(|s| number(s)).collect::<Result<Vec<f64>>>()?
        };
        Ok((name, Self::new(space.clone(), values)?))
    }

    /// Positional form, e.g. `0, 1.5, 2`. Round-trips through
    /// [`UtilityVector::parse`].
    pub fn to_positional(&self) -> String {
        self.values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// A probability distribution over outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Prospect {
    space: Arc<OutcomeSpace>,
    probabilities: Vec<f64>,
}

impl Prospect {
    pub fn new(space: Arc<OutcomeSpace>, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != space.len() {
            return Err(Error::SpaceMismatch);
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidParameter("probabilities must be non-negative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROSPECT_SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            space,
            probabilities,
        })
    }

    pub fn point_mass(space: Arc<OutcomeSpace>, outcome: usize) -> Result<Self> {
        space.check_index(outcome)?;
        let mut p = vec![0.0; space.len()];
        p[outcome] = 1.0;
        Self::new(space, p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }
}

pub fn expected_utility(p: &Prospect, u: &UtilityVector) -> Result<f64> {
    same_space(&p.space, &u.space)?;
    Ok(p.probabilities.iter().zip(&u.values).map(|(p, u)| p * u).sum())
}

/// The member of `u`'s strategic-equivalence class with minimum 0 and
/// maximum 1. Constant functions map to all zeros.
pub fn canonical_representative(u: &UtilityVector) -> UtilityVector {
    let min = u.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = u.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let values = if span > 0.0 {
        u.values.iter().map(|v| (v - min) / span).collect()
    } else {
        vec![0.0; u.values.len()]
    };
    UtilityVector {
        space: u.space.clone(),
        values,
    }
}

/// Whether `u2 = α·u1 + β` for some `α > 0`.
pub fn strategically_equivalent(u1: &UtilityVector, u2: &UtilityVector) -> Result<bool> {
    same_space(&u1.space, &u2.space)?;
    let r1 = canonical_representative(u1);
    let r2 = canonical_representative(u2);
    Ok(r1
        .values
        .iter()
        .zip(&r2.values)
        .all(|(a, b)| (a - b).abs() <= EQUIVALENCE_TOLERANCE))
}

/// Footrule-style distance: half the L1 distance between representatives.
pub fn utility_footrule(u1: &UtilityVector, u2: &UtilityVector) -> Result<f64> {
    same_space(&u1.space, &u2.space)?;
    Ok(half_l1(
        &canonical_representative(u1).values,
        &canonical_representative(u2).values,
    ))
}

/// L2 distance between representatives.
pub fn utility_euclidean(u1: &UtilityVector, u2: &UtilityVector) -> Result<f64> {
    same_space(&u1.space, &u2.space)?;
    Ok(l2(
        &canonical_representative(u1).values,
        &canonical_representative(u2).values,
    ))
}

/// Outcomes grouped into tiers of equal utility, ascending.
pub fn induced_weak_order(u: &UtilityVector) -> WeakOrder {
    WeakOrder::from_keys(u.space.clone(), &u.values).expect("utilities are finite")
}

fn fill_simplex<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut total = 0.0;
    for x in out.iter_mut() {
        let e: f64 = rng.sample(Exp1);
        *x = e;
        total += e;
    }
    for x in out.iter_mut() {
        *x /= total;
    }
}

/// A uniform draw from the probability simplex (normalized unit exponentials).
pub fn sample_prospect<R: Rng + ?Sized>(space: &Arc<OutcomeSpace>, rng: &mut R) -> Prospect {
    let mut p = vec![0.0; space.len()];
    fill_simplex(rng, &mut p);
    Prospect {
        space: space.clone(),
        probabilities: p,
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Counts conflicting prospect pairs among samples `start..start + len` of
/// chunk `chunk`.
fn count_conflicts(r1: &[f64], r2: &[f64], seed: u64, chunk: u64, len: usize) -> u64 {
    let n = r1.len();
    let mut rng = stream_rng(seed, chunk);
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut hits = 0;
    for _ in 0..len {
        fill_simplex(&mut rng, &mut p);
        fill_simplex(&mut rng, &mut q);
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..n {
            let d = p[i] - q[i];
            s1 += r1[i] * d;
            s2 += r2[i] * d;
        }
        // a zero against a strict sign is a conflict; zero against zero is not
        if sign(s1) != sign(s2) {
            hits += 1;
        }
    }
    hits
}

fn conflict_rate(r1: &[f64], r2: &[f64], seed: u64, k: usize) -> u64 {
    let chunks = k.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(k - c * CHUNK);
            count_conflicts(r1, r2, seed, c as u64, len)
        })
        .sum()
}

const MAIN_STREAM: u64 = 0;
const PILOT_STREAM: u64 = 1;

/// Monte Carlo estimate of the probability that `u1` and `u2` rank two
/// independent uniform prospects differently.
///
/// Works on canonical representatives, so strategically equivalent inputs
/// produce exactly zero. Results depend only on the seed and sample count,
/// not on thread count, and are identical with the arguments swapped.
pub fn probabilistic_distance_utilities(
    u1: &UtilityVector,
    u2: &UtilityVector,
    config: &EstimationConfig,
) -> Result<DistanceEstimate> {
    same_space(&u1.space, &u2.space)?;
    config.validate()?;
    let n = u1.space.len();
    if n < 2 {
        return Ok(DistanceEstimate::exact("probabilistic", 0.0, 0));
    }
    let r1 = canonical_representative(u1).values;
    // equivalent inputs share one representative, so rounding in the
    // rescaling cannot produce spurious sign flips
    let r2 = if strategically_equivalent(u1, u2)? {
        r1.clone()
    } else {
        canonical_representative(u2).values
    };
    let main = derive_seed(config.seed, MAIN_STREAM);
    let pilot = derive_seed(config.seed, PILOT_STREAM);
    let k = resolve_sample_count(config, |len| {
        let hits = conflict_rate(&r1, &r2, pilot, len) as usize;
        let mut v = vec![0.0; len];
        v[..hits].fill(1.0);
        v
    })?;
    let hits = conflict_rate(&r1, &r2, main, k);
    let mean = hits as f64 / k as f64;
    let variance = if k > 1 {
        k as f64 / (k - 1) as f64 * mean * (1.0 - mean)
    } else {
        0.0
    };
    let mut est = DistanceEstimate::monte_carlo("probabilistic", mean, variance, k, config);
    est.degenerate = u1.is_constant() || u2.is_constant();
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Arc<OutcomeSpace> {
        OutcomeSpace::new(["a", "b", "c"]).unwrap()
    }

    fn u(values: &[f64]) -> UtilityVector {
        UtilityVector::new(abc(), values.to_vec()).unwrap()
    }

    #[test]
    fn expected_utilities() {
        let s = abc();
        let uniform = Prospect::new(s.clone(), vec![1.0 / 3.0; 3]).unwrap();
        assert!((expected_utility(&uniform, &u(&[0.0, 1.0, 2.0])).unwrap() - 1.0).abs() < 1e-12);
        let c = Prospect::point_mass(s.clone(), 2).unwrap();
        assert_eq!(expected_utility(&c, &u(&[0.0, 1.0, 2.0])).unwrap(), 2.0);
        let half = Prospect::new(s, vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(expected_utility(&half, &u(&[0.0, 2.0, 3.0])).unwrap(), 1.0);
    }

    #[test]
    fn prospect_validation() {
        assert!(Prospect::new(abc(), vec![0.5, 0.5, 0.1]).is_err());
        assert!(Prospect::new(abc(), vec![1.5, -0.5, 0.0]).is_err());
        assert!(Prospect::new(abc(), vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn representatives() {
        let r = canonical_representative(&u(&[1.0, 3.0, 4.0]));
        assert_eq!(r.values()[0], 0.0);
        assert!((r.values()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.values()[2], 1.0);
        let scaled = u(&[0.0, 0.25, 1.0]);
        assert_eq!(canonical_representative(&scaled), scaled);
        assert_eq!(canonical_representative(&u(&[5.0; 3])).values(), &[0.0; 3]);
    }

    #[test]
    fn equivalence() {
        let x = u(&[0.0, 1.0, 2.0]);
        assert!(strategically_equivalent(&x, &u(&[10.0, 12.0, 14.0])).unwrap());
        assert!(!strategically_equivalent(&x, &u(&[0.0, 2.0, 1.0])).unwrap());
        assert!(!strategically_equivalent(&x, &u(&[0.0, 2.0, 3.0])).unwrap());
        assert!(!strategically_equivalent(&x, &u(&[2.0, 1.0, 0.0])).unwrap());
        assert!(strategically_equivalent(&u(&[1.0; 3]), &u(&[7.0; 3])).unwrap());
    }

    #[test]
    fn vector_distances() {
        let (x, y) = (u(&[0.0, 1.0, 2.0]), u(&[1.0, 3.0, 4.0]));
        assert!((utility_footrule(&x, &y).unwrap() - 1.0 / 12.0).abs() < 1e-12);
        assert!((utility_euclidean(&x, &y).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(utility_euclidean(&x, &x).unwrap(), 0.0);
        assert_eq!(utility_footrule(&x, &u(&[3.0, 5.0, 7.0])).unwrap(), 0.0);
        let s2 = OutcomeSpace::new(["a", "b"]).unwrap();
        let p = UtilityVector::new(s2.clone(), vec![0.0, 1.0]).unwrap();
        let q = UtilityVector::new(s2, vec![1.0, 0.0]).unwrap();
        assert_eq!(utility_footrule(&p, &q).unwrap(), 1.0);
        assert!((utility_euclidean(&p, &q).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn induced_orders() {
        assert_eq!(induced_weak_order(&u(&[0.0, 1.0, 2.0])).to_string(), "a < b < c");
        assert_eq!(induced_weak_order(&u(&[0.0, 2.0, 1.0])).to_string(), "a < c < b");
        assert_eq!(induced_weak_order(&u(&[4.0; 3])).tiers().len(), 1);
    }

    #[test]
    fn simplex_draws() {
        let mut rng = stream_rng(1, 0);
        let one = OutcomeSpace::new(["a"]).unwrap();
        assert_eq!(sample_prospect(&one, &mut rng).probabilities(), &[1.0]);
        for _ in 0..100 {
            let p = sample_prospect(&abc(), &mut rng);
            assert!(p.probabilities().iter().all(|&x| x >= 0.0));
            assert!((p.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn parse_forms() {
        let s = abc();
        let (name, v) = UtilityVector::parse(&s, "x: u(c)=2, u(a)=0, u(b)=1").unwrap();
        assert_eq!(name.as_deref(), Some("x"));
        assert_eq!(v.values(), &[0.0, 1.0, 2.0]);
        let (name, v) = UtilityVector::parse(&s, "0, 1.5, 2").unwrap();
        assert_eq!(name, None);
        assert_eq!(v.values(), &[0.0, 1.5, 2.0]);
        assert_eq!(UtilityVector::parse(&s, &v.to_positional()).unwrap().1, v);
        assert!(UtilityVector::parse(&s, "0, 1").is_err());
        assert!(UtilityVector::parse(&s, "u(a)=0, u(b)=1").is_err());
        assert!(UtilityVector::parse(&s, "u(a)=0, u(b)=1, u(d)=2").is_err());
        assert!(UtilityVector::parse(&s, "0, x, 1").is_err());
    }

    #[test]
    fn zero_for_affine_copies_and_symmetric() {
        let cfg = EstimationConfig::default().with_samples(20_000).with_seed(3);
        let x = u(&[0.0, 1.0, 2.0]);
        let e = probabilistic_distance_utilities(&x, &u(&[5.0, 7.0, 9.0]), &cfg).unwrap();
        assert_eq!(e.value, 0.0);
        let z = u(&[0.0, 2.0, 1.0]);
        let a = probabilistic_distance_utilities(&x, &z, &cfg).unwrap();
        let b = probabilistic_distance_utilities(&z, &x, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.interval_low <= a.value && a.value <= a.interval_high);
    }

    #[test]
    fn constant_utilities() {
        let cfg = EstimationConfig::default().with_samples(5_000);
        let c = u(&[1.0; 3]);
        let e = probabilistic_distance_utilities(&c, &u(&[2.0; 3]), &cfg).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.degenerate);
        // the constant side is indifferent everywhere; the other side is strict
        // almost surely, which the conflict clauses count
        let e = probabilistic_distance_utilities(&c, &u(&[0.0, 1.0, 2.0]), &cfg).unwrap();
        assert_eq!(e.value, 1.0);
        assert!(e.degenerate);
    }
}
