//! Exact distances between complete preference orders.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::orders::{Relation, WeakOrder};
use crate::space::same_space;

/// Tolerance for comparing distances that are exact rationals or square
/// roots of integers.
pub const DISTANCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Footrule,
    Euclidean,
    Probabilistic,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [Self::Footrule, Self::Euclidean, Self::Probabilistic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Footrule => "footrule",
            Self::Euclidean => "euclidean",
            Self::Probabilistic => "probabilistic",
        }
    }

    /// Largest value the metric takes on strict orders over `n` outcomes.
    pub fn upper_bound(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Self::Footrule => (n * n / 4.0).floor(),
            Self::Euclidean => (n * (n * n - 1.0) / 3.0).sqrt(),
            Self::Probabilistic => 1.0,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "footrule" | "s" | "spearman" => Ok(Self::Footrule),
            "euclidean" | "e" => Ok(Self::Euclidean),
            "probabilistic" | "p" => Ok(Self::Probabilistic),
            other => Err(Error::InvalidParameter(format!("unknown metric `{other}`"))),
        }
    }
}

/// Conflict indicator on the pair `(a, b)`: 1 when one order strictly
/// prefers one direction while the other weakly prefers the opposite one.
pub fn conflict(o1: &WeakOrder, o2: &WeakOrder, a: usize, b: usize) -> Result<u8> {
    same_space(o1.space(), o2.space())?;
    o1.space().check_index(a)?;
    o1.space().check_index(b)?;
    if a == b {
        return Err(Error::SameOutcome(o1.space().label(a).to_string()));
    }
    let r1 = o1.relation(a, b);
    let r2 = o2.relation(a, b);
    let weak_ab = |r: Relation| matches!(r, Relation::Precedes | Relation::Indifferent);
    let weak_ba = |r: Relation| matches!(r, Relation::Succeeds | Relation::Indifferent);
    let hit = (weak_ab(r1) && r2 == Relation::Succeeds)
        || (r1 == Relation::Precedes && weak_ba(r2))
        || (weak_ab(r2) && r1 == Relation::Succeeds)
        || (r2 == Relation::Precedes && weak_ba(r1));
    Ok(hit as u8)
}

/// Number of pairs ranked differently, given each outcome's tier index (or
/// any key whose order encodes the preference).
pub(crate) fn discordant_pairs(t1: &[usize], t2: &[usize]) -> usize {
    let n = t1.len();
    let mut count = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            if t1[a].cmp(&t1[b]) != t2[a].cmp(&t2[b]) {
                count += 1;
            }
        }
    }
    count
}

pub(crate) fn probabilistic_from_tiers(t1: &[usize], t2: &[usize]) -> f64 {
    let n = t1.len();
    if n < 2 {
        return 0.0;
    }
    2.0 * discordant_pairs(t1, t2) as f64 / (n * (n - 1)) as f64
}

pub(crate) fn half_l1(h1: &[f64], h2: &[f64]) -> f64 {
    0.5 * h1.iter().zip(h2).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub(crate) fn l2(h1: &[f64], h2: &[f64]) -> f64 {
    h1.iter().zip(h2).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Spearman's footrule on midrank heights.
pub fn footrule(o1: &WeakOrder, o2: &WeakOrder) -> Result<f64> {
    same_space(o1.space(), o2.space())?;
    Ok(half_l1(&o1.midranks(), &o2.midranks()))
}

/// Euclidean distance between midrank height vectors.
pub fn euclidean(o1: &WeakOrder, o2: &WeakOrder) -> Result<f64> {
    same_space(o1.space(), o2.space())?;
    Ok(l2(&o1.midranks(), &o2.midranks()))
}

/// Fraction of outcome pairs on which the orders conflict; 0 when `n < 2`.
pub fn probabilistic(o1: &WeakOrder, o2: &WeakOrder) -> Result<f64> {
    same_space(o1.space(), o2.space())?;
    Ok(probabilistic_from_tiers(o1.tier_indices(), o2.tier_indices()))
}

pub fn distance(kind: MetricKind, o1: &WeakOrder, o2: &WeakOrder) -> Result<f64> {
    match kind {
        MetricKind::Footrule => footrule(o1, o2),
        MetricKind::Euclidean => euclidean(o1, o2),
        MetricKind::Probabilistic => probabilistic(o1, o2),
    }
}

/// Distance divided by its maximum over strict orders on the same space.
pub fn normalized(kind: MetricKind, o1: &WeakOrder, o2: &WeakOrder) -> Result<f64> {
    let d = distance(kind, o1, o2)?;
    let n = o1.len();
    if n < 2 {
        return Ok(0.0);
    }
    Ok(d / kind.upper_bound(n))
}

/// Complement of the probabilistic distance.
pub fn similarity(o1: &WeakOrder, o2: &WeakOrder) -> Result<f64> {
    Ok(1.0 - probabilistic(o1, o2)?)
}

/// Indices `(a, b, c)` into the supplied orders where `d1(a,b) < d1(a,c)` and
/// `d2(a,b) < d2(a,c)` disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Witness {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

/// Searches every ordered triple for a violation of relative equivalence
/// between two metrics. `None` means the metrics induce the same closer-than
/// comparisons on this set.
pub fn relative_equivalence_witness(
    kind1: MetricKind,
    kind2: MetricKind,
    orders: &[WeakOrder],
) -> Result<Option<Witness>> {
    if orders.len() < 3 {
        return Err(Error::TooFewOrders {
            needed: 3,
            got: orders.len(),
        });
    }
    for o in &orders[1..] {
        same_space(orders[0].space(), o.space())?;
    }
    let m = orders.len();
    let table = |kind: MetricKind| -> Result<Vec<f64>> {
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let v = distance(kind, &orders[i], &orders[j])?;
                d[i * m + j] = v;
                d[j * m + i] = v;
            }
        }
        Ok(d)
    };
    let d1 = table(kind1)?;
    let d2 = table(kind2)?;
    let closer = |d: &[f64], a: usize, b: usize, c: usize| d[a * m + b] < d[a * m + c] - DISTANCE_TOLERANCE;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                if closer(&d1, a, b, c) != closer(&d2, a, b, c) {
                    return Ok(Some(Witness { a, b, c }));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::parse_weak_order;
    use crate::space::OutcomeSpace;
    use std::sync::Arc;

    fn bmp() -> Arc<OutcomeSpace> {
        OutcomeSpace::new(["B", "M", "P"]).unwrap()
    }

    fn xyz() -> (WeakOrder, WeakOrder, WeakOrder) {
        let s = bmp();
        (
            parse_weak_order(&s, "B < M < P").unwrap(),
            parse_weak_order(&s, "M < P < B").unwrap(),
            parse_weak_order(&s, "P < M < B").unwrap(),
        )
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= DISTANCE_TOLERANCE
    }

    #[test]
    fn worked_example_values() {
        let (x, y, z) = xyz();
        assert!(close(footrule(&x, &y).unwrap(), 2.0));
        assert!(close(euclidean(&x, &y).unwrap(), 6f64.sqrt()));
        assert!(close(probabilistic(&x, &y).unwrap(), 2.0 / 3.0));
        assert!(close(footrule(&x, &z).unwrap(), 2.0));
        assert!(close(euclidean(&x, &z).unwrap(), 8f64.sqrt()));
        assert!(close(normalized(MetricKind::Footrule, &x, &y).unwrap(), 1.0));
        assert!((normalized(MetricKind::Euclidean, &x, &y).unwrap() - 0.8660).abs() < 1e-4);
        assert!((normalized(MetricKind::Probabilistic, &x, &y).unwrap() - 0.6667).abs() < 1e-4);
        for kind in MetricKind::ALL {
            assert!(close(normalized(kind, &x, &z).unwrap(), 1.0));
            assert_eq!(distance(kind, &x, &x).unwrap(), 0.0);
        }
        assert!(close(similarity(&x, &y).unwrap(), 1.0 / 3.0));
        assert!(close(similarity(&x, &z).unwrap(), 0.0));
        assert_eq!(similarity(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn conflict_clauses() {
        let (x, y, _) = xyz();
        assert_eq!(conflict(&x, &y, 0, 1).unwrap(), 1);
        assert_eq!(conflict(&x, &x, 0, 1).unwrap(), 0);
        let s = OutcomeSpace::new(["a", "b", "c"]).unwrap();
        let tied = parse_weak_order(&s, "a = b < c").unwrap();
        let strict = parse_weak_order(&s, "a < b < c").unwrap();
        assert_eq!(conflict(&tied, &strict, 0, 1).unwrap(), 1);
        assert_eq!(conflict(&tied, &tied, 0, 1).unwrap(), 0);
        assert_eq!(conflict(&tied, &strict, 0, 2).unwrap(), 0);
        assert!(matches!(conflict(&x, &y, 1, 1), Err(Error::SameOutcome(_))));
        assert!(close(probabilistic(&tied, &strict).unwrap(), 1.0 / 3.0));
    }

    #[test]
    fn mismatched_spaces() {
        let (x, _, _) = xyz();
        let other = parse_weak_order(&OutcomeSpace::new(["a", "b", "c"]).unwrap(), "a < b < c").unwrap();
        assert_eq!(footrule(&x, &other).unwrap_err(), Error::SpaceMismatch);
        assert_eq!(probabilistic(&x, &other).unwrap_err(), Error::SpaceMismatch);
    }

    #[test]
    fn tiny_spaces() {
        let s = OutcomeSpace::new(["a"]).unwrap();
        let w = parse_weak_order(&s, "a").unwrap();
        assert_eq!(probabilistic(&w, &w).unwrap(), 0.0);
        assert_eq!(normalized(MetricKind::Footrule, &w, &w).unwrap(), 0.0);
    }

    #[test]
    fn footrule_and_euclidean_are_not_relatively_equivalent() {
        let (x, y, z) = xyz();
        let set = [x, y, z];
        let w = relative_equivalence_witness(MetricKind::Footrule, MetricKind::Euclidean, &set)
            .unwrap()
            .unwrap();
        assert_eq!(w, Witness { a: 0, b: 1, c: 2 });
        for kind in MetricKind::ALL {
            assert_eq!(relative_equivalence_witness(kind, kind, &set).unwrap(), None);
        }
        assert!(matches!(
            relative_equivalence_witness(MetricKind::Footrule, MetricKind::Euclidean, &set[..2]),
            Err(Error::TooFewOrders { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn parse_kind() {
        assert_eq!("Probabilistic".parse::<MetricKind>().unwrap(), MetricKind::Probabilistic);
        assert!("kendall".parse::<MetricKind>().is_err());
    }
}
