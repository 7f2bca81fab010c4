//! Outcome orders: complete weak orders, partial preference orders, and their
//! linear extensions.

mod partial;
mod syntax;
mod weak;

use std::sync::Arc;

use crate::error::Result;
use crate::space::{same_space, OutcomeSpace};

pub use partial::{LinearExtension, OrderBuilder, PartialPreferenceOrder};
pub use syntax::{parse_partial_order, parse_weak_order, partial_order_with_inferred_space, weak_order_with_inferred_space};
pub use weak::WeakOrder;

/// How two outcomes `a`, `b` relate under an order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `a ≺ b`: `b` is preferred.
    Precedes,
    /// `b ≺ a`.
    Succeeds,
    Indifferent,
    Incomparable,
}

impl Relation {
    pub fn reverse(self) -> Self {
        match self {
            Relation::Precedes => Relation::Succeeds,
            Relation::Succeeds => Relation::Precedes,
            r => r,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Precedes => "<",
            Relation::Succeeds => ">",
            Relation::Indifferent => "=",
            Relation::Incomparable => "?",
        }
    }
}

/// Shared read access to anything that relates pairs of outcomes.
pub trait PreferenceOrder {
    fn space(&self) -> &Arc<OutcomeSpace>;

    /// Relation between outcome indices `a` and `b`. Panics on out-of-range.
    fn relation(&self, a: usize, b: usize) -> Relation;

    /// Checked, label-based form of [`PreferenceOrder::relation`].
    fn relation_of(&self, a: &str, b: &str) -> Result<Relation> {
        let space = self.space();
        Ok(self.relation(space.index_of(a)?, space.index_of(b)?))
    }

    /// Top outcomes, whole tiers or classes at a time, until at least `k`
    /// are collected. Sorted by index.
    fn top_k(&self, k: usize) -> Vec<usize>;
}

impl PreferenceOrder for WeakOrder {
    fn space(&self) -> &Arc<OutcomeSpace> {
        WeakOrder::space(self)
    }
    fn relation(&self, a: usize, b: usize) -> Relation {
        WeakOrder::relation(self, a, b)
    }
    fn top_k(&self, k: usize) -> Vec<usize> {
        WeakOrder::top_k(self, k)
    }
}

impl PreferenceOrder for PartialPreferenceOrder {
    fn space(&self) -> &Arc<OutcomeSpace> {
        PartialPreferenceOrder::space(self)
    }
    fn relation(&self, a: usize, b: usize) -> Relation {
        PartialPreferenceOrder::relation(self, a, b)
    }
    fn top_k(&self, k: usize) -> Vec<usize> {
        PartialPreferenceOrder::top_k(self, k)
    }
}

/// Per-outcome heights (1 = least preferred).
#[derive(Debug, Clone, PartialEq)]
pub struct HeightProfile {
    space: Arc<OutcomeSpace>,
    heights: Vec<f64>,
}

impl HeightProfile {
    pub(crate) fn new(space: Arc<OutcomeSpace>, heights: Vec<f64>) -> Self {
        debug_assert_eq!(space.len(), heights.len());
        Self { space, heights }
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.heights
    }

    pub fn get(&self, label: &str) -> Result<f64> {
        Ok(self.heights[self.space.index_of(label)?])
    }
}

/// True iff every strict preference and every indifference of `partial`
/// also holds in `complete`.
pub fn is_extension(complete: &WeakOrder, partial: &PartialPreferenceOrder) -> Result<bool> {
    same_space(complete.space(), partial.space())?;
    let n = complete.space().len();
    for a in 0..n {
        for b in (a + 1)..n {
            let constraint = partial.relation(a, b);
            if constraint != Relation::Incomparable && complete.relation(a, b) != constraint {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space3() -> Arc<OutcomeSpace> {
        OutcomeSpace::new(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn extension_check_on_v_poset() {
        let s = space3();
        let v = parse_partial_order(&s, "a < c; b < c").unwrap();
        assert!(is_extension(&parse_weak_order(&s, "a < b < c").unwrap(), &v).unwrap());
        assert!(!is_extension(&parse_weak_order(&s, "c < a < b").unwrap(), &v).unwrap());
        let empty = PartialPreferenceOrder::vacuous(s.clone());
        assert!(is_extension(&parse_weak_order(&s, "c < a < b").unwrap(), &empty).unwrap());
    }

    #[test]
    fn extension_respects_indifference() {
        let s = space3();
        let p = parse_partial_order(&s, "a = b").unwrap();
        assert!(is_extension(&parse_weak_order(&s, "c < a = b").unwrap(), &p).unwrap());
        assert!(!is_extension(&parse_weak_order(&s, "a < b < c").unwrap(), &p).unwrap());
    }

    #[test]
    fn extension_rejects_other_space() {
        let other = OutcomeSpace::new(["x", "y", "z"]).unwrap();
        let w = parse_weak_order(&other, "x < y < z").unwrap();
        let p = PartialPreferenceOrder::vacuous(space3());
        assert!(is_extension(&w, &p).is_err());
    }
}
