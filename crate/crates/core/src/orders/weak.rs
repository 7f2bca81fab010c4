use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::orders::{HeightProfile, PartialPreferenceOrder, Relation};
use crate::space::OutcomeSpace;

/// A complete preference order with ties: an ordered partition of the
/// outcomes into tiers, least preferred first.
#[derive(Debug, Clone)]
pub struct WeakOrder {
    space: Arc<OutcomeSpace>,
    tiers: Vec<Vec<usize>>,
    tier_of: Vec<usize>,
}

impl PartialEq for WeakOrder {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.tier_of == other.tier_of
    }
}

impl Eq for WeakOrder {}

impl WeakOrder {
    /// Builds an order from tiers of outcome indices, least preferred first.
    pub fn new(space: Arc<OutcomeSpace>, tiers: Vec<Vec<usize>>) -> Result<Self> {
        let n = space.len();
        let mut tier_of = vec![usize::MAX; n];
        let mut sorted = Vec::with_capacity(tiers.len());
        for (t, mut tier) in tiers.into_iter().enumerate() {
            if tier.is_empty() {
                return Err(Error::EmptyTier);
            }
            for &o in &tier {
                space.check_index(o)?;
                if tier_of[o] != usize::MAX {
                    return Err(Error::DuplicateOutcome(space.label(o).to_string()));
                }
                tier_of[o] = t;
            }
            tier.sort_unstable();
            sorted.push(tier);
        }
        if let Some(missing) = tier_of.iter().position(|&t| t == usize::MAX) {
            return Err(Error::MissingOutcome(space.label(missing).to_string()));
        }
        Ok(Self {
            space,
            tiers: sorted,
            tier_of,
        })
    }

    /// Builds an order from tiers of labels, least preferred first.
    pub fn from_labels<S: AsRef<str>>(space: Arc<OutcomeSpace>, tiers: &[Vec<S>]) -> Result<Self> {
        let tiers = tiers
            .iter()
            .map(|tier| tier.iter().map(|l| space.index_of(l.as_ref())).collect())
            .collect::<Result<Vec<Vec<usize>>>>()?;
        Self::new(space, tiers)
    }

    /// A strict order listing outcome indices least preferred first.
    pub fn strict(space: Arc<OutcomeSpace>, order: &[usize]) -> Result<Self> {
        Self::new(space, order.iter().map(|&o| vec![o]).collect())
    }

    /// Groups outcomes by equal key, ascending. Keys must not be NaN.
    pub fn from_keys(space: Arc<OutcomeSpace>, keys: &[f64]) -> Result<Self> {
        if keys.len() != space.len() {
            return Err(Error::SpaceMismatch);
        }
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap_or(Ordering::Equal));
        let mut tiers: Vec<Vec<usize>> = Vec::new();
        let mut last = None;
        for o in idx {
            if last == Some(keys[o]) {
                tiers.last_mut().unwrap().push(o);
            } else {
                tiers.push(vec![o]);
                last = Some(keys[o]);
            }
        }
        Self::new(space, tiers)
    }

    pub(crate) fn from_parts_unchecked(space: Arc<OutcomeSpace>, tiers: Vec<Vec<usize>>) -> Self {
        let mut tier_of = vec![0; space.len()];
        for (t, tier) in tiers.iter().enumerate() {
            for &o in tier {
                tier_of[o] = t;
            }
        }
        Self {
            space,
            tiers,
            tier_of,
        }
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tiers(&self) -> &[Vec<usize>] {
        &self.tiers
    }

    /// Tier index of every outcome (0 = least preferred tier).
    pub fn tier_indices(&self) -> &[usize] {
        &self.tier_of
    }

    /// No ties.
    pub fn is_strict(&self) -> bool {
        self.tiers.len() == self.space.len()
    }

    pub fn relation(&self, a: usize, b: usize) -> Relation {
        match self.tier_of[a].cmp(&self.tier_of[b]) {
            Ordering::Less => Relation::Precedes,
            Ordering::Greater => Relation::Succeeds,
            Ordering::Equal => Relation::Indifferent,
        }
    }

    /// Midrank heights: a tier spanning positions `p+1..=p+s` gives each of
    /// its members `p + (s+1)/2`.
    pub fn heights(&self) -> HeightProfile {
        HeightProfile::new(self.space.clone(), self.midranks())
    }

    pub(crate) fn midranks(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.space.len()];
        let mut below = 0usize;
        for tier in &self.tiers {
            let mid = below as f64 + (tier.len() as f64 + 1.0) / 2.0;
            for &o in tier {
                h[o] = mid;
            }
            below += tier.len();
        }
        h
    }

    pub fn top_k(&self, k: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for tier in self.tiers.iter().rev() {
            if out.len() >= k {
                break;
            }
            out.extend_from_slice(tier);
        }
        out.sort_unstable();
        out
    }

    /// The induced order on `subset` (outcome indices), over a new space made
    /// of those outcomes in their original order.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let (space, remap) = sub_space(&self.space, subset)?;
        let tiers = self
            .tiers
            .iter()
            .map(|tier| tier.iter().filter_map(|&o| remap[o]).collect::<Vec<_>>())
            .filter(|tier| !tier.is_empty())
            .collect();
        Ok(Self::from_parts_unchecked(space, tiers))
    }

    pub fn reversed(&self) -> Self {
        Self::from_parts_unchecked(self.space.clone(), self.tiers.iter().rev().cloned().collect())
    }

    /// The same relation viewed as a (complete) partial preference order.
    pub fn to_partial(&self) -> PartialPreferenceOrder {
        PartialPreferenceOrder::from_weak(self)
    }
}

/// Space made of `subset` (deduplicated, in original order) plus the map from
/// old indices to new ones.
pub(crate) fn sub_space(
    space: &Arc<OutcomeSpace>,
    subset: &[usize],
) -> Result<(Arc<OutcomeSpace>, Vec<Option<usize>>)> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut keep = vec![false; space.len()];
    for &o in subset {
        space.check_index(o)?;
        keep[o] = true;
    }
    let mut remap = vec![None; space.len()];
    let mut labels = Vec::new();
    for (o, &k) in keep.iter().enumerate() {
        if k {
            remap[o] = Some(labels.len());
            labels.push(space.label(o).to_string());
        }
    }
    Ok((OutcomeSpace::new(labels)?, remap))
}

impl fmt::Display for WeakOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, tier) in self.tiers.iter().enumerate() {
            if t > 0 {
                write!(f, " < ")?;
            }
            for (i, &o) in tier.iter().enumerate() {
                if i > 0 {
                    write!(f, " = ")?;
                }
                write!(f, "{}", self.space.label(o))?;
            }
        }
        Ok(())
    }
}
