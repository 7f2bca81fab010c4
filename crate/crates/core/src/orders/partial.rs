use std::sync::Arc;

use crate::error::{Error, Result};
use crate::orders::weak::sub_space;
use crate::orders::{Relation, WeakOrder};
use crate::space::OutcomeSpace;

/// A partially specified preference order: outcomes grouped into indifference
/// classes, with a strict partial order over the classes. Pairs of outcomes in
/// unrelated classes are incomparable.
///
/// Classes are numbered by their smallest member. The strict relation is kept
/// both as its transitive reduction and as a dense closure matrix.
#[derive(Debug, Clone)]
pub struct PartialPreferenceOrder {
    space: Arc<OutcomeSpace>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    // less[x * m + y]: class x ≺ class y
    less: Vec<bool>,
    cover_edges: Vec<(usize, usize)>,
}

impl PartialEq for PartialPreferenceOrder {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.class_of == other.class_of && self.less == other.less
    }
}

impl Eq for PartialPreferenceOrder {}

impl PartialPreferenceOrder {
    /// Merges `indifferent` pairs into classes, lifts `strict` pairs `(a, b)`
    /// (meaning `a ≺ b`) to classes and closes transitively.
    pub fn build(
        space: Arc<OutcomeSpace>,
        indifferent: &[(usize, usize)],
        strict: &[(usize, usize)],
    ) -> Result<Self> {
        let mut b = OrderBuilder::new(space);
        for &(x, y) in indifferent {
            b.add_indifferent(x, y)?;
        }
        for &(x, y) in strict {
            b.add_strict(x, y)?;
        }
        Ok(b.finish())
    }

    /// Label-based form of [`PartialPreferenceOrder::build`].
    pub fn from_labels(
        space: Arc<OutcomeSpace>,
        indifferent: &[(&str, &str)],
        strict: &[(&str, &str)],
    ) -> Result<Self> {
        let ix = |pairs: &[(&str, &str)]| -> Result<Vec<(usize, usize)>> {
            pairs
                .iter()
                .map(|(a, b)| Ok((space.index_of(a)?, space.index_of(b)?)))
                .collect()
        };
        let ind = ix(indifferent)?;
        let st = ix(strict)?;
        Self::build(space, &ind, &st)
    }

    /// No constraints at all: every pair of distinct outcomes is incomparable.
    pub fn vacuous(space: Arc<OutcomeSpace>) -> Self {
        OrderBuilder::new(space).finish()
    }

    pub fn from_weak(order: &WeakOrder) -> Self {
        let mut b = OrderBuilder::new(order.space().clone());
        for tier in order.tiers() {
            for w in tier.windows(2) {
                b.add_indifferent(w[0], w[1]).expect("tiers are disjoint");
            }
        }
        for w in order.tiers().windows(2) {
            b.add_strict(w[0][0], w[1][0]).expect("tiers are ordered");
        }
        b.finish()
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, outcome: usize) -> usize {
        self.class_of[outcome]
    }

    pub fn class_indices(&self) -> &[usize] {
        &self.class_of
    }

    /// Class `x` strictly below class `y` (after closure).
    #[inline]
    pub fn class_precedes(&self, x: usize, y: usize) -> bool {
        self.less[x * self.classes.len() + y]
    }

    /// Dense closure matrix, row-major over classes.
    pub(crate) fn closure_matrix(&self) -> &[bool] {
        &self.less
    }

    /// Transitive reduction of the strict relation, as class pairs.
    pub fn strict_edges(&self) -> &[(usize, usize)] {
        &self.cover_edges
    }

    pub fn relation(&self, a: usize, b: usize) -> Relation {
        let (x, y) = (self.class_of[a], self.class_of[b]);
        if x == y {
            Relation::Indifferent
        } else if self.class_precedes(x, y) {
            Relation::Precedes
        } else if self.class_precedes(y, x) {
            Relation::Succeeds
        } else {
            Relation::Incomparable
        }
    }

    /// Every pair of classes is related, so there is exactly one extension.
    pub fn is_complete(&self) -> bool {
        let m = self.classes.len();
        self.less.iter().filter(|&&l| l).count() == m * (m - 1) / 2
    }

    /// The complete order, when [`is_complete`](Self::is_complete) holds.
    pub fn as_weak_order(&self) -> Option<WeakOrder> {
        self.is_complete().then(|| {
            let ext = LinearExtension::minimal(self);
            ext.to_weak_order(self)
        })
    }

    /// A total order used to break symmetry between two posets.
    pub(crate) fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.space.labels(), &self.class_of, &self.less).cmp(&(
            other.space.labels(),
            &other.class_of,
            &other.less,
        ))
    }

    pub fn top_k(&self, k: usize) -> Vec<usize> {
        let m = self.classes.len();
        let mut taken = vec![false; m];
        let mut out = Vec::new();
        while out.len() < k {
            let layer: Vec<usize> = (0..m)
                .filter(|&x| !taken[x] && (0..m).all(|y| taken[y] || !self.class_precedes(x, y)))
                .collect();
            if layer.is_empty() {
                break;
            }
            for x in layer {
                taken[x] = true;
                out.extend_from_slice(&self.classes[x]);
            }
        }
        out.sort_unstable();
        out
    }

    /// Induced partial order on `subset` over a new space of those outcomes.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let (space, remap) = sub_space(&self.space, subset)?;
        let kept: Vec<(usize, usize)> = remap
            .iter()
            .enumerate()
            .filter_map(|(o, r)| r.map(|r| (o, r)))
            .collect();
        let mut b = OrderBuilder::new(space);
        for (i, &(a, ra)) in kept.iter().enumerate() {
            for &(c, rc) in &kept[i + 1..] {
                match self.relation(a, c) {
                    Relation::Indifferent => b.add_indifferent(ra, rc)?,
                    Relation::Precedes => b.add_strict(ra, rc)?,
                    Relation::Succeeds => b.add_strict(rc, ra)?,
                    Relation::Incomparable => {}
                }
            }
        }
        Ok(b.finish())
    }

    /// All relations that hold between distinct outcome pairs `a < b` (by
    /// index), excluding incomparable ones.
    pub fn known_pairs(&self) -> Vec<(usize, usize, Relation)> {
        let n = self.space.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let r = self.relation(a, b);
                if r != Relation::Incomparable {
                    out.push((a, b, r));
                }
            }
        }
        out
    }
}

/// Incrementally builds a [`PartialPreferenceOrder`], keeping the strict
/// relation transitively closed after every insertion. A rejected insertion
/// leaves the builder unchanged.
#[derive(Debug, Clone)]
pub struct OrderBuilder {
    space: Arc<OutcomeSpace>,
    parent: Vec<usize>,
    // above[a]: bitset of outcomes strictly preferred to a
    above: Vec<Vec<u64>>,
    words: usize,
}

#[inline]
fn has(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

#[inline]
fn set(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

impl OrderBuilder {
    pub fn new(space: Arc<OutcomeSpace>) -> Self {
        let n = space.len();
        let words = n.div_ceil(64);
        Self {
            space,
            parent: (0..n).collect(),
            above: vec![vec![0; words]; n],
            words,
        }
    }

    pub fn from_order(order: &PartialPreferenceOrder) -> Self {
        let mut b = Self::new(order.space.clone());
        for (a, c, r) in order.known_pairs() {
            match r {
                Relation::Indifferent => b.add_indifferent(a, c),
                Relation::Precedes => b.add_strict(a, c),
                Relation::Succeeds => b.add_strict(c, a),
                Relation::Incomparable => Ok(()),
            }
            .expect("relations of a valid order are consistent");
        }
        b
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    fn find(&self, mut a: usize) -> usize {
        while self.parent[a] != a {
            a = self.parent[a];
        }
        a
    }

    fn members(&self, root: usize) -> Vec<usize> {
        (0..self.parent.len()).filter(|&o| self.find(o) == root).collect()
    }

    pub fn relation(&self, a: usize, b: usize) -> Relation {
        if self.find(a) == self.find(b) {
            Relation::Indifferent
        } else if has(&self.above[a], b) {
            Relation::Precedes
        } else if has(&self.above[b], a) {
            Relation::Succeeds
        } else {
            Relation::Incomparable
        }
    }

    fn labels(&self, a: usize, b: usize) -> (String, String) {
        (self.space.label(a).to_string(), self.space.label(b).to_string())
    }

    /// Adds `a ≺ b`.
    pub fn add_strict(&mut self, a: usize, b: usize) -> Result<()> {
        self.space.check_index(a)?;
        self.space.check_index(b)?;
        match self.relation(a, b) {
            Relation::Precedes => return Ok(()),
            Relation::Indifferent => {
                let (x, y) = self.labels(a, b);
                return Err(Error::StrictWithinClass(x, y));
            }
            Relation::Succeeds => {
                let (x, y) = self.labels(a, b);
                return Err(Error::Cycle(x, y));
            }
            Relation::Incomparable => {}
        }
        let n = self.parent.len();
        let rb = self.find(b);
        let mut up = self.above[b].clone();
        for o in self.members(rb) {
            set(&mut up, o);
        }
        let ra = self.find(a);
        for x in 0..n {
            if self.find(x) == ra || has(&self.above[x], a) {
                for (w, u) in self.above[x].iter_mut().zip(&up) {
                    *w |= u;
                }
            }
        }
        Ok(())
    }

    /// Adds `a ~ b`.
    pub fn add_indifferent(&mut self, a: usize, b: usize) -> Result<()> {
        self.space.check_index(a)?;
        self.space.check_index(b)?;
        match self.relation(a, b) {
            Relation::Indifferent => return Ok(()),
            Relation::Precedes | Relation::Succeeds => {
                let (x, y) = self.labels(a, b);
                return Err(Error::StrictWithinClass(x, y));
            }
            Relation::Incomparable => {}
        }
        let n = self.parent.len();
        let (ra, rb) = (self.find(a), self.find(b));
        let mut class = self.members(ra);
        class.extend(self.members(rb));
        let up: Vec<u64> = self.above[a]
            .iter()
            .zip(&self.above[b])
            .map(|(x, y)| x | y)
            .collect();
        let mut class_bits = vec![0u64; self.words];
        for &o in &class {
            set(&mut class_bits, o);
        }
        for x in 0..n {
            if self.above[x].iter().zip(&class_bits).any(|(r, c)| r & c != 0) {
                for ((w, u), c) in self.above[x].iter_mut().zip(&up).zip(&class_bits) {
                    *w |= u | c;
                }
            }
        }
        for &o in &class {
            self.above[o].clone_from(&up);
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        Ok(())
    }

    /// Adds `relation` between `a` and `b`; `Incomparable` is a no-op.
    pub fn add(&mut self, a: usize, b: usize, relation: Relation) -> Result<()> {
        match relation {
            Relation::Precedes => self.add_strict(a, b),
            Relation::Succeeds => self.add_strict(b, a),
            Relation::Indifferent => self.add_indifferent(a, b),
            Relation::Incomparable => Ok(()),
        }
    }

    pub fn finish(&self) -> PartialPreferenceOrder {
        let n = self.parent.len();
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut root_class = vec![usize::MAX; n];
        for o in 0..n {
            let r = self.find(o);
            if root_class[r] == usize::MAX {
                root_class[r] = classes.len();
                classes.push(Vec::new());
            }
            class_of[o] = root_class[r];
            classes[root_class[r]].push(o);
        }
        let m = classes.len();
        let mut less = vec![false; m * m];
        for x in 0..m {
            let rep = classes[x][0];
            for y in 0..m {
                less[x * m + y] = has(&self.above[rep], classes[y][0]);
            }
        }
        let mut cover_edges = Vec::new();
        for x in 0..m {
            for y in 0..m {
                if less[x * m + y] && !(0..m).any(|z| less[x * m + z] && less[z * m + y]) {
                    cover_edges.push((x, y));
                }
            }
        }
        PartialPreferenceOrder {
            space: self.space.clone(),
            class_of,
            classes,
            less,
            cover_edges,
        }
    }
}

/// A linear extension of a partial order: its classes listed least preferred
/// first. Classes keep their internal ties.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearExtension {
    order: Vec<usize>,
}

impl LinearExtension {
    /// Wraps a class sequence after checking it against `poset`.
    pub fn new(poset: &PartialPreferenceOrder, order: Vec<usize>) -> Result<Self> {
        let ext = Self { order };
        if ext.is_valid_for(poset) {
            Ok(ext)
        } else {
            Err(Error::InvalidParameter(format!(
                "{:?} is not a linear extension",
                ext.order
            )))
        }
    }

    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        Self { order }
    }

    /// The smallest-index-first topological order.
    pub fn minimal(poset: &PartialPreferenceOrder) -> Self {
        let m = poset.class_count();
        let mut placed = vec![false; m];
        let mut order = Vec::with_capacity(m);
        while order.len() < m {
            let next = (0..m)
                .find(|&y| !placed[y] && (0..m).all(|x| placed[x] || !poset.class_precedes(x, y)))
                .expect("closure is acyclic");
            placed[next] = true;
            order.push(next);
        }
        Self { order }
    }

    pub fn classes(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn classes_mut(&mut self) -> &mut [usize] {
        &mut self.order
    }

    pub fn is_valid_for(&self, poset: &PartialPreferenceOrder) -> bool {
        let m = poset.class_count();
        if self.order.len() != m {
            return false;
        }
        let mut seen = vec![false; m];
        for &c in &self.order {
            if c >= m || seen[c] {
                return false;
            }
            seen[c] = true;
        }
        for (i, &x) in self.order.iter().enumerate() {
            if self.order[..i].iter().any(|&y| poset.class_precedes(x, y)) {
                return false;
            }
        }
        true
    }

    pub fn to_weak_order(&self, poset: &PartialPreferenceOrder) -> WeakOrder {
        let tiers = self.order.iter().map(|&c| poset.classes()[c].clone()).collect();
        WeakOrder::from_parts_unchecked(poset.space().clone(), tiers)
    }

    /// Class labels joined by `<`, members of one class joined by `=`.
    pub fn display(&self, poset: &PartialPreferenceOrder) -> String {
        self.to_weak_order(poset).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Arc<OutcomeSpace> {
        OutcomeSpace::new(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn v_poset() {
        let p = PartialPreferenceOrder::from_labels(abc(), &[], &[("a", "c"), ("b", "c")]).unwrap();
        assert_eq!(p.class_count(), 3);
        assert_eq!(p.relation(0, 1), Relation::Incomparable);
        assert_eq!(p.relation(0, 2), Relation::Precedes);
        assert_eq!(p.relation(2, 1), Relation::Succeeds);
        assert_eq!(p.relation(1, 1), Relation::Indifferent);
        assert_eq!(p.strict_edges(), &[(0, 2), (1, 2)]);
        assert!(!p.is_complete());
    }

    #[test]
    fn cycle_rejected() {
        let err =
            PartialPreferenceOrder::from_labels(abc(), &[], &[("a", "b"), ("b", "c"), ("c", "a")])
                .unwrap_err();
        assert!(matches!(err, Error::Cycle(_, _)));
        let err = PartialPreferenceOrder::from_labels(abc(), &[], &[("a", "b"), ("b", "a")])
            .unwrap_err();
        assert!(matches!(err, Error::Cycle(_, _)));
    }

    #[test]
    fn strict_inside_class_rejected() {
        let err =
            PartialPreferenceOrder::from_labels(abc(), &[("a", "b")], &[("a", "b")]).unwrap_err();
        assert!(matches!(err, Error::StrictWithinClass(_, _)));
        // indirect: a < c, c = b, then b = a
        let mut b = OrderBuilder::new(abc());
        b.add_strict(0, 2).unwrap();
        b.add_indifferent(2, 1).unwrap();
        assert!(b.add_indifferent(1, 0).is_err());
        assert_eq!(b.relation(0, 1), Relation::Precedes);
    }

    #[test]
    fn indifference_lifts_constraints() {
        let p = PartialPreferenceOrder::from_labels(abc(), &[("b", "c")], &[("a", "b")]).unwrap();
        assert_eq!(p.class_count(), 2);
        assert_eq!(p.classes(), &[vec![0], vec![1, 2]]);
        assert_eq!(p.relation(0, 2), Relation::Precedes);
        assert_eq!(p.relation(1, 2), Relation::Indifferent);
        assert!(p.is_complete());
        assert_eq!(p.as_weak_order().unwrap().to_string(), "a < b = c");
    }

    #[test]
    fn merging_classes_after_strict_edges() {
        // a < b and c < d, then b = c gives a < {b,c} < d
        let s = OutcomeSpace::new(["a", "b", "c", "d"]).unwrap();
        let mut bld = OrderBuilder::new(s);
        bld.add_strict(0, 1).unwrap();
        bld.add_strict(2, 3).unwrap();
        bld.add_indifferent(1, 2).unwrap();
        let p = bld.finish();
        assert_eq!(p.relation(0, 3), Relation::Precedes);
        assert_eq!(p.relation(0, 2), Relation::Precedes);
        assert_eq!(p.relation(1, 3), Relation::Precedes);
        assert_eq!(p.as_weak_order().unwrap().to_string(), "a < b = c < d");
    }

    #[test]
    fn rejected_insert_leaves_builder_intact() {
        let mut b = OrderBuilder::new(abc());
        b.add_strict(0, 1).unwrap();
        let before = b.finish();
        assert!(b.add_strict(1, 0).is_err());
        assert!(b.add_indifferent(0, 1).is_err());
        assert_eq!(b.finish(), before);
    }

    #[test]
    fn restrict_and_top() {
        let p = PartialPreferenceOrder::from_labels(abc(), &[], &[("a", "c"), ("b", "c")]).unwrap();
        let r = p.restrict(&[0, 1]).unwrap();
        assert_eq!(r.relation(0, 1), Relation::Incomparable);
        assert_eq!(p.restrict(&[0, 1, 2]).unwrap(), p);
        assert_eq!(p.top_k(1), vec![2]);
        assert_eq!(p.top_k(2), vec![0, 1, 2]);
        // restriction keeps relations whose witnesses are dropped
        let chain = PartialPreferenceOrder::from_labels(abc(), &[], &[("a", "b"), ("b", "c")]).unwrap();
        let r = chain.restrict(&[0, 2]).unwrap();
        assert_eq!(r.relation(0, 1), Relation::Precedes);
    }

    #[test]
    fn extension_validation() {
        let p = PartialPreferenceOrder::from_labels(abc(), &[], &[("a", "c"), ("b", "c")]).unwrap();
        assert!(LinearExtension::new(&p, vec![1, 0, 2]).is_ok());
        assert!(LinearExtension::new(&p, vec![0, 2, 1]).is_err());
        assert!(LinearExtension::new(&p, vec![0, 1]).is_err());
        assert!(LinearExtension::new(&p, vec![0, 0, 2]).is_err());
        assert_eq!(LinearExtension::minimal(&p).classes(), &[0, 1, 2]);
    }
}
