//! Text syntax for orders.
//!
//! A complete order lists outcomes least preferred first, `<` for strict
//! preference and `=` for indifference: `a = b < c`. A partial order is a
//! `;`-separated list of such chains, each contributing its relations:
//! `a < c; b < c; d = e`. The empty string is the vacuous partial order.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::orders::{OrderBuilder, PartialPreferenceOrder, WeakOrder};
use crate::space::OutcomeSpace;

fn syntax(message: impl Into<String>) -> Error {
    Error::Syntax {
        line: 1,
        message: message.into(),
    }
}

/// Splits a chain into tiers of trimmed labels.
fn chain_tiers(text: &str) -> Result<Vec<Vec<&str>>> {
    text.split('<')
        .map(|tier| {
            tier.split('=')
                .map(|label| {
                    let label = label.trim();
                    if label.is_empty() {
                        Err(syntax(format!("empty outcome name in `{}`", text.trim())))
                    } else {
                        Ok(label)
                    }
                })
                .collect()
        })
        .collect()
}

fn constraints(text: &str) -> impl Iterator<Item = &str> {
    text.split(';').map(str::trim).filter(|c| !c.is_empty())
}

pub fn parse_weak_order(space: &Arc<OutcomeSpace>, text: &str) -> Result<WeakOrder> {
    if text.contains(';') {
        return Err(syntax("a complete order is a single chain"));
    }
    let tiers = chain_tiers(text)?;
    WeakOrder::from_labels(space.clone(), &tiers)
}

/// Parses a complete order, taking the outcome space from the labels in the
/// order they appear.
pub fn weak_order_with_inferred_space(text: &str) -> Result<WeakOrder> {
    let tiers = chain_tiers(text)?;
    let space = OutcomeSpace::new(tiers.iter().flatten().copied())?;
    WeakOrder::from_labels(space, &tiers)
}

pub fn parse_partial_order(space: &Arc<OutcomeSpace>, text: &str) -> Result<PartialPreferenceOrder> {
    let mut b = OrderBuilder::new(space.clone());
    for chain in constraints(text) {
        let tiers = chain_tiers(chain)?;
        let tiers: Vec<Vec<usize>> = tiers
            .iter()
            .map(|t| t.iter().map(|l| space.index_of(l)).collect())
            .collect::<Result<_>>()?;
        for tier in &tiers {
            for w in tier.windows(2) {
                b.add_indifferent(w[0], w[1])?;
            }
        }
        for w in tiers.windows(2) {
            b.add_strict(w[0][0], w[1][0])?;
        }
    }
    Ok(b.finish())
}

/// Parses a partial order whose space is every label mentioned, in order of
/// first appearance.
pub fn partial_order_with_inferred_space(text: &str) -> Result<PartialPreferenceOrder> {
    let mut labels: Vec<&str> = Vec::new();
    for chain in constraints(text) {
        for l in chain_tiers(chain)?.into_iter().flatten() {
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
    }
    let space = OutcomeSpace::new(labels)?;
    parse_partial_order(&space, text)
}

impl fmt::Display for PartialPreferenceOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let space = self.space();
        let mut parts: Vec<String> = Vec::new();
        for class in self.classes().iter().filter(|c| c.len() > 1) {
            let names: Vec<&str> = class.iter().map(|&o| space.label(o)).collect();
            parts.push(names.join(" = "));
        }
        for &(x, y) in self.strict_edges() {
            parts.push(format!(
                "{} < {}",
                space.label(self.classes()[x][0]),
                space.label(self.classes()[y][0])
            ));
        }
        write!(f, "{}", parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::Relation;

    #[test]
    fn weak_syntax() {
        let w = weak_order_with_inferred_space("B<M<P").unwrap();
        assert_eq!(w.space().labels(), &["B", "M", "P"]);
        assert_eq!(w.to_string(), "B < M < P");
        let s = w.space().clone();
        let t = parse_weak_order(&s, " M = B < P ").unwrap();
        assert_eq!(t.to_string(), "B = M < P");
        assert!(parse_weak_order(&s, "B < M").is_err());
        assert!(parse_weak_order(&s, "B < < M < P").is_err());
        assert!(parse_weak_order(&s, "B < M; P").is_err());
    }

    #[test]
    fn partial_syntax() {
        let p = partial_order_with_inferred_space("a < c; b < c; d = e").unwrap();
        assert_eq!(p.space().labels(), &["a", "c", "b", "d", "e"]);
        assert_eq!(p.relation_of_labels("a", "b"), Relation::Incomparable);
        assert_eq!(p.relation_of_labels("d", "e"), Relation::Indifferent);
        let again = parse_partial_order(p.space(), &p.to_string()).unwrap();
        assert_eq!(again, p);
        let s = OutcomeSpace::new(["a", "b", "c"]).unwrap();
        assert_eq!(parse_partial_order(&s, "").unwrap(), PartialPreferenceOrder::vacuous(s.clone()));
        assert!(matches!(
            parse_partial_order(&s, "a < d"),
            Err(Error::UnknownOutcome(l)) if l == "d"
        ));
        assert!(matches!(parse_partial_order(&s, "a < b; b < a"), Err(Error::Cycle(_, _))));
    }

    impl PartialPreferenceOrder {
        fn relation_of_labels(&self, a: &str, b: &str) -> Relation {
            let s = self.space();
            self.relation(s.index_of(a).unwrap(), s.index_of(b).unwrap())
        }
    }
}
