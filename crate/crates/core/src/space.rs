use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A finite set of named outcomes. Outcomes are addressed by their index in
/// declaration order; labels only matter at the text boundary.
#[derive(Debug, Clone)]
pub struct OutcomeSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for OutcomeSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for OutcomeSpace {}

impl OutcomeSpace {
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Arc::new(Self { labels, index }))
    }

    /// Labels `s1, s2, ..., sn`.
    pub fn numbered(n: usize) -> Result<Arc<Self>> {
        Self::new((1..=n).map(|i| format!("s{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false: empty spaces cannot be built.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownOutcome(format!("#{i}")))
        }
    }
}

impl fmt::Display for OutcomeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels.join(", "))
    }
}

pub(crate) fn same_space(a: &Arc<OutcomeSpace>, b: &Arc<OutcomeSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_labels() {
        assert_eq!(OutcomeSpace::new(Vec::<String>::new()).unwrap_err(), Error::EmptySpace);
        assert_eq!(OutcomeSpace::new(["a", ""]).unwrap_err(), Error::EmptyLabel);
        assert_eq!(
            OutcomeSpace::new(["a", "b", "a"]).unwrap_err(),
            Error::DuplicateLabel("a".into())
        );
    }

    #[test]
    fn lookup() {
        let s = OutcomeSpace::new(["B", "M", "P"]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.index_of("P").unwrap(), 2);
        assert!(matches!(s.index_of("Q"), Err(Error::UnknownOutcome(_))));
        assert_eq!(OutcomeSpace::numbered(2).unwrap().labels(), &["s1", "s2"]);
    }
}
