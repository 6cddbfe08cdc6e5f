//! Labeled finite state spaces.
//!
//! A state space is an ordered list of distinct labels; every vector and
//! matrix in the crate is indexed by the position of a label in this list.
//! Spaces are cheap to clone (shared immutable interior) and compare equal
//! exactly when their label lists agree.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct StateSpace {
    inner: Arc<Inner>,
}

struct Inner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl StateSpace {
    /// Builds a space from distinct, nonempty label list.
    pub fn new<I, L>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidInput("state space needs at least one state".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate state label {l:?}")));
            }
        }
        Ok(StateSpace { inner: Arc::new(Inner { labels, index }) })
    }

    pub fn size(&self) -> usize {
        self.inner.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.inner.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index.get(label).copied()
    }

    /// Index of a label, or an invalid-input error naming it.
    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown state label {label:?}")))
    }

    /// Sorted indices of a subset given by labels; rejects unknowns and repeats.
    pub fn subset(&self, labels: &[impl AsRef<str>]) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(labels.len());
        for l in labels {
            idx.push(self.require(l.as_ref())?);
        }
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("subset contains a repeated state".into()));
        }
        Ok(idx)
    }

    /// Errors unless both values live on the same space.
    pub fn check_same(&self, other: &StateSpace, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "{what}: {:?} vs {:?}",
                self.labels(),
                other.labels()
            )))
        }
    }
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.labels == other.inner.labels
    }
}

impl Eq for StateSpace {}

impl fmt::Debug for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("StateSpace").field(&self.inner.labels).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_labels_are_rejected() {
        assert!(StateSpace::new(["a", "b", "a"]).is_err());
    }

    #[test]
    fn empty_space_is_rejected() {
        assert!(StateSpace::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn lookup_round_trips() {
        let s = StateSpace::new(["s0", "s1", "s2"]).unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.index_of("s1"), Some(1));
        assert_eq!(s.label(2), "s2");
        assert!(s.require("missing").is_err());
    }

    #[test]
    fn equality_is_by_label_list() {
        let a = StateSpace::new(["x", "y"]).unwrap();
        let b = StateSpace::new(["x", "y"]).unwrap();
        let c = StateSpace::new(["y", "x"]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn subset_is_sorted_and_validated() {
        let s = StateSpace::new(["s0", "s1", "s2"]).unwrap();
        let idx = s.subset(&["s2", "s0"]).unwrap();
        assert_eq!(idx, vec![0, 2]);
        assert!(s.subset(&["s0", "s0"]).is_err());
    }
}
