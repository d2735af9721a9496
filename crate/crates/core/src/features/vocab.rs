use std::collections::HashMap;

use indexmap::IndexSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::extract::{FeatureBag, SENTIMENT_FEATURES};
use crate::{Error, Result};

/// Feature name → column index map. Indices are dense and in insertion
/// order; a frozen vocabulary rejects new names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    names: IndexSet<String>,
    frozen: bool,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// A frozen vocabulary over `names` in the given order.
    pub fn from_names<I: IntoIterator<Item = String>>(names: I) -> Result<Self> {
        let mut vocab = Vocabulary::new();
        for n in names {
            if !vocab.names.insert(n.clone()) {
                return Err(Error::Vocabulary(format!("duplicate name `{n}`")));
            }
        }
        vocab.freeze();
        Ok(vocab)
    }

    pub fn insert(&mut self, name: &str) -> Result<usize> {
        if let Some(i) = self.names.get_index_of(name) {
            return Ok(i);
        }
        if self.frozen {
            return Err(Error::Vocabulary(format!("frozen; cannot add `{name}`")));
        }
        Ok(self.names.insert_full(name.to_string()).0)
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.get_index_of(name)
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get_index(index).map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.names.iter())
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(deserializer)?;
        Vocabulary::from_names(names).map_err(serde::de::Error::custom)
    }
}

/// Builds a frozen vocabulary from training bags.
///
/// Keeps names present in at least `min_count` bags, in first-seen order.
/// The sentiment slots are always present. Fails if no bag name survives
/// the cutoff.
pub fn build_vocabulary(bags: &[FeatureBag], min_count: usize) -> Result<Vocabulary> {
    build_vocabulary_with(bags, min_count, &[])
}

/// [`build_vocabulary`] with extra `reserved` names that are always indexed
/// (after the surviving bag names), such as task indicators.
pub fn build_vocabulary_with(
    bags: &[FeatureBag],
    min_count: usize,
    reserved: &[String],
) -> Result<Vocabulary> {
    let min_count = min_count.max(1);
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut first_seen: Vec<&str> = Vec::new();
    for bag in bags {
        for name in bag.names() {
            let c = counts.entry(name).or_insert(0);
            if *c == 0 {
                first_seen.push(name);
            }
            *c += 1;
        }
    }

    let always = |n: &str| SENTIMENT_FEATURES.contains(&n) || reserved.iter().any(|r| r == n);
    let mut vocab = Vocabulary::new();
    let mut surviving = 0;
    for name in first_seen {
        if counts[name] >= min_count {
            vocab.insert(name)?;
            if !always(name) {
                surviving += 1;
            }
        } else if always(name) {
            vocab.insert(name)?;
        }
    }
    if surviving == 0 {
        return Err(Error::Vocabulary(format!(
            "no feature occurs in at least {min_count} of {} bags",
            bags.len()
        )));
    }
    for name in SENTIMENT_FEATURES.iter().copied().chain(reserved.iter().map(String::as_str)) {
        vocab.insert(name)?;
    }
    vocab.freeze();
    Ok(vocab)
}

/// Sorted `(index, value)` pairs with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    dim: usize,
}

impl SparseVector {
    /// Sorts and validates `entries`.
    pub fn new(mut entries: Vec<(usize, f64)>, dim: usize) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Data("duplicate index in sparse vector".into()));
        }
        if let Some(&(i, _)) = entries.last() {
            if i >= dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: i + 1,
                });
            }
        }
        if entries.iter().any(|e| !e.1.is_finite()) {
            return Err(Error::Data("non-finite sparse vector entry".into()));
        }
        Ok(SparseVector { entries, dim })
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            entries: Vec::new(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries (explicit zeros included).
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        debug_assert_eq!(dense.len(), self.dim);
        self.entries.iter().map(|&(i, v)| dense[i] * v).sum()
    }

    /// `dense += scale * self`.
    pub fn axpy(&self, scale: f64, dense: &mut [f64]) {
        for &(i, v) in &self.entries {
            dense[i] += scale * v;
        }
    }
}

/// Maps known names to their columns; unknown names are dropped.
pub fn vectorize(bag: &FeatureBag, vocab: &Vocabulary) -> SparseVector {
    let mut entries: Vec<(usize, f64)> = bag
        .iter()
        .filter_map(|(name, v)| vocab.index(name).map(|i| (i, v)))
        .collect();
    entries.sort_by_key(|e| e.0);
    SparseVector {
        entries,
        dim: vocab.dimension(),
    }
}
