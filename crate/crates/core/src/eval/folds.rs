use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Snippet-level assignment of ids to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub k: usize,
    pub tune_fold: usize,
    pub assignment: BTreeMap<String, usize>,
}

/// Shuffles `ids` with `seed` and deals them round-robin into `k` folds.
pub fn make_folds(ids: &[String], k: usize, seed: u64, tune_fold: usize) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if tune_fold >= k {
        return Err(Error::Config(format!("tune fold {tune_fold} not in 0..{k}")));
    }
    if ids.len() < k {
        return Err(Error::Data(format!("{} snippets cannot fill {k} folds", ids.len())));
    }
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = BTreeMap::new();
    for (pos, &idx) in order.iter().enumerate() {
        if assignment.insert(ids[idx].clone(), pos % k).is_some() {
            return Err(Error::Data(format!("duplicate snippet id `{}`", ids[idx])));
        }
    }
    Ok(FoldPlan {
        seed,
        k,
        tune_fold,
        assignment,
    })
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in self.assignment.values() {
            s[f] += 1;
        }
        s
    }

    /// Folds used for reported metrics, in order.
    pub fn report_folds(&self) -> Vec<usize> {
        (0..self.k).filter(|&f| f != self.tune_fold).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn sizes_and_determinism() {
        let p = make_folds(&ids(10), 5, 1, 0).unwrap();
        assert_eq!(p.sizes(), vec![2; 5]);
        let p = make_folds(&ids(11), 5, 1, 0).unwrap();
        let mut s = p.sizes();
        s.sort();
        assert_eq!(s, vec![2, 2, 2, 2, 3]);
        assert_eq!(make_folds(&ids(11), 5, 1, 0).unwrap(), p);
        assert_ne!(make_folds(&ids(11), 5, 2, 0).unwrap(), p);
        assert_eq!(p.report_folds(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn errors() {
        assert!(make_folds(&ids(4), 5, 1, 0).is_err());
        assert!(make_folds(&ids(10), 5, 1, 5).is_err());
        let mut dup = ids(6);
        dup[5] = "s0".into();
        assert!(make_folds(&dup, 5, 1, 0).is_err());
    }
}
