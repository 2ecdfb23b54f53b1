use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_frac: 0.7,
            val_frac: 0.15,
            test_frac: 0.15,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.val_frac, self.test_frac];
        if fracs.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::invalid("split", format!("fractions {fracs:?} outside [0, 1]")));
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("split", format!("fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// (train, val, test) sizes: floors for val and test, remainder to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let floor = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
        let val = floor(self.val_frac);
        let test = floor(self.test_frac);
        (n - val - test, val, test)
    }
}

/// Seeded Fisher–Yates shuffle followed by a (train, val, test) cut.
pub fn split_corpus<T>(items: Vec<T>, spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    spec.validate()?;
    if items.len() < 3 {
        return Err(Error::invalid("split", format!("need at least 3 items, got {}", items.len())));
    }
    let (n_train, n_val, _) = spec.sizes(items.len());
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    let mut take = |idx: &[usize]| -> Vec<T> {
        idx.iter().map(|&i| slots[i].take().expect("permutation")).collect()
    };
    let train = take(&order[..n_train]);
    let val = take(&order[n_train..n_train + n_val]);
    let test = take(&order[n_train + n_val..]);
    Ok((train, val, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(seed: u64) -> SplitSpec {
        SplitSpec {
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn sizes_follow_remainder_rule() {
        let (a, b, c) = split_corpus((0..100).collect(), &spec(7)).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (70, 15, 15));
        let (a, b, c) = split_corpus((0..10).collect(), &spec(7)).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (8, 1, 1));
    }

    #[test]
    fn deterministic_for_seed() {
        let x = split_corpus((0..50).collect::<Vec<_>>(), &spec(3)).unwrap();
        let y = split_corpus((0..50).collect::<Vec<_>>(), &spec(3)).unwrap();
        assert_eq!(x, y);
        let z = split_corpus((0..50).collect::<Vec<_>>(), &spec(4)).unwrap();
        assert_ne!(x, z);
    }

    #[test]
    fn bad_specs_rejected() {
        let bad = SplitSpec {
            train_frac: 0.7,
            val_frac: 0.2,
            test_frac: 0.2,
            seed: 0,
        };
        assert!(split_corpus((0..10).collect::<Vec<_>>(), &bad).is_err());
        assert!(split_corpus(vec![1, 2], &spec(0)).is_err());
    }

    proptest! {
        #[test]
        fn partition_is_exhaustive_and_disjoint(n in 3usize..300, seed in any::<u64>()) {
            let (a, b, c) = split_corpus((0..n).collect::<Vec<_>>(), &spec(seed)).unwrap();
            let mut all: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
