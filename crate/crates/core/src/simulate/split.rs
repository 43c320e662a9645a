use rand::seq::SliceRandom;

use super::{stream_rng, Dataset, INPUT_STREAM};
use crate::error::{Error, Result};

/// Fractions for the three-way split.
///
/// `round(test_fraction · n)` points go to the test set. Of the rest,
/// `k = ⌈dk_fraction · n_train⌉` train the base learners and the remaining
/// `ℓ = n_train − k` form the aggregation sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub test_fraction: f64,
    pub dk_fraction: f64,
    pub seed: u64,
}

impl SplitPlan {
    pub fn new(seed: u64) -> Self {
        SplitPlan {
            test_fraction: 0.2,
            dk_fraction: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("test_fraction", self.test_fraction), ("dk_fraction", self.dk_fraction)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid(format!("{name} must be in (0, 1), got {f}")));
            }
        }
        Ok(())
    }

    /// `(n_test, k, ℓ)` for `n` points.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let n_test = (self.test_fraction * n as f64).round() as usize;
        let n_train = n - n_test.min(n);
        let k = ((self.dk_fraction * n_train as f64).ceil() as usize).min(n_train);
        (n_test, k, n_train - k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    /// Trains the base learners.
    pub learn: Dataset,
    /// Aggregation sample.
    pub aggregate: Dataset,
    pub test: Dataset,
    /// Original row indices of each part.
    pub learn_idx: Vec<usize>,
    pub aggregate_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

pub const MIN_SPLIT_SIZE: usize = 10;

pub fn split_data(data: &Dataset, plan: &SplitPlan) -> Result<DataSplit> {
    plan.validate()?;
    let n = data.len();
    if n < MIN_SPLIT_SIZE {
        return Err(Error::invalid(format!("need at least {MIN_SPLIT_SIZE} points to split, got {n}")));
    }
    if data.x.nrows() != n {
        return Err(Error::Shape {
            context: "split inputs vs responses",
            expected: n,
            found: data.x.nrows(),
        });
    }
    let (n_test, k, l) = plan.sizes(n);
    if n_test == 0 || k == 0 || l == 0 {
        return Err(Error::invalid(format!("split of {n} points leaves an empty part")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(plan.seed, INPUT_STREAM));
    let test_idx = order[..n_test].to_vec();
    let learn_idx = order[n_test..n_test + k].to_vec();
    let aggregate_idx = order[n_test + k..].to_vec();
    Ok(DataSplit {
        learn: data.select(&learn_idx),
        aggregate: data.select(&aggregate_idx),
        test: data.select(&test_idx),
        learn_idx,
        aggregate_idx,
        test_idx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn data(n: usize) -> Dataset {
        Dataset {
            x: DMatrix::from_fn(n, 2, |i, j| (i * 2 + j) as f64),
            y: DVector::from_fn(n, |i, _| i as f64),
        }
    }

    #[test]
    fn default_sizes_for_hundred() {
        let s = split_data(&data(100), &SplitPlan::new(1)).unwrap();
        assert_eq!((s.test.len(), s.learn.len(), s.aggregate.len()), (20, 40, 40));
    }

    #[test]
    fn rows_follow_indices() {
        let d = data(30);
        let s = split_data(&d, &SplitPlan::new(4)).unwrap();
        for (part, idx) in [(&s.learn, &s.learn_idx), (&s.aggregate, &s.aggregate_idx), (&s.test, &s.test_idx)] {
            for (r, &i) in idx.iter().enumerate() {
                assert_eq!(part.y[r], i as f64);
                assert_eq!(part.x[(r, 1)], (i * 2 + 1) as f64);
            }
        }
    }

    #[test]
    fn same_seed_same_partition() {
        let a = split_data(&data(57), &SplitPlan::new(9)).unwrap();
        let b = split_data(&data(57), &SplitPlan::new(9)).unwrap();
        assert_eq!(a, b);
        let c = split_data(&data(57), &SplitPlan::new(10)).unwrap();
        assert_ne!(a.test_idx, c.test_idx);
    }

    #[test]
    fn rejects_small_or_bad_plans() {
        assert!(split_data(&data(9), &SplitPlan::new(0)).is_err());
        let bad = SplitPlan { test_fraction: 1.0, ..SplitPlan::new(0) };
        assert!(split_data(&data(50), &bad).is_err());
    }

    proptest! {
        #[test]
        fn partition_is_exhaustive(n in 10usize..400, seed in any::<u64>()) {
            let s = split_data(&data(n), &SplitPlan::new(seed)).unwrap();
            let mut all: Vec<usize> = s.learn_idx.iter().chain(&s.aggregate_idx).chain(&s.test_idx).copied().collect();
            prop_assert_eq!(all.len(), n);
            all.sort_unstable();
            prop_assert!(all.iter().enumerate().all(|(i, &v)| i == v));
            prop_assert!(s.learn.len() >= s.aggregate.len());
            prop_assert!(s.learn.len() - s.aggregate.len() <= 1);
        }
    }
}
