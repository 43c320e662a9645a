use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Assignment of the aggregation sample to κ folds.
///
/// Fold ids are zero-based (`0..kappa`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvPlan {
    kappa: usize,
    fold_assignment: Vec<usize>,
    seed: u64,
}

impl CvPlan {
    pub const DEFAULT_KAPPA: usize = 5;

    /// Seeded shuffle of `0..n`, then round-robin fold assignment.
    pub fn new(n: usize, kappa: usize, seed: u64) -> Result<Self> {
        if kappa < 2 {
            return Err(Error::invalid(format!("need at least 2 folds, got {kappa}")));
        }
        if n < kappa {
            return Err(Error::invalid(format!(
                "cannot split {n} rows into {kappa} non-empty folds"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut fold_assignment = vec![0; n];
        for (pos, &row) in order.iter().enumerate() {
            fold_assignment[row] = pos % kappa;
        }
        Ok(CvPlan {
            kappa,
            fold_assignment,
            seed,
        })
    }

    /// Uses an explicit assignment; every fold must be non-empty and sizes may differ by at most one.
    pub fn from_assignment(kappa: usize, fold_assignment: Vec<usize>) -> Result<Self> {
        if kappa < 2 {
            return Err(Error::invalid(format!("need at least 2 folds, got {kappa}")));
        }
        let mut sizes = vec![0usize; kappa];
        for &f in &fold_assignment {
            if f >= kappa {
                return Err(Error::invalid(format!("fold id {f} out of range for kappa {kappa}")));
            }
            sizes[f] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        if *lo == 0 {
            return Err(Error::invalid("every fold must be non-empty"));
        }
        if hi - lo > 1 {
            return Err(Error::invalid("fold sizes may differ by at most one"));
        }
        Ok(CvPlan {
            kappa,
            fold_assignment,
            seed: 0,
        })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.fold_assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_assignment.is_empty()
    }

    pub fn fold_assignment(&self) -> &[usize] {
        &self.fold_assignment
    }

    /// `(validation, training)` row indices for fold `p`, each ascending.
    pub fn split(&self, p: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.len()).partition(|&i| self.fold_assignment[i] == p)
    }
}
