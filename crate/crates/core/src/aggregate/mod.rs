//! Consensual aggregation in prediction space.
//!
//! A fitted aggregate is memory-based: it keeps the `ℓ × M` matrix of base
//! learner predictions on the aggregation sample together with the responses,
//! and predicts a query as a weighted average of those responses. Weights come
//! from a kernel applied to the distance between the query's prediction
//! vector and each stored row ([`Rule::Consensual`]), from the unanimity or
//! α-majority indicator rule ([`Rule::Cobra`]), or from a sum of
//! per-coordinate Gaussian kernels ([`Rule::KernelCobra`]).

mod distance;
mod model;
mod normalize;
mod weights;

pub use distance::{build_distance_cache, DistanceCache};
pub use model::{AggregatorModel, Prediction, Rule, ZeroMassFallback};
pub use normalize::{fit_normalization, NormalizationParams};
pub use weights::{
    cobra_weights, consensual_weights, kernelcobra_weights, smooth, smooth_with_dh,
    ConsensusLevel, Weights,
};

pub(crate) use weights::{cobra_weights_subset, kernelcobra_weights_subset};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Base learner predictions on the aggregation sample plus its responses.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    rows: DMatrix<f64>,
    responses: DVector<f64>,
    learner_names: Vec<String>,
}

impl PredictionMatrix {
    pub fn new(
        rows: DMatrix<f64>,
        responses: DVector<f64>,
        learner_names: Vec<String>,
    ) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::invalid("prediction matrix needs at least one row and one column"));
        }
        if responses.len() != rows.nrows() {
            return Err(Error::Shape {
                context: "responses vs prediction rows",
                expected: rows.nrows(),
                found: responses.len(),
            });
        }
        if learner_names.len() != rows.ncols() {
            return Err(Error::Shape {
                context: "learner names vs prediction columns",
                expected: rows.ncols(),
                found: learner_names.len(),
            });
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prediction matrix"));
        }
        if responses.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("responses"));
        }
        Ok(PredictionMatrix {
            rows,
            responses,
            learner_names,
        })
    }

    /// Builds a matrix with generated learner names `r1..rM`.
    pub fn unnamed(rows: DMatrix<f64>, responses: DVector<f64>) -> Result<Self> {
        let names = (1..=rows.ncols()).map(|m| format!("r{m}")).collect();
        Self::new(rows, responses, names)
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.responses
    }

    pub fn learner_names(&self) -> &[String] {
        &self.learner_names
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn n_learners(&self) -> usize {
        self.rows.ncols()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let rows = self.rows.select_rows(indices);
        let responses = self.responses.select_rows(indices);
        Self::new(rows, responses, self.learner_names.clone())
    }
}

/// Row-major copy of a matrix, for inner loops that walk rows.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RowMajor {
    pub n: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl RowMajor {
    pub fn from_matrix(x: &DMatrix<f64>) -> Self {
        let (n, m) = x.shape();
        let mut data = Vec::with_capacity(n * m);
        for i in 0..n {
            data.extend(x.row(i).iter());
        }
        RowMajor { n, m, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }
}
