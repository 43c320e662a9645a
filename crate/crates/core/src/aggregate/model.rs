use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::DistanceCache;
use super::normalize::{fit_normalization, NormalizationParams};
use super::weights::{
    cobra_weights_subset, consensual_weights, kernelcobra_weights_subset, ConsensusLevel, Weights,
};
use super::{PredictionMatrix, RowMajor};
use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, Kernel, KernelSpec};

/// How a query's weights over the stored rows are formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rule {
    /// Kernel applied to the whole prediction vector difference.
    Consensual {
        kernel: KernelSpec,
        bandwidth: Bandwidth,
    },
    /// Uniform weights over rows agreeing within `h` on at least `αM` coordinates.
    Cobra { h: f64, alpha: f64 },
    /// Sum of univariate unit-σ Gaussian kernels over the coordinates.
    KernelCobra { h: f64 },
}

impl Rule {
    pub fn consensual(kernel: KernelSpec, bandwidth: Bandwidth) -> Self {
        Rule::Consensual { kernel, bandwidth }
    }

    pub fn h(&self) -> f64 {
        match *self {
            Rule::Consensual { bandwidth, .. } => bandwidth.h,
            Rule::Cobra { h, .. } | Rule::KernelCobra { h } => h,
        }
    }
}

/// What to predict at a query that receives no kernel mass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroMassFallback {
    /// `0/0 = 0`: predict zero.
    #[default]
    PaperZero,
    /// Predict the mean stored response.
    TrainMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub values: Vec<f64>,
    /// Set for queries at which every weight was zero.
    pub zero_mass: Vec<bool>,
}

impl Prediction {
    pub fn n_zero_mass(&self) -> usize {
        self.zero_mass.iter().filter(|z| **z).count()
    }
}

enum Resolved {
    Kernel(Kernel),
    Cobra(f64, ConsensusLevel),
    KernelCobra(f64),
}

/// A fitted aggregate: the stored prediction matrix, its normalization and the weighting rule.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatorModel {
    predictions: PredictionMatrix,
    norm: NormalizationParams,
    rule: Rule,
    fallback: ZeroMassFallback,
    normalized: RowMajor,
    responses: Vec<f64>,
}

impl AggregatorModel {
    /// Fits the normalization on `predictions` and stores everything needed to predict.
    pub fn fit(predictions: PredictionMatrix, rule: Rule, fallback: ZeroMassFallback) -> Result<Self> {
        let norm = fit_normalization(predictions.rows())?;
        Self::from_parts(predictions, norm, rule, fallback)
    }

    pub(crate) fn from_parts(
        predictions: PredictionMatrix,
        norm: NormalizationParams,
        rule: Rule,
        fallback: ZeroMassFallback,
    ) -> Result<Self> {
        norm.validate()?;
        if norm.n_columns() != predictions.n_learners() {
            return Err(Error::Shape {
                context: "normalization columns",
                expected: predictions.n_learners(),
                found: norm.n_columns(),
            });
        }
        resolve(&rule, predictions.n_learners())?;
        let normalized = RowMajor::from_matrix(&norm.apply(predictions.rows())?);
        let responses = predictions.responses().iter().copied().collect();
        Ok(AggregatorModel {
            predictions,
            norm,
            rule,
            fallback,
            normalized,
            responses,
        })
    }

    pub fn predictions(&self) -> &PredictionMatrix {
        &self.predictions
    }

    pub fn normalization(&self) -> &NormalizationParams {
        &self.norm
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn fallback(&self) -> ZeroMassFallback {
        self.fallback
    }

    fn resolved(&self) -> Resolved {
        resolve(&self.rule, self.predictions.n_learners()).expect("rule validated at construction")
    }

    /// Distances between normalized `queries` and the stored rows.
    pub fn distance_cache(&self, queries: &DMatrix<f64>) -> Result<DistanceCache> {
        let q = self.normalize_queries(queries)?;
        let need_cheb = matches!(self.resolved(), Resolved::Kernel(k) if k.needs_chebyshev());
        Ok(DistanceCache::cross(&q, &self.normalized, need_cheb))
    }

    fn normalize_queries(&self, queries: &DMatrix<f64>) -> Result<RowMajor> {
        if queries.ncols() != self.predictions.n_learners() {
            return Err(Error::Shape {
                context: "query columns",
                expected: self.predictions.n_learners(),
                found: queries.ncols(),
            });
        }
        if queries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("queries"));
        }
        Ok(RowMajor::from_matrix(&self.norm.apply(queries)?))
    }

    /// Consensual weights of cached query `query_index`. Requires a kernel rule.
    pub fn weights(&self, cache: &DistanceCache, query_index: usize) -> Result<Weights> {
        match self.resolved() {
            Resolved::Kernel(k) => {
                if cache.n_train() != self.predictions.len() {
                    return Err(Error::Shape {
                        context: "distance cache training rows",
                        expected: self.predictions.len(),
                        found: cache.n_train(),
                    });
                }
                if k.needs_chebyshev() && !cache.has_chebyshev() {
                    return Err(Error::invalid("naive kernel needs a Chebyshev distance cache"));
                }
                Ok(consensual_weights(
                    &k,
                    cache.sq_row(query_index),
                    cache.chebyshev_row(query_index),
                ))
            }
            _ => Err(Error::invalid("cached weights are only defined for kernel rules")),
        }
    }

    /// Weights of a raw (unnormalized) query prediction vector under any rule.
    pub fn query_weights(&self, query: &[f64]) -> Result<Weights> {
        let q = DMatrix::from_row_slice(1, query.len(), query);
        let qn = self.normalize_queries(&q)?;
        Ok(self.weights_normalized(qn.row(0)))
    }

    fn weights_normalized(&self, q: &[f64]) -> Weights {
        let all: Vec<usize> = (0..self.normalized.n).collect();
        match self.resolved() {
            Resolved::Kernel(k) => {
                let sq: Vec<f64> = (0..self.normalized.n)
                    .map(|i| super::distance::sq_euclid(q, self.normalized.row(i)))
                    .collect();
                let cheb: Option<Vec<f64>> = k.needs_chebyshev().then(|| {
                    (0..self.normalized.n)
                        .map(|i| super::distance::chebyshev(q, self.normalized.row(i)))
                        .collect()
                });
                consensual_weights(&k, &sq, cheb.as_deref())
            }
            Resolved::Cobra(h, level) => cobra_weights_subset(&self.normalized, &all, q, h, level),
            Resolved::KernelCobra(h) => kernelcobra_weights_subset(&self.normalized, &all, q, h),
        }
    }

    fn finish(&self, w: &Weights) -> (f64, bool) {
        match w.combine(&self.responses) {
            Some(v) => (v, false),
            None => {
                let v = match self.fallback {
                    ZeroMassFallback::PaperZero => 0.0,
                    ZeroMassFallback::TrainMean => {
                        self.responses.iter().sum::<f64>() / self.responses.len() as f64
                    }
                };
                (v, true)
            }
        }
    }

    /// Predicts every row of `queries` (raw base learner predictions, `q × M`).
    pub fn predict(&self, queries: &DMatrix<f64>) -> Result<Prediction> {
        let out: Vec<(f64, bool)> = match self.resolved() {
            Resolved::Kernel(k) => {
                let cache = self.distance_cache(queries)?;
                (0..cache.n_queries())
                    .into_par_iter()
                    .map(|q| {
                        let w = consensual_weights(&k, cache.sq_row(q), cache.chebyshev_row(q));
                        self.finish(&w)
                    })
                    .collect()
            }
            _ => {
                let qn = self.normalize_queries(queries)?;
                (0..qn.n)
                    .into_par_iter()
                    .map(|q| self.finish(&self.weights_normalized(qn.row(q))))
                    .collect()
            }
        };
        let (values, zero_mass) = out.into_iter().unzip();
        Ok(Prediction { values, zero_mass })
    }
}

fn resolve(rule: &Rule, n_learners: usize) -> Result<Resolved> {
    let check_h = |h: f64| {
        if h.is_finite() && h > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("bandwidth must be positive, got {h}")))
        }
    };
    match *rule {
        Rule::Consensual { kernel, bandwidth } => Ok(Resolved::Kernel(Kernel::new(kernel, bandwidth)?)),
        Rule::Cobra { h, alpha } => {
            check_h(h)?;
            Ok(Resolved::Cobra(h, ConsensusLevel::from_alpha(alpha, n_learners)?))
        }
        Rule::KernelCobra { h } => {
            check_h(h)?;
            Ok(Resolved::KernelCobra(h))
        }
    }
}
