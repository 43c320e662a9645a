use rayon::prelude::*;

use super::descent::{gradient_descent, GdConfig, GdOutcome};
use super::folds::CvPlan;
use super::grid::{grid_search, GridConfig, GridOutcome};
use crate::aggregate::{
    cobra_weights_subset, fit_normalization, kernelcobra_weights_subset, smooth, smooth_with_dh,
    ConsensusLevel, DistanceCache, PredictionMatrix, RowMajor, Rule, Weights,
};
use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, Kernel, KernelSpec};

/// Distances between one validation fold and the remaining folds.
#[derive(Debug, Clone)]
struct FoldBlock {
    validation: Vec<usize>,
    train: Vec<usize>,
    train_y: Vec<f64>,
    /// `|validation| × |train|`, row-major.
    sq: Vec<f64>,
    cheb: Vec<f64>,
}

impl FoldBlock {
    fn sq_row(&self, a: usize) -> &[f64] {
        let n = self.train.len();
        &self.sq[a * n..(a + 1) * n]
    }

    fn cheb_row(&self, a: usize) -> &[f64] {
        let n = self.train.len();
        &self.cheb[a * n..(a + 1) * n]
    }
}

/// Cross-validation loss over a fixed prediction matrix and fold plan.
///
/// Rows are normalized once with min/max fitted on the whole aggregation
/// sample; per-fold distance blocks are cut from a single symmetric cache.
#[derive(Debug, Clone)]
pub struct CvProblem {
    normalized: RowMajor,
    responses: Vec<f64>,
    plan: CvPlan,
    blocks: Vec<FoldBlock>,
}

impl CvProblem {
    pub fn new(data: &PredictionMatrix, plan: CvPlan) -> Result<Self> {
        if plan.len() != data.len() {
            return Err(Error::Shape {
                context: "fold plan rows",
                expected: data.len(),
                found: plan.len(),
            });
        }
        let norm = fit_normalization(data.rows())?;
        let normalized = RowMajor::from_matrix(&norm.apply(data.rows())?);
        let cache = DistanceCache::symmetric(&normalized, true);
        let responses: Vec<f64> = data.responses().iter().copied().collect();
        let blocks = (0..plan.kappa())
            .map(|p| {
                let (validation, train) = plan.split(p);
                if train.is_empty() {
                    return Err(Error::invalid("a validation fold covers the whole sample"));
                }
                let mut sq = Vec::with_capacity(validation.len() * train.len());
                let mut cheb = Vec::with_capacity(validation.len() * train.len());
                for &j in &validation {
                    for &i in &train {
                        sq.push(cache.sq(j, i));
                        cheb.push(cache.cheb(j, i).expect("chebyshev requested"));
                    }
                }
                let train_y = train.iter().map(|&i| responses[i]).collect();
                Ok(FoldBlock {
                    validation,
                    train,
                    train_y,
                    sq,
                    cheb,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CvProblem {
            normalized,
            responses,
            plan,
            blocks,
        })
    }

    pub fn plan(&self) -> &CvPlan {
        &self.plan
    }

    pub fn n_learners(&self) -> usize {
        self.normalized.m
    }

    /// Sums per-fold values computed in parallel, in fold order.
    fn fold_sum<F>(&self, per_fold: F) -> (f64, f64)
    where
        F: Fn(&FoldBlock) -> (f64, f64) + Sync + Send,
    {
        let parts: Vec<(f64, f64)> = self.blocks.par_iter().map(per_fold).collect();
        let k = self.plan.kappa() as f64;
        let (a, b) = parts
            .into_iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        (a / k, b / k)
    }

    fn weights_loss<F>(&self, weights: F) -> f64
    where
        F: Fn(&FoldBlock, usize) -> Weights + Sync + Send,
    {
        self.fold_sum(|block| {
            let mut sse = 0.0;
            for (a, &j) in block.validation.iter().enumerate() {
                let g = weights(block, a).combine(&block.train_y).unwrap_or(0.0);
                let r = g - self.responses[j];
                sse += r * r;
            }
            (sse, 0.0)
        })
        .0
    }

    /// `φ^κ(h)` for any weighting rule; zero-mass validation points predict 0.
    pub fn error(&self, rule: &Rule) -> Result<f64> {
        match *rule {
            Rule::Consensual { kernel, bandwidth } => {
                let k = Kernel::new(kernel, bandwidth)?;
                Ok(self.kernel_error(&k))
            }
            Rule::Cobra { h, alpha } => {
                check_h(h)?;
                let level = ConsensusLevel::from_alpha(alpha, self.n_learners())?;
                Ok(self.weights_loss(|block, a| {
                    let q = self.normalized.row(block.validation[a]);
                    cobra_weights_subset(&self.normalized, &block.train, q, h, level)
                }))
            }
            Rule::KernelCobra { h } => {
                check_h(h)?;
                Ok(self.weights_loss(|block, a| {
                    let q = self.normalized.row(block.validation[a]);
                    kernelcobra_weights_subset(&self.normalized, &block.train, q, h)
                }))
            }
        }
    }

    fn kernel_error(&self, k: &Kernel) -> f64 {
        let use_cheb = k.needs_chebyshev();
        self.fold_sum(|block| {
            let mut sse = 0.0;
            for (a, &j) in block.validation.iter().enumerate() {
                let cheb = use_cheb.then(|| block.cheb_row(a));
                let g = smooth(k, block.sq_row(a), cheb, &block.train_y).unwrap_or(0.0);
                let r = g - self.responses[j];
                sse += r * r;
            }
            (sse, 0.0)
        })
        .0
    }

    /// `(φ^κ(h), dφ^κ/dh)` for a differentiable kernel (Gaussian/Exp4, inverse scale).
    pub fn error_and_grad(&self, spec: &KernelSpec, bandwidth: &Bandwidth) -> Result<(f64, f64)> {
        let k = Kernel::new(*spec, *bandwidth)?;
        k.require_differentiable()?;
        Ok(self.fold_sum(|block| {
            let (mut sse, mut grad) = (0.0, 0.0);
            for (a, &j) in block.validation.iter().enumerate() {
                let y = self.responses[j];
                match smooth_with_dh(&k, block.sq_row(a), &block.train_y) {
                    Some((g, dg)) => {
                        sse += (g - y) * (g - y);
                        grad += 2.0 * (g - y) * dg;
                    }
                    None => sse += y * y,
                }
            }
            (sse, grad)
        }))
    }

    /// Grid search in the scale parametrization.
    pub fn grid_search(&self, spec: &KernelSpec, grid: &GridConfig) -> Result<GridOutcome> {
        spec.validate()?;
        grid_search(grid, |h| self.error(&Rule::consensual(*spec, Bandwidth::scale(h))))
    }

    /// Gradient descent in the inverse-scale parametrization.
    pub fn gradient_descent(&self, spec: &KernelSpec, cfg: &GdConfig) -> Result<GdOutcome> {
        Kernel::new(*spec, Bandwidth::inverse_scale(1.0))?.require_differentiable()?;
        gradient_descent(cfg, |h| self.error_and_grad(spec, &Bandwidth::inverse_scale(h)))
    }

    /// Joint search over `α ∈ {1/M, …, 1}` and a bandwidth grid for the classical rule.
    /// Ties keep the smaller `α`, then the smaller `h`.
    pub fn cobra_search(&self, grid: &GridConfig) -> Result<(f64, GridOutcome)> {
        let mut best: Option<(f64, GridOutcome)> = None;
        for level in ConsensusLevel::all(self.n_learners()) {
            let alpha = level.alpha();
            let out = grid_search(grid, |h| self.error(&Rule::Cobra { h, alpha }))?;
            if best.as_ref().map_or(true, |(_, b)| out.loss < b.loss) {
                best = Some((alpha, out));
            }
        }
        Ok(best.expect("at least one consensus level"))
    }

    pub fn kernelcobra_search(&self, grid: &GridConfig) -> Result<GridOutcome> {
        grid_search(grid, |h| self.error(&Rule::KernelCobra { h }))
    }
}

fn check_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("bandwidth must be positive, got {h}")))
    }
}

/// `φ^κ(h)` for a kernel and bandwidth.
pub fn cv_error(
    data: &PredictionMatrix,
    plan: &CvPlan,
    kernel: &KernelSpec,
    param: &Bandwidth,
) -> Result<f64> {
    CvProblem::new(data, plan.clone())?.error(&Rule::consensual(*kernel, *param))
}

/// `dφ^κ/dh` for Gaussian or Exp4 under the inverse-scale parametrization.
pub fn cv_error_grad(
    data: &PredictionMatrix,
    plan: &CvPlan,
    kernel: &KernelSpec,
    param: &Bandwidth,
) -> Result<f64> {
    Ok(CvProblem::new(data, plan.clone())?.error_and_grad(kernel, param)?.1)
}
