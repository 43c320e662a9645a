//! Synthetic regression benchmarks and the train/aggregate/test split.
//!
//! Inputs are either i.i.d. `Uniform(−1, 1)` or rows of `N(0, Σ)` with
//! `Σ_ij = 2^{−|i−j|}`. Responses come from ten fixed models
//! ([`SimModel`]). Inputs and noise are drawn from two independent ChaCha
//! streams of the same seed, so the noise can vary while `X` stays fixed.

mod models;
mod split;

pub use models::{model_response, SimModel};
pub use split::{split_data, DataSplit, SplitPlan};

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub(crate) const INPUT_STREAM: u64 = 0;
pub(crate) const NOISE_STREAM: u64 = 1;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputDesign {
    Uncorrelated,
    Correlated,
}

impl fmt::Display for InputDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputDesign::Uncorrelated => "uncorrelated",
            InputDesign::Correlated => "correlated",
        })
    }
}

impl FromStr for InputDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uncorrelated" | "uniform" => Ok(InputDesign::Uncorrelated),
            "correlated" | "gaussian" => Ok(InputDesign::Correlated),
            other => Err(Error::invalid(format!("unknown design `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimDesign {
    pub model: SimModel,
    pub design: InputDesign,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl SimDesign {
    /// The model's reference sample size and dimension.
    pub fn new(model: SimModel, design: InputDesign, seed: u64) -> Self {
        let (n, d) = model.default_size();
        SimDesign {
            model,
            design,
            n,
            d,
            seed,
        }
    }

    pub fn with_size(mut self, n: usize, d: usize) -> Self {
        self.n = n;
        self.d = d;
        self
    }
}

/// Inputs and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: self.y.select_rows(idx),
        }
    }
}

pub const MAX_CORRELATED_DIM: usize = 5000;

/// `Σ_ij = 2^{−|i−j|}`.
pub fn covariance(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| 0.5f64.powi(i.abs_diff(j) as i32))
}

/// Lower-triangular `L` with `L Lᵀ = Σ`.
pub fn covariance_factor(d: usize) -> Result<DMatrix<f64>> {
    if d > MAX_CORRELATED_DIM {
        return Err(Error::invalid(format!(
            "correlated design limited to d <= {MAX_CORRELATED_DIM} (Σ is dense, d² memory); got d = {d}"
        )));
    }
    nalgebra::linalg::Cholesky::new(covariance(d))
        .map(|c| c.l())
        .ok_or_else(|| Error::Numeric("covariance is not positive definite".into()))
}

pub fn gen_inputs(design: &SimDesign) -> Result<DMatrix<f64>> {
    if design.n == 0 || design.d == 0 {
        return Err(Error::invalid("n and d must be positive"));
    }
    let mut rng = stream_rng(design.seed, INPUT_STREAM);
    match design.design {
        InputDesign::Uncorrelated => Ok(DMatrix::from_fn(design.n, design.d, |_, _| {
            rng.random_range(-1.0..1.0)
        })),
        InputDesign::Correlated => {
            let l = covariance_factor(design.d)?;
            let mut x = DMatrix::zeros(design.n, design.d);
            let mut z = DVector::zeros(design.d);
            for i in 0..design.n {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                let row = &l * &z;
                x.row_mut(i).copy_from(&row.transpose());
            }
            Ok(x)
        }
    }
}

/// Inputs and noisy responses for one design; noise uses the design seed's second stream.
pub fn simulate(design: &SimDesign) -> Result<Dataset> {
    let x = gen_inputs(design)?;
    let y = model_response(design.model, &x, design.seed)?;
    Ok(Dataset { x, y })
}

/// `sqrt(mean((p − t)²))`.
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::Shape {
            context: "rmse inputs",
            expected: truths.len(),
            found: predictions.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::invalid("rmse of zero points"));
    }
    let sse: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sse / truths.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_entries() {
        let s = covariance(3);
        assert_eq!((s[(0, 0)], s[(0, 1)], s[(0, 2)]), (1.0, 0.5, 0.25));
        assert_eq!(s[(2, 0)], 0.25);
    }

    #[test]
    fn factor_reconstructs_covariance() {
        let l = covariance_factor(50).unwrap();
        let err = (&l * l.transpose() - covariance(50)).amax();
        assert!(err <= 1e-10, "{err}");
        assert!(l.upper_triangle().iter().enumerate().all(|(k, v)| {
            let (i, j) = (k % 50, k / 50);
            i >= j || *v == 0.0
        }));
    }

    /// AR(1) form of the same covariance: x_1 = z_1, x_i = x_{i−1}/2 + √0.75 z_i.
    #[test]
    fn factor_matches_ar1_closed_form() {
        let d = 12;
        let l = covariance_factor(d).unwrap();
        for i in 0..d {
            for j in 0..=i {
                let scale = if j == 0 { 1.0 } else { 0.75f64.sqrt() };
                let expected = 0.5f64.powi((i - j) as i32) * scale;
                assert!((l[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oversized_correlated_design_rejected() {
        assert!(covariance_factor(MAX_CORRELATED_DIM + 1).is_err());
    }

    #[test]
    fn uniform_moments() {
        let design = SimDesign::new(SimModel::new(1).unwrap(), InputDesign::Uncorrelated, 17).with_size(100_000, 3);
        let x = gen_inputs(&design).unwrap();
        for c in x.column_iter() {
            let mean = c.mean();
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / c.len() as f64;
            assert!(mean.abs() < 0.02);
            assert!((var - 1.0 / 3.0).abs() < 0.02);
            assert!(c.iter().all(|v| (-1.0..1.0).contains(v)));
        }
    }

    #[test]
    fn correlated_lag_one() {
        let design = SimDesign::new(SimModel::new(1).unwrap(), InputDesign::Correlated, 5).with_size(100_000, 3);
        let x = gen_inputs(&design).unwrap();
        let (a, b) = (x.column(0), x.column(1));
        let (ma, mb) = (a.mean(), b.mean());
        let cov = a.iter().zip(b.iter()).map(|(u, v)| (u - ma) * (v - mb)).sum::<f64>();
        let va = a.iter().map(|u| (u - ma).powi(2)).sum::<f64>();
        let vb = b.iter().map(|v| (v - mb).powi(2)).sum::<f64>();
        let corr = cov / (va * vb).sqrt();
        assert!((corr - 0.5).abs() < 0.02, "{corr}");
    }

    #[test]
    fn reproducible_draws() {
        for design in [InputDesign::Uncorrelated, InputDesign::Correlated] {
            let d = SimDesign::new(SimModel::new(3).unwrap(), design, 99).with_size(50, 10);
            assert_eq!(simulate(&d).unwrap(), simulate(&d).unwrap());
            let other = SimDesign { seed: 100, ..d };
            assert_ne!(simulate(&d).unwrap().x, simulate(&other).unwrap().x);
        }
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.5, 2.5, -0.5], &[1.0, 2.0, -1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((rmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn design_tokens() {
        assert_eq!("correlated".parse::<InputDesign>().unwrap(), InputDesign::Correlated);
        assert_eq!(InputDesign::Uncorrelated.to_string().parse::<InputDesign>().unwrap(), InputDesign::Uncorrelated);
        assert!("skewed".parse::<InputDesign>().is_err());
    }
}
