use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{stream_rng, NOISE_STREAM};
use crate::error::{Error, Result};

/// One of the ten benchmark regression functions, numbered 1 to 10.
///
/// Formulas below use 1-based feature indices. `ε` is centered Gaussian
/// noise whose standard deviation is [`SimModel::noise_sd`].
///
/// | id | mean response | sd | default (n, d) |
/// |----|---------------|----|----------------|
/// | 1 | `X1² + exp(−X2²)` | 0 | 800, 50 |
/// | 2 | `X1X2 + X3² − X4X7 + X8X10 − X6²` | 0.5 | 600, 100 |
/// | 3 | `−sin(2X1) + X2² + X3 − exp(−X4)` | 0.5 | 600, 100 |
/// | 4 | `X1 + (2X2−1)² + sin(2πX3)/(2−sin(2πX3)) + sin(2πX4) + 2cos(2πX4) + 3sin²(2πX4) + 4cos²(2πX4)` | 0.5 | 600, 100 |
/// | 5 | `1{X1>0} + X2³ + 1{X4+X6−X8−X9 > 1+X14} + exp(−X2²)` | 0.05 | 700, 20 |
/// | 6 | `(Σ_{j≤5} Σ_{k<4} X_{j+5k}) · cos(π/2 · Π_{k≤5} X_{4k})` | 0.25 | 500, 20 |
/// | 7 | `Σ_{j≤15} exp(0.25 − Xj²) sin(π X_{j+15})` | 0.25 | 600, 30 |
/// | 8 | `(Σ_{j≤25} X_{2j} sin(π/X_{2j−1})) · exp(Σ_{k≤5} X_{10k}²/10)` | 0.75 | 700, 50 |
/// | 9 | `π + Σ_j βj Xj log|5+Xj| / (1+e^{Xj})`, `βj = 2^{−(d+1−j)/50} + 3^{−j/50}` | 1 | 600, 1500 |
/// | 10 | `e + Σ_j βj Xj e^{−Xj} / (1 − log|10−Xj|)`, `βj = e^{−j/30} / (1 − e^{−(d+1−j)/30})` | 1.25 | 700, 1500 |
///
/// In model 8 `|X_{2j−1}|` is floored at `1e-12` before dividing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimModel(u8);

const DEFAULT_SIZES: [(usize, usize); 10] = [
    (800, 50),
    (600, 100),
    (600, 100),
    (600, 100),
    (700, 20),
    (500, 20),
    (600, 30),
    (700, 50),
    (600, 1500),
    (700, 1500),
];
const MIN_DIMS: [usize; 10] = [2, 10, 4, 4, 14, 20, 30, 50, 1, 1];
const NOISE_SD: [f64; 10] = [0.0, 0.5, 0.5, 0.5, 0.05, 0.25, 0.25, 0.75, 1.0, 1.25];

const MODEL8_FLOOR: f64 = 1e-12;

impl SimModel {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=10).contains(&id) {
            Ok(SimModel(id))
        } else {
            Err(Error::invalid(format!("model id must be 1..=10, got {id}")))
        }
    }

    pub fn all() -> impl Iterator<Item = SimModel> {
        (1..=10).map(SimModel)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn default_size(self) -> (usize, usize) {
        DEFAULT_SIZES[self.slot()]
    }

    /// Smallest input dimension the formula is defined for.
    pub fn min_dim(self) -> usize {
        MIN_DIMS[self.slot()]
    }

    pub fn noise_sd(self) -> f64 {
        NOISE_SD[self.slot()]
    }

    /// Regression function at one input row.
    pub fn mean_response(self, x: &[f64]) -> Result<f64> {
        if x.len() < self.min_dim() {
            return Err(Error::invalid(format!(
                "model {} needs d >= {}, got d = {}",
                self.0,
                self.min_dim(),
                x.len()
            )));
        }
        // 1-based access keeps the formulas readable
        let v = |j: usize| x[j - 1];
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        let y = match self.0 {
            1 => v(1).powi(2) + (-v(2).powi(2)).exp(),
            2 => v(1) * v(2) + v(3).powi(2) - v(4) * v(7) + v(8) * v(10) - v(6).powi(2),
            3 => -(2.0 * v(1)).sin() + v(2).powi(2) + v(3) - (-v(4)).exp(),
            4 => {
                let s3 = (2.0 * PI * v(3)).sin();
                let (s4, c4) = (2.0 * PI * v(4)).sin_cos();
                v(1) + (2.0 * v(2) - 1.0).powi(2) + s3 / (2.0 - s3) + s4 + 2.0 * c4 + 3.0 * s4 * s4 + 4.0 * c4 * c4
            }
            5 => {
                ind(v(1) > 0.0)
                    + v(2).powi(3)
                    + ind(v(4) + v(6) - v(8) - v(9) > 1.0 + v(14))
                    + (-v(2).powi(2)).exp()
            }
            6 => {
                let sum: f64 = (1..=5).flat_map(|j| (0..4).map(move |k| j + 5 * k)).map(v).sum();
                let prod: f64 = (1..=5).map(|k| v(4 * k)).product();
                sum * (prod * PI / 2.0).cos()
            }
            7 => (1..=15).map(|j| (0.25 - v(j).powi(2)).exp() * (PI * v(j + 15)).sin()).sum(),
            8 => {
                let sum: f64 = (1..=25)
                    .map(|j| {
                        let a = v(2 * j - 1);
                        let a = if a.abs() < MODEL8_FLOOR { MODEL8_FLOOR.copysign(a) } else { a };
                        v(2 * j) * (PI / a).sin()
                    })
                    .sum();
                let scale: f64 = (1..=5).map(|k| v(10 * k).powi(2) / 10.0).sum();
                sum * scale.exp()
            }
            9 => {
                let d = x.len();
                PI + (1..=d)
                    .map(|j| model9_beta(j, d) * v(j) * (5.0 + v(j)).abs().ln() / (1.0 + v(j).exp()))
                    .sum::<f64>()
            }
            10 => {
                let d = x.len();
                E + (1..=d)
                    .map(|j| model10_beta(j, d) * v(j) * (-v(j)).exp() / (1.0 - (10.0 - v(j)).abs().ln()))
                    .sum::<f64>()
            }
            _ => unreachable!("model id validated at construction"),
        };
        Ok(y)
    }
}

pub(crate) fn model9_beta(j: usize, d: usize) -> f64 {
    2f64.powf(-((d + 1 - j) as f64) / 50.0) + 3f64.powf(-(j as f64) / 50.0)
}

pub(crate) fn model10_beta(j: usize, d: usize) -> f64 {
    (-(j as f64) / 30.0).exp() / (1.0 - (-((d + 1 - j) as f64) / 30.0).exp())
}

impl fmt::Display for SimModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for SimModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("model id must be 1..=10, got `{s}`")))?;
        SimModel::new(id)
    }
}

/// Mean response plus noise for every row of `x`; the noise stream is keyed by `seed`.
pub fn model_response(model: SimModel, x: &DMatrix<f64>, seed: u64) -> Result<DVector<f64>> {
    if x.ncols() < model.min_dim() {
        return Err(Error::invalid(format!(
            "model {} needs d >= {}, got d = {}",
            model.id(),
            model.min_dim(),
            x.ncols()
        )));
    }
    let mut rng = stream_rng(seed, NOISE_STREAM);
    let sd = model.noise_sd();
    let mut row = vec![0.0; x.ncols()];
    let mut y = DVector::zeros(x.nrows());
    for i in 0..x.nrows() {
        row.iter_mut().zip(x.row(i).iter()).for_each(|(r, v)| *r = *v);
        let mean = model.mean_response(&row)?;
        let noise = if sd > 0.0 {
            sd * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        y[i] = mean + noise;
    }
    Ok(y)
}
