use nalgebra::DMatrix;

use super::RowMajor;
use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, Kernel, KernelSpec};

/// Normalized weights over training rows.
///
/// Either nonnegative and summing to one, or identically zero with
/// `zero_mass` set (the `0/0 = 0` convention).
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub values: Vec<f64>,
    pub zero_mass: bool,
}

impl Weights {
    fn from_raw(mut values: Vec<f64>) -> Self {
        let total: f64 = values.iter().sum();
        if total > 0.0 {
            values.iter_mut().for_each(|v| *v /= total);
            Weights {
                values,
                zero_mass: false,
            }
        } else {
            values.iter_mut().for_each(|v| *v = 0.0);
            Weights {
                values,
                zero_mass: true,
            }
        }
    }

    /// `Σ W_i Y_i`, or `None` when no training row carries weight.
    pub fn combine(&self, responses: &[f64]) -> Option<f64> {
        if self.zero_mass {
            return None;
        }
        Some(self.values.iter().zip(responses).map(|(w, y)| w * y).sum())
    }
}

/// Kernel weights of one query from its row of the distance cache.
///
/// Positive kernels are evaluated relative to the largest log-weight so that
/// far-away queries do not underflow to zero mass.
pub fn consensual_weights(kernel: &Kernel, sq_row: &[f64], cheb_row: Option<&[f64]>) -> Weights {
    if kernel.is_positive() {
        let logs: Vec<f64> = sq_row.iter().map(|&d| kernel.log_weight(d)).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Weights::from_raw(logs.into_iter().map(|l| (l - top).exp()).collect())
    } else {
        let raw = match cheb_row {
            Some(cheb) => sq_row
                .iter()
                .zip(cheb)
                .map(|(&d, &c)| kernel.weight(d, c))
                .collect(),
            None => {
                debug_assert!(!kernel.needs_chebyshev());
                sq_row.iter().map(|&d| kernel.weight(d, f64::NAN)).collect()
            }
        };
        Weights::from_raw(raw)
    }
}

/// `g_n` at one query without materializing the weight vector.
pub fn smooth(kernel: &Kernel, sq_row: &[f64], cheb_row: Option<&[f64]>, responses: &[f64]) -> Option<f64> {
    let (mut s0, mut s1) = (0.0, 0.0);
    if kernel.is_positive() {
        let top = sq_row
            .iter()
            .map(|&d| kernel.log_weight(d))
            .fold(f64::NEG_INFINITY, f64::max);
        for (&d, &y) in sq_row.iter().zip(responses) {
            let k = (kernel.log_weight(d) - top).exp();
            s0 += k;
            s1 += k * y;
        }
    } else {
        for (i, (&d, &y)) in sq_row.iter().zip(responses).enumerate() {
            let c = cheb_row.map_or(f64::NAN, |c| c[i]);
            let k = kernel.weight(d, c);
            s0 += k;
            s1 += k * y;
        }
    }
    (s0 > 0.0).then(|| s1 / s0)
}

/// `g_n` and `∂g_n/∂h` at one query, for differentiable kernels.
///
/// Uses `∂g/∂h = (T1·S0 − S1·T0)/S0²` with `S0 = ΣK`, `S1 = ΣYK`,
/// `T0 = Σ∂K`, `T1 = ΣY∂K`; the common rescaling of all `K` cancels.
pub fn smooth_with_dh(kernel: &Kernel, sq_row: &[f64], responses: &[f64]) -> Option<(f64, f64)> {
    debug_assert!(kernel.is_differentiable());
    let top = sq_row
        .iter()
        .map(|&d| kernel.log_weight(d))
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut s0, mut s1, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0);
    for (&d, &y) in sq_row.iter().zip(responses) {
        let k = (kernel.log_weight(d) - top).exp();
        let dk = -kernel.dh_factor(d) * k;
        s0 += k;
        s1 += y * k;
        t0 += dk;
        t1 += y * dk;
    }
    if s0 > 0.0 {
        Some((s1 / s0, (t1 * s0 - s1 * t0) / (s0 * s0)))
    } else {
        None
    }
}

/// Number of coordinates that must agree, `αM`, for the α-majority rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsensusLevel {
    required: usize,
    of: usize,
}

impl ConsensusLevel {
    /// Accepts `alpha ∈ {1/M, 2/M, …, 1}`.
    pub fn from_alpha(alpha: f64, n_learners: usize) -> Result<Self> {
        let k = alpha * n_learners as f64;
        let rounded = k.round();
        if !(k.is_finite() && (k - rounded).abs() < 1e-9 && rounded >= 1.0 && rounded <= n_learners as f64) {
            return Err(Error::invalid(format!(
                "alpha must be one of 1/M, ..., 1 for M = {n_learners}, got {alpha}"
            )));
        }
        Ok(ConsensusLevel {
            required: rounded as usize,
            of: n_learners,
        })
    }

    pub fn unanimous(n_learners: usize) -> Self {
        ConsensusLevel {
            required: n_learners,
            of: n_learners,
        }
    }

    /// Every admissible level, from one learner up to all of them.
    pub fn all(n_learners: usize) -> impl Iterator<Item = ConsensusLevel> {
        (1..=n_learners).map(move |required| ConsensusLevel {
            required,
            of: n_learners,
        })
    }

    pub fn required(&self) -> usize {
        self.required
    }

    pub fn alpha(&self) -> f64 {
        self.required as f64 / self.of as f64
    }
}

pub(crate) fn cobra_weights_subset(
    rows: &RowMajor,
    subset: &[usize],
    query: &[f64],
    h: f64,
    level: ConsensusLevel,
) -> Weights {
    let raw = subset
        .iter()
        .map(|&i| {
            let agree = rows
                .row(i)
                .iter()
                .zip(query)
                .filter(|(a, b)| (*a - *b).abs() < h)
                .count();
            if agree >= level.required {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Weights::from_raw(raw)
}

pub(crate) fn kernelcobra_weights_subset(
    rows: &RowMajor,
    subset: &[usize],
    query: &[f64],
    h: f64,
) -> Weights {
    let kernel = univariate_gaussian(h);
    let logs: Vec<Vec<f64>> = subset
        .iter()
        .map(|&i| {
            rows.row(i)
                .iter()
                .zip(query)
                .map(|(a, b)| {
                    let z = a - b;
                    kernel.log_weight(0.0 + z * z)
                })
                .collect()
        })
        .collect();
    let top = logs
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let raw = logs
        .iter()
        .map(|per| per.iter().map(|l| (l - top).exp()).sum())
        .collect();
    Weights::from_raw(raw)
}

fn univariate_gaussian(h: f64) -> Kernel {
    Kernel::new(KernelSpec::gaussian(), Bandwidth::scale(h)).expect("validated bandwidth")
}

fn check_query(rows: &DMatrix<f64>, query: &[f64], h: f64) -> Result<()> {
    if query.len() != rows.ncols() {
        return Err(Error::Shape {
            context: "query length",
            expected: rows.ncols(),
            found: query.len(),
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be positive, got {h}")));
    }
    Ok(())
}

/// Indicator weights of the classical rule: row `i` qualifies when at least
/// `αM` coordinates satisfy `|r_m(X_i) − r_m(x)| < h`. With `alpha = 1` every
/// coordinate must agree.
pub fn cobra_weights(rows: &DMatrix<f64>, query: &[f64], h: f64, alpha: f64) -> Result<Weights> {
    check_query(rows, query, h)?;
    let level = ConsensusLevel::from_alpha(alpha, rows.ncols())?;
    let rm = RowMajor::from_matrix(rows);
    let all: Vec<usize> = (0..rm.n).collect();
    Ok(cobra_weights_subset(&rm, &all, query, h, level))
}

/// Per-coordinate Gaussian weights `W_i ∝ Σ_m K_h(r_m(X_i) − r_m(x))`,
/// normalized over the double sum.
pub fn kernelcobra_weights(rows: &DMatrix<f64>, query: &[f64], h: f64) -> Result<Weights> {
    check_query(rows, query, h)?;
    let rm = RowMajor::from_matrix(rows);
    let all: Vec<usize> = (0..rm.n).collect();
    Ok(kernelcobra_weights_subset(&rm, &all, query, h))
}
