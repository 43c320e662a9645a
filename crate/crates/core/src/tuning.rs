//! Aggregation methods by name and the search that fits each one's bandwidth.

use std::fmt;
use std::str::FromStr;

use crate::aggregate::{PredictionMatrix, Rule};
use crate::bandwidth::{CvPlan, CvProblem, GdConfig, GridConfig, StepEvent};
use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tuning {
    /// Exhaustive scan in the scale parametrization.
    Grid,
    /// Gradient descent in the inverse-scale parametrization.
    Gd,
}

impl FromStr for Tuning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grid" => Ok(Tuning::Grid),
            "gd" => Ok(Tuning::Gd),
            other => Err(Error::invalid(format!("unknown tuning `{other}` (expected grid or gd)"))),
        }
    }
}

impl fmt::Display for Tuning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tuning::Grid => "grid",
            Tuning::Gd => "gd",
        })
    }
}

/// An aggregation strategy.
///
/// Tokens: a kernel token optionally followed by `@grid` or `@gd`
/// (`gauss`, `epanechnikov@grid`, `exp4:sigma=0.5@gd`), `cobra`, or
/// `kcobra`. A bare kernel uses gradient descent when it is differentiable
/// and grid search otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Consensual { kernel: KernelSpec, tuning: Tuning },
    /// Classical rule; `α` and `h` chosen jointly on the grid.
    Cobra,
    KernelCobra,
}

impl Method {
    pub fn consensual(kernel: KernelSpec) -> Self {
        let tuning = if kernel.family.is_compact() { Tuning::Grid } else { Tuning::Gd };
        Method::Consensual { kernel, tuning }
    }

    pub fn validate(&self) -> Result<()> {
        if let Method::Consensual { kernel, tuning } = self {
            kernel.validate()?;
            if *tuning == Tuning::Gd && kernel.family.is_compact() {
                return Err(Error::invalid(format!(
                    "gradient descent needs a smooth kernel (gauss or exp4), got {}",
                    kernel.family.token()
                )));
            }
        }
        Ok(())
    }

    /// Parses a comma-separated method list.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let methods = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Method>>>()?;
        if methods.is_empty() {
            return Err(Error::invalid("no aggregation method given"));
        }
        Ok(methods)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Consensual { kernel, tuning } => write!(f, "{kernel}@{tuning}"),
            Method::Cobra => f.write_str("cobra"),
            Method::KernelCobra => f.write_str("kcobra"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let method = match s.to_ascii_lowercase().as_str() {
            "cobra" => Method::Cobra,
            "kcobra" | "kernelcobra" => Method::KernelCobra,
            _ => match s.split_once('@') {
                Some((k, t)) => Method::Consensual {
                    kernel: k.parse()?,
                    tuning: t.parse()?,
                },
                None => Method::consensual(s.parse()?),
            },
        };
        method.validate()?;
        Ok(method)
    }
}

/// Search settings shared by every method.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneConfig {
    pub kappa: usize,
    /// Seeds the fold assignment and the descent's starting candidates.
    pub seed: u64,
    pub grid: GridConfig,
    pub gd: GdConfig,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            kappa: CvPlan::DEFAULT_KAPPA,
            seed: 0,
            grid: GridConfig::default(),
            gd: GdConfig::default(),
        }
    }
}

/// One evaluated bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iter: usize,
    pub h: f64,
    pub loss: f64,
    /// Present for gradient-descent evaluations.
    pub grad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub rule: Rule,
    /// Cross-validation loss at the chosen bandwidth.
    pub loss: f64,
    pub evaluations: usize,
    /// False only when gradient descent stopped at `max_iter`.
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

/// Chooses the bandwidth of `method` by κ-fold cross-validation on `data`.
pub fn tune(data: &PredictionMatrix, method: &Method, cfg: &TuneConfig) -> Result<TuneOutcome> {
    method.validate()?;
    let plan = CvPlan::new(data.len(), cfg.kappa, cfg.seed)?;
    let problem = CvProblem::new(data, plan)?;
    tune_problem(&problem, method, cfg)
}

/// As [`tune`], reusing a prepared cross-validation problem.
pub fn tune_problem(problem: &CvProblem, method: &Method, cfg: &TuneConfig) -> Result<TuneOutcome> {
    let grid_trace = |trace: &[(f64, f64)], offset: usize| -> Vec<TracePoint> {
        trace
            .iter()
            .enumerate()
            .map(|(i, &(h, loss))| TracePoint { iter: offset + i, h, loss, grad: None })
            .collect()
    };
    match *method {
        Method::Consensual { kernel, tuning: Tuning::Grid } => {
            let out = problem.grid_search(&kernel, &cfg.grid)?;
            Ok(TuneOutcome {
                rule: Rule::consensual(kernel, Bandwidth::scale(out.h)),
                loss: out.loss,
                evaluations: out.trace.len(),
                converged: true,
                trace: grid_trace(&out.trace, 0),
            })
        }
        Method::Consensual { kernel, tuning: Tuning::Gd } => {
            let gd = GdConfig { seed: cfg.seed, ..cfg.gd.clone() };
            let out = problem.gradient_descent(&kernel, &gd)?;
            if !out.converged {
                log::warn!(
                    "gradient descent stopped after {} iterations with |grad| = {:.3e}; using the best bandwidth seen",
                    out.iterations,
                    out.grad.abs()
                );
            }
            let trace = out
                .trace
                .iter()
                .filter(|s| s.event != StepEvent::NegativeShrink)
                .map(|s| TracePoint { iter: s.iter, h: s.h, loss: s.loss, grad: Some(s.grad) })
                .collect();
            Ok(TuneOutcome {
                rule: Rule::consensual(kernel, Bandwidth::inverse_scale(out.h)),
                loss: out.loss,
                evaluations: out.evaluations,
                converged: out.converged,
                trace,
            })
        }
        Method::Cobra => {
            let (alpha, out) = problem.cobra_search(&cfg.grid)?;
            Ok(TuneOutcome {
                rule: Rule::Cobra { h: out.h, alpha },
                loss: out.loss,
                evaluations: out.trace.len() * problem.n_learners(),
                converged: true,
                trace: grid_trace(&out.trace, 0),
            })
        }
        Method::KernelCobra => {
            let out = problem.kernelcobra_search(&cfg.grid)?;
            Ok(TuneOutcome {
                rule: Rule::KernelCobra { h: out.h },
                loss: out.loss,
                evaluations: out.trace.len(),
                converged: true,
                trace: grid_trace(&out.trace, 0),
            })
        }
    }
}
