//! Built-in base regressors used to populate a [`PredictionMatrix`].

mod knn;
mod ridge;
mod tree;

pub use knn::KnnModel;
pub use ridge::RidgeModel;
pub use tree::{TreeModel, TreeNode};

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::aggregate::PredictionMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnerSpec {
    Knn { k: usize },
    Ridge { lambda: f64 },
    Tree { max_depth: usize, min_leaf: usize },
}

impl LearnerSpec {
    pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;

    pub fn knn(k: usize) -> Self {
        LearnerSpec::Knn { k }
    }

    pub fn ridge(lambda: f64) -> Self {
        LearnerSpec::Ridge { lambda }
    }

    pub fn tree(max_depth: usize, min_leaf: usize) -> Self {
        LearnerSpec::Tree { max_depth, min_leaf }
    }

    /// kNN with k = 5, ridge with λ = 1 and a depth-8 tree with leaves of at least 5.
    pub fn default_roster() -> Vec<LearnerSpec> {
        vec![Self::knn(5), Self::ridge(Self::DEFAULT_RIDGE_LAMBDA), Self::tree(8, 5)]
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LearnerSpec::Knn { .. } => "knn",
            LearnerSpec::Ridge { .. } => "ridge",
            LearnerSpec::Tree { .. } => "tree",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LearnerSpec::Knn { k } if k == 0 => Err(Error::invalid("knn needs k >= 1")),
            LearnerSpec::Ridge { lambda } if !(lambda.is_finite() && lambda >= 0.0) => {
                Err(Error::invalid(format!("ridge lambda must be nonnegative, got {lambda}")))
            }
            LearnerSpec::Tree { max_depth, min_leaf } if max_depth == 0 || min_leaf == 0 => {
                Err(Error::invalid("tree needs max_depth >= 1 and min_leaf >= 1"))
            }
            _ => Ok(()),
        }
    }

    /// Parses a comma-separated roster such as `knn:k=5,ridge:lambda=1.0,tree:max_depth=8:min_leaf=5`.
    pub fn parse_roster(s: &str) -> Result<Vec<LearnerSpec>> {
        let roster = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<LearnerSpec>>>()?;
        if roster.is_empty() {
            return Err(Error::invalid("empty learner roster"));
        }
        Ok(roster)
    }
}

impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerSpec::Knn { k } => write!(f, "knn:k={k}"),
            LearnerSpec::Ridge { lambda } => write!(f, "ridge:lambda={lambda}"),
            LearnerSpec::Tree { max_depth, min_leaf } => {
                write!(f, "tree:max_depth={max_depth}:min_leaf={min_leaf}")
            }
        }
    }
}

impl FromStr for LearnerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let mut spec = match kind {
            "knn" => LearnerSpec::knn(5),
            "ridge" => LearnerSpec::ridge(Self::DEFAULT_RIDGE_LAMBDA),
            "tree" => LearnerSpec::tree(8, 5),
            other => return Err(Error::invalid(format!("unknown learner `{other}`"))),
        };
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("malformed learner parameter `{part}`")))?;
            let bad = || Error::invalid(format!("bad value in learner parameter `{part}`"));
            match (&mut spec, key) {
                (LearnerSpec::Knn { k }, "k") => *k = value.parse().map_err(|_| bad())?,
                (LearnerSpec::Ridge { lambda }, "lambda") => *lambda = value.parse().map_err(|_| bad())?,
                (LearnerSpec::Tree { max_depth, .. }, "max_depth") => {
                    *max_depth = value.parse().map_err(|_| bad())?
                }
                (LearnerSpec::Tree { min_leaf, .. }, "min_leaf") => {
                    *min_leaf = value.parse().map_err(|_| bad())?
                }
                _ => return Err(Error::invalid(format!("unknown parameter `{key}` for {kind}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedLearner {
    Knn(KnnModel),
    Ridge(RidgeModel),
    Tree(TreeModel),
}

fn check_training(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::invalid("cannot fit a learner on zero rows"));
    }
    if y.len() != x.nrows() {
        return Err(Error::Shape {
            context: "training responses",
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training data"));
    }
    Ok(())
}

/// Fits one base learner on `x` (`n × d`) and `y`.
pub fn fit(spec: &LearnerSpec, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<FittedLearner> {
    spec.validate()?;
    check_training(x, y)?;
    Ok(match *spec {
        LearnerSpec::Knn { k } => FittedLearner::Knn(KnnModel::fit(k, x, y)),
        LearnerSpec::Ridge { lambda } => FittedLearner::Ridge(RidgeModel::fit(lambda, x, y)?),
        LearnerSpec::Tree { max_depth, min_leaf } => {
            if x.nrows() < min_leaf {
                return Err(Error::invalid(format!(
                    "tree needs at least min_leaf = {min_leaf} rows, got {}",
                    x.nrows()
                )));
            }
            FittedLearner::Tree(TreeModel::fit(max_depth, min_leaf, x, y))
        }
    })
}

impl FittedLearner {
    pub fn kind(&self) -> &'static str {
        match self {
            FittedLearner::Knn(_) => "knn",
            FittedLearner::Ridge(_) => "ridge",
            FittedLearner::Tree(_) => "tree",
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            FittedLearner::Knn(m) => m.n_features(),
            FittedLearner::Ridge(m) => m.coefficients.len(),
            FittedLearner::Tree(m) => m.n_features(),
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::Shape {
                context: "prediction features",
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        Ok(match self {
            FittedLearner::Knn(m) => m.predict(x),
            FittedLearner::Ridge(m) => m.predict(x),
            FittedLearner::Tree(m) => m.predict(x),
        })
    }
}

/// Column names for a roster: the learner kind, suffixed on repeats (`knn`, `knn_2`, ...).
pub fn roster_names(learners: &[FittedLearner]) -> Vec<String> {
    let mut seen = std::collections::HashMap::new();
    learners
        .iter()
        .map(|l| {
            let n = seen.entry(l.kind()).or_insert(0usize);
            *n += 1;
            if *n == 1 {
                l.kind().to_string()
            } else {
                format!("{}_{}", l.kind(), n)
            }
        })
        .collect()
}

/// Column `m` holds learner `m`'s predictions on `x`.
pub fn build_prediction_matrix(
    learners: &[FittedLearner],
    x: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<PredictionMatrix> {
    if learners.is_empty() {
        return Err(Error::invalid("empty learner roster"));
    }
    let columns = learners
        .iter()
        .map(|l| l.predict(x))
        .collect::<Result<Vec<_>>>()?;
    let rows = DMatrix::from_fn(x.nrows(), learners.len(), |i, m| columns[m][i]);
    PredictionMatrix::new(rows, y.clone(), roster_names(learners))
}

/// Predictions of every learner on `x` as an `n × M` matrix, for queries.
pub fn predict_all(learners: &[FittedLearner], x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let columns = learners
        .iter()
        .map(|l| l.predict(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(x.nrows(), learners.len(), |i, m| columns[m][i]))
}
