use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Linear model with an L2 penalty on standardized coefficients.
///
/// Features are centered and scaled to unit (population) variance before
/// solving `(ZᵀZ + λI) β = Zᵀ(y − ȳ)`; coefficients are mapped back to the
/// original feature scale. The intercept is not penalized and constant
/// features get a zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub coefficients: DVector<f64>,
    pub intercept: f64,
}

impl RidgeModel {
    pub fn fit(lambda: f64, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        let (n, d) = x.shape();
        let nf = n as f64;
        let means: Vec<f64> = x.column_iter().map(|c| c.sum() / nf).collect();
        let sds: Vec<f64> = x
            .column_iter()
            .zip(&means)
            .map(|(c, mu)| (c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / nf).sqrt())
            .collect();
        let active: Vec<usize> = (0..d).filter(|&j| sds[j] > 0.0).collect();
        let y_mean = y.sum() / nf;

        let mut coefficients = DVector::zeros(d);
        if !active.is_empty() {
            let z = DMatrix::from_fn(n, active.len(), |i, a| {
                let j = active[a];
                (x[(i, j)] - means[j]) / sds[j]
            });
            let yc = y.map(|v| v - y_mean);
            let mut gram = z.transpose() * &z;
            for a in 0..active.len() {
                gram[(a, a)] += lambda;
            }
            let rhs = z.transpose() * yc;
            let beta = match gram.clone().cholesky() {
                Some(chol) => chol.solve(&rhs),
                None => gram
                    .svd(true, true)
                    .solve(&rhs, 1e-12)
                    .map_err(|e| Error::Numeric(format!("ridge solve failed: {e}")))?,
            };
            for (a, &j) in active.iter().enumerate() {
                coefficients[j] = beta[a] / sds[j];
            }
        }
        let intercept = y_mean - coefficients.iter().zip(&means).map(|(b, mu)| b * mu).sum::<f64>();
        Ok(RidgeModel {
            coefficients,
            intercept,
        })
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (x * &self.coefficients)
            .iter()
            .map(|v| v + self.intercept)
            .collect()
    }
}
