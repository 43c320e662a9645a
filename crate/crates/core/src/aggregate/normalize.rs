use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column min/max affine map onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub per_column_min: Vec<f64>,
    pub per_column_max: Vec<f64>,
}

pub fn fit_normalization(rows: &DMatrix<f64>) -> Result<NormalizationParams> {
    if rows.nrows() == 0 {
        return Err(Error::invalid("cannot fit normalization on zero rows"));
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("normalization input"));
    }
    let (mins, maxs) = rows
        .column_iter()
        .map(|c| (c.min(), c.max()))
        .unzip();
    Ok(NormalizationParams {
        per_column_min: mins,
        per_column_max: maxs,
    })
}

impl NormalizationParams {
    pub fn n_columns(&self) -> usize {
        self.per_column_min.len()
    }

    /// Maps each column through `x ↦ (x − min)/(max − min)`; constant columns map to 0.
    /// Values outside the fitted range are not clipped.
    pub fn apply(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != self.n_columns() {
            return Err(Error::Shape {
                context: "columns to normalize",
                expected: self.n_columns(),
                found: rows.ncols(),
            });
        }
        let mut out = rows.clone();
        for (m, mut col) in out.column_iter_mut().enumerate() {
            let (lo, hi) = (self.per_column_min[m], self.per_column_max[m]);
            let span = hi - lo;
            if span > 0.0 {
                col.iter_mut().for_each(|v| *v = (*v - lo) / span);
            } else {
                col.fill(0.0);
            }
        }
        Ok(out)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.per_column_min.len() != self.per_column_max.len() {
            return Err(Error::data("normalization min/max lengths differ"));
        }
        let ordered = self
            .per_column_min
            .iter()
            .zip(&self.per_column_max)
            .all(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo <= hi);
        if !ordered {
            return Err(Error::data("normalization bounds must be finite with min <= max"));
        }
        Ok(())
    }
}
