use nalgebra::DMatrix;

use super::RowMajor;
use crate::error::{Error, Result};

/// Pairwise distances between prediction rows, stored row-major.
///
/// Row `q` holds the distances from query `q` to every training row. For the
/// symmetric within-sample case queries and training rows coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceCache {
    n_queries: usize,
    n_train: usize,
    sq_euclid: Vec<f64>,
    chebyshev: Option<Vec<f64>>,
}

/// Exact pairwise squared Euclidean (and optionally Chebyshev) distances.
///
/// Without `queries` the result is the symmetric `ℓ × ℓ` cache over `rows`;
/// with `queries` it is the `q × ℓ` cross block.
pub fn build_distance_cache(
    rows: &DMatrix<f64>,
    queries: Option<&DMatrix<f64>>,
    need_chebyshev: bool,
) -> Result<DistanceCache> {
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("distance cache rows"));
    }
    let train = RowMajor::from_matrix(rows);
    match queries {
        None => Ok(DistanceCache::symmetric(&train, need_chebyshev)),
        Some(q) => {
            if q.ncols() != rows.ncols() {
                return Err(Error::Shape {
                    context: "query columns",
                    expected: rows.ncols(),
                    found: q.ncols(),
                });
            }
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("distance cache queries"));
            }
            Ok(DistanceCache::cross(&RowMajor::from_matrix(q), &train, need_chebyshev))
        }
    }
}

#[inline]
pub(crate) fn sq_euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

#[inline]
pub(crate) fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

impl DistanceCache {
    pub(crate) fn symmetric(rows: &RowMajor, need_chebyshev: bool) -> Self {
        let n = rows.n;
        let mut sq = vec![0.0; n * n];
        let mut cheb = need_chebyshev.then(|| vec![0.0; n * n]);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = sq_euclid(rows.row(i), rows.row(j));
                sq[i * n + j] = d;
                sq[j * n + i] = d;
                if let Some(c) = cheb.as_mut() {
                    let d = chebyshev(rows.row(i), rows.row(j));
                    c[i * n + j] = d;
                    c[j * n + i] = d;
                }
            }
        }
        DistanceCache {
            n_queries: n,
            n_train: n,
            sq_euclid: sq,
            chebyshev: cheb,
        }
    }

    pub(crate) fn cross(queries: &RowMajor, rows: &RowMajor, need_chebyshev: bool) -> Self {
        let (q, n) = (queries.n, rows.n);
        let mut sq = Vec::with_capacity(q * n);
        let mut cheb = need_chebyshev.then(|| Vec::with_capacity(q * n));
        for a in 0..q {
            for i in 0..n {
                sq.push(sq_euclid(queries.row(a), rows.row(i)));
                if let Some(c) = cheb.as_mut() {
                    c.push(chebyshev(queries.row(a), rows.row(i)));
                }
            }
        }
        DistanceCache {
            n_queries: q,
            n_train: n,
            sq_euclid: sq,
            chebyshev: cheb,
        }
    }

    pub fn n_queries(&self) -> usize {
        self.n_queries
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn has_chebyshev(&self) -> bool {
        self.chebyshev.is_some()
    }

    /// Squared distances from query `q` to every training row.
    pub fn sq_row(&self, q: usize) -> &[f64] {
        &self.sq_euclid[q * self.n_train..(q + 1) * self.n_train]
    }

    pub fn chebyshev_row(&self, q: usize) -> Option<&[f64]> {
        self.chebyshev
            .as_ref()
            .map(|c| &c[q * self.n_train..(q + 1) * self.n_train])
    }

    pub fn sq(&self, q: usize, i: usize) -> f64 {
        self.sq_euclid[q * self.n_train + i]
    }

    pub fn cheb(&self, q: usize, i: usize) -> Option<f64> {
        self.chebyshev.as_ref().map(|c| c[q * self.n_train + i])
    }
}
