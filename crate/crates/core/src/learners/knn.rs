use nalgebra::{DMatrix, DVector};

use crate::aggregate::RowMajor;

/// Brute-force k-nearest-neighbour regressor under Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    k: usize,
    x: RowMajor,
    y: Vec<f64>,
}

impl KnnModel {
    /// `k` larger than the training set is reduced to `n`.
    pub fn fit(k: usize, x: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let n = x.nrows();
        let k = if k > n {
            log::warn!("knn: k = {k} exceeds {n} training rows; using k = {n}");
            n
        } else {
            k
        };
        KnnModel {
            k,
            x: RowMajor::from_matrix(x),
            y: y.iter().copied().collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_features(&self) -> usize {
        self.x.m
    }

    /// Mean response of the `k` nearest rows; equal distances go to the lower index.
    pub fn predict(&self, q: &DMatrix<f64>) -> Vec<f64> {
        let q = RowMajor::from_matrix(q);
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.x.n);
        (0..q.n)
            .map(|a| {
                dist.clear();
                dist.extend((0..self.x.n).map(|i| {
                    let d: f64 = q
                        .row(a)
                        .iter()
                        .zip(self.x.row(i))
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum();
                    (d, i)
                }));
                dist.sort_by(|l, r| l.0.total_cmp(&r.0).then(l.1.cmp(&r.1)));
                dist[..self.k].iter().map(|&(_, i)| self.y[i]).sum::<f64>() / self.k as f64
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_neighbour_reproduces_training_response() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let y = DVector::from_row_slice(&[5.0, 6.0, 7.0, 8.0]);
        let m = KnnModel::fit(1, &x, &y);
        assert_eq!(m.predict(&x), vec![5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn all_neighbours_give_mean() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let y = DVector::from_row_slice(&[1.0, 2.0, 3.0, 6.0]);
        let m = KnnModel::fit(4, &x, &y);
        assert_eq!(m.predict(&DMatrix::from_row_slice(2, 1, &[-9.0, 1.3])), vec![3.0, 3.0]);
    }

    #[test]
    fn oversized_k_is_reduced() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let y = DVector::from_row_slice(&[1.0, 3.0]);
        let m = KnnModel::fit(10, &x, &y);
        assert_eq!(m.k(), 2);
        assert_eq!(m.predict(&x), vec![2.0, 2.0]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let x = DMatrix::from_row_slice(3, 1, &[-1.0, 1.0, 1.0]);
        let y = DVector::from_row_slice(&[10.0, 20.0, 30.0]);
        let m = KnnModel::fit(1, &x, &y);
        assert_eq!(m.predict(&DMatrix::from_row_slice(1, 1, &[0.0])), vec![10.0]);
        let m = KnnModel::fit(2, &x, &y);
        assert_eq!(m.predict(&DMatrix::from_row_slice(1, 1, &[1.0])), vec![25.0]);
    }
}
