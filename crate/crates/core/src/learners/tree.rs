use nalgebra::{DMatrix, DVector};

use crate::aggregate::RowMajor;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf(f64),
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART regression tree grown greedily on squared-error reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    nodes: Vec<TreeNode>,
    n_features: usize,
}

struct Builder<'a> {
    x: &'a RowMajor,
    y: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn mean(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64
    }

    /// Candidate thresholds are midpoints between consecutive distinct
    /// values; ties in score keep the first feature and smallest threshold.
    fn best_split(&self, idx: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let base = total * total / n as f64;
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        for feature in 0..self.x.m {
            let val = |i: usize| self.x.row(i)[feature];
            order.sort_by(|&a, &b| val(a).total_cmp(&val(b)).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for s in 0..n - 1 {
                left_sum += self.y[order[s]];
                let n_left = s + 1;
                if n_left < self.min_leaf || n - n_left < self.min_leaf {
                    continue;
                }
                let (lo, hi) = (val(order[s]), val(order[s + 1]));
                if lo == hi {
                    continue;
                }
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / (n - n_left) as f64
                    - base;
                if best.as_ref().map_or(true, |b| score > b.score) {
                    best = Some(BestSplit {
                        feature,
                        threshold: lo + (hi - lo) / 2.0,
                        score,
                    });
                }
            }
        }
        let tol = 1e-12 * (1.0 + idx.iter().map(|&i| self.y[i] * self.y[i]).sum::<f64>());
        best.filter(|b| b.score > tol)
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf(self.mean(&idx)));
        if depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(&idx) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x.row(i)[split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

impl TreeModel {
    pub fn fit(max_depth: usize, min_leaf: usize, x: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let rows = RowMajor::from_matrix(x);
        let y: Vec<f64> = y.iter().copied().collect();
        let mut b = Builder {
            x: &rows,
            y: &y,
            max_depth,
            min_leaf,
            nodes: Vec::new(),
        };
        b.grow((0..rows.n).collect(), 0);
        TreeModel {
            nodes: b.nodes,
            n_features: rows.m,
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf(v) => return v,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let rows = RowMajor::from_matrix(x);
        (0..rows.n).map(|i| self.predict_row(rows.row(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_step_function() {
        let xs = [-0.9, -0.6, -0.4, -0.2, 0.2, 0.5, 0.7, 0.95];
        let x = DMatrix::from_row_slice(8, 1, &xs);
        let y = DVector::from_iterator(8, xs.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }));

        // brute-force scan over midpoints for the SSE-optimal threshold
        let sse = |t: f64| {
            let (l, r): (Vec<f64>, Vec<f64>) = xs.iter().map(|&v| v).partition(|&v| v <= t);
            let part = |p: &[f64]| {
                let ys: Vec<f64> = p.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
                let m = ys.iter().sum::<f64>() / ys.len() as f64;
                ys.iter().map(|v| (v - m).powi(2)).sum::<f64>()
            };
            part(&l) + part(&r)
        };
        let mids: Vec<f64> = xs.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        let best = mids.iter().copied().min_by(|a, b| sse(*a).total_cmp(&sse(*b))).unwrap();
        assert!(best.abs() < 1e-15);

        let t = TreeModel::fit(1, 1, &x, &y);
        match t.nodes()[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert!((threshold - best).abs() < 1e-15);
            }
            _ => panic!("expected a split"),
        }
        assert_eq!(t.nodes().len(), 3);
        let leaves: Vec<f64> = t.predict(&DMatrix::from_row_slice(2, 1, &[-0.5, 0.5]));
        assert_eq!(leaves, vec![0.0, 1.0]);
    }

    #[test]
    fn respects_min_leaf_and_depth() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y = DVector::from_iterator(20, xs.iter().map(|v| v * v));
        let x = DMatrix::from_row_slice(20, 1, &xs);
        let t = TreeModel::fit(3, 4, &x, &y);
        let leaves = t.nodes().iter().filter(|n| matches!(n, TreeNode::Leaf(_))).count();
        assert!(leaves <= 8);
        // every leaf reachable from training data holds at least 4 rows
        let mut counts = std::collections::HashMap::new();
        for v in &xs {
            *counts.entry(t.predict_row(&[*v]).to_bits()).or_insert(0) += 1;
        }
        assert!(counts.values().all(|&c| c >= 4));
    }

    #[test]
    fn constant_feature_never_splits() {
        let x = DMatrix::from_element(10, 2, 1.0);
        let y = DVector::from_fn(10, |i, _| i as f64);
        let t = TreeModel::fit(5, 1, &x, &y);
        assert_eq!(t.nodes().len(), 1);
    }

    #[test]
    fn left_branch_takes_threshold() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let y = DVector::from_row_slice(&[0.0, 1.0]);
        let t = TreeModel::fit(1, 1, &x, &y);
        assert_eq!(t.predict_row(&[0.5]), 0.0);
        assert_eq!(t.predict_row(&[0.5000001]), 1.0);
    }
}
