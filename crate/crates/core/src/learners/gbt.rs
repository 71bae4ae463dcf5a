//! Squared-error gradient boosting over depth-limited regression trees.
//!
//! Each stage fits a tree to the current residuals with exact greedy
//! splits: every midpoint between consecutive distinct feature values is a
//! candidate and the variance reduction is scored from prefix sums over
//! presorted indices. Gain ties go to the lowest feature index, then to
//! the lowest threshold, so a fit is a pure function of its inputs.

use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{check_features, LearnerError, Predictor};
use crate::rng;

fn default_subsample() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// Fraction of rows drawn (without replacement) for each tree.
    #[serde(default = "default_subsample")]
    pub subsample: f64,
}

impl HyperParams {
    pub fn new(n_trees: usize, max_depth: usize, learning_rate: f64, min_samples_leaf: usize) -> Self {
        Self { n_trees, max_depth, learning_rate, min_samples_leaf, subsample: 1.0 }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(LearnerError::InvalidParams(format!("learning_rate {} not in (0, 1]", self.learning_rate)));
        }
        if self.min_samples_leaf == 0 {
            return Err(LearnerError::InvalidParams("min_samples_leaf must be >= 1".into()));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(LearnerError::InvalidParams(format!("subsample {} not in (0, 1]", self.subsample)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Binary regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    /// Mean of the training target.
    pub base_score: f64,
    pub trees: Vec<RegressionTree>,
    pub learning_rate: f64,
    pub params: HyperParams,
    n_features: usize,
    /// Training MSE after 0, 1, ..., n_trees stages.
    train_mse: Vec<f64>,
    /// Predictions on the training rows as accumulated during fitting.
    fit_predictions: Array1<f64>,
}

impl GbtModel {
    pub fn train_mse_path(&self) -> &[f64] {
        &self.train_mse
    }

    pub fn fit_predictions(&self) -> &Array1<f64> {
        &self.fit_predictions
    }

    fn predict_row(&self, row: ArrayView1<f64>) -> f64 {
        let mut f = self.base_score;
        for tree in &self.trees {
            f += self.learning_rate * tree.predict_row(row);
        }
        f
    }
}

impl Predictor for GbtModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, LearnerError> {
        check_features(self.n_features, x.ncols())?;
        Ok(x.rows().into_iter().map(|row| self.predict_row(row)).collect())
    }
}

/// Fits a boosted ensemble. `seed` only matters when `subsample < 1`.
pub fn gbt_fit(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    params: &HyperParams,
    seed: u64,
) -> Result<GbtModel, LearnerError> {
    params.validate()?;
    let (n, k) = x.dim();
    if y.len() != n {
        return Err(LearnerError::LengthMismatch { left: n, right: y.len() });
    }
    if n == 0 || n < 2 * params.min_samples_leaf {
        return Err(LearnerError::TooFewRows { rows: n, required: 2 * params.min_samples_leaf });
    }

    let base_score = y.sum() / n as f64;
    let mut pred = Array1::from_elem(n, base_score);
    let sse = |pred: &Array1<f64>| y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n as f64;
    let mut train_mse = Vec::with_capacity(params.n_trees + 1);
    train_mse.push(sse(&pred));

    let presorted: Vec<Vec<usize>> = (0..k)
        .map(|f| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| x[[a, f]].total_cmp(&x[[b, f]]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let n_sub = ((params.subsample * n as f64).floor() as usize).clamp(1, n);
    let mut residual = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_trees);
    for m in 0..params.n_trees {
        for i in 0..n {
            residual[i] = y[i] - pred[i];
        }
        let rows = if n_sub < n {
            let mut keep = vec![false; n];
            let mut r = rng::stream(rng::derive_seed(seed, m as u64));
            for i in sample(&mut r, n, n_sub) {
                keep[i] = true;
            }
            RowSet::new(presorted.iter().map(|s| s.iter().copied().filter(|&i| keep[i]).collect()).collect(), (0..n).filter(|&i| keep[i]).collect())
        } else {
            RowSet::new(presorted.clone(), (0..n).collect())
        };
        let mut builder = TreeBuilder { x, residual: &residual, params, nodes: Vec::new() };
        builder.grow(rows, 0);
        let tree = RegressionTree { nodes: builder.nodes };
        for (i, p) in pred.iter_mut().enumerate() {
            *p += params.learning_rate * tree.predict_row(x.row(i));
        }
        train_mse.push(sse(&pred));
        trees.push(tree);
    }

    Ok(GbtModel {
        base_score,
        trees,
        learning_rate: params.learning_rate,
        params: *params,
        n_features: k,
        train_mse,
        fit_predictions: pred,
    })
}

/// The rows reaching a node, once per feature in ascending feature order
/// and once in plain index order (needed when there are no features).
struct RowSet {
    by_feature: Vec<Vec<usize>>,
    rows: Vec<usize>,
}

impl RowSet {
    fn new(by_feature: Vec<Vec<usize>>, rows: Vec<usize>) -> Self {
        Self { by_feature, rows }
    }

    fn partition(self, goes_left: &[bool]) -> (RowSet, RowSet) {
        let split = |v: Vec<usize>| -> (Vec<usize>, Vec<usize>) { v.into_iter().partition(|&i| goes_left[i]) };
        let (mut lf, mut rf) = (Vec::new(), Vec::new());
        for v in self.by_feature {
            let (l, r) = split(v);
            lf.push(l);
            rf.push(r);
        }
        let (lr, rr) = split(self.rows);
        (RowSet::new(lf, lr), RowSet::new(rf, rr))
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct TreeBuilder<'a> {
    x: ArrayView2<'a, f64>,
    residual: &'a [f64],
    params: &'a HyperParams,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, set: RowSet, depth: usize) -> usize {
        let at = self.nodes.len();
        let n = set.rows.len();
        let sum: f64 = set.rows.iter().map(|&i| self.residual[i]).sum();
        self.nodes.push(Node::Leaf { value: sum / n as f64 });

        if depth >= self.params.max_depth || n < 2 * self.params.min_samples_leaf {
            return at;
        }
        let Some(best) = self.best_split(&set, sum) else {
            return at;
        };
        let mut goes_left = vec![false; self.x.nrows()];
        for &i in &set.rows {
            goes_left[i] = self.x[[i, best.feature]] <= best.threshold;
        }
        let (l, r) = set.partition(&goes_left);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        at
    }

    fn best_split(&self, set: &RowSet, sum: f64) -> Option<SplitChoice> {
        let n = set.rows.len();
        let min_leaf = self.params.min_samples_leaf;
        let parent = sum * sum / n as f64;
        let mut best: Option<SplitChoice> = None;
        for (f, order) in set.by_feature.iter().enumerate() {
            let mut left_sum = 0.0;
            for pos in 0..n - 1 {
                left_sum += self.residual[order[pos]];
                let n_left = pos + 1;
                if n_left < min_leaf {
                    continue;
                }
                if n - n_left < min_leaf {
                    break;
                }
                let a = self.x[[order[pos], f]];
                let b = self.x[[order[pos + 1], f]];
                if a == b {
                    continue;
                }
                let right_sum = sum - left_sum;
                let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64 - parent;
                if gain > best.as_ref().map_or(0.0, |b| b.gain) {
                    let mid = 0.5 * (a + b);
                    let threshold = if mid < b { mid } else { a };
                    best = Some(SplitChoice { feature: f, threshold, gain });
                }
            }
        }
        best
    }
}
