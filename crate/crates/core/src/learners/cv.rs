use std::collections::BTreeMap;
use std::io::{Read, Write};

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{gbt_fit, metrics, HyperParams, LearnerError, Predictor};
use crate::rng;

/// Shuffles `0..n` with a seeded stream and deals it into `k` folds whose
/// sizes differ by at most one (the first `n % k` folds get the extra
/// element). Indices within each fold are ascending.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, LearnerError> {
    if k < 2 || k > n {
        return Err(LearnerError::BadK { k, n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = idx[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

/// Folds that keep every group (e.g. every fund) whole: the distinct
/// groups are split with [`kfold_split`] and rows follow their group.
pub fn grouped_kfold_split<G: Ord>(groups: &[G], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, LearnerError> {
    let mut ids: BTreeMap<&G, usize> = BTreeMap::new();
    for g in groups {
        let next = ids.len();
        ids.entry(g).or_insert(next);
    }
    // re-number in sorted order so the result is independent of row order
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    let group_folds = kfold_split(ids.len(), k, seed)?;
    let mut fold_of_group = vec![0; ids.len()];
    for (f, fold) in group_folds.iter().enumerate() {
        for &g in fold {
            fold_of_group[g] = f;
        }
    }
    let mut folds = vec![Vec::new(); k];
    for (row, g) in groups.iter().enumerate() {
        folds[fold_of_group[ids[g]]].push(row);
    }
    Ok(folds)
}

/// Cross-validated score of one grid candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub params: HyperParams,
    pub cv_mse: Option<f64>,
    pub cv_r2: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub best: HyperParams,
    pub table: Vec<CandidateScore>,
}

/// The fallback grid: trees {50, 200} × depth {2, 4} × rate {0.1, 0.3},
/// 20 rows per leaf.
pub fn default_grid() -> Vec<HyperParams> {
    let mut grid = Vec::new();
    for n_trees in [50, 200] {
        for max_depth in [2, 4] {
            for learning_rate in [0.1, 0.3] {
                grid.push(HyperParams::new(n_trees, max_depth, learning_rate, 20));
            }
        }
    }
    grid
}

/// K-fold grid search for boosted trees, scored by mean out-of-fold MSE.
///
/// Candidates run in parallel. A candidate whose fit fails is recorded as
/// failed rather than aborting the search. The winner has the lowest mean
/// MSE, then the fewest trees, then the shallowest depth.
pub fn grid_search_cv(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    grid: &[HyperParams],
    k: usize,
    seed: u64,
) -> Result<GridSearch, LearnerError> {
    if grid.is_empty() {
        return Err(LearnerError::EmptyGrid);
    }
    let folds = kfold_split(x.nrows(), k, seed)?;
    let table: Vec<CandidateScore> = grid
        .par_iter()
        .map(|params| match score_candidate(x, y, params, &folds, seed) {
            Ok((m, r)) => CandidateScore { params: *params, cv_mse: Some(m), cv_r2: Some(r), error: None },
            Err(e) => CandidateScore { params: *params, cv_mse: None, cv_r2: None, error: Some(e.to_string()) },
        })
        .collect();

    let best = table
        .iter()
        .filter_map(|c| c.cv_mse.map(|m| (m, c)))
        .min_by(|(ma, a), (mb, b)| {
            ma.total_cmp(mb)
                .then(a.params.n_trees.cmp(&b.params.n_trees))
                .then(a.params.max_depth.cmp(&b.params.max_depth))
        })
        .map(|(_, c)| c.params);
    match best {
        Some(best) => Ok(GridSearch { best, table }),
        None => Err(LearnerError::AllCandidatesFailed(table[0].error.clone().unwrap_or_default())),
    }
}

fn score_candidate(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    params: &HyperParams,
    folds: &[Vec<usize>],
    seed: u64,
) -> Result<(f64, f64), LearnerError> {
    let mut mse_sum = 0.0;
    let mut r2_sum = 0.0;
    for (f, test) in folds.iter().enumerate() {
        let train = complement(x.nrows(), test);
        let xt: Array2<f64> = x.select(Axis(0), &train);
        let yt = y.select(Axis(0), &train);
        let model = gbt_fit(xt.view(), yt.view(), params, rng::derive_seed(seed, f as u64))?;
        let pred = model.predict(x.select(Axis(0), test).view())?;
        let truth = y.select(Axis(0), test);
        mse_sum += metrics::mse(truth.as_slice().unwrap(), pred.as_slice().unwrap())?;
        r2_sum += metrics::r2(truth.as_slice().unwrap(), pred.as_slice().unwrap())?;
    }
    Ok((mse_sum / folds.len() as f64, r2_sum / folds.len() as f64))
}

pub(crate) fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in fold {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}

/// Parses a JSON array of `{n_trees, max_depth, learning_rate, min_samples_leaf}`.
pub fn read_grid_json<R: Read>(reader: R) -> Result<Vec<HyperParams>, LearnerError> {
    let grid: Vec<HyperParams> = serde_json::from_reader(reader).map_err(|e| LearnerError::GridFormat(e.to_string()))?;
    if grid.is_empty() {
        return Err(LearnerError::EmptyGrid);
    }
    for p in &grid {
        p.validate()?;
    }
    Ok(grid)
}

/// Writes `n_trees,max_depth,learning_rate,min_samples_leaf,cv_mse,cv_r2`;
/// failed candidates get empty score cells.
pub fn write_grid_csv<W: Write>(table: &[CandidateScore], writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n_trees", "max_depth", "learning_rate", "min_samples_leaf", "cv_mse", "cv_r2"])?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for c in table {
        w.write_record([
            c.params.n_trees.to_string(),
            c.params.max_depth.to_string(),
            c.params.learning_rate.to_string(),
            c.params.min_samples_leaf.to_string(),
            opt(c.cv_mse),
            opt(c.cv_r2),
        ])?;
    }
    w.flush()
}
