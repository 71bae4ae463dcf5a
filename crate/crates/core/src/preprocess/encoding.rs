use std::collections::HashMap;

use ndarray::{s, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::PreprocessError;
use crate::panel_data::{Month, PanelRow, PanelTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingOptions {
    /// Append the per-unit mean of each encoded regressor.
    pub regressor_means: bool,
    /// Append the per-unit mean of the outcome.
    pub outcome_mean: bool,
}

impl Default for EncodingOptions {
    fn default() -> Self {
        Self { regressor_means: true, outcome_mean: true }
    }
}

impl EncodingOptions {
    pub fn is_active(&self) -> bool {
        self.regressor_means || self.outcome_mean
    }

    /// Names of the appended columns, given the regressor names and the
    /// indices of the regressors whose means are encoded.
    pub fn appended_names(&self, x_names: &[String], columns: &[usize]) -> Vec<String> {
        let mut names = Vec::new();
        if self.regressor_means {
            names.extend(columns.iter().map(|&j| format!("mean_{}", x_names[j])));
        }
        if self.outcome_mean {
            names.push("mean_y".to_string());
        }
        names
    }
}

/// Per-unit means learned on a set of training rows. Units without training
/// rows fall back to the global training mean.
#[derive(Debug, Clone)]
pub struct MeansEncoder {
    options: EncodingOptions,
    columns: Vec<usize>,
    /// One row per unit: encoded regressor means followed by the outcome mean.
    unit_means: Array2<f64>,
    has_train: Vec<bool>,
    global: Vec<f64>,
}

impl MeansEncoder {
    /// `units[i]` is a dense unit code in `0..n_units` for row `i`;
    /// `columns` picks the regressors whose means are appended.
    pub fn fit(
        units: &[usize],
        n_units: usize,
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        train_rows: &[usize],
        columns: &[usize],
        options: EncodingOptions,
    ) -> Result<Self, PreprocessError> {
        let n = x.nrows();
        let k = columns.len();
        if let Some(&bad) = columns.iter().find(|&&j| j >= x.ncols()) {
            return Err(PreprocessError::InvalidArgument(format!("column {bad} out of range")));
        }
        if units.len() != n || y.len() != n {
            return Err(PreprocessError::LengthMismatch(format!(
                "{} unit codes, {n} rows of x, {} outcomes",
                units.len(),
                y.len()
            )));
        }
        if train_rows.is_empty() {
            return Err(PreprocessError::EmptyTrainMask);
        }
        let mut sums = Array2::<f64>::zeros((n_units, k + 1));
        let mut counts = vec![0usize; n_units];
        let mut global = vec![0.0; k + 1];
        for &r in train_rows {
            let u = units[r];
            if u >= n_units {
                return Err(PreprocessError::InvalidArgument(format!("unit code {u} out of range")));
            }
            counts[u] += 1;
            for (j, &c) in columns.iter().enumerate() {
                sums[[u, j]] += x[[r, c]];
                global[j] += x[[r, c]];
            }
            sums[[u, k]] += y[r];
            global[k] += y[r];
        }
        let m = train_rows.len() as f64;
        global.iter_mut().for_each(|g| *g /= m);
        let mut unit_means = sums;
        for u in 0..n_units {
            if counts[u] > 0 {
                unit_means.row_mut(u).mapv_inplace(|v| v / counts[u] as f64);
            } else {
                unit_means.row_mut(u).assign(&ArrayView1::from(&global));
            }
        }
        let has_train = counts.iter().map(|&c| c > 0).collect();
        Ok(Self { options, columns: columns.to_vec(), unit_means, has_train, global })
    }

    pub fn options(&self) -> EncodingOptions {
        self.options
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn n_appended(&self) -> usize {
        let k = self.global.len() - 1;
        (if self.options.regressor_means { k } else { 0 }) + usize::from(self.options.outcome_mean)
    }

    /// Whether unit `u` had at least one training row.
    pub fn seen(&self, u: usize) -> bool {
        self.has_train.get(u).copied().unwrap_or(false)
    }

    /// Encoded values appended for a row of unit `u`.
    pub fn encoding(&self, u: usize) -> Vec<f64> {
        let k = self.global.len() - 1;
        let means = if u < self.unit_means.nrows() {
            self.unit_means.row(u).to_vec()
        } else {
            self.global.clone()
        };
        let mut out = Vec::with_capacity(self.n_appended());
        if self.options.regressor_means {
            out.extend_from_slice(&means[..k]);
        }
        if self.options.outcome_mean {
            out.push(means[k]);
        }
        out
    }

    /// `x` with the encoded columns appended, for rows `rows` of the data
    /// the encoder was fitted on.
    pub fn transform(&self, units: &[usize], x: ArrayView2<f64>, rows: &[usize]) -> Array2<f64> {
        let k = x.ncols();
        let extra = self.n_appended();
        let mut out = Array2::<f64>::zeros((rows.len(), k + extra));
        for (i, &r) in rows.iter().enumerate() {
            out.slice_mut(s![i, ..k]).assign(&x.row(r));
            for (j, v) in self.encoding(units[r]).into_iter().enumerate() {
                out[[i, k + j]] = v;
            }
        }
        out
    }
}

/// Dense unit codes in order of first appearance.
pub fn unit_codes(ids: &[String]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let codes = ids
        .iter()
        .map(|id| {
            let next = map.len();
            *map.entry(id.as_str()).or_insert(next)
        })
        .collect();
    (codes, map.len())
}

/// Indices of the regressors worth encoding: all except those that take a
/// single value across units in every month shared by two or more units.
/// The unit means of such common series differ only through each unit's
/// sample window, so they add nothing but collinearity.
pub fn unit_varying_columns(panel: &PanelTable) -> Vec<usize> {
    let k = panel.x_names().len();
    let mut first: HashMap<Month, &PanelRow> = HashMap::new();
    let mut shared = false;
    let mut varies = vec![false; k];
    for row in panel.rows() {
        match first.get(&row.time) {
            None => {
                first.insert(row.time, row);
            }
            Some(seen) => {
                shared = true;
                for (j, v) in varies.iter_mut().enumerate() {
                    *v |= seen.x[j] != row.x[j];
                }
            }
        }
    }
    (0..k).filter(|&j| !shared || varies[j]).collect()
}

/// Appends per-unit means computed only over the rows where `train_mask`
/// is true. Regressors common to all units are not encoded.
pub fn means_encode(
    panel: &PanelTable,
    train_mask: &[bool],
    options: EncodingOptions,
) -> Result<PanelTable, PreprocessError> {
    if train_mask.len() != panel.len() {
        return Err(PreprocessError::LengthMismatch(format!(
            "mask has {} entries for {} rows",
            train_mask.len(),
            panel.len()
        )));
    }
    let train: Vec<usize> = (0..panel.len()).filter(|&i| train_mask[i]).collect();
    let (codes, n_units) = unit_codes(&panel.unit_ids());
    let columns = unit_varying_columns(panel);
    let enc = MeansEncoder::fit(&codes, n_units, panel.x().view(), panel.y().view(), &train, &columns, options)?;
    let rows = panel
        .rows()
        .iter()
        .zip(&codes)
        .map(|(row, &u)| {
            let mut x = row.x.clone();
            x.extend(enc.encoding(u));
            PanelRow { x, ..row.clone() }
        })
        .collect();
    let mut names = panel.x_names().to_vec();
    names.extend(options.appended_names(panel.x_names(), &columns));
    PanelTable::new(rows, names).map_err(|e| PreprocessError::InvalidArgument(e.to_string()))
}
