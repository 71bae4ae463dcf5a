use std::collections::HashSet;

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::{Month, PanelError, TimeSeriesMatrix};

/// One (unit, month) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub unit_id: String,
    pub time: Month,
    pub y: f64,
    pub d: f64,
    pub x: Vec<f64>,
}

/// Long-form panel: outcome, treatment and controls per (unit, month).
#[derive(Debug, Clone, PartialEq)]
pub struct PanelTable {
    rows: Vec<PanelRow>,
    x_names: Vec<String>,
}

impl PanelTable {
    pub fn new(rows: Vec<PanelRow>, x_names: Vec<String>) -> Result<Self, PanelError> {
        let mut keys = HashSet::with_capacity(rows.len());
        for row in &rows {
            if !keys.insert((row.unit_id.as_str(), row.time)) {
                return Err(PanelError::DuplicateObservation {
                    unit: row.unit_id.clone(),
                    time: row.time.to_string(),
                });
            }
            if row.x.len() != x_names.len() {
                return Err(PanelError::ShapeMismatch(format!(
                    "row ({}, {}) has {} controls, expected {}",
                    row.unit_id,
                    row.time,
                    row.x.len(),
                    x_names.len()
                )));
            }
            if !(row.y.is_finite() && row.d.is_finite() && row.x.iter().all(|v| v.is_finite())) {
                return Err(PanelError::ShapeMismatch(format!(
                    "row ({}, {}) holds a non-finite value",
                    row.unit_id, row.time
                )));
            }
        }
        Ok(Self { rows, x_names })
    }

    pub fn rows(&self) -> &[PanelRow] {
        &self.rows
    }

    pub fn x_names(&self) -> &[String] {
        &self.x_names
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn y(&self) -> Array1<f64> {
        self.rows.iter().map(|r| r.y).collect()
    }

    pub fn d(&self) -> Array1<f64> {
        self.rows.iter().map(|r| r.d).collect()
    }

    pub fn x(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.rows.len(), self.x_names.len()), |(i, j)| self.rows[i].x[j])
    }

    pub fn unit_ids(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.unit_id.clone()).collect()
    }

    pub fn n_units(&self) -> usize {
        self.rows.iter().map(|r| r.unit_id.as_str()).collect::<HashSet<_>>().len()
    }
}

/// Reshapes wide fund returns plus shared treatment and controls into a panel.
///
/// A row for fund `f` at month `t` exists when the return, the treatment
/// and every control are observed at `t` and at each of the `lag_order`
/// preceding months. Incomplete windows are dropped per fund, not across
/// the whole sample. `x` holds the contemporaneous controls followed by
/// `lag_order` lags of the outcome, the treatment and each control.
/// Rows are sorted by unit id, then month.
pub fn to_panel(
    funds: &TimeSeriesMatrix,
    treatment_name: &str,
    treatment: &[Option<f64>],
    controls: &TimeSeriesMatrix,
    lag_order: usize,
) -> Result<PanelTable, PanelError> {
    if funds.time_index() != controls.time_index() {
        return Err(PanelError::IndexMismatch("fund and control time indexes differ".into()));
    }
    if treatment.len() != funds.n_rows() {
        return Err(PanelError::IndexMismatch(format!(
            "treatment has {} months, funds have {}",
            treatment.len(),
            funds.n_rows()
        )));
    }

    let mut x_names: Vec<String> = controls.columns().to_vec();
    let lagged: Vec<String> = std::iter::once("y".to_string())
        .chain(std::iter::once(treatment_name.to_string()))
        .chain(controls.columns().iter().cloned())
        .collect();
    for var in &lagged {
        x_names.extend((1..=lag_order).map(|j| format!("{var}_lag{j}")));
    }

    let mut order: Vec<usize> = (0..funds.n_cols()).collect();
    order.sort_by(|&a, &b| funds.columns()[a].cmp(&funds.columns()[b]));

    let rows: Vec<PanelRow> = order
        .par_iter()
        .flat_map_iter(|&f| fund_rows(funds, f, treatment, controls, lag_order))
        .collect();
    PanelTable::new(rows, x_names)
}

fn fund_rows(
    funds: &TimeSeriesMatrix,
    f: usize,
    treatment: &[Option<f64>],
    controls: &TimeSeriesMatrix,
    p: usize,
) -> Vec<PanelRow> {
    let y = funds.column_at(f);
    let n_ctrl = controls.n_cols();
    // every series the window must cover: y, d, then controls
    let series: Vec<&[Option<f64>]> = std::iter::once(y)
        .chain(std::iter::once(treatment))
        .chain((0..n_ctrl).map(|c| controls.column_at(c)))
        .collect();
    let observed = |t: usize| series.iter().all(|s| s[t].is_some());

    let unit = &funds.columns()[f];
    let mut out = Vec::new();
    for t in p..funds.n_rows() {
        if !(t - p..=t).all(observed) {
            continue;
        }
        let mut x = Vec::with_capacity(n_ctrl * (p + 1) + 2 * p);
        x.extend((0..n_ctrl).map(|c| controls.column_at(c)[t].unwrap()));
        for s in &series {
            x.extend((1..=p).map(|j| s[t - j].unwrap()));
        }
        out.push(PanelRow {
            unit_id: unit.clone(),
            time: funds.time_index()[t],
            y: y[t].unwrap(),
            d: treatment[t].unwrap(),
            x,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn start() -> Month {
        "2000-01".parse().unwrap()
    }

    fn matrix(names: &[&str], cols: Vec<Vec<Option<f64>>>) -> TimeSeriesMatrix {
        TimeSeriesMatrix::from_start(start(), names.iter().map(|s| s.to_string()).collect(), cols).unwrap()
    }

    fn full(n: usize, offset: f64) -> Vec<Option<f64>> {
        (0..n).map(|i| Some(i as f64 + offset)).collect()
    }

    #[test]
    fn full_cross_product_without_lags() {
        let funds = matrix(&["F1", "F2"], vec![full(10, 0.0), full(10, 100.0)]);
        let ctrl = matrix(&["c"], vec![full(10, 50.0)]);
        let panel = to_panel(&funds, "d", &full(10, 7.0), &ctrl, 0).unwrap();
        assert_eq!(panel.len(), 20);
        assert_eq!(panel.x_names(), ["c"]);
    }

    #[test]
    fn lags_consume_leading_months() {
        let funds = matrix(&["F1", "F2"], vec![full(10, 0.0), full(10, 100.0)]);
        let ctrl = matrix(&["c"], vec![full(10, 50.0)]);
        let panel = to_panel(&funds, "d", &full(10, 7.0), &ctrl, 7).unwrap();
        assert_eq!(panel.len(), 6);
        assert_eq!(panel.x_names().len(), 1 + 3 * 7);
        let row = &panel.rows()[0];
        assert_eq!(row.unit_id, "F1");
        assert_eq!(row.time, start().offset(7));
        // contemporaneous control, then y lags, d lags, c lags
        assert_eq!(row.x[0], 57.0);
        assert_eq!(row.x[1], 6.0);
        assert_eq!(row.x[7], 0.0);
        assert_eq!(row.x[8], 13.0);
        assert_eq!(row.x[15], 56.0);
    }

    #[test]
    fn missing_return_drops_its_window_for_that_fund_only() {
        let mut f1 = full(10, 0.0);
        f1[4] = None;
        let funds = matrix(&["F1", "F2"], vec![f1, full(10, 100.0)]);
        let ctrl = matrix(&["c"], vec![full(10, 50.0)]);
        let panel = to_panel(&funds, "d", &full(10, 7.0), &ctrl, 1).unwrap();
        let f1_months: Vec<i32> = panel
            .rows()
            .iter()
            .filter(|r| r.unit_id == "F1")
            .map(|r| r.time.months_since(start()))
            .collect();
        assert_eq!(f1_months, [1, 2, 3, 6, 7, 8, 9]);
        assert_eq!(panel.rows().iter().filter(|r| r.unit_id == "F2").count(), 9);
    }

    #[test]
    fn sorted_by_unit_then_time() {
        let funds = matrix(&["ZZ", "AA"], vec![full(4, 0.0), full(4, 1.0)]);
        let ctrl = matrix(&["c"], vec![full(4, 0.0)]);
        let panel = to_panel(&funds, "d", &full(4, 0.0), &ctrl, 0).unwrap();
        let keys: Vec<_> = panel.rows().iter().map(|r| (r.unit_id.clone(), r.time)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(keys[0].0, "AA");
    }

    #[test]
    fn index_mismatch() {
        let funds = matrix(&["F1"], vec![full(5, 0.0)]);
        let ctrl = matrix(&["c"], vec![full(5, 0.0)]);
        assert!(matches!(to_panel(&funds, "d", &full(4, 0.0), &ctrl, 0), Err(PanelError::IndexMismatch(_))));
        let shifted = TimeSeriesMatrix::from_start(start().offset(1), vec!["c".into()], vec![full(5, 0.0)]).unwrap();
        assert!(matches!(to_panel(&funds, "d", &full(5, 0.0), &shifted, 0), Err(PanelError::IndexMismatch(_))));
    }

    #[test]
    fn duplicate_observation_rejected() {
        let row = PanelRow { unit_id: "A".into(), time: start(), y: 0.0, d: 0.0, x: vec![] };
        assert!(matches!(
            PanelTable::new(vec![row.clone(), row], vec![]),
            Err(PanelError::DuplicateObservation { .. })
        ));
    }
}
