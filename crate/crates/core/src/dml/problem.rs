use ndarray::{Array1, Array2};

use super::DmlError;
use crate::panel_data::PanelTable;
use crate::preprocess::{unit_codes, unit_varying_columns};

/// Outcome, treatment and controls for one partially linear regression.
#[derive(Debug, Clone, PartialEq)]
pub struct PlrProblem {
    y: Array1<f64>,
    d: Array1<f64>,
    x: Array2<f64>,
    x_names: Vec<String>,
    unit_ids: Vec<String>,
    units: Vec<usize>,
    n_units: usize,
    /// Regressors whose per-unit means may be appended by means-encoding.
    encoded: Vec<usize>,
    /// Time period of each row; iid problems give every row its own.
    periods: Vec<i32>,
}

impl PlrProblem {
    pub fn new(
        y: Array1<f64>,
        d: Array1<f64>,
        x: Array2<f64>,
        x_names: Vec<String>,
        unit_ids: Vec<String>,
    ) -> Result<Self, DmlError> {
        let n = y.len();
        if d.len() != n || x.nrows() != n || unit_ids.len() != n {
            return Err(DmlError::LengthMismatch(format!(
                "y {n}, d {}, X {}, unit ids {}",
                d.len(),
                x.nrows(),
                unit_ids.len()
            )));
        }
        if x_names.len() != x.ncols() {
            return Err(DmlError::LengthMismatch(format!("{} names for {} columns", x_names.len(), x.ncols())));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(DmlError::NonFinite("y"));
        }
        if !d.iter().all(|v| v.is_finite()) {
            return Err(DmlError::NonFinite("d"));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(DmlError::NonFinite("X"));
        }
        if d.iter().all(|&v| v == d[0]) {
            return Err(DmlError::ConstantTreatment);
        }
        let (units, n_units) = unit_codes(&unit_ids);
        let encoded = (0..x.ncols()).collect();
        let periods = (0..n as i32).collect();
        Ok(Self { y, d, x, x_names, unit_ids, units, n_units, encoded, periods })
    }

    /// Treats every row as its own unit.
    pub fn iid(y: Array1<f64>, d: Array1<f64>, x: Array2<f64>) -> Result<Self, DmlError> {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        let ids = (0..y.len()).map(|i| format!("r{i}")).collect();
        Self::new(y, d, x, names, ids)
    }

    /// Regressors shared by every unit in each month (macro series and their
    /// lags) are excluded from means-encoding.
    pub fn from_panel(panel: &PanelTable) -> Result<Self, DmlError> {
        let mut p = Self::new(panel.y(), panel.d(), panel.x(), panel.x_names().to_vec(), panel.unit_ids())?;
        p.periods = panel.rows().iter().map(|r| r.time.index()).collect();
        p.with_encoded_columns(unit_varying_columns(panel))
    }

    pub fn periods(&self) -> &[i32] {
        &self.periods
    }

    fn carry_from(mut self, other: &Self) -> Self {
        self.periods = other.periods.clone();
        self.encoded = other.encoded.clone();
        self
    }

    /// Copy with a different set of regressors eligible for means-encoding.
    pub fn with_encoded_columns(mut self, columns: Vec<usize>) -> Result<Self, DmlError> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.x.ncols()) {
            return Err(DmlError::LengthMismatch(format!("encoded column {bad} of {}", self.x.ncols())));
        }
        self.encoded = columns;
        Ok(self)
    }

    pub fn encoded_columns(&self) -> &[usize] {
        &self.encoded
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn d(&self) -> &Array1<f64> {
        &self.d
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn x_names(&self) -> &[String] {
        &self.x_names
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    /// Dense unit codes, one per row.
    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    /// Copy with `y` replaced.
    pub fn with_y(&self, y: Array1<f64>) -> Result<Self, DmlError> {
        Ok(Self::new(y, self.d.clone(), self.x.clone(), self.x_names.clone(), self.unit_ids.clone())?.carry_from(self))
    }

    /// Copy with `d` replaced.
    pub fn with_d(&self, d: Array1<f64>) -> Result<Self, DmlError> {
        Ok(Self::new(self.y.clone(), d, self.x.clone(), self.x_names.clone(), self.unit_ids.clone())?.carry_from(self))
    }

    /// Copy with one extra control column.
    pub fn with_control(&self, name: &str, column: &[f64]) -> Result<Self, DmlError> {
        if column.len() != self.n() {
            return Err(DmlError::LengthMismatch(format!("{} values for {} rows", column.len(), self.n())));
        }
        let mut x = Array2::zeros((self.n(), self.x.ncols() + 1));
        x.slice_mut(ndarray::s![.., ..self.x.ncols()]).assign(&self.x);
        x.column_mut(self.x.ncols()).assign(&ndarray::ArrayView1::from(column));
        let mut names = self.x_names.clone();
        names.push(name.to_string());
        let mut encoded = self.encoded.clone();
        encoded.push(self.x.ncols());
        Self::new(self.y.clone(), self.d.clone(), x, names, self.unit_ids.clone())?
            .carry_from(self)
            .with_encoded_columns(encoded)
    }
}
