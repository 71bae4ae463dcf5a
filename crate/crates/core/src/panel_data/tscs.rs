use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Month, PanelError};

/// Column layout of a wide CSV file.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub time_column: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self { time_column: "date".to_string() }
    }
}

/// Wide time-series cross-section data: months by named series.
///
/// Values are stored column-major; `None` marks a missing observation.
/// The time index is strictly increasing with monthly spacing and no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    time_index: Vec<Month>,
    columns: Vec<String>,
    values: Vec<Vec<Option<f64>>>,
}

impl TimeSeriesMatrix {
    pub fn new(
        time_index: Vec<Month>,
        columns: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, PanelError> {
        check_index(&time_index)?;
        let mut seen = HashSet::new();
        for name in &columns {
            if !seen.insert(name.as_str()) {
                return Err(PanelError::DuplicateColumn(name.clone()));
            }
        }
        if values.len() != columns.len() {
            return Err(PanelError::ShapeMismatch(format!(
                "{} columns named but {} value columns",
                columns.len(),
                values.len()
            )));
        }
        if let Some((i, col)) = values.iter().enumerate().find(|(_, c)| c.len() != time_index.len()) {
            return Err(PanelError::ShapeMismatch(format!(
                "column `{}` has {} rows, index has {}",
                columns[i],
                col.len(),
                time_index.len()
            )));
        }
        Ok(Self { time_index, columns, values })
    }

    /// Builds a contiguous monthly matrix starting at `start`.
    pub fn from_start(
        start: Month,
        columns: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, PanelError> {
        let rows = values.first().map_or(0, Vec::len);
        let index = (0..rows as i32).map(|i| start.offset(i)).collect();
        Self::new(index, columns, values)
    }

    pub fn n_rows(&self) -> usize {
        self.time_index.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn time_index(&self) -> &[Month] {
        &self.time_index
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_at(&self, i: usize) -> &[Option<f64>] {
        &self.values[i]
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.position(name).map(|i| self.values[i].as_slice())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[col][row]
    }

    pub fn iter_columns(&self) -> impl Iterator<Item = (&str, &[Option<f64>])> {
        self.columns.iter().map(String::as_str).zip(self.values.iter().map(Vec::as_slice))
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().flatten().filter(|v| v.is_none()).count()
    }

    /// A new matrix holding the named columns, in the order given.
    pub fn select(&self, names: &[&str]) -> Result<Self, PanelError> {
        let mut cols = Vec::with_capacity(names.len());
        let mut vals = Vec::with_capacity(names.len());
        for name in names {
            let i = self.position(name).ok_or_else(|| PanelError::UnknownColumn(name.to_string()))?;
            cols.push(self.columns[i].clone());
            vals.push(self.values[i].clone());
        }
        Self::new(self.time_index.clone(), cols, vals)
    }

    /// Same matrix without the named column.
    pub fn without(&self, name: &str) -> Self {
        let mut out = self.clone();
        if let Some(i) = out.position(name) {
            out.columns.remove(i);
            out.values.remove(i);
        }
        out
    }

    pub fn push_column(&mut self, name: String, values: Vec<Option<f64>>) -> Result<(), PanelError> {
        if self.position(&name).is_some() {
            return Err(PanelError::DuplicateColumn(name));
        }
        if values.len() != self.n_rows() {
            return Err(PanelError::ShapeMismatch(format!(
                "column `{name}` has {} rows, index has {}",
                values.len(),
                self.n_rows()
            )));
        }
        self.columns.push(name);
        self.values.push(values);
        Ok(())
    }

    /// Applies `f` to every column, keeping names and index.
    pub fn map_columns<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&[Option<f64>]) -> Vec<Option<f64>>,
    {
        let values = self.values.iter().map(|c| f(c)).collect();
        Self { time_index: self.time_index.clone(), columns: self.columns.clone(), values }
    }

    /// Restricts the matrix to the rows `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        Self {
            time_index: self.time_index[start..end].to_vec(),
            columns: self.columns.clone(),
            values: self.values.iter().map(|c| c[start..end].to_vec()).collect(),
        }
    }

    /// The longest leading/trailing trim that leaves every row complete.
    ///
    /// Returns `None` if an incomplete row sits between complete rows, or
    /// if no row is complete.
    pub fn complete_block(&self) -> Option<Self> {
        let complete: Vec<bool> =
            (0..self.n_rows()).map(|r| self.values.iter().all(|c| c[r].is_some())).collect();
        let first = complete.iter().position(|&c| c)?;
        let last = complete.iter().rposition(|&c| c)?;
        if complete[first..=last].iter().all(|&c| c) {
            Some(self.slice_rows(first, last + 1))
        } else {
            None
        }
    }

    /// Dense row-major copy. Panics if any value is missing.
    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        ndarray::Array2::from_shape_fn((self.n_rows(), self.n_cols()), |(r, c)| {
            self.values[c][r].expect("to_dense on a matrix with missing values")
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W, schema: &CsvSchema) -> Result<(), PanelError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = Vec::with_capacity(self.n_cols() + 1);
        header.push(schema.time_column.clone());
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for (r, month) in self.time_index.iter().enumerate() {
            record.clear();
            record.push(month.to_string());
            for col in &self.values {
                record.push(col[r].map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| PanelError::Csv(e.into()))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, schema: &CsvSchema) -> Result<(), PanelError> {
        let file = File::create(path).map_err(|source| PanelError::Io { path: path.to_path_buf(), source })?;
        self.write_csv(std::io::BufWriter::new(file), schema)
    }
}

fn check_index(index: &[Month]) -> Result<(), PanelError> {
    for pair in index.windows(2) {
        let step = pair[1].months_since(pair[0]);
        if step <= 0 {
            return Err(PanelError::NonMonotoneTime { at: pair[1].to_string() });
        }
        if step > 1 {
            return Err(PanelError::TimeGap { from: pair[0].to_string(), to: pair[1].to_string() });
        }
    }
    Ok(())
}

/// Loads a wide CSV file. Columns keep file order; empty cells are missing.
pub fn load_tscs_csv(path: &Path, schema: &CsvSchema) -> Result<TimeSeriesMatrix, PanelError> {
    let file = File::open(path).map_err(|source| PanelError::Io { path: path.to_path_buf(), source })?;
    read_tscs_csv(std::io::BufReader::new(file), schema)
}

pub fn read_tscs_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<TimeSeriesMatrix, PanelError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let time_pos = header
        .iter()
        .position(|h| h.trim() == schema.time_column)
        .ok_or_else(|| PanelError::MissingTimeColumn(schema.time_column.clone()))?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != time_pos)
        .map(|(_, h)| h.trim().to_string())
        .collect();
    let mut seen = HashSet::new();
    for n in &names {
        if !seen.insert(n.as_str()) {
            return Err(PanelError::DuplicateColumn(n.clone()));
        }
    }

    let mut index = Vec::new();
    let mut values: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(PanelError::MalformedRow { line, expected: header.len(), found: record.len() });
        }
        let stamp = &record[time_pos];
        let month: Month = stamp
            .parse()
            .map_err(|_| PanelError::UnparseableTime { line, value: stamp.to_string() })?;
        if let Some(prev) = index.last() {
            if month <= *prev {
                return Err(PanelError::NonMonotoneTime { at: month.to_string() });
            }
        }
        index.push(month);
        let mut col = 0;
        for (i, cell) in record.iter().enumerate() {
            if i == time_pos {
                continue;
            }
            values[col].push(parse_cell(cell, line, &names[col])?);
            col += 1;
        }
    }
    TimeSeriesMatrix::new(index, names, values)
}

fn parse_cell(cell: &str, line: u64, column: &str) -> Result<Option<f64>, PanelError> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(PanelError::InvalidNumber { line, column: column.to_string(), value: cell.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<TimeSeriesMatrix, PanelError> {
        read_tscs_csv(s.as_bytes(), &CsvSchema::default())
    }

    #[test]
    fn blank_cell_is_missing() {
        let m = read("date,F1,F2\n1990-01,0.1,0.2\n1990-02,,0.3\n1990-03,0.4,0.5\n").unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (3, 2));
        assert_eq!(m.missing_count(), 1);
        assert_eq!(m.get(1, 0), None);
        assert_eq!(m.get(2, 1), Some(0.5));
        assert_eq!(m.columns(), ["F1", "F2"]);
    }

    #[test]
    fn decreasing_dates_rejected() {
        let err = read("date,F1\n1986-02,1\n1986-01,2\n").unwrap_err();
        assert!(matches!(err, PanelError::NonMonotoneTime { .. }), "{err}");
    }

    #[test]
    fn gap_rejected() {
        let err = read("date,F1\n1986-01,1\n1986-03,2\n").unwrap_err();
        assert!(matches!(err, PanelError::TimeGap { .. }), "{err}");
    }

    #[test]
    fn ragged_row_rejected() {
        let err = read("date,F1,F2\n1986-01,1,2\n1986-02,3\n").unwrap_err();
        assert!(matches!(err, PanelError::MalformedRow { expected: 3, found: 2, .. }), "{err}");
    }

    #[test]
    fn bad_time_and_duplicates() {
        assert!(matches!(read("date,F1\n86-1,1\n").unwrap_err(), PanelError::UnparseableTime { .. }));
        assert!(matches!(read("date,F1,F1\n1986-01,1,2\n").unwrap_err(), PanelError::DuplicateColumn(_)));
        assert!(matches!(read("month,F1\n1986-01,1\n").unwrap_err(), PanelError::MissingTimeColumn(_)));
        assert!(matches!(read("date,F1\n1986-01,abc\n").unwrap_err(), PanelError::InvalidNumber { .. }));
    }

    #[test]
    fn time_column_need_not_be_first() {
        let schema = CsvSchema { time_column: "month".into() };
        let m = read_tscs_csv("A,month,B\n1,2000-01,2\n3,2000-02,4\n".as_bytes(), &schema).unwrap();
        assert_eq!(m.columns(), ["A", "B"]);
        assert_eq!(m.get(1, 1), Some(4.0));
    }

    #[test]
    fn complete_block_trims_edges_only() {
        let start: Month = "2000-01".parse().unwrap();
        let m = TimeSeriesMatrix::from_start(
            start,
            vec!["a".into(), "b".into()],
            vec![vec![None, Some(1.0), Some(2.0), None], vec![Some(0.0), Some(1.0), Some(2.0), Some(3.0)]],
        )
        .unwrap();
        let b = m.complete_block().unwrap();
        assert_eq!(b.n_rows(), 2);
        assert_eq!(b.time_index()[0], start.offset(1));

        let holed = TimeSeriesMatrix::from_start(
            start,
            vec!["a".into()],
            vec![vec![Some(1.0), None, Some(2.0)]],
        )
        .unwrap();
        assert!(holed.complete_block().is_none());
    }
}
