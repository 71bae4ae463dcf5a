use rayon::prelude::*;

use super::{adf_test, AdfReport, LagChoice, PreprocessError, SignificanceLevel, Verdict};
use crate::panel_data::TimeSeriesMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenEntry {
    pub variable: String,
    pub report: AdfReport,
}

#[derive(Debug, Clone)]
pub struct StationarityScreen {
    pub kept: TimeSeriesMatrix,
    pub dropped: Vec<ScreenEntry>,
    /// Every tested column in input order.
    pub audit: Vec<ScreenEntry>,
}

impl StationarityScreen {
    /// Audit trail as `variable,adf_stat,crit_5pct,verdict`.
    pub fn write_audit_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["variable", "adf_stat", "crit_5pct", "verdict"])?;
        for e in &self.audit {
            w.write_record([
                e.variable.clone(),
                e.report.statistic.to_string(),
                e.report.critical_values.five_pct.to_string(),
                e.report.verdict.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// ADF-tests every column (missing values removed) and drops the ones that
/// look non-stationary.
pub fn screen_stationarity(
    vars: &TimeSeriesMatrix,
    level: SignificanceLevel,
    lags: LagChoice,
) -> Result<StationarityScreen, PreprocessError> {
    let audit = vars
        .columns()
        .par_iter()
        .enumerate()
        .map(|(i, name)| {
            let series: Vec<f64> = vars.column_at(i).iter().flatten().copied().collect();
            adf_test(&series, level, lags)
                .map(|report| ScreenEntry { variable: name.clone(), report })
                .map_err(|e| e.in_column(name))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut kept = vars.clone();
    let mut dropped = Vec::new();
    for e in &audit {
        if e.report.verdict == Verdict::NonStationary {
            kept = kept.without(&e.variable);
            dropped.push(e.clone());
        }
    }
    Ok(StationarityScreen { kept, dropped, audit })
}
