use std::path::{Path, PathBuf};

use rand_distr::{Distribution, Normal, StandardNormal};

use super::SynthError;
use crate::panel_data::{CsvSchema, Month, TimeSeriesMatrix};
use crate::rng::{derive_seed, stream};

/// A small fund panel with a known treatment effect.
///
/// Macro series are written in levels; their first differences are
/// `Δc_j ~ N(0, 1)` for the controls `c1..c3` and
/// `Δrate = 0.5 Δc1 + 0.5 e` for the treatment. `nrou` is integrated of
/// order two, so it stays non-stationary after differencing. Fund `i`
/// returns `α_i + θ Δrate + 0.8 Δc1 − 0.5 Δc2 + 0.3 Δc3 + σ ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub n_funds: usize,
    pub n_months: usize,
    pub theta_true: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub start: Month,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            n_funds: 20,
            n_months: 240,
            theta_true: -5.0,
            noise_sd: 0.5,
            seed: 7,
            start: Month::new(2010, 1).expect("valid month"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureFiles {
    pub funds: PathBuf,
    pub macro_vars: PathBuf,
    pub metadata: PathBuf,
}

fn cumsum(xs: &[f64]) -> Vec<f64> {
    xs.iter().scan(0.0, |s, x| { *s += x; Some(*s) }).collect()
}

/// Writes `funds.csv`, `macro.csv` and `funds_meta.csv` into `dir`.
pub fn write_panel_fixture(spec: &FixtureSpec, dir: &Path) -> Result<FixtureFiles, SynthError> {
    if spec.n_funds == 0 || spec.n_months < 30 {
        return Err(SynthError::InvalidSpec("need at least one fund and 30 months".into()));
    }
    let t = spec.n_months;
    let mut rng = stream(derive_seed(spec.seed, 0));
    let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let dc: Vec<Vec<f64>> = (0..3).map(|_| draw(t)).collect();
    let e = draw(t);
    let drate: Vec<f64> = (0..t).map(|i| 0.5 * dc[0][i] + 0.5 * e[i]).collect();
    let nrou = cumsum(&cumsum(&draw(t)));

    // levels; the first month's difference is never used
    let mut macro_cols: Vec<Vec<Option<f64>>> = Vec::new();
    let rate: Vec<f64> = cumsum(&drate).iter().map(|v| 2.0 + 0.1 * v).collect();
    macro_cols.push(rate.iter().copied().map(Some).collect());
    for d in &dc {
        macro_cols.push(cumsum(d).into_iter().map(|v| Some(100.0 + v)).collect());
    }
    macro_cols.push(nrou.into_iter().map(|v| Some(5.0 + 0.01 * v)).collect());
    let macro_vars = TimeSeriesMatrix::from_start(
        spec.start,
        vec!["rate".into(), "c1".into(), "c2".into(), "c3".into(), "nrou".into()],
        macro_cols,
    )
    .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;

    // the pipeline sees Δrate in percentage points, i.e. 0.1 × drate
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    let mut fund_cols = Vec::with_capacity(spec.n_funds);
    let mut tickers = Vec::with_capacity(spec.n_funds);
    for f in 0..spec.n_funds {
        let mut frng = stream(derive_seed(spec.seed, 1 + f as u64));
        let z: f64 = StandardNormal.sample(&mut frng);
        let alpha = 0.2 * z;
        // the last fund starts a year late
        let first = if f + 1 == spec.n_funds && spec.n_funds > 1 { 12 } else { 0 };
        let col = (0..t)
            .map(|i| {
                let eps = noise.sample(&mut frng);
                (i >= first).then(|| {
                    alpha + spec.theta_true * 0.1 * drate[i] + 0.8 * dc[0][i] - 0.5 * dc[1][i]
                        + 0.3 * dc[2][i]
                        + eps
                })
            })
            .collect();
        fund_cols.push(col);
        tickers.push(format!("F{:02}", f + 1));
    }
    let funds = TimeSeriesMatrix::from_start(spec.start, tickers.clone(), fund_cols)
        .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;

    let io = |path: &Path, e: &dyn std::fmt::Display| SynthError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, &e))?;
    let files = FixtureFiles {
        funds: dir.join("funds.csv"),
        macro_vars: dir.join("macro.csv"),
        metadata: dir.join("funds_meta.csv"),
    };
    let schema = CsvSchema::default();
    funds.save_csv(&files.funds, &schema).map_err(|e| io(&files.funds, &e))?;
    macro_vars.save_csv(&files.macro_vars, &schema).map_err(|e| io(&files.macro_vars, &e))?;

    let mut meta = String::from("ticker,asset_class,inception,aum_musd,managed\n");
    for (f, ticker) in tickers.iter().enumerate() {
        let class = if f % 2 == 0 { "Equity" } else { "Fixed Income" };
        let managed = if f % 3 == 0 { "Passive" } else { "Active" };
        let inception = if f + 1 == spec.n_funds && spec.n_funds > 1 { spec.start.offset(12) } else { spec.start };
        meta.push_str(&format!("{ticker},{class},{inception},{},{managed}\n", 150 + 25 * f));
    }
    std::fs::write(&files.metadata, meta).map_err(|e| io(&files.metadata, &e))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel_data::{load_fund_catalog, load_tscs_csv};

    #[test]
    fn round_trips_through_readers() {
        let dir = tempfile::tempdir().unwrap();
        let spec = FixtureSpec { n_funds: 4, n_months: 40, ..FixtureSpec::default() };
        let files = write_panel_fixture(&spec, dir.path()).unwrap();
        let funds = load_tscs_csv(&files.funds, &CsvSchema::default()).unwrap();
        assert_eq!(funds.columns(), ["F01", "F02", "F03", "F04"]);
        assert_eq!(funds.n_rows(), 40);
        assert_eq!(funds.column("F04").unwrap().iter().filter(|v| v.is_none()).count(), 12);
        let macro_vars = load_tscs_csv(&files.macro_vars, &CsvSchema::default()).unwrap();
        assert_eq!(macro_vars.columns(), ["rate", "c1", "c2", "c3", "nrou"]);
        let meta = load_fund_catalog(&files.metadata).unwrap();
        assert_eq!(meta.len(), 4);
        assert_eq!(meta[3].inception, spec.start.offset(12));

        let again = tempfile::tempdir().unwrap();
        let files2 = write_panel_fixture(&spec, again.path()).unwrap();
        assert_eq!(std::fs::read(&files.funds).unwrap(), std::fs::read(&files2.funds).unwrap());
    }
}
