use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Month, PanelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AssetClass {
    FixedIncome,
    Equity,
}

impl FromStr for AssetClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalise(s).as_str() {
            "fixedincome" => Ok(AssetClass::FixedIncome),
            "equity" => Ok(AssetClass::Equity),
            _ => Err(format!("unknown asset class `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Management {
    Active,
    Passive,
}

impl FromStr for Management {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalise(s).as_str() {
            "active" => Ok(Management::Active),
            "passive" => Ok(Management::Passive),
            _ => Err(format!("unknown management style `{s}`")),
        }
    }
}

fn normalise(s: &str) -> String {
    s.chars().filter(|c| c.is_ascii_alphanumeric()).map(|c| c.to_ascii_lowercase()).collect()
}

/// Descriptive record for one fund.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundMeta {
    pub ticker: String,
    pub asset_class: AssetClass,
    pub inception: Month,
    /// Assets under management, millions of USD.
    pub aum_musd: f64,
    pub managed: Management,
}

/// Selection rules applied to a fund catalog. Unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterCriteria {
    /// Inclusive lower bound on AUM.
    pub min_aum: Option<f64>,
    pub asset_classes: Option<BTreeSet<AssetClass>>,
    pub managed: Option<Management>,
    /// Inclusive lower bound on inception month.
    pub min_inception: Option<Month>,
}

impl FilterCriteria {
    pub fn accepts(&self, fund: &FundMeta) -> bool {
        self.min_aum.is_none_or(|m| fund.aum_musd >= m)
            && self.asset_classes.as_ref().is_none_or(|set| set.contains(&fund.asset_class))
            && self.managed.is_none_or(|m| fund.managed == m)
            && self.min_inception.is_none_or(|m| fund.inception >= m)
    }
}

/// Funds satisfying every criterion, in catalog order.
pub fn filter_funds(catalog: &[FundMeta], criteria: &FilterCriteria) -> Vec<FundMeta> {
    catalog.iter().filter(|f| criteria.accepts(f)).cloned().collect()
}

/// Reads a metadata file with header `ticker,asset_class,inception,aum_musd,managed`.
pub fn load_fund_catalog(path: &Path) -> Result<Vec<FundMeta>, PanelError> {
    let file = File::open(path).map_err(|source| PanelError::Io { path: path.to_path_buf(), source })?;
    read_fund_catalog(std::io::BufReader::new(file))
}

pub fn read_fund_catalog<R: Read>(reader: R) -> Result<Vec<FundMeta>, PanelError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| PanelError::InvalidMeta {
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let (ti, ac, inc, aum, man) =
        (col("ticker")?, col("asset_class")?, col("inception")?, col("aum_musd")?, col("managed")?);

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| PanelError::InvalidMeta { line, message };
        let ticker = record[ti].to_string();
        if ticker.is_empty() {
            return Err(bad("empty ticker".into()));
        }
        if !seen.insert(ticker.clone()) {
            return Err(PanelError::DuplicateTicker(ticker));
        }
        let asset_class = record[ac].parse().map_err(bad)?;
        let inception = record[inc].parse().map_err(|e: super::ParseMonthError| bad(e.to_string()))?;
        let aum_musd: f64 = record[aum].parse().map_err(|_| bad(format!("bad aum `{}`", &record[aum])))?;
        if !(aum_musd.is_finite() && aum_musd >= 0.0) {
            return Err(bad(format!("aum must be a non-negative number, got {aum_musd}")));
        }
        let managed = record[man].parse().map_err(bad)?;
        out.push(FundMeta { ticker, asset_class, inception, aum_musd, managed });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fund(ticker: &str, aum: f64) -> FundMeta {
        FundMeta {
            ticker: ticker.into(),
            asset_class: AssetClass::Equity,
            inception: "1990-01".parse().unwrap(),
            aum_musd: aum,
            managed: Management::Active,
        }
    }

    #[test]
    fn aum_threshold_is_inclusive() {
        let catalog = vec![fund("A", 10.0), fund("B", 20.0), fund("C", 50.0)];
        let crit = FilterCriteria { min_aum: Some(20.0), ..Default::default() };
        let kept: Vec<_> = filter_funds(&catalog, &crit).into_iter().map(|f| f.ticker).collect();
        assert_eq!(kept, ["B", "C"]);
    }

    #[test]
    fn nothing_matches() {
        let catalog = vec![fund("A", 10.0)];
        let crit = FilterCriteria { managed: Some(Management::Passive), ..Default::default() };
        assert!(filter_funds(&catalog, &crit).is_empty());
    }

    #[test]
    fn parses_catalog() {
        let text = "ticker,asset_class,inception,aum_musd,managed\n\
                    AAA,FixedIncome,1986-03,25.5,Active\n\
                    BBB,Equity,1999-12,0,passive\n";
        let cat = read_fund_catalog(text.as_bytes()).unwrap();
        assert_eq!(cat.len(), 2);
        assert_eq!(cat[0].asset_class, AssetClass::FixedIncome);
        assert_eq!(cat[1].managed, Management::Passive);
    }

    #[test]
    fn rejects_bad_catalogs() {
        let dup = "ticker,asset_class,inception,aum_musd,managed\nA,Equity,1990-01,1,Active\nA,Equity,1990-01,1,Active\n";
        assert!(matches!(read_fund_catalog(dup.as_bytes()), Err(PanelError::DuplicateTicker(_))));
        let neg = "ticker,asset_class,inception,aum_musd,managed\nA,Equity,1990-01,-1,Active\n";
        assert!(matches!(read_fund_catalog(neg.as_bytes()), Err(PanelError::InvalidMeta { .. })));
        let empty = "ticker,asset_class,inception,aum_musd,managed\n,Equity,1990-01,1,Active\n";
        assert!(matches!(read_fund_catalog(empty.as_bytes()), Err(PanelError::InvalidMeta { .. })));
    }
}
