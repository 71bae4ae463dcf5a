//! CSV tables written by a run and read back by the plotter.

use std::io::Write;

use ndarray::Array2;

use ratedml_core::dml::{DmlResult, NuisanceResiduals};
use ratedml_core::preprocess::{CorrMatrix, CorrPcaReport};

/// `model,r2_y,r2_d`.
pub fn write_r2_csv<W: Write>(rows: &[(String, f64, f64)], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "r2_y", "r2_d"])?;
    for (model, ry, rd) in rows {
        w.write_record([model.clone(), ry.to_string(), rd.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `model,per_1pct`.
pub fn write_per_1pct_csv<W: Write>(results: &[DmlResult], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "per_1pct"])?;
    for r in results {
        w.write_record([r.model.clone(), r.per_1pct.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `row,g_hat,m_hat`.
pub fn write_fitted_csv<W: Write>(res: &NuisanceResiduals, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "g_hat", "m_hat"])?;
    for i in 0..res.g_hat.len() {
        w.write_record([i.to_string(), res.g_hat[i].to_string(), res.m_hat[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Square matrix with a `variable` label column.
pub fn write_corr_csv<W: Write>(corr: &CorrMatrix, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["variable".to_string()];
    header.extend(corr.names.iter().cloned());
    w.write_record(&header)?;
    for (i, name) in corr.names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(corr.values.row(i).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `component,eigenvalue,explained_ratio,<loading per variable>`.
pub fn write_pca_csv<W: Write>(names: &[String], pca: &CorrPcaReport, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["component".to_string(), "eigenvalue".to_string(), "explained_ratio".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for c in 0..pca.eigenvalues.len() {
        let mut row = vec![
            format!("PC{}", c + 1),
            pca.eigenvalues[c].to_string(),
            pca.explained_ratio[c].to_string(),
        ];
        row.extend(pca.components.column(c).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, String> {
    s.trim().parse().map_err(|_| format!("{what}: `{s}` is not a number"))
}

/// Reads a matrix written by [`write_corr_csv`].
pub fn read_corr_csv(text: &str) -> Result<(Vec<String>, Array2<f64>), String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let names: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().skip(1).map(String::from).collect();
    let k = names.len();
    let mut m = Array2::zeros((k, k));
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if i >= k || rec.len() != k + 1 {
            return Err("correlation table is not square".into());
        }
        for j in 0..k {
            m[[i, j]] = parse_f64(&rec[j + 1], "corr")?;
        }
        rows += 1;
    }
    if rows != k {
        return Err("correlation table is not square".into());
    }
    Ok((names, m))
}

/// `(component label, explained ratio)` pairs from a PCA table.
pub fn read_pca_ratios(text: &str) -> Result<Vec<(String, f64)>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() < 3 {
            return Err("pca table needs component, eigenvalue and explained_ratio".into());
        }
        out.push((rec[0].to_string(), parse_f64(&rec[2], "explained_ratio")?));
    }
    Ok(out)
}

/// Reads one numeric column by name.
pub fn read_column(text: &str, column: &str) -> Result<Vec<f64>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let idx = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| format!("missing column `{column}`"))?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            parse_f64(&rec[idx], column)
        })
        .collect()
}
