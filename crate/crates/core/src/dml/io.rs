use std::io::Write;

use super::{DmlResult, NuisanceResiduals};

pub const RESULTS_HEADER: [&str; 9] = ["model", "coef", "se", "t", "p", "ci_low", "ci_high", "n", "per_1pct"];

/// One row per result: `model,coef,se,t,p,ci_low,ci_high,n,per_1pct`.
pub fn write_results_csv<W: Write>(results: &[DmlResult], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULTS_HEADER)?;
    for r in results {
        w.write_record([
            r.model.clone(),
            r.theta.to_string(),
            r.se.to_string(),
            r.t.to_string(),
            r.p.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
            r.n.to_string(),
            r.per_1pct.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `row,fold,u,v` for every observation.
pub fn write_residuals_csv<W: Write>(res: &NuisanceResiduals, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "fold", "u", "v"])?;
    for i in 0..res.u.len() {
        w.write_record([i.to_string(), res.fold_of[i].to_string(), res.u[i].to_string(), res.v[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}
