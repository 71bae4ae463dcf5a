//! Synthetic inputs with a known effect, for smoke runs and the
//! determinism check.

use std::path::{Path, PathBuf};

use ratedml_core::learners::HyperParams;
use ratedml_core::synth::{write_panel_fixture, FixtureSpec};

use crate::error::CliError;

pub const DEMO_CONFIG: &str = "config.json";
pub const DEMO_GRID: &str = "grid.json";

/// A grid small enough for a run of a few seconds.
pub fn small_grid() -> Vec<HyperParams> {
    vec![HyperParams::new(50, 2, 0.1, 20), HyperParams::new(100, 3, 0.1, 20)]
}

/// Writes the fixture CSVs, a small grid and a config pointing at them.
/// Returns the config path.
pub fn write_demo_inputs(dir: &Path, spec: &FixtureSpec) -> Result<PathBuf, CliError> {
    write_panel_fixture(spec, dir).map_err(|e| CliError::Data(e.to_string()))?;
    let grid_path = dir.join(DEMO_GRID);
    let grid = serde_json::to_string_pretty(&small_grid()).expect("grid serialises");
    std::fs::write(&grid_path, grid).map_err(CliError::io(&grid_path))?;
    let config = serde_json::json!({
        "funds": "funds.csv",
        "macro": "macro.csv",
        "metadata": "funds_meta.csv",
        "treatment": "rate",
        "grid": DEMO_GRID,
        "seed": spec.seed,
        "output_dir": "out",
    });
    let path = dir.join(DEMO_CONFIG);
    std::fs::write(&path, serde_json::to_string_pretty(&config).expect("json")).map_err(CliError::io(&path))?;
    Ok(path)
}
