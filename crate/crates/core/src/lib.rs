//! Cross-fitted double machine learning for the effect of a macroeconomic
//! treatment (interest-rate growth) on panel outcomes (fund returns).
//!
//! The crate is organised along the pipeline:
//!
//! - [`panel_data`]: monthly time-series cross-section ingestion, fund
//!   metadata filtering, frequency alignment and the long panel reshape.
//! - [`preprocess`]: differencing, ADF stationarity screening, VAR lag-order
//!   selection, lag construction, means-encoding, correlation and PCA.
//! - [`learners`]: OLS and gradient-boosted regression trees, k-fold
//!   splitting, grid search and the MSE / R² metrics.
//! - [`dml`]: the partially linear model, cross-fitting and inference.
//! - [`synth`]: data-generating processes with known ground truth and the
//!   Dickey-Fuller Monte Carlo used to compile critical values.

pub mod linalg;
pub mod rng;
pub mod stats;

pub mod dml;
pub mod learners;
pub mod panel_data;
pub mod preprocess;
pub mod synth;

pub use dml::{DmlResult, NuisanceResiduals, PlrProblem};
pub use learners::{GbtModel, HyperParams, LearnerSpec, LinearModel};
pub use panel_data::{FundMeta, Month, PanelTable, TimeSeriesMatrix};
