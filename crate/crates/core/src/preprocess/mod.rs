//! The statistical chain between raw series and the learners: first
//! differences, ADF stationarity screening, VAR lag-order selection by AIC,
//! lag columns, per-unit means-encoding, and correlation / PCA summaries.

mod adf;
mod corr_pca;
mod critical_values;
mod difference;
mod encoding;
mod lags;
mod screen;
mod var_lag;

pub use adf::{adf_test, schwert_lag, AdfReport, LagChoice, SignificanceLevel, Verdict};
pub use corr_pca::{correlation_matrix, pca_corr, CorrMatrix, CorrPcaReport};
pub use critical_values::{compiled_critical_values, CriticalValues, COMPILED_TABLE};
pub use difference::{difference_matrix, first_difference};
pub use encoding::{means_encode, unit_codes, unit_varying_columns, EncodingOptions, MeansEncoder};
pub use lags::{build_lags, lag_series};
pub use screen::{screen_stationarity, ScreenEntry, StationarityScreen};
pub use var_lag::{select_lag_var_aic, VarLagSelection};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PreprocessError {
    #[error("series too short: need at least {required} observations, got {actual}")]
    TooShort { required: usize, actual: usize },
    #[error("regression is singular (constant or collinear input)")]
    SingularRegression,
    #[error("column `{name}`: {source}")]
    Column {
        name: String,
        #[source]
        source: Box<PreprocessError>,
    },
    #[error("insufficient data: need more than {required} rows, got {actual}")]
    InsufficientData { required: usize, actual: usize },
    #[error("residual covariance is singular")]
    SingularCovariance,
    #[error("missing values inside the sample: {0}")]
    MissingValues(String),
    #[error("training mask selects no rows")]
    EmptyTrainMask,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("column `{0}` is constant")]
    ConstantColumn(String),
    #[error("columns `{0}` and `{1}` share fewer than 2 observations")]
    InsufficientPairs(String, String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix diagonal is not all ones")]
    NotUnitDiagonal,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl PreprocessError {
    pub(crate) fn in_column(self, name: &str) -> Self {
        PreprocessError::Column { name: name.to_string(), source: Box::new(self) }
    }
}
