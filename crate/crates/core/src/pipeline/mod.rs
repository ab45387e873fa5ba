//! The hybrid forecaster end to end: band decomposition, window
//! construction, network training on the low band, ARMA on the high bands,
//! recombination and scoring, plus the comparison baselines.

mod bands;
mod metrics;
mod output;
mod run;
mod windows;

pub use bands::{causal_bands, decompose_all, training_split_bands, BandSet};
pub use metrics::{evaluate, EvaluationReport, SegmentMetrics};
pub use output::{arma_jsonl, parse_arma_jsonl, parse_predictions_csv, predictions_csv, report_toml, sweep_csv};
pub use run::{
    build_laplacian, compute_bands, fit_band_models, fit_hybrid, fit_hybrid_with, parameter_sweep, predict_hybrid,
    run_baseline, run_hybrid, run_hybrid_with, BandModel, BaselineKind, BaselineRun, FittedHybrid, HybridRun,
    Predictions, SweepAxis, SweepRow,
};
pub use windows::{build_windows, WindowSample, WindowSplit};

use thiserror::Error;

use crate::arma::ArmaError;
use crate::config::ConfigError;
use crate::data::DataError;
use crate::neural::NeuralError;
use crate::roadgraph::GraphError;
use crate::wavelet::WaveletError;

/// Failures tagged with the stage that raised them.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("data: {0}")]
    Data(#[from] DataError),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("decomposition of segment {segment}: {source}")]
    Wavelet { segment: String, source: WaveletError },
    #[error("windows: {0}")]
    Windows(String),
    #[error("network: {0}")]
    Neural(#[from] NeuralError),
    #[error("ARMA fit for segment {segment}, band {band}: {source}")]
    Arma {
        segment: String,
        band: String,
        source: ArmaError,
    },
    #[error("evaluation: {0}")]
    Metrics(String),
}

impl PipelineError {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            PipelineError::Neural(e) => matches!(e, NeuralError::NonFinite(_) | NeuralError::Diverged { .. }),
            PipelineError::Arma { source, .. } => {
                matches!(source, ArmaError::Singular | ArmaError::InvalidModel(_))
            }
            PipelineError::Wavelet { source, .. } => matches!(source, WaveletError::NonFinite { .. }),
            _ => false,
        }
    }
}
