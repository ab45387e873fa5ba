//! Motif-GCRNN: Chebyshev graph convolution over the motif Laplacian, two
//! LSTM branches (recent trend and daily period), and a tanh regression head,
//! with hand-written reverse-mode gradients and an SGD trainer.

mod cheb;
mod checkpoint;
mod lstm;
mod model;
mod train;

pub use cheb::{cheb_graph_conv, Activation, ChebFilterParams};
pub use checkpoint::{loss_history_csv, Checkpoint, CHECKPOINT_VERSION};
pub use lstm::{lstm_forward, LstmParams};
pub use model::{loss_mse, MinMaxScaler, ModelConfig, ModelParams, MotifGcrnnModel, Window};
pub use train::{train, TrainConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("graph convolution needs a rescaled Laplacian")]
    NotRescaled,
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("LSTM input sequence is empty")]
    EmptySequence,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no training windows")]
    NoTrainingData,
    #[error("training diverged at epoch {epoch} (loss {loss}); lower the learning rate or enable gradient clipping")]
    Diverged { epoch: usize, loss: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(String),
}
