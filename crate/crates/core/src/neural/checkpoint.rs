use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MotifGcrnnModel, NeuralError, TrainConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Self-describing model file: architecture, all parameter arrays with their
/// shapes, the Laplacian, the scaler, and the training run that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub model: MotifGcrnnModel,
    pub train_config: Option<TrainConfig>,
    pub loss_history: Vec<f64>,
}

impl Checkpoint {
    pub fn new(model: MotifGcrnnModel, train_config: Option<TrainConfig>, loss_history: Vec<f64>) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            model,
            train_config,
            loss_history,
        }
    }

    pub fn to_json(&self) -> Result<String, NeuralError> {
        serde_json::to_string(self).map_err(|e| NeuralError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, NeuralError> {
        let ckpt: Self = serde_json::from_str(text).map_err(|e| NeuralError::Format(e.to_string()))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(NeuralError::Format(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        if !ckpt.model.params.is_finite() {
            return Err(NeuralError::NonFinite("checkpoint parameters"));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<(), NeuralError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `epoch,loss` with epochs numbered from 1.
pub fn loss_history_csv(history: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    for (i, loss) in history.iter().enumerate() {
        let _ = writeln!(out, "{},{loss}", i + 1);
    }
    out
}
