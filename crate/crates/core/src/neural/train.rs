use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MotifGcrnnModel, NeuralError, Window};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Global gradient-norm ceiling, applied to the batch-mean gradient.
    /// Defaults to 5 when the key is absent.
    pub gradient_clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 32,
            seed: 0,
            gradient_clip: Some(5.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::InvalidConfig(m.to_string()));
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if let Some(c) = self.gradient_clip {
            if !(c > 0.0) || !c.is_finite() {
                return bad("gradient_clip must be positive");
            }
        }
        Ok(())
    }
}

/// Mini-batch SGD on the summed squared error. Each step moves along the
/// batch-mean gradient. Returns the mean per-window loss of every epoch.
pub fn train(
    model: &mut MotifGcrnnModel,
    windows: &[Window],
    config: &TrainConfig,
) -> Result<Vec<f64>, NeuralError> {
    config.validate()?;
    if windows.is_empty() {
        return Err(NeuralError::NoTrainingData);
    }
    for w in windows {
        model.check_window(w)?;
    }
    let normalized: Vec<Window> = windows.iter().map(|w| model.normalize_window(w)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..normalized.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut per_window = vec![0.0; normalized.len()];

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let refs: Vec<&Window> = chunk.iter().map(|&i| &normalized[i]).collect();
            let batch = model.gather(&refs, false);
            let (losses, grads) = model.gradients(&batch);
            let loss = losses.sum();
            if !loss.is_finite() {
                return Err(NeuralError::Diverged { epoch, loss });
            }
            for (&i, &l) in chunk.iter().zip(&losses) {
                per_window[i] = l;
            }

            let mut scale = 1.0 / batch.len() as f64;
            if let Some(clip) = config.gradient_clip {
                let norm = grads.norm() * scale;
                if norm > clip {
                    scale *= clip / norm;
                }
            }
            let step = config.learning_rate * scale;
            for ((_, p), (_, g)) in model.params.tensors_mut().into_iter().zip(grads.tensors()) {
                for (pv, gv) in p.iter_mut().zip(g) {
                    *pv -= step * gv;
                }
            }
        }
        // Summed in window order so the value does not depend on the shuffle.
        let mean = per_window.iter().sum::<f64>() / normalized.len() as f64;
        if !mean.is_finite() || !model.params.is_finite() {
            return Err(NeuralError::Diverged { epoch, loss: mean });
        }
        if epoch == 1 || epoch % 50 == 0 || epoch == config.epochs {
            log::debug!("epoch {epoch}: loss {mean:.6}");
        }
        history.push(mean);
    }
    Ok(history)
}
