use std::collections::VecDeque;

use super::{ArmaError, ArmaModel};

fn predict(model: &ArmaModel, lagged_value: impl Fn(usize) -> f64, lagged_resid: impl Fn(usize) -> f64) -> f64 {
    let mut y = model.intercept;
    for (i, phi) in model.ar.iter().enumerate() {
        y += phi * lagged_value(i + 1);
    }
    for (i, lambda) in model.ma.iter().enumerate() {
        y += lambda * lagged_resid(i + 1);
    }
    y
}

/// `c + sum phi_i X_{t-i} + sum lambda_i e_{t-i}` with the current innovation
/// at its mean of zero. The last elements of both histories are the most
/// recent.
pub fn forecast_one_step(model: &ArmaModel, history: &[f64], residual_history: &[f64]) -> Result<f64, ArmaError> {
    if history.len() < model.p() {
        return Err(ArmaError::InsufficientHistory {
            what: "values",
            needed: model.p(),
            got: history.len(),
        });
    }
    if residual_history.len() < model.q() {
        return Err(ArmaError::InsufficientHistory {
            what: "residuals",
            needed: model.q(),
            got: residual_history.len(),
        });
    }
    Ok(predict(
        model,
        |lag| history[history.len() - lag],
        |lag| residual_history[residual_history.len() - lag],
    ))
}

/// Conditional one-step residuals. The first `p` entries, which have no
/// complete lag vector, are zero, and innovations before the start of the
/// series are taken as zero.
pub fn residuals(model: &ArmaModel, series: &[f64]) -> Vec<f64> {
    let mut forecaster = RollingForecaster::new(model.clone());
    series.iter().map(|&x| forecaster.observe(x)).collect()
}

/// Keeps the lag state needed for rolling one-step forecasts without
/// refitting.
#[derive(Debug, Clone)]
pub struct RollingForecaster {
    model: ArmaModel,
    values: VecDeque<f64>,
    residuals: VecDeque<f64>,
}

impl RollingForecaster {
    pub fn new(model: ArmaModel) -> Self {
        Self {
            values: VecDeque::with_capacity(model.p() + 1),
            residuals: VecDeque::with_capacity(model.q() + 1),
            model,
        }
    }

    pub fn model(&self) -> &ArmaModel {
        &self.model
    }

    /// Forecast of the next value, or `None` until `p` values were seen.
    pub fn forecast(&self) -> Option<f64> {
        if self.values.len() < self.model.p() {
            return None;
        }
        let v = &self.values;
        let r = &self.residuals;
        Some(predict(
            &self.model,
            |lag| v[v.len() - lag],
            |lag| if lag <= r.len() { r[r.len() - lag] } else { 0.0 },
        ))
    }

    /// Records the realised value and returns its one-step residual.
    pub fn observe(&mut self, value: f64) -> f64 {
        let resid = self.forecast().map_or(0.0, |f| value - f);
        push_bounded(&mut self.values, value, self.model.p());
        push_bounded(&mut self.residuals, resid, self.model.q());
        resid
    }
}

fn push_bounded(buf: &mut VecDeque<f64>, v: f64, cap: usize) {
    if cap == 0 {
        return;
    }
    if buf.len() == cap {
        buf.pop_front();
    }
    buf.push_back(v);
}
