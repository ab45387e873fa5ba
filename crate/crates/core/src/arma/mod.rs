//! ARMA(p, q) models for the high-frequency bands: Hannan–Rissanen fitting,
//! stationarity repair, AIC order selection and one-step forecasts.

mod fit;
mod forecast;
mod roots;
mod select;

pub use fit::{fit_arma, long_ar_order};
pub use forecast::{forecast_one_step, residuals, RollingForecaster};
pub use roots::{ar_inverse_roots, ma_inverse_roots, STATIONARITY_MARGIN};
pub use select::{select_orders, OrderSelection};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArmaError {
    #[error("orders p = {p}, q = {q} are invalid; need p + q >= 1")]
    InvalidOrders { p: usize, q: usize },
    #[error("series of length {len} is too short; need at least {required}")]
    TooShort { len: usize, required: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("need {needed} past {what}, got {got}")]
    InsufficientHistory {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("least-squares system is singular")]
    Singular,
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Events recorded while fitting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitFlags {
    /// The series was constant and the mean-only model was returned.
    pub degenerate: bool,
    /// AR roots were reflected to restore stationarity.
    pub ar_reflected: bool,
    /// MA roots were reflected to restore invertibility.
    pub ma_reflected: bool,
}

/// `X_t = c + e_t + sum_i phi_i X_{t-i} + sum_i lambda_i e_{t-i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaModel {
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub noise_variance: f64,
    #[serde(default)]
    pub flags: FitFlags,
}

impl ArmaModel {
    pub fn new(intercept: f64, ar: Vec<f64>, ma: Vec<f64>, noise_variance: f64) -> Result<Self, ArmaError> {
        let finite = intercept.is_finite() && ar.iter().chain(&ma).all(|v| v.is_finite()) && noise_variance.is_finite();
        if !finite {
            return Err(ArmaError::InvalidModel("non-finite coefficient".into()));
        }
        if noise_variance < 0.0 {
            return Err(ArmaError::InvalidModel(format!("negative noise variance {noise_variance}")));
        }
        Ok(Self {
            intercept,
            ar,
            ma,
            noise_variance,
            flags: FitFlags::default(),
        })
    }

    /// The model that always predicts `mean`.
    pub fn mean_only(mean: f64) -> Self {
        Self {
            intercept: mean,
            ar: Vec::new(),
            ma: Vec::new(),
            noise_variance: 0.0,
            flags: FitFlags {
                degenerate: true,
                ..FitFlags::default()
            },
        }
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.ma.len()
    }

    /// Unconditional mean `c / (1 - sum phi)`.
    pub fn mean(&self) -> f64 {
        self.intercept / (1.0 - self.ar.iter().sum::<f64>())
    }

    /// All roots of `1 - sum phi_i z^i` lie outside the unit circle by the
    /// stationarity margin.
    pub fn is_stationary(&self) -> bool {
        roots::inside_margin(&ar_inverse_roots(&self.ar))
    }

    pub fn is_invertible(&self) -> bool {
        roots::inside_margin(&ma_inverse_roots(&self.ma))
    }
}
