//! Multilevel discrete wavelet transform (Mallat cascade), its inverse, and
//! per-band reconstruction of frequency components.

mod bands;
mod dwt;
mod filters;

pub use bands::{band_components, BandComponents};
pub use dwt::{coefficient_lengths, dwt_decompose, idwt_reconstruct, BoundaryMode, WaveletDecomposition};
pub use filters::{daubechies_filters, FilterBank};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaveletError {
    #[error("decomposition level must be at least 1")]
    ZeroLevel,
    #[error("signal of length {len} is too short for level {level} (needs at least {required})")]
    SignalTooShort {
        len: usize,
        level: usize,
        required: usize,
    },
    #[error("non-finite sample {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("unsupported Daubechies order {0}; expected 1..=10")]
    UnsupportedOrder(usize),
    #[error("unknown wavelet {0:?}")]
    UnknownWavelet(String),
    #[error("invalid filter bank {name}: {reason}")]
    InvalidFilterBank { name: String, reason: String },
    #[error("decomposition does not match: {0}")]
    Mismatch(String),
}
