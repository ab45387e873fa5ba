use std::fmt::Write as _;

use super::{dwt_decompose, idwt_reconstruct, BoundaryMode, FilterBank, WaveletError};

/// Full-length series reconstructed from single coefficient sets.
#[derive(Debug, Clone, PartialEq)]
pub struct BandComponents {
    /// `rA_level`, reconstructed from the final approximation only.
    pub low_frequency: Vec<f64>,
    /// `rD_1 ..= rD_level`; index 0 is the finest band.
    pub high_frequency: Vec<Vec<f64>>,
}

impl BandComponents {
    pub fn level(&self) -> usize {
        self.high_frequency.len()
    }

    pub fn len(&self) -> usize {
        self.low_frequency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.low_frequency.is_empty()
    }

    /// Sample-wise sum of all bands.
    pub fn sum(&self) -> Vec<f64> {
        let mut total = self.low_frequency.clone();
        for band in &self.high_frequency {
            for (t, v) in total.iter_mut().zip(band) {
                *t += v;
            }
        }
        total
    }

    /// CSV with columns `t,rA,rD1,...,rDj`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rA");
        for i in 1..=self.level() {
            let _ = write!(out, ",rD{i}");
        }
        out.push('\n');
        for t in 0..self.len() {
            let _ = write!(out, "{t},{}", self.low_frequency[t]);
            for band in &self.high_frequency {
                let _ = write!(out, ",{}", band[t]);
            }
            out.push('\n');
        }
        out
    }
}

/// Decomposes `signal` and rebuilds one component per coefficient set, with
/// every other set zeroed. The components add back up to the signal.
pub fn band_components(
    signal: &[f64],
    bank: &FilterBank,
    level: usize,
    mode: BoundaryMode,
) -> Result<BandComponents, WaveletError> {
    let dec = dwt_decompose(signal, bank, level, mode)?;
    let empty = dec.zeroed();

    let mut only_approx = empty.clone();
    only_approx.approximation.clone_from(&dec.approximation);
    let low_frequency = idwt_reconstruct(&only_approx, bank)?;

    let mut high_frequency = Vec::with_capacity(level);
    for lvl in 0..level {
        let mut only_detail = empty.clone();
        only_detail.details[lvl].clone_from(&dec.details[lvl]);
        high_frequency.push(idwt_reconstruct(&only_detail, bank)?);
    }
    Ok(BandComponents {
        low_frequency,
        high_frequency,
    })
}
