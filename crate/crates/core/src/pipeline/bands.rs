use ndarray::{s, Array2, Axis};
use rayon::prelude::*;

use super::PipelineError;
use crate::data::{DataError, SpeedMatrix};
use crate::wavelet::{band_components, BandComponents, BoundaryMode, FilterBank, WaveletError};

/// Band series for every segment, each `[N, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    pub low: Array2<f64>,
    /// `high[0]` is the finest detail band.
    pub high: Vec<Array2<f64>>,
}

impl BandSet {
    pub fn level(&self) -> usize {
        self.high.len()
    }

    /// `rA`, `rD1`, ... in the order of [`BandSet::bands`].
    pub fn names(&self) -> Vec<String> {
        std::iter::once("rA".to_string())
            .chain((1..=self.level()).map(|i| format!("rD{i}")))
            .collect()
    }

    pub fn bands(&self) -> impl Iterator<Item = &Array2<f64>> {
        std::iter::once(&self.low).chain(&self.high)
    }

    pub fn sum(&self) -> Array2<f64> {
        let mut total = self.low.clone();
        for h in &self.high {
            total += h;
        }
        total
    }

    fn from_rows(rows: Vec<Vec<Vec<f64>>>, len: usize) -> Self {
        let n = rows.len();
        let bands = rows.first().map_or(1, Vec::len);
        let mut out: Vec<Array2<f64>> = (0..bands).map(|_| Array2::zeros((n, len))).collect();
        for (i, row) in rows.into_iter().enumerate() {
            for (b, series) in row.into_iter().enumerate() {
                out[b].row_mut(i).assign(&ndarray::ArrayView1::from(&series));
            }
        }
        let low = out.remove(0);
        Self { low, high: out }
    }
}

fn require_complete(speeds: &SpeedMatrix) -> Result<(), PipelineError> {
    if let Some(((i, t), _)) = speeds.values.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(DataError::Shape(format!(
            "segment {} has no value at interval {t}; impute gaps before decomposing",
            speeds.segment_ids[i]
        ))
        .into());
    }
    Ok(())
}

fn tag(speeds: &SpeedMatrix, i: usize) -> impl FnOnce(WaveletError) -> PipelineError + '_ {
    move |source| PipelineError::Wavelet {
        segment: speeds.segment_ids[i].clone(),
        source,
    }
}

/// Band components of each segment's whole series.
pub fn decompose_all(
    speeds: &SpeedMatrix,
    bank: &FilterBank,
    level: usize,
    mode: BoundaryMode,
) -> Result<Vec<BandComponents>, PipelineError> {
    require_complete(speeds)?;
    (0..speeds.segment_count())
        .into_par_iter()
        .map(|i| {
            let row = speeds.values.row(i).to_vec();
            band_components(&row, bank, level, mode).map_err(tag(speeds, i))
        })
        .collect()
}

/// Weights that map a length-`len` input to the last sample of every band:
/// row `b` of the result dotted with the input gives band `b` at the end.
fn end_weights(len: usize, bank: &FilterBank, level: usize, mode: BoundaryMode) -> Result<Array2<f64>, WaveletError> {
    let mut weights = Array2::zeros((level + 1, len));
    let mut impulse = vec![0.0; len];
    for k in 0..len {
        impulse[k] = 1.0;
        let bands = band_components(&impulse, bank, level, mode)?;
        weights[[0, k]] = bands.low_frequency[len - 1];
        for (b, h) in bands.high_frequency.iter().enumerate() {
            weights[[b + 1, k]] = h[len - 1];
        }
        impulse[k] = 0.0;
    }
    Ok(weights)
}

/// Band value at each `t` from the trailing `window` samples ending at `t`
/// (fewer near the start). Nothing after `t` is read. Indices with fewer
/// than `2^level` samples behind them go entirely to the low band.
pub fn causal_bands(
    speeds: &SpeedMatrix,
    bank: &FilterBank,
    level: usize,
    mode: BoundaryMode,
    window: usize,
) -> Result<BandSet, PipelineError> {
    require_complete(speeds)?;
    let total = speeds.interval_count();
    let shortest = 1usize << level;
    let longest = window.min(total);
    // The transform is linear, so each window length needs its weights once.
    let weights: Vec<Array2<f64>> = (shortest..=longest)
        .into_par_iter()
        .map(|len| end_weights(len, bank, level, mode))
        .collect::<Result<_, _>>()
        .map_err(tag(speeds, 0))?;

    let rows: Vec<Vec<Vec<f64>>> = (0..speeds.segment_count())
        .into_par_iter()
        .map(|i| {
            let x = speeds.values.row(i);
            let mut out = vec![vec![0.0; total]; level + 1];
            for t in 0..total {
                let len = (t + 1).min(window);
                if len < shortest {
                    out[0][t] = x[t];
                    continue;
                }
                let w = &weights[len - shortest];
                let seg = x.slice(s![t + 1 - len..=t]);
                for (b, band) in out.iter_mut().enumerate() {
                    band[t] = w.index_axis(Axis(0), b).dot(&seg);
                }
            }
            out
        })
        .collect();
    Ok(BandSet::from_rows(rows, total))
}

/// Training indices from one decomposition of the training split; each
/// later index `t` from a decomposition of everything up to and including
/// `t`.
pub fn training_split_bands(
    speeds: &SpeedMatrix,
    train_end: usize,
    bank: &FilterBank,
    level: usize,
    mode: BoundaryMode,
) -> Result<BandSet, PipelineError> {
    require_complete(speeds)?;
    let total = speeds.interval_count();
    let rows: Vec<Vec<Vec<f64>>> = (0..speeds.segment_count())
        .into_par_iter()
        .map(|i| {
            let x = speeds.values.row(i).to_vec();
            let split = train_end.min(total);
            let head = band_components(&x[..split], bank, level, mode).map_err(tag(speeds, i))?;
            let mut out: Vec<Vec<f64>> = std::iter::once(head.low_frequency).chain(head.high_frequency).collect();
            for t in split..total {
                let bc = band_components(&x[..=t], bank, level, mode).map_err(tag(speeds, i))?;
                out[0].push(bc.low_frequency[t]);
                for (b, h) in bc.high_frequency.iter().enumerate() {
                    out[b + 1].push(h[t]);
                }
            }
            Ok(out)
        })
        .collect::<Result<_, PipelineError>>()?;
    Ok(BandSet::from_rows(rows, total))
}
