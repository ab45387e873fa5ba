use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    pub segment_id: String,
    pub mae: f64,
    /// NaN when no actual reaches the MAPE threshold.
    pub mape_percent: f64,
    pub rmse: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mae: f64,
    /// NaN when no actual reaches the MAPE threshold.
    pub mape_percent: f64,
    pub rmse: f64,
    pub sample_count: usize,
    /// Points that entered MAPE.
    pub mape_count: usize,
    pub per_segment: Vec<SegmentMetrics>,
}

#[derive(Default)]
struct Sums {
    abs: f64,
    sq: f64,
    pct: f64,
    count: usize,
    pct_count: usize,
}

impl Sums {
    fn add(&mut self, predicted: f64, actual: f64, epsilon: f64) {
        let e = predicted - actual;
        self.abs += e.abs();
        self.sq += e * e;
        self.count += 1;
        if actual >= epsilon {
            self.pct += e.abs() / actual;
            self.pct_count += 1;
        }
    }

    fn finish(&self) -> (f64, f64, f64) {
        let n = self.count as f64;
        let mape = if self.pct_count > 0 {
            100.0 * self.pct / self.pct_count as f64
        } else {
            f64::NAN
        };
        (self.abs / n, mape, (self.sq / n).sqrt())
    }
}

/// Scores `[N, T']` predictions over the cells where `valid` is set. Rows
/// are segments. Actuals below `mape_epsilon` count toward MAE and RMSE but
/// not MAPE.
pub fn evaluate(
    predicted: ArrayView2<'_, f64>,
    actual: ArrayView2<'_, f64>,
    valid: ArrayView2<'_, bool>,
    segment_ids: &[String],
    mape_epsilon: f64,
) -> Result<EvaluationReport, PipelineError> {
    if predicted.dim() != actual.dim() || predicted.dim() != valid.dim() {
        return Err(PipelineError::Metrics(format!(
            "shapes differ: predicted {:?}, actual {:?}, mask {:?}",
            predicted.dim(),
            actual.dim(),
            valid.dim()
        )));
    }
    if segment_ids.len() != predicted.nrows() {
        return Err(PipelineError::Metrics(format!(
            "{} segment ids for {} rows",
            segment_ids.len(),
            predicted.nrows()
        )));
    }
    let mut total = Sums::default();
    let mut per_segment = Vec::with_capacity(segment_ids.len());
    for (i, id) in segment_ids.iter().enumerate() {
        let mut seg = Sums::default();
        for t in 0..predicted.ncols() {
            if !valid[[i, t]] {
                continue;
            }
            let (p, a) = (predicted[[i, t]], actual[[i, t]]);
            if !(p.is_finite() && a.is_finite()) {
                return Err(PipelineError::Metrics(format!(
                    "non-finite value for segment {id} at column {t}"
                )));
            }
            seg.add(p, a, mape_epsilon);
            total.add(p, a, mape_epsilon);
        }
        let (mae, mape_percent, rmse) = if seg.count > 0 {
            seg.finish()
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        per_segment.push(SegmentMetrics {
            segment_id: id.clone(),
            mae,
            mape_percent,
            rmse,
            sample_count: seg.count,
        });
    }
    if total.count == 0 {
        return Err(PipelineError::Metrics("no valid points to score".into()));
    }
    let (mae, mape_percent, rmse) = total.finish();
    Ok(EvaluationReport {
        mae,
        mape_percent,
        rmse,
        sample_count: total.count,
        mape_count: total.pct_count,
        per_segment,
    })
}
