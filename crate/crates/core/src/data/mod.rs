//! Speed matrices: ingestion of segment-tagged GPS speed records, gap
//! imputation, splitting of two-way roads, matrix files, and a synthetic
//! generator with planted daily structure.

mod ingest;
mod io;
mod roads;
mod synth;

pub use ingest::{aggregate, impute, parse_records, read_records, AggregateOptions, Aggregation, GpsSpeedRecord};
pub use io::{read_matrix, write_matrix, MatrixMetadata};
pub use roads::{parse_roads, split_bidirectional, Direction, Road, RoadSplit, SegmentInfo};
pub use synth::{generate_synthetic, CongestionEvent, NoiseSpec, Peak, ProfileSpec, RandomEvents, SyntheticOutput, SyntheticSpec};

use chrono::{Duration, NaiveDateTime};
use ndarray::{s, Array2, ArrayView2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no records")]
    NoRecords,
    #[error("interval of {0} minutes does not divide a day")]
    BadInterval(u32),
    #[error("segment {0} has no observations")]
    FullyMissing(String),
    #[error("invalid synthetic spec field `{field}`: {message}")]
    Spec { field: &'static str, message: String },
    #[error("{rate:.4} of cells were clipped at zero (limit 0.01)")]
    Clipping { rate: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid TOML: {0}")]
    Format(String),
    #[error("metadata: {0}")]
    Metadata(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `N x T` average speeds in km/h, one row per segment, with a mask of cells
/// that had no observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedMatrix {
    pub values: Array2<f64>,
    pub missing: Array2<bool>,
    pub interval_minutes: u32,
    pub start: NaiveDateTime,
    pub segment_ids: Vec<String>,
}

impl SpeedMatrix {
    /// Fully observed matrix.
    pub fn new(
        values: Array2<f64>,
        interval_minutes: u32,
        start: NaiveDateTime,
        segment_ids: Vec<String>,
    ) -> Result<Self, DataError> {
        let missing = Array2::from_elem(values.raw_dim(), false);
        Self::with_mask(values, missing, interval_minutes, start, segment_ids)
    }

    pub fn with_mask(
        values: Array2<f64>,
        missing: Array2<bool>,
        interval_minutes: u32,
        start: NaiveDateTime,
        segment_ids: Vec<String>,
    ) -> Result<Self, DataError> {
        if interval_minutes == 0 || 1440 % interval_minutes != 0 {
            return Err(DataError::BadInterval(interval_minutes));
        }
        if values.dim() != missing.dim() || values.nrows() != segment_ids.len() {
            return Err(DataError::Shape(format!(
                "values {:?}, mask {:?}, {} segment ids",
                values.dim(),
                missing.dim(),
                segment_ids.len()
            )));
        }
        for ((i, t), &v) in values.indexed_iter() {
            if !missing[[i, t]] && !(v.is_finite() && v >= 0.0) {
                return Err(DataError::Shape(format!(
                    "speed {v} at segment {}, interval {t} is not a finite non-negative number",
                    segment_ids[i]
                )));
            }
        }
        Ok(Self {
            values,
            missing,
            interval_minutes,
            start,
            segment_ids,
        })
    }

    pub fn segment_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn interval_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn intervals_per_day(&self) -> usize {
        (1440 / self.interval_minutes) as usize
    }

    /// Complete days covered.
    pub fn days(&self) -> usize {
        self.interval_count() / self.intervals_per_day()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    pub fn timestamp(&self, t: usize) -> NaiveDateTime {
        self.start + Duration::minutes(i64::from(self.interval_minutes) * t as i64)
    }

    /// Columns of the first `days` days.
    pub fn leading_days(&self, days: usize) -> ArrayView2<'_, f64> {
        let end = (days * self.intervals_per_day()).min(self.interval_count());
        self.values.slice(s![.., ..end])
    }
}
