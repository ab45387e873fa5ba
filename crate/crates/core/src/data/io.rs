use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{DataError, SpeedMatrix};

const METADATA_VERSION: u32 = 1;

/// Sidecar written next to every matrix CSV as `<stem>.meta.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixMetadata {
    pub version: u32,
    pub start: NaiveDateTime,
    pub interval_minutes: u32,
    pub segments: usize,
    pub intervals: usize,
}

impl MatrixMetadata {
    pub fn of(matrix: &SpeedMatrix) -> Self {
        Self {
            version: METADATA_VERSION,
            start: matrix.start,
            interval_minutes: matrix.interval_minutes,
            segments: matrix.segment_count(),
            intervals: matrix.interval_count(),
        }
    }

    pub fn sidecar_path(matrix_path: &Path) -> PathBuf {
        let stem = matrix_path.file_stem().unwrap_or_default().to_string_lossy();
        matrix_path.with_file_name(format!("{stem}.meta.toml"))
    }
}

/// Writes the matrix transposed, one row per interval under a header of
/// segment ids. Missing cells are left empty.
pub fn write_matrix(matrix: &SpeedMatrix, path: &Path) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer.write_record(&matrix.segment_ids).map_err(csv_error)?;
    let mut row = Vec::with_capacity(matrix.segment_count());
    for t in 0..matrix.interval_count() {
        row.clear();
        for i in 0..matrix.segment_count() {
            row.push(if matrix.missing[[i, t]] {
                String::new()
            } else {
                matrix.values[[i, t]].to_string()
            });
        }
        writer.write_record(&row).map_err(csv_error)?;
    }
    writer.flush()?;
    let meta = toml::to_string(&MatrixMetadata::of(matrix)).map_err(|e| DataError::Metadata(e.to_string()))?;
    std::fs::write(MatrixMetadata::sidecar_path(path), meta)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<SpeedMatrix, DataError> {
    let meta_path = MatrixMetadata::sidecar_path(path);
    let meta_text = std::fs::read_to_string(&meta_path)
        .map_err(|e| DataError::Metadata(format!("{}: {e}", meta_path.display())))?;
    let meta: MatrixMetadata = toml::from_str(&meta_text).map_err(|e| DataError::Metadata(e.to_string()))?;
    if meta.version != METADATA_VERSION {
        return Err(DataError::Metadata(format!("unsupported version {}", meta.version)));
    }

    let mut reader = csv::ReaderBuilder::new().from_path(path).map_err(csv_error)?;
    let ids: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    for (t, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = t + 2;
        if record.len() != ids.len() {
            return Err(DataError::Parse {
                line,
                message: format!("expected {} fields, found {}", ids.len(), record.len()),
            });
        }
        let row = record
            .iter()
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>().map(Some).map_err(|_| DataError::Parse {
                        line,
                        message: format!("bad speed {f:?}"),
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        columns.push(row);
    }
    if ids.len() != meta.segments || columns.len() != meta.intervals {
        return Err(DataError::Metadata(format!(
            "file holds {} segments x {} intervals, metadata says {} x {}",
            ids.len(),
            columns.len(),
            meta.segments,
            meta.intervals
        )));
    }
    let shape = (ids.len(), columns.len());
    let values = Array2::from_shape_fn(shape, |(i, t)| columns[t][i].unwrap_or(f64::NAN));
    let missing = Array2::from_shape_fn(shape, |(i, t)| columns[t][i].is_none());
    SpeedMatrix::with_mask(values, missing, meta.interval_minutes, meta.start, ids)
}

fn csv_error(e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::Io(io),
        other => DataError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    #[test]
    fn round_trip_keeps_values_and_mask() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("speeds.csv");
        let start = NaiveDate::from_ymd_opt(2024, 1, 3).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let values = ndarray::array![[31.25, f64::NAN, 1.0 / 3.0], [0.0, 12.5, 60.0]];
        let missing = values.mapv(f64::is_nan);
        let m = SpeedMatrix::with_mask(values, missing, 30, start, vec!["a+".into(), "b".into()]).unwrap();
        write_matrix(&m, &path).unwrap();
        assert!(dir.path().join("speeds.meta.toml").exists());
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.missing, m.missing);
        assert_eq!(back.values[[0, 2]], 1.0 / 3.0);
        assert_eq!(back.segment_ids, m.segment_ids);
        assert_eq!((back.start, back.interval_minutes), (start, 30));
    }

    #[test]
    fn missing_sidecar_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "a\n1\n").unwrap();
        assert!(matches!(read_matrix(&path), Err(DataError::Metadata(_))));
    }
}
