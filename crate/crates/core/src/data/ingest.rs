use std::collections::HashMap;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, NaiveTime};
use ndarray::Array2;

use super::{DataError, SpeedMatrix};

/// One speed observation already matched to a road segment.
#[derive(Debug, Clone, PartialEq)]
pub struct GpsSpeedRecord {
    pub timestamp: NaiveDateTime,
    pub segment_id: String,
    pub speed: f64,
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 3] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.naive_utc()))
}

/// Parses `timestamp_iso8601,segment_id,speed_kmh` rows. A leading header
/// row whose first field is `timestamp` or `timestamp_iso8601` is skipped.
pub fn parse_records(text: &str) -> Result<Vec<GpsSpeedRecord>, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| DataError::Parse {
            line: e.position().map_or(i + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 && matches!(row.get(0), Some("timestamp" | "timestamp_iso8601")) {
            continue;
        }
        if row.iter().all(str::is_empty) {
            continue;
        }
        let err = |message: String| DataError::Parse { line, message };
        if row.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", row.len())));
        }
        let timestamp = parse_timestamp(&row[0]).ok_or_else(|| err(format!("bad timestamp {:?}", &row[0])))?;
        if row[1].is_empty() {
            return Err(err("empty segment id".into()));
        }
        let speed: f64 = row[2].parse().map_err(|_| err(format!("bad speed {:?}", &row[2])))?;
        if !(speed.is_finite() && speed >= 0.0) {
            return Err(err(format!("speed {speed} must be finite and non-negative")));
        }
        out.push(GpsSpeedRecord {
            timestamp,
            segment_id: row[1].to_string(),
            speed,
        });
    }
    if out.is_empty() {
        return Err(DataError::NoRecords);
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<GpsSpeedRecord>, DataError> {
    parse_records(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateOptions {
    pub interval_minutes: u32,
    /// Defaults to midnight of the earliest record.
    pub start: Option<NaiveDateTime>,
    /// Defaults to the whole days up to the latest record.
    pub days: Option<usize>,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        Self {
            interval_minutes: 15,
            start: None,
            days: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub matrix: SpeedMatrix,
    /// Records per cell.
    pub counts: Array2<u32>,
    /// Records whose segment id is not in the segment list.
    pub unknown_segment_records: usize,
    /// Records outside the covered time range.
    pub out_of_range_records: usize,
}

/// Averages records into `interval_minutes` cells. Cells without records are
/// masked as missing and hold NaN.
pub fn aggregate(
    records: &[GpsSpeedRecord],
    segment_ids: &[String],
    options: &AggregateOptions,
) -> Result<Aggregation, DataError> {
    let minutes = options.interval_minutes;
    if minutes == 0 || 1440 % minutes != 0 {
        return Err(DataError::BadInterval(minutes));
    }
    let (Some(first), Some(last)) = (
        records.iter().map(|r| r.timestamp).min(),
        records.iter().map(|r| r.timestamp).max(),
    ) else {
        return Err(DataError::NoRecords);
    };
    let start = options
        .start
        .unwrap_or_else(|| first.date().and_time(NaiveTime::MIN));
    let days = options
        .days
        .unwrap_or_else(|| ((last - start).num_days().max(0) + 1) as usize);
    let per_day = (1440 / minutes) as usize;
    let intervals = days * per_day;

    let index: HashMap<&str, usize> = segment_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let n = segment_ids.len();
    let mut sums = Array2::<f64>::zeros((n, intervals));
    let mut counts = Array2::<u32>::zeros((n, intervals));
    let (mut unknown, mut out_of_range) = (0, 0);
    for r in records {
        let Some(&row) = index.get(r.segment_id.as_str()) else {
            unknown += 1;
            continue;
        };
        let offset = (r.timestamp - start).num_seconds();
        let col = offset.div_euclid(60 * i64::from(minutes));
        if offset < 0 || col as usize >= intervals {
            out_of_range += 1;
            continue;
        }
        sums[[row, col as usize]] += r.speed;
        counts[[row, col as usize]] += 1;
    }
    if unknown > 0 {
        log::warn!("{unknown} records reference unknown segments");
    }
    if out_of_range > 0 {
        log::warn!("{out_of_range} records fall outside the covered range");
    }
    let missing = counts.mapv(|c| c == 0);
    let mut values = sums;
    ndarray::Zip::from(&mut values).and(&counts).for_each(|v, &c| {
        *v = if c == 0 { f64::NAN } else { *v / f64::from(c) };
    });
    let matrix = SpeedMatrix::with_mask(values, missing, minutes, start, segment_ids.to_vec())?;
    Ok(Aggregation {
        matrix,
        counts,
        unknown_segment_records: unknown,
        out_of_range_records: out_of_range,
    })
}

/// Fills missing cells by linear interpolation in time between the nearest
/// observed cells, and by the nearest observation at either end. The
/// missing mask is carried over unchanged and only unmasked cells are read,
/// so imputing twice changes nothing.
pub fn impute(speeds: &SpeedMatrix) -> Result<SpeedMatrix, DataError> {
    let mut values = speeds.values.clone();
    for (i, mut row) in values.rows_mut().into_iter().enumerate() {
        let mask = speeds.missing.row(i);
        let observed: Vec<usize> = (0..row.len()).filter(|&t| !mask[t]).collect();
        let (Some(&first), Some(&last)) = (observed.first(), observed.last()) else {
            return Err(DataError::FullyMissing(speeds.segment_ids[i].clone()));
        };
        for t in 0..first {
            row[t] = row[first];
        }
        for t in last + 1..row.len() {
            row[t] = row[last];
        }
        for pair in observed.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (va, vb) = (row[a], row[b]);
            for t in a + 1..b {
                row[t] = va + (vb - va) * (t - a) as f64 / (b - a) as f64;
            }
        }
    }
    SpeedMatrix::with_mask(
        values,
        speeds.missing.clone(),
        speeds.interval_minutes,
        speeds.start,
        speeds.segment_ids.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn ts(h: u32, m: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2024, 5, 2).unwrap().and_hms_opt(h, m, 0).unwrap()
    }

    fn one_row(values: &[Option<f64>]) -> SpeedMatrix {
        let v = Array2::from_shape_fn((1, values.len()), |(_, t)| values[t].unwrap_or(f64::NAN));
        let m = Array2::from_shape_fn((1, values.len()), |(_, t)| values[t].is_none());
        SpeedMatrix::with_mask(v, m, 15, ts(0, 0), vec!["a".into()]).unwrap()
    }

    #[test]
    fn cell_mean() {
        let recs = vec![
            GpsSpeedRecord {
                timestamp: ts(8, 1),
                segment_id: "a".into(),
                speed: 30.0,
            },
            GpsSpeedRecord {
                timestamp: ts(8, 14),
                segment_id: "a".into(),
                speed: 50.0,
            },
        ];
        let agg = aggregate(&recs, &["a".to_string(), "b".to_string()], &AggregateOptions::default()).unwrap();
        let m = &agg.matrix;
        assert_eq!(m.interval_count(), 96);
        assert_eq!(m.values[[0, 32]], 40.0);
        assert!(m.missing[[0, 31]] && m.missing[[1, 32]]);
        assert!(!m.missing[[0, 32]]);
    }

    #[test]
    fn unknown_segments_are_counted() {
        let recs = vec![GpsSpeedRecord {
            timestamp: ts(1, 0),
            segment_id: "zz".into(),
            speed: 10.0,
        }];
        let agg = aggregate(&recs, &["a".to_string()], &AggregateOptions::default()).unwrap();
        assert_eq!(agg.unknown_segment_records, 1);
        assert!(agg.matrix.missing.iter().all(|&m| m));
    }

    #[test]
    fn parses_records_with_header() {
        let text = "timestamp_iso8601,segment_id,speed_kmh\n2024-05-02T08:00:00,a,31.5\n2024-05-02 08:20:00,b,12\n";
        let recs = parse_records(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].timestamp, ts(8, 20));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "2024-05-02T08:00:00,a,31.5\n2024-05-02T08:00:00,a,fast\n";
        match parse_records(text) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_records(""), Err(DataError::NoRecords)));
        assert!(matches!(parse_records("2024-05-02T08:00:00,a,-3\n"), Err(DataError::Parse { line: 1, .. })));
    }

    #[test]
    fn interpolation_examples() {
        let m = impute(&one_row(&[Some(10.0), None, Some(20.0)])).unwrap();
        assert_eq!(m.values.row(0).to_vec(), vec![10.0, 15.0, 20.0]);
        let m = impute(&one_row(&[None, Some(10.0), Some(20.0)])).unwrap();
        assert_eq!(m.values.row(0).to_vec(), vec![10.0, 10.0, 20.0]);
        let m = impute(&one_row(&[Some(5.0), None, None])).unwrap();
        assert_eq!(m.values.row(0).to_vec(), vec![5.0, 5.0, 5.0]);
        assert!(m.missing[[0, 1]]);
    }

    #[test]
    fn fully_missing_segment_is_named() {
        match impute(&one_row(&[None, None])) {
            Err(DataError::FullyMissing(id)) => assert_eq!(id, "a"),
            other => panic!("{other:?}"),
        }
    }
}
