use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::Array2;

use super::{BandModel, EvaluationReport, PipelineError, Predictions, SweepRow};
use crate::data::DataError;

/// `segment_id,day,interval,predicted_speed,actual_speed`, target-major.
/// The actual is left empty where the cell was imputed.
pub fn predictions_csv(p: &Predictions) -> String {
    let mut out = String::from("segment_id,day,interval,predicted_speed,actual_speed\n");
    for (b, &(day, interval)) in p.targets.iter().enumerate() {
        for (i, id) in p.segment_ids.iter().enumerate() {
            let _ = write!(out, "{id},{day},{interval},{},", p.predicted[[i, b]]);
            if p.valid[[i, b]] {
                let _ = write!(out, "{}", p.actual[[i, b]]);
            }
            out.push('\n');
        }
    }
    out
}

/// Reads [`predictions_csv`] output back. Segments keep their order of first
/// appearance and targets are sorted by day and interval.
pub fn parse_predictions_csv(text: &str) -> Result<Predictions, PipelineError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut segments: Vec<String> = Vec::new();
    let mut seg_index: BTreeMap<String, usize> = BTreeMap::new();
    // (day, interval) -> segment -> (predicted, actual)
    let mut cells: BTreeMap<(usize, usize), BTreeMap<usize, (f64, Option<f64>)>> = BTreeMap::new();
    for (k, row) in reader.records().enumerate() {
        let line = k + 2;
        let err = |message: String| PipelineError::Data(DataError::Parse { line, message });
        let row = row.map_err(|e| err(e.to_string()))?;
        if row.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", row.len())));
        }
        let num = |f: &str| f.parse::<usize>().map_err(|_| err(format!("bad index {f:?}")));
        let real = |f: &str| f.parse::<f64>().map_err(|_| err(format!("bad speed {f:?}")));
        let next = seg_index.len();
        let i = *seg_index.entry(row[0].to_string()).or_insert_with(|| {
            segments.push(row[0].to_string());
            next
        });
        let target = (num(&row[1])?, num(&row[2])?);
        let actual = if row[4].is_empty() { None } else { Some(real(&row[4])?) };
        cells.entry(target).or_default().insert(i, (real(&row[3])?, actual));
    }
    if cells.is_empty() {
        return Err(DataError::NoRecords.into());
    }
    let shape = (segments.len(), cells.len());
    let mut predicted = Array2::from_elem(shape, f64::NAN);
    let mut actual = Array2::from_elem(shape, f64::NAN);
    let mut valid = Array2::from_elem(shape, false);
    for (b, per_segment) in cells.values().enumerate() {
        if per_segment.len() != segments.len() {
            return Err(DataError::Shape(format!("target {b} does not cover every segment")).into());
        }
        for (&i, &(p, a)) in per_segment {
            predicted[[i, b]] = p;
            if let Some(a) = a {
                actual[[i, b]] = a;
                valid[[i, b]] = true;
            }
        }
    }
    Ok(Predictions {
        segment_ids: segments,
        targets: cells.keys().copied().collect(),
        predicted,
        actual,
        valid,
    })
}

pub fn report_toml(report: &EvaluationReport) -> String {
    toml::to_string(report).expect("reports serialize")
}

/// `axis,value,mae,mape,rmse`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("axis,value,mae,mape,rmse\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.axis.name(),
            r.value,
            r.report.mae,
            r.report.mape_percent,
            r.report.rmse
        );
    }
    out
}

/// One JSON object per line.
pub fn arma_jsonl(models: &[BandModel]) -> String {
    let mut out = String::new();
    for m in models {
        out.push_str(&serde_json::to_string(m).expect("band models serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_arma_jsonl(text: &str) -> Result<Vec<BandModel>, PipelineError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| {
                PipelineError::Data(DataError::Parse {
                    line: k + 1,
                    message: e.to_string(),
                })
            })
        })
        .collect()
}
