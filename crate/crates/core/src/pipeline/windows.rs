use ndarray::{Array2, ArrayView2};

use super::PipelineError;
use crate::neural::Window;

/// A window together with the day and interval of its target.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub window: Window,
    pub day: usize,
    pub interval: usize,
}

impl WindowSample {
    /// Column of the target in the `[N, T]` series.
    pub fn index(&self, intervals_per_day: usize) -> usize {
        self.day * intervals_per_day + self.interval
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WindowSplit {
    pub train: Vec<WindowSample>,
    pub test: Vec<WindowSample>,
}

/// Cuts `[N, T]` series into windows. A target at interval `t` of day `d`
/// takes trend frames `t-m .. t-1` of the same day and period frames at
/// interval `t` of days `d-n .. d-1`, so it is eligible when `t >= m` and
/// `d >= n`. Targets in the first `training_days` days go to the training
/// set, later ones to the test set. Only whole days are used.
pub fn build_windows(
    series: ArrayView2<'_, f64>,
    trend_window: usize,
    period_window: usize,
    intervals_per_day: usize,
    training_days: usize,
) -> Result<WindowSplit, PipelineError> {
    let (m, n) = (trend_window, period_window);
    if m == 0 {
        return Err(PipelineError::Windows("the trend window needs at least one frame".into()));
    }
    if intervals_per_day == 0 {
        return Err(PipelineError::Windows("intervals per day must be positive".into()));
    }
    let days = series.ncols() / intervals_per_day;
    let nodes = series.nrows();
    let mut split = WindowSplit::default();
    for day in n..days {
        for interval in m..intervals_per_day {
            let col = day * intervals_per_day + interval;
            let trend = Array2::from_shape_fn((m, nodes), |(k, i)| series[[i, col - m + k]]);
            let period = Array2::from_shape_fn((n, nodes), |(k, i)| series[[i, col - (n - k) * intervals_per_day]]);
            let sample = WindowSample {
                window: Window {
                    trend,
                    period,
                    target: series.column(col).to_owned(),
                },
                day,
                interval,
            };
            if day < training_days {
                split.train.push(sample);
            } else {
                split.test.push(sample);
            }
        }
    }
    if split.train.is_empty() && split.test.is_empty() {
        return Err(PipelineError::Windows(format!(
            "{days} days of {intervals_per_day} intervals leave no target with m = {m} and n = {n}"
        )));
    }
    Ok(split)
}
