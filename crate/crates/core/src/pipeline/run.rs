use ndarray::{s, Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_windows, causal_bands, evaluate, training_split_bands, BandSet, EvaluationReport, PipelineError, WindowSample};
use crate::arma::{select_orders, ArmaModel, RollingForecaster};
use crate::config::{BandPolicy, LaplacianChoice, RunConfig};
use crate::data::{DataError, SpeedMatrix};
use crate::neural::{train, MinMaxScaler, ModelConfig, MotifGcrnnModel, NeuralError, Window};
use crate::roadgraph::{
    count_motif_participation, motif_laplacian, normalized_laplacian, rescale_laplacian, DirectedRoadGraph, GraphLaplacian,
};

/// Test-set forecasts, one row per segment and one column per target.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub segment_ids: Vec<String>,
    /// `(day, interval)` of each column.
    pub targets: Vec<(usize, usize)>,
    pub predicted: Array2<f64>,
    pub actual: Array2<f64>,
    /// Cells that were observed rather than imputed.
    pub valid: Array2<bool>,
}

impl Predictions {
    pub fn evaluate(&self, mape_epsilon: f64) -> Result<EvaluationReport, PipelineError> {
        evaluate(
            self.predicted.view(),
            self.actual.view(),
            self.valid.view(),
            &self.segment_ids,
            mape_epsilon,
        )
    }

    fn new(speeds: &SpeedMatrix, targets: Vec<(usize, usize)>, predicted: Array2<f64>) -> Self {
        let per_day = speeds.intervals_per_day();
        let col = |b: usize| targets[b].0 * per_day + targets[b].1;
        let shape = (speeds.segment_count(), targets.len());
        let actual = Array2::from_shape_fn(shape, |(i, b)| speeds.values[[i, col(b)]]);
        let valid = Array2::from_shape_fn(shape, |(i, b)| !speeds.missing[[i, col(b)]]);
        Self {
            segment_ids: speeds.segment_ids.clone(),
            targets,
            predicted,
            actual,
            valid,
        }
    }
}

/// The ARMA model of one high band of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandModel {
    pub segment_id: String,
    pub band: String,
    pub p: usize,
    pub q: usize,
    /// Absent for constant bands.
    pub aic: Option<f64>,
    pub model: ArmaModel,
}

/// Everything learned from the training days.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedHybrid {
    pub model: MotifGcrnnModel,
    pub loss_history: Vec<f64>,
    /// Segment-major, finest band first.
    pub band_models: Vec<BandModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridRun {
    pub fitted: FittedHybrid,
    pub predictions: Predictions,
    pub report: EvaluationReport,
}

/// Outcome of a baseline; the loss history is empty for methods without a
/// network.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub kind: BaselineKind,
    pub predictions: Predictions,
    pub report: EvaluationReport,
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// The last observed value.
    Persistence,
    /// Mean of the training days at the same interval.
    HistoricalAverage,
    /// The hybrid with the graph convolution removed.
    LstmOnly,
    /// ARMA on the undecomposed series.
    ArmaOnly,
    /// The network on the undecomposed series.
    MotifGcrnnNoDwt,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::Persistence,
        BaselineKind::HistoricalAverage,
        BaselineKind::LstmOnly,
        BaselineKind::ArmaOnly,
        BaselineKind::MotifGcrnnNoDwt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Persistence => "persistence",
            BaselineKind::HistoricalAverage => "historical_average",
            BaselineKind::LstmOnly => "lstm_only",
            BaselineKind::ArmaOnly => "arma_only",
            BaselineKind::MotifGcrnnNoDwt => "motif_gcrnn_no_dwt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Rescaled Laplacian for the graph-convolution layers.
pub fn build_laplacian(graph: &DirectedRoadGraph, choice: LaplacianChoice) -> Result<GraphLaplacian, PipelineError> {
    let lap = match choice {
        LaplacianChoice::Motif => motif_laplacian(&count_motif_participation(graph)?, true)?,
        LaplacianChoice::Adjacency => normalized_laplacian(&graph.adjacency().mapv(f64::from), true)?,
    };
    Ok(rescale_laplacian(&lap)?)
}

struct Layout {
    per_day: usize,
    train_end: usize,
}

fn check_inputs(speeds: &SpeedMatrix, graph: &DirectedRoadGraph, config: &RunConfig) -> Result<Layout, PipelineError> {
    config.validate()?;
    if graph.node_count() != speeds.segment_count() {
        return Err(DataError::Shape(format!(
            "graph has {} nodes, matrix has {} segments",
            graph.node_count(),
            speeds.segment_count()
        ))
        .into());
    }
    let days = speeds.days();
    let training_days = config.split.training_days;
    if days <= training_days {
        return Err(DataError::Shape(format!(
            "{days} whole days leave no test day after {training_days} training days"
        ))
        .into());
    }
    let per_day = speeds.intervals_per_day();
    Ok(Layout {
        per_day,
        train_end: training_days * per_day,
    })
}

/// Band series under the configured policy.
pub fn compute_bands(speeds: &SpeedMatrix, config: &RunConfig) -> Result<BandSet, PipelineError> {
    let w = &config.wavelet;
    let bank = w.bank()?;
    match w.band_policy {
        BandPolicy::Causal => causal_bands(speeds, &bank, w.level, w.boundary, w.causal_window),
        BandPolicy::TrainingSplit => {
            let train_end = config.split.training_days * speeds.intervals_per_day();
            training_split_bands(speeds, train_end, &bank, w.level, w.boundary)
        }
    }
}

fn windows_of(samples: &[WindowSample]) -> Vec<Window> {
    samples.iter().map(|s| s.window.clone()).collect()
}

type ModelInit<'a> = &'a dyn Fn(ModelConfig, GraphLaplacian, MinMaxScaler) -> Result<MotifGcrnnModel, NeuralError>;

/// Fits a scaler on the training columns of `series`, builds the model and
/// trains it on the training windows.
fn fit_network(
    series: &Array2<f64>,
    train_set: &[WindowSample],
    laplacian: GraphLaplacian,
    model_config: ModelConfig,
    config: &RunConfig,
    train_end: usize,
    init: ModelInit<'_>,
) -> Result<(MotifGcrnnModel, Vec<f64>), PipelineError> {
    if train_set.is_empty() {
        return Err(PipelineError::Windows("no training windows".into()));
    }
    let scaler = MinMaxScaler::fit(series.slice(s![.., ..train_end]))?;
    let mut model = init(model_config, laplacian, scaler)?;
    log::info!(
        "training on {} windows, {} parameters, {} epochs",
        train_set.len(),
        model.params.parameter_count(),
        config.train.epochs
    );
    let history = train(&mut model, &windows_of(train_set), &config.train)?;
    Ok((model, history))
}

/// AIC-selected ARMA models for every (segment, high band), fitted on the
/// training columns only.
pub fn fit_band_models(
    bands: &BandSet,
    segment_ids: &[String],
    train_end: usize,
    config: &RunConfig,
) -> Result<Vec<BandModel>, PipelineError> {
    let names = bands.names();
    let jobs: Vec<(usize, usize)> = (0..segment_ids.len())
        .flat_map(|i| (0..bands.level()).map(move |b| (i, b)))
        .collect();
    jobs.into_par_iter()
        .map(|(i, b)| {
            let series = bands.high[b].slice(s![i, ..train_end]).to_vec();
            fit_series(&series, &segment_ids[i], &names[b + 1], config)
        })
        .collect()
}

fn fit_series(series: &[f64], segment: &str, band: &str, config: &RunConfig) -> Result<BandModel, PipelineError> {
    let sel = select_orders(series, config.arma.max_p, config.arma.max_q).map_err(|source| PipelineError::Arma {
        segment: segment.to_string(),
        band: band.to_string(),
        source,
    })?;
    Ok(BandModel {
        segment_id: segment.to_string(),
        band: band.to_string(),
        p: sel.p,
        q: sel.q,
        aic: sel.aic.is_finite().then_some(sel.aic),
        model: sel.model,
    })
}

/// One-step forecasts for columns `train_end..`. The forecaster walks the
/// whole series, so residuals are updated with each realised value but the
/// coefficients stay fixed.
fn rolling_forecasts(series: ArrayView1<'_, f64>, model: &ArmaModel, train_end: usize) -> Vec<f64> {
    let mut f = RollingForecaster::new(model.clone());
    for &v in series.slice(s![..train_end]) {
        f.observe(v);
    }
    let fallback = model.mean();
    series
        .slice(s![train_end..])
        .iter()
        .map(|&v| {
            let out = f.forecast().unwrap_or(fallback);
            f.observe(v);
            out
        })
        .collect()
}

/// Fits the hybrid on the training days.
pub fn fit_hybrid(speeds: &SpeedMatrix, graph: &DirectedRoadGraph, config: &RunConfig) -> Result<FittedHybrid, PipelineError> {
    let seed = config.train.seed;
    fit_hybrid_with(speeds, graph, config, &|c, l, s| MotifGcrnnModel::new(c, l, s, seed))
}

/// [`fit_hybrid`] with a custom network initialiser.
pub fn fit_hybrid_with(
    speeds: &SpeedMatrix,
    graph: &DirectedRoadGraph,
    config: &RunConfig,
    init: ModelInit<'_>,
) -> Result<FittedHybrid, PipelineError> {
    let layout = check_inputs(speeds, graph, config)?;
    let bands = compute_bands(speeds, config)?;
    let m = &config.model;
    let split = build_windows(
        bands.low.view(),
        m.trend_window,
        m.period_window,
        layout.per_day,
        config.split.training_days,
    )?;
    let laplacian = build_laplacian(graph, m.laplacian)?;
    let (model, loss_history) = fit_network(
        &bands.low,
        &split.train,
        laplacian,
        m.model_config(speeds.segment_count()),
        config,
        layout.train_end,
        init,
    )?;
    let band_models = fit_band_models(&bands, &speeds.segment_ids, layout.train_end, config)?;
    Ok(FittedHybrid {
        model,
        loss_history,
        band_models,
    })
}

/// Forecasts every test target: the network's low-band forecast plus the
/// ARMA forecast of every high band.
pub fn predict_hybrid(
    speeds: &SpeedMatrix,
    graph: &DirectedRoadGraph,
    fitted: &FittedHybrid,
    config: &RunConfig,
) -> Result<Predictions, PipelineError> {
    let layout = check_inputs(speeds, graph, config)?;
    let bands = compute_bands(speeds, config)?;
    let n = speeds.segment_count();
    if fitted.band_models.len() != n * bands.level() {
        return Err(PipelineError::Windows(format!(
            "{} band models for {n} segments and {} bands",
            fitted.band_models.len(),
            bands.level()
        )));
    }
    let cfg = &fitted.model.config;
    let split = build_windows(
        bands.low.view(),
        cfg.trend_window,
        cfg.period_window,
        layout.per_day,
        config.split.training_days,
    )?;
    if split.test.is_empty() {
        return Err(PipelineError::Windows("no test windows".into()));
    }
    let low = fitted.model.predict(&windows_of(&split.test))?;

    let high: Vec<Vec<f64>> = fitted
        .band_models
        .par_iter()
        .enumerate()
        .map(|(k, bm)| rolling_forecasts(bands.high[k % bands.level()].row(k / bands.level()), &bm.model, layout.train_end))
        .collect();

    let targets: Vec<(usize, usize)> = split.test.iter().map(|w| (w.day, w.interval)).collect();
    let mut predicted = low.t().as_standard_layout().into_owned();
    for (b, w) in split.test.iter().enumerate() {
        let offset = w.index(layout.per_day) - layout.train_end;
        for i in 0..n {
            for j in 0..bands.level() {
                predicted[[i, b]] += high[i * bands.level() + j][offset];
            }
        }
    }
    Ok(Predictions::new(speeds, targets, predicted))
}

pub fn run_hybrid(speeds: &SpeedMatrix, graph: &DirectedRoadGraph, config: &RunConfig) -> Result<HybridRun, PipelineError> {
    let seed = config.train.seed;
    run_hybrid_with(speeds, graph, config, &|c, l, s| MotifGcrnnModel::new(c, l, s, seed))
}

/// [`run_hybrid`] with a custom network initialiser.
pub fn run_hybrid_with(
    speeds: &SpeedMatrix,
    graph: &DirectedRoadGraph,
    config: &RunConfig,
    init: ModelInit<'_>,
) -> Result<HybridRun, PipelineError> {
    let fitted = fit_hybrid_with(speeds, graph, config, init)?;
    let predictions = predict_hybrid(speeds, graph, &fitted, config)?;
    let report = predictions.evaluate(config.metrics.mape_epsilon)?;
    Ok(HybridRun {
        fitted,
        predictions,
        report,
    })
}

/// Scores a comparison method on the same test targets as the hybrid.
pub fn run_baseline(
    speeds: &SpeedMatrix,
    graph: &DirectedRoadGraph,
    config: &RunConfig,
    kind: BaselineKind,
) -> Result<BaselineRun, PipelineError> {
    let layout = check_inputs(speeds, graph, config)?;
    let per_day = layout.per_day;
    let m = &config.model;
    let x = &speeds.values;
    let raw_split = build_windows(
        x.view(),
        m.trend_window,
        m.period_window,
        per_day,
        config.split.training_days,
    )?;
    if raw_split.test.is_empty() {
        return Err(PipelineError::Windows("no test windows".into()));
    }
    let targets: Vec<(usize, usize)> = raw_split.test.iter().map(|w| (w.day, w.interval)).collect();
    let cols: Vec<usize> = raw_split.test.iter().map(|w| w.index(per_day)).collect();
    let n = speeds.segment_count();
    let shape = (n, targets.len());
    let mut loss_history = Vec::new();

    let predicted = match kind {
        BaselineKind::Persistence => Array2::from_shape_fn(shape, |(i, b)| x[[i, cols[b] - 1]]),
        BaselineKind::HistoricalAverage => {
            let days = config.split.training_days;
            Array2::from_shape_fn(shape, |(i, b)| {
                let interval = targets[b].1;
                (0..days).map(|d| x[[i, d * per_day + interval]]).sum::<f64>() / days as f64
            })
        }
        BaselineKind::ArmaOnly => {
            let forecasts: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let series = x.slice(s![i, ..layout.train_end]).to_vec();
                    let bm = fit_series(&series, &speeds.segment_ids[i], "raw", config)?;
                    Ok(rolling_forecasts(x.row(i), &bm.model, layout.train_end))
                })
                .collect::<Result<_, PipelineError>>()?;
            Array2::from_shape_fn(shape, |(i, b)| forecasts[i][cols[b] - layout.train_end])
        }
        BaselineKind::LstmOnly => {
            let mut cfg = config.clone();
            cfg.model.mgc_filters.clear();
            let fitted = fit_hybrid(speeds, graph, &cfg)?;
            loss_history = fitted.loss_history.clone();
            predict_hybrid(speeds, graph, &fitted, &cfg)?.predicted
        }
        BaselineKind::MotifGcrnnNoDwt => {
            let laplacian = build_laplacian(graph, m.laplacian)?;
            let seed = config.train.seed;
            let (model, history) = fit_network(
                x,
                &raw_split.train,
                laplacian,
                m.model_config(n),
                config,
                layout.train_end,
                &|c, l, s| MotifGcrnnModel::new(c, l, s, seed),
            )?;
            loss_history = history;
            model
                .predict(&windows_of(&raw_split.test))?
                .t()
                .as_standard_layout()
                .into_owned()
        }
    };
    let predictions = Predictions::new(speeds, targets, predicted);
    let report = predictions.evaluate(config.metrics.mape_epsilon)?;
    Ok(BaselineRun {
        kind,
        predictions,
        report,
        loss_history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Chebyshev order.
    K,
    /// Trend window.
    M,
    /// Period window.
    N,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::K => "K",
            SweepAxis::M => "m",
            SweepAxis::N => "n",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "K" | "k" => Some(SweepAxis::K),
            "m" | "M" => Some(SweepAxis::M),
            "n" | "N" => Some(SweepAxis::N),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: usize,
    pub report: EvaluationReport,
}

/// Reruns the hybrid once per value of one hyperparameter, everything else
/// as configured.
pub fn parameter_sweep(
    speeds: &SpeedMatrix,
    graph: &DirectedRoadGraph,
    config: &RunConfig,
    axis: SweepAxis,
    values: &[usize],
) -> Result<Vec<SweepRow>, PipelineError> {
    values
        .iter()
        .map(|&value| {
            let mut cfg = config.clone();
            match axis {
                SweepAxis::K => cfg.model.cheb_order = value,
                SweepAxis::M => cfg.model.trend_window = value,
                SweepAxis::N => cfg.model.period_window = value,
            }
            log::info!("sweep {} = {value}", axis.name());
            let run = run_hybrid(speeds, graph, &cfg)?;
            Ok(SweepRow {
                axis,
                value,
                report: run.report,
            })
        })
        .collect()
}
