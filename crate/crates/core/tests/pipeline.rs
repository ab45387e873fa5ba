use std::collections::BTreeSet;

use chrono::NaiveDate;
use ndarray::{s, Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speedcast::arma::RollingForecaster;
use speedcast::config::RunConfig;
use speedcast::data::{generate_synthetic, NoiseSpec, Peak, ProfileSpec, SpeedMatrix, SyntheticSpec};
use speedcast::neural::MotifGcrnnModel;
use speedcast::pipeline::{
    build_windows, causal_bands, compute_bands, decompose_all, evaluate, fit_hybrid, parameter_sweep, run_baseline,
    run_hybrid, run_hybrid_with, BaselineKind, PipelineError, SweepAxis,
};
use speedcast::roadgraph::DirectedRoadGraph;
use speedcast::wavelet::{BoundaryMode, FilterBank};

const PER_DAY: usize = 24;
const DAYS: usize = 10;
const TRAIN_DAYS: usize = 8;

fn ring(n: usize) -> DirectedRoadGraph {
    let mut g = DirectedRoadGraph::new(n);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n).unwrap();
        g.add_edge((i + 1) % n, i).unwrap();
    }
    g.add_edge(0, n / 2).unwrap();
    g
}

fn small_spec(seed: u64, sigma: f64) -> SyntheticSpec {
    SyntheticSpec {
        version: 1,
        seed,
        segment_count: 5,
        days: DAYS,
        intervals_per_day: PER_DAY,
        start: NaiveDate::from_ymd_opt(2024, 4, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
        profile: ProfileSpec::Peaks {
            free_flow: 60.0,
            peaks: vec![Peak {
                center_hour: 8.0,
                width_hours: 2.0,
                depth: 20.0,
            }],
        },
        segment_offset: 4.0,
        spatial_coupling: 0.3,
        noise: NoiseSpec { phi: 0.5, sigma },
        segment_noise: Vec::new(),
        events: Vec::new(),
        random_events: None,
    }
}

fn small_data(seed: u64) -> (SpeedMatrix, DirectedRoadGraph) {
    let graph = ring(5);
    let m = generate_synthetic(&small_spec(seed, 2.0), &graph).unwrap().matrix;
    (m, graph)
}

fn small_config(epochs: usize) -> RunConfig {
    let mut c = RunConfig::default();
    c.split.training_days = TRAIN_DAYS;
    c.model.hidden_size = 4;
    c.model.mgc_filters = vec![2];
    c.model.period_window = 3;
    c.wavelet.causal_window = 32;
    c.arma.max_p = 2;
    c.arma.max_q = 1;
    c.train.epochs = epochs;
    c.train.batch_size = 16;
    c.train.seed = 5;
    c
}

fn matrix_from(values: Array2<f64>) -> SpeedMatrix {
    let ids = (0..values.nrows()).map(|i| format!("s{i}")).collect();
    let start = NaiveDate::from_ymd_opt(2024, 4, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    SpeedMatrix::new(values, 1440 / PER_DAY as u32, start, ids).unwrap()
}

#[test]
fn constant_series_is_all_low_band() {
    let m = matrix_from(Array2::from_elem((1, 64), 42.0));
    let bands = decompose_all(&m, &FilterBank::db4(), 3, BoundaryMode::Symmetric).unwrap();
    for (a, b) in bands[0].low_frequency.iter().zip(m.values.row(0)) {
        assert!((a - b).abs() < 1e-9);
    }
    for h in &bands[0].high_frequency {
        assert!(h.iter().all(|v| v.abs() < 1e-9));
    }
}

#[test]
fn decomposition_counts_and_additivity() {
    let mut spec = small_spec(1, 2.0);
    spec.days = 30;
    spec.intervals_per_day = 96;
    let m = generate_synthetic(&spec, &ring(5)).unwrap().matrix;
    assert_eq!(m.interval_count(), 2880);
    for mode in [BoundaryMode::Periodic, BoundaryMode::Symmetric] {
        let bands = decompose_all(&m, &FilterBank::db4(), 3, mode).unwrap();
        for (i, b) in bands.iter().enumerate() {
            assert_eq!(b.high_frequency.len() + 1, 4);
            let worst = b.sum().iter().zip(m.values.row(i)).map(|(a, x)| (a - x).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-8, "segment {i}: {worst}");
        }
    }
    let causal = causal_bands(&m, &FilterBank::db4(), 3, BoundaryMode::Symmetric, 128).unwrap();
    let worst = (&causal.sum() - &m.values).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(worst < 1e-8);
}

#[test]
fn causal_bands_ignore_the_future() {
    let (m, _) = small_data(2);
    let bank = FilterBank::db4();
    let base = causal_bands(&m, &bank, 3, BoundaryMode::Symmetric, 32).unwrap();
    let cut = 100;
    let mut poisoned = m.clone();
    poisoned.values.slice_mut(s![.., cut..]).mapv_inplace(|v| v + 100.0);
    let other = causal_bands(&poisoned, &bank, 3, BoundaryMode::Symmetric, 32).unwrap();
    for (a, b) in base.bands().zip(other.bands()) {
        assert_eq!(a.slice(s![.., ..cut]), b.slice(s![.., ..cut]));
    }
}

#[test]
fn too_short_series_are_rejected() {
    let m = matrix_from(Array2::from_elem((1, 7), 42.0));
    assert!(decompose_all(&m, &FilterBank::db4(), 3, BoundaryMode::Symmetric).is_err());
}

/// Every `(day, interval)` whose frames all exist, split by target day.
fn window_oracle(days: usize, per_day: usize, m: usize, n: usize, train_days: usize) -> (BTreeSet<(usize, usize)>, BTreeSet<(usize, usize)>) {
    let mut train = BTreeSet::new();
    let mut test = BTreeSet::new();
    for d in 0..days {
        for t in 0..per_day {
            let trend_ok = (1..=m).all(|k| t >= k);
            let period_ok = (1..=n).all(|k| d >= k);
            if trend_ok && period_ok {
                if d < train_days {
                    train.insert((d, t));
                } else {
                    test.insert((d, t));
                }
            }
        }
    }
    (train, test)
}

#[test]
fn windows_match_enumeration_oracle() {
    let series = Array2::from_shape_fn((2, 30 * 96), |(i, c)| (i * 100_000 + c) as f64);
    let split = build_windows(series.view(), 2, 7, 96, 24).unwrap();
    let (train, test) = window_oracle(30, 96, 2, 7, 24);
    let got_train: BTreeSet<_> = split.train.iter().map(|w| (w.day, w.interval)).collect();
    let got_test: BTreeSet<_> = split.test.iter().map(|w| (w.day, w.interval)).collect();
    assert_eq!(got_train, train);
    assert_eq!(got_test, test);
    assert_eq!(split.train.len(), (24 - 7) * (96 - 2));
    assert_eq!((split.train[0].day, split.train[0].interval), (7, 2));
    for w in split.train.iter().chain(&split.test) {
        let col = w.index(96);
        for i in 0..2 {
            assert_eq!(w.window.target[i], series[[i, col]]);
            assert_eq!(w.window.trend[[0, i]], series[[i, col - 2]]);
            assert_eq!(w.window.trend[[1, i]], series[[i, col - 1]]);
            for k in 0..7 {
                assert_eq!(w.window.period[[k, i]], series[[i, col - (7 - k) * 96]]);
            }
        }
    }
    for w in &split.train {
        assert!(w.index(96) < 24 * 96);
    }
}

#[test]
fn degenerate_windows() {
    let series = Array2::from_elem((1, 96), 1.0);
    let split = build_windows(series.view(), 1, 0, 96, 1).unwrap();
    assert_eq!(split.train.len(), 95);
    assert!(split.test.is_empty());
    let series = Array2::from_elem((1, 3 * 96), 1.0);
    let split = build_windows(series.view(), 3, 0, 96, 3).unwrap();
    assert_eq!(split.train.len(), 3 * 93);
    assert!(build_windows(series.view(), 2, 3, 96, 3).is_err());
}

#[test]
fn two_point_metrics() {
    let p = Array2::from_shape_vec((1, 2), vec![1.0, 2.0]).unwrap();
    let a = Array2::from_shape_vec((1, 2), vec![1.0, 3.0]).unwrap();
    let v = Array2::from_elem((1, 2), true);
    let r = evaluate(p.view(), a.view(), v.view(), &["x".into()], 1.0).unwrap();
    assert!((r.mae - 0.5).abs() < 1e-15);
    assert!((r.rmse - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((r.mape_percent - 100.0 / 6.0).abs() < 1e-12);
    let none = Array2::from_elem((1, 2), false);
    assert!(matches!(evaluate(p.view(), a.view(), none.view(), &["x".into()], 1.0), Err(PipelineError::Metrics(_))));
}

#[test]
fn metrics_match_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (n, t) = (10, 50);
    let p = Array2::from_shape_fn((n, t), |_| rng.random_range(0.0..80.0));
    let a = Array2::from_shape_fn((n, t), |_| rng.random_range(0.0..80.0));
    let v = Array2::from_shape_fn((n, t), |_| rng.random::<f64>() < 0.9);
    let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let r = evaluate(p.view(), a.view(), v.view(), &ids, 1.0).unwrap();

    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..t {
            if v[[i, j]] {
                pairs.push((p[[i, j]], a[[i, j]]));
            }
        }
    }
    let count = pairs.len() as f64;
    let mae = pairs.iter().map(|(x, y)| (x - y).abs()).sum::<f64>() / count;
    let rmse = (pairs.iter().map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / count).sqrt();
    let eligible: Vec<_> = pairs.iter().filter(|(_, y)| *y >= 1.0).collect();
    let mape = 100.0 * eligible.iter().map(|(x, y)| (x - y).abs() / y).sum::<f64>() / eligible.len() as f64;
    assert!((r.mae - mae).abs() <= 1e-12);
    assert!((r.rmse - rmse).abs() <= 1e-12);
    assert!((r.mape_percent - mape).abs() <= 1e-12);
    assert_eq!(r.sample_count, pairs.len());
    assert_eq!(r.mape_count, eligible.len());
}

proptest! {
    #[test]
    fn mae_never_exceeds_rmse(values in proptest::collection::vec((0.0f64..120.0, 0.0f64..120.0), 1..60)) {
        let t = values.len();
        let p = Array2::from_shape_fn((1, t), |(_, j)| values[j].0);
        let a = Array2::from_shape_fn((1, t), |(_, j)| values[j].1);
        let v = Array2::from_elem((1, t), true);
        let r = evaluate(p.view(), a.view(), v.view(), &["x".into()], 1.0).unwrap();
        prop_assert!(r.mae >= 0.0 && r.rmse >= 0.0);
        prop_assert!(r.mae <= r.rmse * (1.0 + 1e-12));
    }
}

#[test]
fn null_network_leaves_only_arma_forecasts() {
    let (m, g) = small_data(3);
    let config = small_config(0);
    let run = run_hybrid_with(&m, &g, &config, &|c, l, s| MotifGcrnnModel::zeroed(c, l, s)).unwrap();
    assert!(run.report.mae.is_finite());

    let bands = compute_bands(&m, &config).unwrap();
    let scaler = &run.fitted.model.scaler;
    let centre = scaler.denormalize(Array1::zeros(5).view());
    for (b, &(day, interval)) in run.predictions.targets.iter().enumerate() {
        let col = day * PER_DAY + interval;
        for i in 0..5 {
            let mut expected = centre[i];
            for (k, bm) in run.fitted.band_models[i * 3..(i + 1) * 3].iter().enumerate() {
                let mut f = RollingForecaster::new(bm.model.clone());
                for &v in bands.high[k].slice(s![i, ..col]) {
                    f.observe(v);
                }
                expected += f.forecast().unwrap();
            }
            let got = run.predictions.predicted[[i, b]];
            assert!((got - expected).abs() < 1e-9, "({i}, {day}, {interval}): {got} vs {expected}");
        }
    }
}

#[test]
fn recombination_error_is_the_band_innovations() {
    let (m, _) = small_data(10);
    let one = matrix_from(m.values.slice(s![..1, ..]).to_owned());
    let config = small_config(0);
    let bands = compute_bands(&one, &config).unwrap();
    let fitted = speedcast::pipeline::fit_band_models(&bands, &one.segment_ids, TRAIN_DAYS * PER_DAY, &config).unwrap();
    let mut forecasters: Vec<_> = fitted.iter().map(|bm| RollingForecaster::new(bm.model.clone())).collect();
    for t in 0..one.interval_count() {
        let Some(forecast) = forecasters.iter().map(|f| f.forecast()).sum::<Option<f64>>() else {
            for (k, f) in forecasters.iter_mut().enumerate() {
                f.observe(bands.high[k][[0, t]]);
            }
            continue;
        };
        let prediction = bands.low[[0, t]] + forecast;
        let innovations: f64 = forecasters
            .iter_mut()
            .enumerate()
            .map(|(k, f)| f.observe(bands.high[k][[0, t]]))
            .sum();
        assert!((one.values[[0, t]] - prediction - innovations).abs() < 1e-9);
    }
}

#[test]
fn persistence_is_exact_on_constant_data() {
    let m = matrix_from(Array2::from_elem((5, DAYS * PER_DAY), 37.5));
    let r = run_baseline(&m, &ring(5), &small_config(1), BaselineKind::Persistence).unwrap().report;
    assert_eq!((r.mae, r.mape_percent, r.rmse), (0.0, 0.0, 0.0));
}

#[test]
fn historical_average_is_exact_on_repeating_days() {
    let m = matrix_from(Array2::from_shape_fn((5, DAYS * PER_DAY), |(i, c)| {
        50.0 + i as f64 + 10.0 * ((c % PER_DAY) as f64 / 3.0).sin()
    }));
    let r = run_baseline(&m, &ring(5), &small_config(1), BaselineKind::HistoricalAverage).unwrap().report;
    assert!(r.mae < 1e-12 && r.rmse < 1e-12);
}

#[test]
fn every_method_scores_the_same_targets() {
    let (m, g) = small_data(4);
    let config = small_config(2);
    let hybrid = run_hybrid(&m, &g, &config).unwrap();
    for kind in BaselineKind::ALL {
        let b = run_baseline(&m, &g, &config, kind).unwrap();
        assert_eq!(b.predictions.targets, hybrid.predictions.targets, "{}", kind.name());
        assert_eq!(b.predictions.valid, hybrid.predictions.valid);
        assert_eq!(b.report.sample_count, hybrid.report.sample_count);
        assert!(b.report.mae <= b.report.rmse);
    }
}

#[test]
fn test_days_never_reach_fitting() {
    let (m, g) = small_data(5);
    let config = small_config(3);
    let clean = fit_hybrid(&m, &g, &config).unwrap();
    let mut poisoned = m.clone();
    poisoned.values.slice_mut(s![.., TRAIN_DAYS * PER_DAY..]).mapv_inplace(|v| v + 100.0);
    let dirty = fit_hybrid(&poisoned, &g, &config).unwrap();
    assert_eq!(clean.model.params, dirty.model.params);
    assert_eq!(clean.model.scaler, dirty.model.scaler);
    assert_eq!(clean.band_models, dirty.band_models);
    assert_eq!(clean.loss_history, dirty.loss_history);
}

#[test]
fn runs_are_deterministic() {
    let (m, g) = small_data(6);
    let config = small_config(3);
    let a = run_hybrid(&m, &g, &config).unwrap();
    let b = run_hybrid(&m, &g, &config).unwrap();
    assert_eq!(a.predictions, b.predictions);
    assert_eq!(a.report, b.report);
}

#[test]
fn training_reduces_loss() {
    let (m, g) = small_data(7);
    let run = fit_hybrid(&m, &g, &small_config(20)).unwrap();
    let h = &run.loss_history;
    assert_eq!(h.len(), 20);
    assert!(h[19] < h[0]);
}

#[test]
fn sweeps_emit_one_row_per_value() {
    let (m, g) = small_data(8);
    let config = small_config(1);
    let rows = parameter_sweep(&m, &g, &config, SweepAxis::K, &[1]).unwrap();
    assert_eq!(rows.len(), 1);
    let rows = parameter_sweep(&m, &g, &config, SweepAxis::M, &[1, 2, 3, 4]).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    assert!(rows.iter().all(|r| r.report.mae.is_finite() && r.report.rmse.is_finite()));
    let again = parameter_sweep(&m, &g, &config, SweepAxis::M, &[1, 2, 3, 4]).unwrap();
    assert_eq!(rows, again);
}

#[test]
fn graph_and_matrix_must_agree() {
    let (m, _) = small_data(9);
    assert!(run_baseline(&m, &ring(6), &small_config(1), BaselineKind::Persistence).is_err());
}

#[test]
fn benchmark_persistence_score_is_pinned() {
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap();
    let spec = SyntheticSpec::from_toml(&read("benchmark_synth.toml")).unwrap();
    let split = speedcast::data::split_bidirectional(&speedcast::data::parse_roads(&read("benchmark_roads.csv")).unwrap()).unwrap();
    let m = generate_synthetic(&spec, &split.graph).unwrap().matrix;
    let config = RunConfig::from_toml(&read("benchmark_run.toml")).unwrap();
    let run = run_baseline(&m, &split.graph, &config, BaselineKind::Persistence).unwrap();

    // Every test-day interval with a full trend window, scored against the
    // previous interval.
    let per_day = spec.intervals_per_day;
    let mut total = 0.0;
    let mut count = 0;
    for day in config.split.training_days..spec.days {
        for interval in config.model.trend_window..per_day {
            let t = day * per_day + interval;
            for i in 0..m.segment_count() {
                total += (m.values[[i, t]] - m.values[[i, t - 1]]).abs();
                count += 1;
            }
        }
    }
    assert_eq!((run.report.sample_count, count), (22_560, 22_560));
    assert!((run.report.mae - total / count as f64).abs() < 1e-12);
    assert!((run.report.mae - 2.6201100090168863).abs() < 1e-9, "{}", run.report.mae);
}
