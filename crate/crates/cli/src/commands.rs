use std::fmt;
use std::path::{Path, PathBuf};

use speedcast::config::{ConfigError, RunConfig};
use speedcast::data::{
    aggregate, impute, parse_roads, read_matrix, read_records, split_bidirectional, write_matrix, AggregateOptions,
    DataError, SpeedMatrix, SyntheticSpec,
};
use speedcast::neural::{loss_history_csv, Checkpoint, NeuralError};
use speedcast::pipeline::{
    arma_jsonl, decompose_all, fit_hybrid, parse_arma_jsonl, parse_predictions_csv, parameter_sweep, predict_hybrid,
    predictions_csv, report_toml, run_baseline, sweep_csv, BaselineKind, EvaluationReport, FittedHybrid, PipelineError,
    SweepAxis,
};
use speedcast::roadgraph::{DirectedRoadGraph, GraphError};

use crate::{Cli, Command, RunArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug)]
pub struct CliError {
    kind: Kind,
    stage: &'static str,
    message: String,
}

impl CliError {
    fn new(kind: Kind, stage: &'static str, message: impl fmt::Display) -> Self {
        Self {
            kind,
            stage,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Usage => 1,
            Kind::Data => 2,
            Kind::Numeric => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn data(stage: &'static str) -> impl Fn(DataError) -> CliError {
    move |e| CliError::new(Kind::Data, stage, e)
}

fn config_err(e: ConfigError) -> CliError {
    CliError::new(Kind::Data, "config", e)
}

fn graph_err(path: &Path) -> impl Fn(GraphError) -> CliError + '_ {
    move |e| CliError::new(Kind::Data, "graph", format!("{}: {e}", path.display()))
}

fn pipeline(stage: &'static str) -> impl Fn(PipelineError) -> CliError {
    move |e| {
        let kind = if e.is_numeric() { Kind::Numeric } else { Kind::Data };
        CliError::new(kind, stage, e)
    }
}

fn neural(stage: &'static str) -> impl Fn(NeuralError) -> CliError {
    move |e| {
        let kind = match e {
            NeuralError::NonFinite(_) | NeuralError::Diverged { .. } => Kind::Numeric,
            _ => Kind::Data,
        };
        CliError::new(kind, stage, e)
    }
}

fn read_text(path: &Path, stage: &'static str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::new(Kind::Data, stage, format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::new(Kind::Data, "output", format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::new(Kind::Data, "output", format!("{}: {e}", path.display())))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

/// A graph with the segment ids its file defines, if any. Road tables name
/// their segments; edge lists use node numbers, optionally sized by a
/// `# <n> nodes` comment.
struct LoadedGraph {
    graph: DirectedRoadGraph,
    segment_ids: Option<Vec<String>>,
}

fn load_graph(path: &Path, node_count: Option<usize>) -> Result<LoadedGraph> {
    let text = read_text(path, "graph")?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or("");
    if first.starts_with("road_id") {
        let roads = parse_roads(&text).map_err(|e| CliError::new(Kind::Data, "graph", format!("{}: {e}", path.display())))?;
        let split = split_bidirectional(&roads).map_err(data("graph"))?;
        return Ok(LoadedGraph {
            segment_ids: Some(split.segment_ids()),
            graph: split.graph,
        });
    }
    let declared = text.lines().find_map(|l| {
        let rest = l.trim().strip_prefix('#')?.trim();
        rest.strip_suffix("nodes")?.trim().parse::<usize>().ok()
    });
    let graph = DirectedRoadGraph::parse_edge_list(&text, node_count.or(declared)).map_err(graph_err(path))?;
    Ok(LoadedGraph {
        graph,
        segment_ids: None,
    })
}

/// Reads a matrix and fills its gaps; the gap mask is kept for scoring.
fn load_matrix(path: &Path) -> Result<SpeedMatrix> {
    let m = read_matrix(path).map_err(|e| CliError::new(Kind::Data, "matrix", format!("{}: {e}", path.display())))?;
    if m.has_missing() {
        impute(&m).map_err(data("impute"))
    } else {
        Ok(m)
    }
}

fn matrix_and_graph(matrix: &Path, graph: &Path) -> Result<(SpeedMatrix, DirectedRoadGraph)> {
    let speeds = load_matrix(matrix)?;
    let loaded = load_graph(graph, Some(speeds.segment_count()))?;
    if let Some(ids) = &loaded.segment_ids {
        if *ids != speeds.segment_ids {
            return Err(CliError::new(
                Kind::Data,
                "graph",
                "matrix segment ids do not match the road table",
            ));
        }
    }
    Ok((speeds, loaded.graph))
}

struct Run {
    config: RunConfig,
    speeds: SpeedMatrix,
    graph: DirectedRoadGraph,
    out_dir: PathBuf,
}

fn prepare(cli: &Cli, args: &RunArgs) -> Result<Run> {
    let mut config = RunConfig::load(&args.config).map_err(config_err)?;
    if let Some(p) = &args.matrix {
        config.paths.matrix = Some(p.clone());
    }
    if let Some(p) = &args.graph {
        config.paths.graph = Some(p.clone());
    }
    if let Some(p) = &args.out_dir {
        config.paths.output_dir = Some(p.clone());
    }
    if let Some(seed) = cli.seed {
        config.train.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        config.train.epochs = epochs;
    }
    config.validate().map_err(config_err)?;
    config.validate_paths().map_err(config_err)?;
    let missing = |what: &str| CliError::new(Kind::Usage, "config", format!("no {what}; set paths.{what} or pass --{what}"));
    let matrix = config.paths.matrix.clone().ok_or_else(|| missing("matrix"))?;
    let graph = config.paths.graph.clone().ok_or_else(|| missing("graph"))?;
    let out_dir = config
        .paths
        .output_dir
        .clone()
        .ok_or_else(|| CliError::new(Kind::Usage, "config", "no output directory; set paths.output_dir or pass --out-dir"))?;
    let (speeds, graph) = matrix_and_graph(&matrix, &graph)?;
    create_dir(&out_dir)?;
    Ok(Run {
        config,
        speeds,
        graph,
        out_dir,
    })
}

fn summary(label: &str, r: &EvaluationReport) -> String {
    format!(
        "{label}: MAE {:.4}  MAPE {:.4}%  RMSE {:.4}  ({} points)",
        r.mae, r.mape_percent, r.rmse, r.sample_count
    )
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest {
            records,
            graph,
            out,
            interval_minutes,
        } => ingest(records, graph, out, *interval_minutes),
        Command::Synth { spec, graph, out } => synth(cli, spec, graph, out),
        Command::Decompose {
            matrix,
            config,
            out_dir,
            level,
            verify,
        } => decompose(matrix, config.as_deref(), out_dir, *level, *verify),
        Command::Train(args) => train(cli, args),
        Command::Predict { run, checkpoint, arma } => predict(cli, run, checkpoint.as_deref(), arma.as_deref()),
        Command::Evaluate {
            predictions,
            out,
            mape_epsilon,
        } => evaluate(predictions, out.as_deref(), *mape_epsilon),
        Command::Baseline { run, kind } => baseline(cli, run, kind),
        Command::Sweep { run, axis, values } => sweep(cli, run, axis, values),
    }
}

fn ingest(records: &Path, graph: &Path, out: &Path, interval_minutes: u32) -> Result<()> {
    let loaded = load_graph(graph, None)?;
    let ids = loaded
        .segment_ids
        .unwrap_or_else(|| (0..loaded.graph.node_count()).map(|i| i.to_string()).collect());
    let recs = read_records(records)
        .map_err(|e| CliError::new(Kind::Data, "ingest", format!("{}: {e}", records.display())))?;
    let options = AggregateOptions {
        interval_minutes,
        ..AggregateOptions::default()
    };
    let agg = aggregate(&recs, &ids, &options).map_err(data("ingest"))?;
    if agg.unknown_segment_records > 0 {
        eprintln!("{} records name segments outside the graph", agg.unknown_segment_records);
    }
    // Only checks that every segment can be filled; gaps stay empty on disk.
    impute(&agg.matrix).map_err(data("impute"))?;
    ensure_parent(out)?;
    write_matrix(&agg.matrix, out).map_err(data("output"))?;
    let missing = agg.matrix.missing.iter().filter(|&&m| m).count();
    println!(
        "wrote {} segments x {} intervals ({missing} empty cells) to {}",
        agg.matrix.segment_count(),
        agg.matrix.interval_count(),
        out.display()
    );
    Ok(())
}

fn synth(cli: &Cli, spec_path: &Path, graph: &Path, out: &Path) -> Result<()> {
    let text = read_text(spec_path, "synth")?;
    let mut spec = SyntheticSpec::from_toml(&text)
        .map_err(|e| CliError::new(Kind::Data, "synth", format!("{}: {e}", spec_path.display())))?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let loaded = load_graph(graph, Some(spec.segment_count))?;
    let mut output = speedcast::data::generate_synthetic(&spec, &loaded.graph).map_err(data("synth"))?;
    if let Some(ids) = loaded.segment_ids {
        output.matrix.segment_ids = ids;
    }
    ensure_parent(out)?;
    write_matrix(&output.matrix, out).map_err(data("output"))?;
    println!(
        "wrote {} segments x {} intervals to {} (clipping rate {:.6})",
        output.matrix.segment_count(),
        output.matrix.interval_count(),
        out.display(),
        output.clipping_rate
    );
    Ok(())
}

fn decompose(matrix: &Path, config: Option<&Path>, out_dir: &Path, level: Option<usize>, verify: bool) -> Result<()> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p).map_err(config_err)?,
        None => RunConfig::default(),
    };
    if let Some(l) = level {
        cfg.wavelet.level = l;
    }
    cfg.validate().map_err(config_err)?;
    let speeds = load_matrix(matrix)?;
    let bank = cfg.wavelet.bank().map_err(config_err)?;
    let bands = decompose_all(&speeds, &bank, cfg.wavelet.level, cfg.wavelet.boundary).map_err(pipeline("decompose"))?;
    create_dir(out_dir)?;

    let mut names = vec!["rA".to_string()];
    names.extend((1..=cfg.wavelet.level).map(|i| format!("rD{i}")));
    for (b, name) in names.iter().enumerate() {
        let mut text = speeds.segment_ids.join(",");
        text.push('\n');
        for t in 0..speeds.interval_count() {
            let row: Vec<String> = bands
                .iter()
                .map(|bc| if b == 0 { bc.low_frequency[t] } else { bc.high_frequency[b - 1][t] }.to_string())
                .collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        write_text(&out_dir.join(format!("{name}.csv")), &text)?;
    }
    let worst = bands
        .iter()
        .enumerate()
        .flat_map(|(i, bc)| {
            let row = speeds.values.row(i);
            bc.sum().into_iter().zip(row).map(|(s, x)| (s - x).abs()).collect::<Vec<_>>()
        })
        .fold(0.0f64, f64::max);
    println!(
        "wrote {} band files to {}; max |sum of bands - input| = {worst:.3e}",
        names.len(),
        out_dir.display()
    );
    if verify && !(worst < 1e-8) {
        return Err(CliError::new(
            Kind::Numeric,
            "decompose",
            format!("bands miss the input by {worst:e}"),
        ));
    }
    Ok(())
}

fn train(cli: &Cli, args: &RunArgs) -> Result<()> {
    let run = prepare(cli, args)?;
    let fitted = fit_hybrid(&run.speeds, &run.graph, &run.config).map_err(pipeline("train"))?;
    let ckpt = Checkpoint::new(
        fitted.model.clone(),
        Some(run.config.train.clone()),
        fitted.loss_history.clone(),
    );
    ckpt.save(&run.out_dir.join("checkpoint.json")).map_err(neural("output"))?;
    write_text(&run.out_dir.join("arma_models.jsonl"), &arma_jsonl(&fitted.band_models))?;
    write_text(&run.out_dir.join("loss_history.csv"), &loss_history_csv(&fitted.loss_history))?;
    write_text(&run.out_dir.join("config.toml"), &run.config.to_toml())?;
    let first = fitted.loss_history.first().copied().unwrap_or(f64::NAN);
    let last = fitted.loss_history.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} epochs (loss {first:.6} -> {last:.6}); wrote checkpoint to {}",
        fitted.loss_history.len(),
        run.out_dir.display()
    );
    Ok(())
}

fn predict(cli: &Cli, args: &RunArgs, checkpoint: Option<&Path>, arma: Option<&Path>) -> Result<()> {
    let run = prepare(cli, args)?;
    let ckpt_path = checkpoint.map_or_else(|| run.out_dir.join("checkpoint.json"), Path::to_path_buf);
    let arma_path = arma.map_or_else(|| run.out_dir.join("arma_models.jsonl"), Path::to_path_buf);
    let ckpt = Checkpoint::load(&ckpt_path)
        .map_err(|e| CliError::new(Kind::Data, "checkpoint", format!("{}: {e}", ckpt_path.display())))?;
    let band_models = parse_arma_jsonl(&read_text(&arma_path, "arma")?).map_err(pipeline("arma"))?;
    let fitted = FittedHybrid {
        model: ckpt.model,
        loss_history: ckpt.loss_history,
        band_models,
    };
    let predictions = predict_hybrid(&run.speeds, &run.graph, &fitted, &run.config).map_err(pipeline("predict"))?;
    let path = run.out_dir.join("predictions.csv");
    write_text(&path, &predictions_csv(&predictions))?;
    println!("wrote {} targets to {}", predictions.targets.len(), path.display());
    Ok(())
}

fn evaluate(predictions: &Path, out: Option<&Path>, mape_epsilon: f64) -> Result<()> {
    if !(mape_epsilon > 0.0 && mape_epsilon.is_finite()) {
        return Err(CliError::new(Kind::Usage, "evaluate", "--mape-epsilon must be positive"));
    }
    let p = parse_predictions_csv(&read_text(predictions, "evaluate")?).map_err(pipeline("evaluate"))?;
    let report = p.evaluate(mape_epsilon).map_err(pipeline("evaluate"))?;
    println!("{}", summary("overall", &report));
    if let Some(out) = out {
        ensure_parent(out)?;
        write_text(out, &report_toml(&report))?;
    }
    Ok(())
}

fn baseline(cli: &Cli, args: &RunArgs, kind: &str) -> Result<()> {
    let Some(kind) = BaselineKind::from_name(kind) else {
        let names: Vec<&str> = BaselineKind::ALL.iter().map(|k| k.name()).collect();
        return Err(CliError::new(
            Kind::Usage,
            "baseline",
            format!("unknown kind {kind:?}; expected one of {}", names.join(", ")),
        ));
    };
    let run = prepare(cli, args)?;
    let result = run_baseline(&run.speeds, &run.graph, &run.config, kind).map_err(pipeline("baseline"))?;
    let name = kind.name();
    write_text(
        &run.out_dir.join(format!("predictions_{name}.csv")),
        &predictions_csv(&result.predictions),
    )?;
    write_text(&run.out_dir.join(format!("report_{name}.toml")), &report_toml(&result.report))?;
    println!("{}", summary(name, &result.report));
    Ok(())
}

fn sweep(cli: &Cli, args: &RunArgs, axis: &str, values: &[usize]) -> Result<()> {
    let axis = SweepAxis::from_name(axis)
        .ok_or_else(|| CliError::new(Kind::Usage, "sweep", format!("unknown axis {axis:?}; expected K, m or n")))?;
    let values: Vec<usize> = if values.is_empty() {
        match axis {
            SweepAxis::K => (1..=5).collect(),
            SweepAxis::M | SweepAxis::N => (1..=8).collect(),
        }
    } else {
        values.to_vec()
    };
    let run = prepare(cli, args)?;
    let rows = parameter_sweep(&run.speeds, &run.graph, &run.config, axis, &values).map_err(pipeline("sweep"))?;
    let path = run.out_dir.join(format!("sweep_{}.csv", axis.name()));
    let text = sweep_csv(&rows);
    write_text(&path, &text)?;
    print!("{text}");
    Ok(())
}
