//! `speedcast` command-line driver. Each subcommand runs one stage of the
//! pipeline and writes its artifacts to disk.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "speedcast", version, about = "Wavelet + graph-convolutional traffic speed forecasting")]
struct Cli {
    /// Seed for every stochastic step; overrides the config and spec files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the data-parallel stages.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Run config plus the per-run overrides shared by the modelling commands.
#[derive(Debug, Args)]
struct RunArgs {
    /// Run config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Speed matrix CSV; overrides `paths.matrix`.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Edge list or road table; overrides `paths.graph`.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Output directory; overrides `paths.output_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Overrides `train.epochs`.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average segment-tagged speed records into a speed matrix.
    Ingest {
        /// CSV of `timestamp_iso8601,segment_id,speed_kmh`.
        #[arg(long)]
        records: PathBuf,
        /// Edge list or road table naming the segments.
        #[arg(long)]
        graph: PathBuf,
        /// Matrix CSV to write; metadata goes next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 15)]
        interval_minutes: u32,
    },
    /// Generate a synthetic speed matrix.
    Synth {
        /// Synthetic spec (TOML).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split every segment's series into wavelet band files.
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
        /// Run config supplying the wavelet settings; defaults otherwise.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides `wavelet.level`.
        #[arg(long)]
        level: Option<usize>,
        /// Fail unless the bands add back up to the input within 1e-8.
        #[arg(long)]
        verify: bool,
    },
    /// Train the network and fit the band ARMA models.
    Train(RunArgs),
    /// Forecast the test days with a trained checkpoint.
    Predict {
        #[command(flatten)]
        run: RunArgs,
        /// Defaults to `checkpoint.json` in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Defaults to `arma_models.jsonl` in the output directory.
        #[arg(long)]
        arma: Option<PathBuf>,
    },
    /// Score a predictions file.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        /// Report to write (TOML); printed only when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        mape_epsilon: f64,
    },
    /// Run one comparison method on the same test targets.
    Baseline {
        #[command(flatten)]
        run: RunArgs,
        /// persistence, historical_average, lstm_only, arma_only or
        /// motif_gcrnn_no_dwt.
        #[arg(long)]
        kind: String,
    },
    /// Rerun the hybrid over values of K, m or n.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// K, m or n.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; defaults to 1..=5 for K and 1..=8 for m, n.
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
    {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
