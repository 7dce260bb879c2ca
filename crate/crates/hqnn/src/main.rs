use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hqnn::config::{ExperimentConfig, SEED_ENV};
use hqnn::experiment::{evaluate_holdout, prepare, run_experiment, train_holdout, write_json, ModelArtifact};
use hqnn::io::{features_csv, loss_csv, ohlc_csv, write_atomic};
use hqnn::{FailureKind, StageError};
use hqnn_core::models::ModelKind;
use hqnn_core::synth::{synth_data, Regime};

/// Hybrid quantum-classical stock forecasting experiments.
///
/// Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric failure.
#[derive(Parser)]
#[command(name = "hqnn", version)]
struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Walk,
    TrendShift,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic OHLC series as CSV.
    Synth {
        /// Number of bars (at least 60).
        #[arg(long, default_value_t = 400)]
        bars: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = RegimeArg::Walk)]
        regime: RegimeArg,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the indicator feature matrix of the configured data as CSV.
    Prepare {
        /// Experiment config (JSON); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Read bars from this CSV instead of the configured source.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model on the chronological first 80% and save it as JSON.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// CustomQNN, HybridQNN1, HybridQNN2, LSTM, RNN, BiLSTM or GRU.
        #[arg(long)]
        model: String,
        /// Number of selected features (and qubits for quantum kinds).
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Model JSON output path; the loss history goes next to it as CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a saved model on the chronological last 20% of the configured data.
    Evaluate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Model JSON written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Also write the evaluation JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full model x feature-count grid described by a config file.
    ///
    /// Config defaults: synthetic walk of 400 bars, all seven models,
    /// features [3], protocols [TimeSeriesSplit], 5 splits, lookback 2,
    /// batch 32, 500 epochs, lr 0.01, decay 0.99, patience 20,
    /// min delta 1e-5, validation fraction 0.1, output_dir "results",
    /// seed 0, record_timing false.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Grid cells trained concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn config_error(e: impl std::fmt::Display) -> StageError {
    StageError::new("config", FailureKind::Config, e)
}

fn load_config(path: Option<&PathBuf>, input: Option<PathBuf>) -> Result<ExperimentConfig, StageError> {
    let mut config = match path {
        Some(p) => ExperimentConfig::load(p).map_err(config_error)?,
        None => ExperimentConfig::default(),
    };
    config.apply_env().map_err(config_error)?;
    if let Some(path) = input {
        config.data = hqnn::config::DataSource::Csv { path };
    }
    Ok(config)
}

fn output_error(e: impl std::fmt::Display) -> StageError {
    StageError::new("output", FailureKind::Data, e)
}

fn run(cli: Cli) -> Result<(), StageError> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Synth { bars, seed, regime, out } => {
            let regime = match regime {
                RegimeArg::Walk => Regime::Walk,
                RegimeArg::TrendShift => Regime::TrendShift,
            };
            let series = synth_data(bars, seed, regime).map_err(|e| StageError::core("synth", e))?;
            let csv = ohlc_csv(&series).map_err(output_error)?;
            write_atomic(&out, csv.as_bytes()).map_err(output_error)?;
            if verbose {
                eprintln!("wrote {} bars to {}", series.len(), out.display());
            }
        }
        Command::Prepare { config, input, out } => {
            let config = load_config(config.as_ref(), input)?;
            let matrix = prepare(&config)?;
            let csv = features_csv(&matrix).map_err(output_error)?;
            write_atomic(&out, csv.as_bytes()).map_err(output_error)?;
            if verbose {
                eprintln!("wrote {} feature rows to {}", matrix.n_rows(), out.display());
            }
        }
        Command::Train {
            config,
            input,
            model,
            k,
            out,
        } => {
            let config = load_config(config.as_ref(), input)?;
            let kind = ModelKind::from_name(&model)
                .ok_or_else(|| config_error(format!("unknown model kind `{model}`")))?;
            let artifact = train_holdout(&config, kind, k)?;
            write_json(&out, &artifact)?;
            let loss = loss_csv(0, &artifact.history).map_err(output_error)?;
            write_atomic(&out.with_extension("loss.csv"), loss.as_bytes()).map_err(output_error)?;
            if verbose {
                let m = &artifact.trained.metadata;
                eprintln!(
                    "{kind}: {} epochs, best validation MSE {} at epoch {}",
                    m.epochs, m.best_val_mse, m.best_epoch
                );
            }
        }
        Command::Evaluate {
            config,
            input,
            model,
            out,
        } => {
            let config = load_config(config.as_ref(), input)?;
            let text = std::fs::read_to_string(&model)
                .map_err(|e| config_error(format!("{}: {e}", model.display())))?;
            let artifact: ModelArtifact = serde_json::from_str(&text)
                .map_err(|e| config_error(format!("{}: {e}", model.display())))?;
            let evaluation = evaluate_holdout(&config, &artifact)?;
            println!(
                "{} k={} test_samples={} rmse={}",
                evaluation.model, evaluation.k_features, evaluation.test_samples, evaluation.rmse
            );
            if let Some(out) = out {
                write_json(&out, &evaluation)?;
            }
        }
        Command::Run {
            config,
            output_dir,
            jobs,
        } => {
            let mut config = load_config(Some(&config), None)?;
            if let Some(dir) = output_dir {
                config.output_dir = dir;
            }
            if verbose {
                eprintln!("seed {} ({SEED_ENV} overrides), writing to {}", config.seed, config.output_dir.display());
            }
            let summary = run_experiment(&config, jobs)?;
            for (protocol, rows) in &summary.comparison {
                for r in rows {
                    println!("{protocol} {} k={} avg_rmse={}", r.model, r.features, r.avg_rmse);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
