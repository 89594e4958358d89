use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dca_cli::commands::{cmd_compare, cmd_evaluate, cmd_predict, cmd_synth, cmd_train};
use dca_cli::{CliResult, RunConfig};
use dca_core::baselines::{SyntheticSpec, TargetDistribution};
use dca_core::metrics::EvalSettings;

#[derive(Parser)]
#[command(
    name = "dca",
    version,
    about = "Dynamic classification for tabular regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Distribution {
    Normal,
    Uniform,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write the artifact plus a training report.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Route the rows of a CSV through a saved model.
    Predict {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score a prediction file against a truth column.
    Evaluate {
        #[arg(long)]
        outcomes: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.005])]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        accuracy_tau: f64,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run DP, KC, GC, DC and DC-E on the same splits.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Write a synthetic dataset.
    Synth {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        features: usize,
        #[arg(long, value_enum, default_value_t = Distribution::Normal)]
        distribution: Distribution,
        /// Mean (normal) or lower bound (uniform).
        #[arg(long, default_value_t = 100.0)]
        loc: f64,
        /// Standard deviation (normal) or upper bound (uniform).
        #[arg(long, default_value_t = 15.0)]
        scale: f64,
        #[arg(long, default_value_t = 1.0)]
        correlation: f64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train {
            config,
            artifact,
            report,
        } => {
            let cfg = RunConfig::from_path(&config)?;
            let r = cmd_train(&cfg, &artifact, &report)?;
            eprintln!(
                "trained {} intervals with {}; dc_error {:.4}, excluded rate {:.4}",
                r.n_intervals, r.best_kind, r.dc_error, r.excluded_rate
            );
        }
        Command::Predict {
            artifact,
            input,
            output,
        } => {
            let n = cmd_predict(&artifact, &input, &output)?;
            eprintln!("wrote {n} outcomes to {}", output.display());
        }
        Command::Evaluate {
            outcomes,
            truth,
            target,
            taus,
            accuracy_tau,
            output,
        } => {
            let settings = EvalSettings {
                taus,
                accuracy_tau,
                scale: None,
            };
            cmd_evaluate(&outcomes, &truth, &target, &settings, output.as_deref())?;
        }
        Command::Compare { config, output_dir } => {
            let cfg = RunConfig::from_path(&config)?;
            for p in cmd_compare(&cfg, &output_dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Synth {
            output,
            samples,
            features,
            distribution,
            loc,
            scale,
            correlation,
            noise,
            seed,
        } => {
            let distribution = match distribution {
                Distribution::Normal => TargetDistribution::Normal {
                    mean: loc,
                    sd: scale,
                },
                Distribution::Uniform => TargetDistribution::Uniform {
                    low: loc,
                    high: scale,
                },
            };
            let spec = SyntheticSpec {
                n_samples: samples,
                n_features: features,
                distribution,
                correlation,
                noise,
                seed,
            };
            let n = cmd_synth(&spec, &output)?;
            eprintln!("wrote {n} rows to {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
