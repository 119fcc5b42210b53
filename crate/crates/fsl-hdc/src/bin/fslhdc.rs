//! Experiment driver. The subcommand picks the task, a TOML file supplies
//! the configuration, and flags override individual keys.
//!
//! Exit codes: 0 success, 2 configuration error, 3 dataset error,
//! 4 infeasible scenario.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsl_hdc::runner::{self, RunArtifacts};
use fsl_hdc::{Error, ExperimentConfig, Result, Task};

#[derive(Parser)]
#[command(
    name = "fslhdc",
    version,
    about = "Federated split hyperdimensional learning and uplink optimization experiments"
)]
struct Cli {
    /// TOML config file. Omitted: built-in defaults (MNIST under data/,
    /// D=10000, 10 clients).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config's master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides the config's out_dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override any config key, e.g. --set fed_epochs=5. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    task: TaskCommand,
}

#[derive(Subcommand, Clone, Copy)]
enum TaskCommand {
    /// Train the split pipeline: clients -> fed server -> main server.
    #[command(name = "fsl_hdc")]
    FslHdc,
    /// Train the pooled-upload baseline on the parity task.
    #[command(name = "fl_hdc")]
    FlHdc,
    /// Run hypervector diagnostics at the configured dimension.
    #[command(name = "hdc_unit")]
    HdcUnit,
    /// Optimize one uplink scenario and compare against the uniform split.
    #[command(name = "net_opt")]
    NetOpt,
    /// Sweep the uplink comparison over total bandwidth.
    #[command(name = "net_sweep")]
    NetSweep,
    /// Run fsl_hdc and fl_hdc on identical seeds and report the delta.
    #[command(name = "compare")]
    Compare,
}

fn execute(cli: &Cli) -> Result<RunArtifacts> {
    let text = match &cli.config {
        Some(path) => Some(fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?),
        None => None,
    };
    let mut cfg = ExperimentConfig::load(text.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    match cli.task {
        TaskCommand::Compare => runner::compare_methods(&cfg),
        task => {
            cfg.task = match task {
                TaskCommand::FslHdc => Task::FslHdc,
                TaskCommand::FlHdc => Task::FlHdc,
                TaskCommand::HdcUnit => Task::HdcUnit,
                TaskCommand::NetOpt => Task::NetOpt,
                TaskCommand::NetSweep => Task::NetSweep,
                TaskCommand::Compare => unreachable!("handled above"),
            };
            runner::run_experiment(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(run) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&run.summary).expect("summary serializes")
            );
            eprintln!("metrics: {}", run.metrics_path.display());
            eprintln!("summary: {}", run.summary_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
