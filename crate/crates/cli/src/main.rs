use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use splir_cli::{run, ExperimentConfig, RunOptions};

/// Run a self-paced learning experiment described by a config file.
#[derive(Parser, Debug)]
#[command(name = "splir", version)]
struct Args {
    /// Experiment config (flat TOML with dotted keys).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Inclusive seed range `a..b`; overrides `seeds` in the config.
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads across seeds.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions {
        out: args.out,
        seeds: args.seeds,
        jobs: args.jobs,
    };
    let result = ExperimentConfig::load(&args.config).and_then(|cfg| run(cfg, &opts));
    match result {
        Ok(outcome) if outcome.passed => {
            println!("wrote {} artifacts to {}", outcome.artifacts.names().count(), outcome.out_dir.display());
            ExitCode::SUCCESS
        }
        Ok(outcome) => {
            eprintln!("splir: checks failed; see {}", outcome.out_dir.display());
            ExitCode::FAILURE
        }
        Err(e) => {
            let line = format!("{e:#}").replace('\n', " ");
            eprintln!("splir: {line}");
            ExitCode::FAILURE
        }
    }
}
