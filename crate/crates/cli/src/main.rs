use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wandering_cli::config::ExperimentConfig;
use wandering_cli::pipeline::{self, Options, Stage};
use wandering_cli::{report, CliError};

/// Experiments on Baker-type entire functions with wandering domains.
#[derive(Parser)]
#[command(name = "wander", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory [default: $WANDER_OUT or ./out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Samples per circle, overriding the config
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Recompute the recurrence and check the stored radii
    #[arg(long, global = true)]
    seed_check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Zero sequence only
    Gen(ConfigArg),
    /// Critical points over the window
    Crit(ConfigArg),
    /// Ring inclusion checks
    Verify(ConfigArg),
    /// Connectivity, uniform perfectness and clustering verdicts
    Classify(ConfigArg),
    /// Escape-ring image
    Render(ConfigArg),
    /// Full pipeline
    Run(ConfigArg),
    /// Merge JSON outputs into summary.json
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(clap::Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("WANDER_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    let (stage, arg) = match &cli.command {
        Command::Gen(a) => (Stage::Gen, a),
        Command::Crit(a) => (Stage::Crit, a),
        Command::Verify(a) => (Stage::Verify, a),
        Command::Classify(a) => (Stage::Classify, a),
        Command::Render(a) => (Stage::Render, a),
        Command::Run(a) => (Stage::Run, a),
        Command::Report { inputs } => {
            let bytes = report::merge_files(inputs)?;
            let dir = out_dir(cli);
            let files = [("summary.json".to_string(), bytes)].into_iter().collect();
            return pipeline::write_all(&dir, &files);
        }
    };
    let mut cfg = ExperimentConfig::load(&arg.config)?;
    if let Some(s) = cli.samples {
        cfg.eval.samples = Some(s);
        cfg.validate()?;
    }
    let files = pipeline::execute(&cfg, stage, Options { seed_check: cli.seed_check })?;
    pipeline::write_all(&out_dir(cli), &files)?;
    for name in files.keys() {
        println!("{}", out_dir(cli).join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
