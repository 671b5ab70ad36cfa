//! `dimlab`: runs a configured experiment and writes its report, CSV series
//! and manifest.
//!
//! Exit codes: 0 pass, 1 verdict fail, 2 usage or config error.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{Config, ConfigError, Kind};

#[derive(Parser)]
#[command(name = "dimlab", version, about = "Dimension and local product structure experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise, stable/unstable or grid dimension estimates.
    Dim(RunArgs),
    /// Almost-product inequality on sampled points.
    ProductCheck(RunArgs),
    /// Good sets, rectangle classes and the counting inequalities.
    RectCount(RunArgs),
    /// Surface dimension formula on a piecewise-linear map.
    YoungCheck(RunArgs),
    /// Pointwise-dimension histogram of a mixture.
    Histogram(RunArgs),
    /// Cross-estimator coincidence over saved dimension reports.
    Compare(RunArgs),
    /// Parse and check a config without running it; prints the normalised document.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: config `experiment.output`, then $DIMLAB_OUT, then ./dimlab-out]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    workers: Option<usize>,
    /// Enumerate every word instead of sampling (rect-count only).
    #[arg(long)]
    exhaustive: bool,
}

impl Command {
    fn parts(&self) -> (&'static str, Option<Kind>, &RunArgs) {
        match self {
            Command::Dim(a) => ("dim", Some(Kind::Dimension), a),
            Command::ProductCheck(a) => ("product-check", Some(Kind::ProductCheck), a),
            Command::RectCount(a) => ("rect-count", Some(Kind::RectCount), a),
            Command::YoungCheck(a) => ("young-check", Some(Kind::YoungCheck), a),
            Command::Histogram(a) => ("histogram", Some(Kind::Histogram), a),
            Command::Compare(a) => ("compare", Some(Kind::Compare), a),
            Command::Validate(a) => ("validate", None, a),
        }
    }
}

fn load(args: &RunArgs) -> Result<Config> {
    let mut cfg = Config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.experiment.seed = seed;
    }
    if args.exhaustive {
        cfg.sampling
            .get_or_insert(config::SamplingSection { samples: 1000, extent: None, exhaustive: false })
            .exhaustive = true;
    }
    Ok(cfg)
}

fn configure_workers(workers: Option<usize>) -> Result<()> {
    if workers == Some(0) {
        return Err(ConfigError("--workers must be at least 1".into()).into());
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError(format!("--workers: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    let (name, kind, args) = cli.command.parts();
    let started = output::unix_now();
    configure_workers(args.workers)?;
    let cfg = load(args)?;
    let Some(kind) = kind else {
        cfg.validate()?;
        eprintln!("{}: ok ({} experiment)", args.config.display(), cfg.experiment.kind);
        print!("{}", cfg.to_toml());
        return Ok(true);
    };
    if cfg.experiment.kind != kind {
        return Err(ConfigError(format!(
            "config field `experiment.kind`: `{}` does not match subcommand `{name}`",
            cfg.experiment.kind
        ))
        .into());
    }
    let outcome = run::run(&cfg)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.experiment.output.clone())
        .or_else(|| std::env::var_os("DIMLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("dimlab-out"));
    let ctx = output::RunContext { command: name, config: &cfg, workers: args.workers, started_unix: started };
    let report = output::write_outputs(&dir, &ctx, &outcome)?;
    println!("{name}: {} ({})", if outcome.passed { "pass" } else { "fail" }, report.display());
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
