use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ccs_radar::harness::checks::{self, CheckOutcome};
use ccs_radar::harness::{
    run_interleaver_study, run_near_far, run_pslr_sweep, run_suppression_sweep, run_tail_bound_check,
    ExperimentConfig, ExperimentKind, ResultTable,
};
use ccs_radar::Error;

/// Sensing-quality experiments for channel-coded communications signals.
#[derive(Parser)]
#[command(name = "ccs-radar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Median PSLR against block length.
    Pslr(Common),
    /// Median interference suppression against block length.
    Suppress(Common),
    /// Median PSLR with and without interleaving.
    Interleave(Common),
    /// Empirical sidelobe tails against the analytic bounds.
    Bounds(Common),
    /// Near-far scene: range-Doppler maps and detection curves.
    Nearfar(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate the expected properties and exit with 3 if any fails.
    #[arg(long)]
    check: bool,
}

enum Failure {
    Config(String),
    Run(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn load(kind: ExperimentKind, args: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml_for(&text, kind)?
        }
        None => ExperimentConfig::for_kind(kind),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn write_table(table: &ResultTable, dir: &Path, name: &str) -> Result<(), Failure> {
    let path = table.write(dir, name)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn report(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().for_each(|o| println!("{o}"));
    outcomes.iter().all(|o| o.pass)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (kind, args) = match &cli.command {
        Command::Pslr(a) => (ExperimentKind::PslrSweep, a),
        Command::Suppress(a) => (ExperimentKind::SuppressionSweep, a),
        Command::Interleave(a) => (ExperimentKind::InterleaverStudy, a),
        Command::Bounds(a) => (ExperimentKind::TailBoundCheck, a),
        Command::Nearfar(a) => (ExperimentKind::NearFar, a),
    };
    let cfg = load(kind, args)?;
    let dir = cfg.out_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))?;
    fs::write(dir.join(format!("{kind}.config.toml")), cfg.to_toml()?).map_err(|e| Failure::Run(e.to_string()))?;
    let outcomes = match kind {
        ExperimentKind::PslrSweep => {
            let t = run_pslr_sweep(&cfg)?;
            write_table(&t, &dir, "pslr_sweep")?;
            checks::check_pslr(&t)?
        }
        ExperimentKind::SuppressionSweep => {
            let t = run_suppression_sweep(&cfg)?;
            write_table(&t, &dir, "suppression_sweep")?;
            checks::check_suppression(&t)?
        }
        ExperimentKind::InterleaverStudy => {
            let t = run_interleaver_study(&cfg)?;
            write_table(&t, &dir, "interleaver_study")?;
            checks::check_interleaver(&t)?
        }
        ExperimentKind::TailBoundCheck => {
            let t = run_tail_bound_check(&cfg)?;
            write_table(&t, &dir, "tail_bound_check")?;
            checks::check_tail_bounds(&t)?
        }
        ExperimentKind::NearFar => {
            let (t, rep) = run_near_far(&cfg)?;
            write_table(&t, &dir, "near_far")?;
            let io = |e: std::io::Error| Failure::Run(e.to_string());
            rep.roc.write_csv(fs::File::create(dir.join("roc.csv")).map_err(io)?)?;
            let maps = dir.join("maps");
            fs::create_dir_all(&maps).map_err(io)?;
            for (label, map) in &rep.maps {
                map.write_csv(fs::File::create(maps.join(format!("{label}.csv"))).map_err(io)?)?;
                fs::write(maps.join(format!("{label}.bin")), map.to_dump()?).map_err(io)?;
            }
            eprintln!("wrote {} and {}", dir.join("roc.csv").display(), maps.display());
            checks::check_near_far(&rep)
        }
    };
    if args.check && !report(&outcomes) {
        return Err(Failure::Check);
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check) => ExitCode::from(3),
    }
}
