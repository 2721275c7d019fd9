//! `fsmb`: config-driven entropy-equipartition experiments.
//!
//! Every subcommand writes `<experiment>.csv` and `<experiment>.json` to the
//! output directory: `--out-dir`, else `run.out_dir`, else `$FSMB_OUTPUT_DIR`,
//! else `./fsmb-out`. With `--workers 1` (the default) output is byte-identical
//! across runs. Larger worker counts give the same values and row order.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use output::Unit;

const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Parser)]
#[command(name = "fsmb", version, about = "Entropy equipartition experiments on free-group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Normalized information I(P^F_n)(x)/(n+1) for n = 0..=N along sampled (y, x).
    InfoSeq,
    /// Orbital entropy estimate with the configured method.
    Entropy,
    /// Chain-rule identity between H(P^F_n) and the shifted conditional entropies.
    CesaroCheck,
    /// Upper bound H(P^F)/|F| for growing prefixes of run.seward_set.
    Seward,
    /// Smallest orbital-entropy estimate over the [[candidates]] partitions.
    RokhlinSearch,
    /// Exceedance frequencies of sup_n f_n against e^-lambda.
    MaximalCheck,
    /// Sphere average of the normalized information, exact and sampled.
    SphereAverage,
    /// Normalized information along random-walk trajectories.
    RwExperiment,
    /// The invariant suite; exits 0 iff every check passes.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::InfoSeq => "info-seq",
            Command::Entropy => "entropy",
            Command::CesaroCheck => "cesaro-check",
            Command::Seward => "seward",
            Command::RokhlinSearch => "rokhlin-search",
            Command::MaximalCheck => "maximal-check",
            Command::SphereAverage => "sphere-average",
            Command::RwExperiment => "rw-experiment",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Args)]
struct Overrides {
    /// TOML experiment config; the bundled default is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, visible_alias = "n", global = true)]
    horizon: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Estimator name, or `auto`.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Report entropies in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

fn load(o: &Overrides) -> Result<ExperimentConfig> {
    let mut config = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => toml::from_str(DEFAULT_CONFIG)?,
    };
    let run = &mut config.run;
    run.seed = o.seed.unwrap_or(run.seed);
    run.horizon = o.horizon.unwrap_or(run.horizon);
    run.samples = o.samples.unwrap_or(run.samples);
    run.workers = o.workers.unwrap_or(run.workers);
    run.bits |= o.bits;
    if let Some(m) = &o.method {
        run.method = m.clone();
    }
    if o.out_dir.is_some() {
        run.out_dir = o.out_dir.clone();
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(config: &ExperimentConfig) -> PathBuf {
    config
        .run
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("FSMB_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fsmb-out"))
}

fn run(cli: &Cli) -> Result<bool> {
    let config = load(&cli.overrides)?;
    let outcome = match cli.command {
        Command::InfoSeq => commands::info_seq(&config),
        Command::Entropy => commands::entropy(&config),
        Command::CesaroCheck => commands::cesaro_check(&config),
        Command::Seward => commands::seward(&config),
        Command::RokhlinSearch => commands::rokhlin_search(&config),
        Command::MaximalCheck => commands::maximal_check(&config),
        Command::SphereAverage => commands::sphere_average(&config),
        Command::RwExperiment => commands::rw_experiment(&config),
        Command::Selftest => commands::selftest(&config),
    }?;
    let unit = Unit::from_bits_flag(config.run.bits);
    let s = &outcome.summary;
    if s.exploratory {
        eprintln!("note: {}", fsmb::smb::ERGODICITY_NOTE);
    }
    let paths = output::write(&out_dir(&config), s, &outcome.rows, unit)?;
    for c in &s.checks {
        println!("[{}] {}: {:.6e} <= {:.6e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.observed, c.bound);
    }
    println!(
        "{}: {:.6} {} ({}, stderr {:.6}, horizon {}, {} samples)",
        cli.command.name(),
        unit.convert(s.estimate_nats),
        unit.name(),
        s.method,
        unit.convert(s.stderr_nats),
        s.horizon,
        s.samples
    );
    println!("wrote {} and {}", paths.csv.display(), paths.json.display());
    Ok(s.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
