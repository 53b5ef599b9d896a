use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kincall::config::{RunConfig, CONFIG_ENV};
use kincall::pipeline;
use kincall::Error;

#[derive(Parser)]
#[command(name = "kincall", version, about = "Close-kin detection in call-detail records")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Minimum kin and quasi observations per age bin.
    #[arg(long, global = true)]
    min_cohort: Option<usize>,
    /// Raw call records.
    #[arg(long, global = true)]
    cdr: Option<PathBuf>,
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    #[arg(long, global = true)]
    relations: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate raw call records into the dyad file.
    Ingest,
    /// Pick and label the four kin slots of every ego.
    Classify,
    /// Build life-course curves and test tables.
    Stats,
    /// Generate a synthetic world.
    Synth,
    /// Score assignments against synthetic ground truth.
    Score,
    /// Run ingest, classify, stats (and score when relations are given).
    All {
        /// Generate a synthetic world first and use it as input.
        #[arg(long)]
        synth: bool,
    },
    /// Print the effective configuration.
    Config,
}

fn effective_config(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(out) = &c.out {
        cfg.paths.out = out.clone();
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    if let Some(m) = c.min_cohort {
        cfg.lifecourse.min_cohort_size = m;
    }
    if c.cdr.is_some() {
        cfg.paths.cdr = c.cdr.clone();
    }
    if c.registry.is_some() {
        cfg.paths.registry = c.registry.clone();
    }
    if c.relations.is_some() {
        cfg.paths.relations = c.relations.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = effective_config(&cli.common)?;
    match cli.command {
        Command::Ingest => pipeline::run_ingest(&cfg).map(drop),
        Command::Classify => pipeline::run_classify(&cfg).map(drop),
        Command::Stats => pipeline::run_stats(&cfg).map(drop),
        Command::Synth => pipeline::run_synth(&cfg).map(drop),
        Command::Score => pipeline::run_score(&cfg).map(drop),
        Command::All { synth } => pipeline::run_all(&cfg, synth).map(drop),
        Command::Config => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kincall: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
