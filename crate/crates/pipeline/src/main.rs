//! `fundus`: glaucoma-screening pipeline CLI. Exit codes: 0 success,
//! 1 usage error, 2 data error, 3 internal error.

use clap::Parser;
use fundus_pipeline::cmd;
use fundus_pipeline::config::RunConfig;
use fundus_pipeline::util::{resolve_jobs, worker_pool};
use fundus_pipeline::{Ctx, Result};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "fundus",
    version,
    about = "Fundus-image glaucoma screening pipeline: synthesize, preprocess, split, train, predict, fuse, evaluate, cross-validate."
)]
struct Cli {
    /// `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override for every seeded stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: $PIPELINE_JOBS, then the CPU count).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Subcommand, Debug)]
enum Cmd {
    /// Generate a seeded synthetic dataset with a manifest.
    Synth(cmd::synth::SynthArgs),
    /// Build the three model views for every manifest record.
    Preprocess(cmd::preprocess::PreprocessArgs),
    /// Write a stratified test/k-fold plan for a manifest.
    Split(cmd::split::SplitArgs),
    /// Train one per-view model on one fold.
    Train(cmd::train::TrainArgs),
    /// Score a subset of samples with a trained model.
    Predict(cmd::predict::PredictArgs),
    /// Combine per-view predictions into fused probabilities.
    Fuse(cmd::fuse::FuseArgs),
    /// Score a prediction file against manifest labels.
    Eval(cmd::eval::EvalArgs),
    /// Run the full cross-validation experiment end to end.
    Crossval(cmd::crossval::CrossvalArgs),
}

fn run(cli: Cli) -> Result<()> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.override_seed(seed);
    }
    config.validate()?;
    let jobs = resolve_jobs(cli.jobs)?;
    let pool = worker_pool(jobs)?;
    let ctx = Ctx { config, seed: cli.seed, pool };
    match &cli.cmd {
        Cmd::Synth(args) => cmd::synth::run(args, &ctx),
        Cmd::Preprocess(args) => cmd::preprocess::run(args, &ctx),
        Cmd::Split(args) => cmd::split::run(args, &ctx),
        Cmd::Train(args) => cmd::train::run(args, &ctx),
        Cmd::Predict(args) => cmd::predict::run(args, &ctx),
        Cmd::Fuse(args) => cmd::fuse::run(args, &ctx),
        Cmd::Eval(args) => cmd::eval::run(args, &ctx),
        Cmd::Crossval(args) => cmd::crossval::run(args, &ctx),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successes; everything else is a usage error.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
