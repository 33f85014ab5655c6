use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deepagent::par::Exec;
use deepagent::pipeline::commands::{self, AgentId};
use deepagent::pipeline::{gen_fixtures, FixtureSpec, PipelineConfig};
use deepagent::vision::FramePolicy;
use deepagent::{Error, Result};
use serde_json::json;

/// Multimodal deepfake detection with two agents and a fused meta-classifier.
#[derive(Parser)]
#[command(name = "deepagent", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Sample manifest (JSON).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Pipeline configuration (JSON); falls back to $DEEPAGENT_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_parser = ["interval5", "even"])]
    frame_policy: Option<String>,
    /// Frames per video for the even policy.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Meta-feature width: 2 (probabilities) or 4 (with one-hot labels).
    #[arg(long, global = true)]
    meta_dims: Option<usize>,
    /// Run Agent-1 at reduced input size and epoch count.
    #[arg(long, global = true)]
    desk_scale: bool,
    /// Force single-threaded execution.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic fixture corpus and its manifest under --out.
    GenFixtures {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        strength: f64,
        #[arg(long, default_value_t = 1.0)]
        gap: f64,
    },
    /// Validate the manifest, split it and cache the multimodal features.
    Extract,
    /// Train one agent.
    Train {
        #[arg(value_enum)]
        agent: AgentArg,
    },
    /// Score every sample with both agents.
    Predict,
    /// Cross-validate the meta-classifier over agent scores.
    Fuse,
    /// Per-agent metrics on each split.
    Evaluate,
    /// Render the fold table and ROC curves.
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentArg {
    Agent1,
    Agent2,
}

fn config(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(p) = &common.frame_policy {
        cfg.frame_policy = p.parse::<FramePolicy>().map_err(Error::Usage)?;
    }
    if let Some(m) = common.m {
        cfg.m = m;
    }
    if let Some(d) = common.meta_dims {
        cfg.meta_dims = d;
    }
    if common.desk_scale {
        cfg.desk_scale = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<serde_json::Value> {
    let common = &cli.common;
    let exec = if common.sequential { Exec::Sequential } else { Exec::default() };
    let out = common.out.as_path();
    match &cli.command {
        Command::GenFixtures { n, strength, gap } => {
            let seed = common.seed.unwrap_or(42);
            let spec = FixtureSpec { samples: *n, strength: *strength, gap: *gap, seed };
            let manifest = gen_fixtures(out, &spec)?;
            Ok(json!({ "manifest": manifest, "samples": n }))
        }
        Command::Extract => {
            let cfg = config(common)?;
            let manifest =
                common.manifest.as_deref().ok_or_else(|| Error::Usage("extract requires --manifest".into()))?;
            commands::extract(manifest, out, &cfg, exec)
        }
        Command::Train { agent } => {
            let cfg = config(common)?;
            let id = match agent {
                AgentArg::Agent1 => AgentId::Agent1,
                AgentArg::Agent2 => AgentId::Agent2,
            };
            commands::train(id, out, &cfg, exec)
        }
        Command::Predict => {
            let cfg = config(common)?;
            let rows = commands::predict(out, &cfg, exec)?;
            Ok(json!({ "scored": rows.len(), "scores": out.join(commands::SCORES_FILE) }))
        }
        Command::Fuse => {
            let cfg = config(common)?;
            let outcome = commands::fuse(out, &cfg, exec)?;
            Ok(json!({ "folds": outcome.folds.len(), "mean": outcome.mean }))
        }
        Command::Evaluate => {
            config(common)?;
            let evals = commands::evaluate(out)?;
            Ok(json!({ "evaluations": evals.len(), "path": out.join(commands::EVALUATION_FILE) }))
        }
        Command::Report => {
            config(common)?;
            let path = commands::report(out)?;
            Ok(json!({ "report": path }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = Error::Usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
