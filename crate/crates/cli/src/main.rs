mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, EmbedMethod, CONFIG_ENV};

#[derive(Parser)]
#[command(name = "psyprofile", version, about = "Trait profiling pipeline for social-media users")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct Global {
    /// TOML config; the bundled default is used when neither this nor the env var is set.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Overrides the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `paths.out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic corpus (users.jsonl).
    Synth {
        /// "default", "strong" or a spec JSON path; overrides `synth.spec`.
        #[arg(long)]
        spec: Option<String>,
    },
    /// Load users, score labels and drop spam and ghost accounts (corpus.jsonl).
    Ingest {
        /// Users JSONL; defaults to `<out>/users.jsonl`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Train the emotion classifier (emotion_model.json).
    TrainEmotion {
        /// Labeled emotion corpus; defaults to `paths.emotion_corpus`, then the bundled sample.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Tokenize, tag and score emotions per user (prepared.jsonl).
    Featurize {
        /// Users JSONL; defaults to `<out>/corpus.jsonl`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Trained emotion classifier; trained in process when absent.
        #[arg(long)]
        emotion_model: Option<PathBuf>,
    },
    /// Fit features and the chain ensemble on every labeled user (model.json).
    Train {
        /// Prepared users; defaults to `<out>/prepared.jsonl`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Cross-validate holistic, independent and baseline models.
    Evaluate {
        /// Prepared users; defaults to `<out>/prepared.jsonl`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Only fit the mean predictor.
        #[arg(long)]
        baseline_only: bool,
    },
    /// Score users with a trained model (predictions.csv).
    Predict {
        /// Prepared users; defaults to `<out>/prepared.jsonl`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Trained model; defaults to `<out>/model.json`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Trait statistics, trait and feature correlations, optional group comparison.
    Analyze {
        /// Prepared users; defaults to `<out>/prepared.jsonl`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// CSV `user,group` naming exactly two groups.
        #[arg(long)]
        groups: Option<PathBuf>,
    },
    /// Embed trait profiles in the plane (embedding.csv).
    Embed {
        /// Prepared users; defaults to `<out>/prepared.jsonl`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// CSV `user,group`; labels the embedded points.
        #[arg(long)]
        groups: Option<PathBuf>,
        /// Overrides `analysis.method`.
        #[arg(long, value_parser = parse_method)]
        method: Option<EmbedMethod>,
    },
    /// Holdout RMSE for growing training subsets (learning_curve.csv).
    LearningCurve {
        /// Prepared users; defaults to `<out>/prepared.jsonl`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<EmbedMethod, String> {
    match s {
        "tsne" => Ok(EmbedMethod::Tsne),
        "pca" => Ok(EmbedMethod::Pca),
        _ => Err(format!("unknown method `{s}`, expected tsne or pca")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            eprintln!("error[config]: {}", e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: "));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let level = if cli.global.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).format_target(false).init();

    let run = || -> error::Result<()> {
        let mut config = Config::load(cli.global.config.as_deref())?;
        if let Some(seed) = cli.global.seed {
            config.seed = seed;
        }
        if let Some(out) = &cli.global.out {
            config.paths.out_dir = out.clone();
        }
        config.check_paths()?;
        commands::run(&cli.command, &config, cli.global.seed)
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.class.exit_code() as u8)
        }
    }
}
