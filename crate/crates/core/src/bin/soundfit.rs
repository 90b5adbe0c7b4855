use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use soundfit::pipeline::{run_match, Config, MatchOptions};

#[derive(Parser)]
#[command(name = "soundfit", version, about = "Evolve soundtracks for a video from a pool of audio clips")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze the media, evolve candidate soundtracks and write them out.
    Match {
        video: PathBuf,
        #[arg(required = true)]
        audio: Vec<PathBuf>,
        /// Flat `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of candidates to write.
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, default_value = "soundfit-out")]
        out: PathBuf,
        /// Only extract and cache features.
        #[arg(long)]
        features_only: bool,
        /// Fitness weights as `corr,snip,sil,temp`.
        #[arg(long)]
        weights: Option<String>,
        /// Music-cut threshold scale factor.
        #[arg(long)]
        scale: Option<f64>,
    },
}

fn parse_weights(text: &str, cfg: &mut Config) -> Result<()> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        bail!("--weights needs four comma-separated numbers, got `{text}`");
    }
    for (key, value) in ["w_corr", "w_snip", "w_sil", "w_temp"].iter().zip(parts) {
        cfg.set(key, value).map_err(anyhow::Error::msg)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let Command::Match { video, audio, config, seed, top, out, features_only, weights, scale } = cli.command;
    let mut cfg = match &config {
        Some(path) => Config::load(path).with_context(|| format!("reading config {}", path.display()))?,
        None => Config::default(),
    };
    if let Some(seed) = seed {
        cfg.ga.seed = seed;
    }
    if let Some(top) = top {
        cfg.top_k = top;
    }
    if let Some(w) = &weights {
        parse_weights(w, &mut cfg)?;
    }
    if let Some(scale) = scale {
        cfg.audio.scale_factor = scale;
    }
    let report = run_match(&MatchOptions { video, audio, out_dir: out.clone(), config: cfg, features_only })?;
    if features_only {
        for f in &report.feature_files {
            println!("{}", f.display());
        }
    } else {
        for (rank, (path, fitness)) in report.candidates.iter().enumerate() {
            println!("{}\t{fitness:.6}\t{}", rank + 1, path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
