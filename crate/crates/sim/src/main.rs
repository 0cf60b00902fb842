use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use csrx::config::{SolverKind, KEYS_HELP};
use csrx::{harness, pattern_file, report, Config, Rayon};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "csrx",
    version,
    about = "Compressed-sensing receiver simulator",
    after_help = KEYS_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a pattern (or load one) and sweep the desired-tone frequency.
    #[command(after_help = KEYS_HELP)]
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep CSV destination.
        #[arg(long)]
        out: PathBuf,
        /// Override [sweep] trials_per_point.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Search for a sampling pattern and write it in `pattern v1` format.
    #[command(after_help = KEYS_HELP)]
    Pates {
        #[command(flatten)]
        common: Common,
        /// Pattern file destination.
        #[arg(long)]
        out: PathBuf,
        /// Leaderboard CSV destination.
        #[arg(long)]
        leaderboard: Option<PathBuf>,
        /// Override [design] trials_per_candidate.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Power spectral density of the configured two-tone scenario.
    #[command(after_help = KEYS_HELP)]
    Psd {
        #[command(flatten)]
        common: Common,
        /// PSD CSV destination.
        #[arg(long)]
        out: PathBuf,
    },
    /// Read a pattern file, write it back, and check nothing changed.
    PatternRoundtrip {
        /// Pattern file to read.
        input: PathBuf,
        /// Where to write the re-serialized pattern.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file (keys listed below).
    #[arg(long)]
    config: PathBuf,
    /// Override [sweep] seed; every random draw derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Override [solver] kind.
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
}

impl Common {
    fn load(&self) -> Result<Config> {
        let mut config = Config::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.sweep.seed = seed;
        }
        if let Some(kind) = self.solver {
            config.solver.kind = kind;
        }
        Ok(config)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep {
            common,
            out,
            trials,
        } => {
            let mut config = common.load()?;
            if let Some(t) = trials {
                config.sweep.trials_per_point = t;
            }
            let run = harness::run_sweep(&config, &Rayon)?;
            report::write_sweep(create(&out)?, &run.result)?;
            let summary = json!({
                "out": out,
                "keep_count": run.pattern.len(),
                "policy": run.policy.mode,
                "designed": run.design.is_some(),
                "points": run.result.rows.len(),
            });
            println!("{summary}");
        }
        Command::Pates {
            common,
            out,
            leaderboard,
            trials,
        } => {
            let mut config = common.load()?;
            if let Some(t) = trials {
                config.design.trials_per_candidate = t;
            }
            let design = harness::design(&config, config.sweep.seed, &Rayon)?;
            let sel = &design.selection;
            pattern_file::write(&out, &sel.pattern)?;
            if let Some(path) = &leaderboard {
                report::write_leaderboard(create(path)?, &sel.leaderboard)?;
            }
            let summary = json!({
                "out": out,
                "candidate_id": sel.score.candidate_id,
                "keep_count": sel.pattern.len(),
                "policy": sel.policy.mode,
                "design_success_rate": sel.score.success_rate,
                "fresh_trials": design.fresh.trials,
                "fresh_success_rate": design.fresh.success_rate,
            });
            println!("{summary}");
        }
        Command::Psd { common, out } => {
            let config = common.load()?;
            let rows = harness::run_psd_figure(
                &config.psd_spec(),
                &config.grid()?,
                config.psd.segment_len,
                config.sweep.seed,
            )?;
            report::write_psd(create(&out)?, &rows)?;
        }
        Command::PatternRoundtrip { input, out } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let pattern = pattern_file::parse(&text)
                .with_context(|| format!("pattern file {}", input.display()))?;
            let written = pattern_file::to_string(&pattern);
            if pattern_file::parse(&written)? != pattern {
                bail!("pattern changed after write and read");
            }
            if let Some(path) = out {
                pattern_file::write(&path, &pattern)?;
            }
            println!(
                "{}",
                json!({ "kept": pattern.len(), "canonical": written == text })
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("csrx: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
