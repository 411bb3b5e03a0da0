use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ctxdebias::config::RunConfig;
use ctxdebias::context::{Delimiter, Position};
use ctxdebias::runner::{self, RunError};

#[derive(Parser)]
#[command(name = "ctxdebias", version, about = "Context-injection gender de-biasing for machine translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// hash | period | colon | semicolon
    #[arg(long, global = true)]
    delimiter: Option<Delimiter>,
    /// prepend | append
    #[arg(long, global = true)]
    position: Option<Position>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured strategy and write reports.
    Run {
        #[command(flatten)]
        o: Overrides,
    },
    /// De-bias a single sentence with greedy search.
    Translate {
        sentence: String,
        /// Occupation to target; detected from the lexicon when omitted.
        #[arg(long)]
        occupation: Option<String>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Inspect or empty the translation cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
        #[command(flatten)]
        o: Overrides,
    },
    /// Template bank utilities.
    Bank {
        #[command(subcommand)]
        action: BankAction,
        #[command(flatten)]
        o: Overrides,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    Stats,
    Clear,
}

#[derive(Subcommand)]
enum BankAction {
    /// Parse a bank file and print template features.
    Validate {
        path: PathBuf,
        #[arg(long)]
        placeholders: Option<PathBuf>,
    },
    /// Drop relevant templates whose standalone translation loses the
    /// intended gender; prints the surviving bank as TSV.
    Prune,
}

fn load_config(o: &Overrides) -> Result<RunConfig, RunError> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::from_toml("", Path::new("."))?,
    };
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(d) = o.delimiter {
        cfg.delimiter = d;
    }
    if let Some(p) = o.position {
        cfg.position = p;
    }
    if let Some(w) = o.workers {
        cfg.workers = w;
    }
    if let Some(out) = &o.out {
        cfg.out_dir = std::env::current_dir().map(|d| d.join(out)).unwrap_or_else(|_| out.clone());
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Run { o } => {
            let cfg = load_config(&o)?;
            let summary = runner::cmd_run(&cfg)?;
            print!("{}", summary.report.to_text());
            for f in &summary.files {
                log::info!("wrote {}", f.display());
            }
            if summary.exit_code != 0 {
                eprintln!(
                    "error rate {:.4} exceeds threshold {:.4}",
                    summary.report.error_rate, cfg.error_threshold
                );
            }
            Ok(summary.exit_code)
        }
        Command::Translate { sentence, occupation, o } => {
            let cfg = load_config(&o)?;
            let outcome = runner::cmd_translate(&cfg, &sentence, occupation.as_deref())?;
            println!("{}", runner::describe_outcome(&outcome));
            Ok(0)
        }
        Command::Cache { action, o } => {
            let cfg = load_config(&o)?;
            let cache = runner::cache_for(&cfg);
            let msg = match action {
                CacheAction::Stats => runner::cmd_cache_stats(&cache)?,
                CacheAction::Clear => runner::cmd_cache_clear(&cache)?,
            };
            println!("{msg}");
            Ok(0)
        }
        Command::Bank { action, o } => {
            match action {
                BankAction::Validate { path, placeholders } => {
                    for line in runner::cmd_bank_validate(&path, placeholders.as_deref())? {
                        println!("{line}");
                    }
                }
                BankAction::Prune => {
                    let cfg = load_config(&o)?;
                    print!("{}", runner::cmd_bank_prune(&cfg)?.to_tsv());
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
