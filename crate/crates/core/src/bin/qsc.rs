use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use qsc_core::cli::{run, Cli, RunConfig, Settings, SEED_ENV};

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsc: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            Settings::from_kv(&text).with_context(|| format!("in config {}", path.display()))?
        }
        None => Settings::default(),
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let config = RunConfig::resolve(cli.settings.over(file), env_seed.as_deref())?;
    let csv = run(&config)?;
    match &config.out {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}
