//! Run manifests: the effective configuration, the command line and the list
//! of files a run wrote. `replay` re-executes a run from its manifest alone.

use std::path::{Path, PathBuf};

use clap::Parser;
use fingermimic::config::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::{commands, config_err, Cli, CliError, CliResult};

pub const FORMAT: &str = "fingermimic-manifest";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub tool_version: String,
    pub command: String,
    /// Command line without the program name, `--config` and `--out`.
    pub args: Vec<String>,
    pub seed: u64,
    pub scalar: String,
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
}

/// Drops the program name and the `--config` / `--out` options, which the
/// manifest replaces.
pub fn recorded_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" || a == "--out" {
            it.next();
        } else if !(a.starts_with("--config=") || a.starts_with("--out=")) {
            out.push(a.clone());
        }
    }
    out
}

pub fn path_for(dir: &Path, command: &str) -> PathBuf {
    dir.join(format!("{command}.manifest.json"))
}

pub fn write(dir: &Path, command: &str, args: Vec<String>, config: &ExperimentConfig, outputs: Vec<String>) -> CliResult<PathBuf> {
    let m = Manifest {
        format: FORMAT.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        args,
        seed: config.seed,
        scalar: format!("{:?}", config.precision).to_lowercase(),
        config: config.clone(),
        outputs,
    };
    let path = path_for(dir, command);
    let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    commands::write_file(&path, &text)?;
    Ok(path)
}

pub fn replay(path: &Path, out: Option<&Path>) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    if m.format != FORMAT {
        return Err(config_err(format!("{} is not a run manifest", path.display())));
    }
    m.config.validate().map_err(config_err)?;
    let cli = Cli::try_parse_from(std::iter::once("fingermimic".to_string()).chain(m.args.iter().cloned()))
        .map_err(|e| config_err(format!("manifest command line: {e}")))?;
    if matches!(cli.command, crate::Command::Replay { .. }) {
        return Err(config_err("a manifest cannot replay another manifest"));
    }
    let out = match out {
        Some(o) => o.to_path_buf(),
        None => path.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    log::info!("replaying `{}` into {}", m.command, out.display());
    commands::execute(&cli, m.config, &out, m.args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_config_and_out() {
        let argv: Vec<String> = ["fm", "--config", "a.toml", "train", "--out=x", "--seed", "3", "--out", "y"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(recorded_args(&argv), vec!["train", "--seed", "3"]);
    }
}
