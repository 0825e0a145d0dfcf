//! Thin command-line front end; every behavior lives in the library so
//! the binary stays a argument-parsing shell around [`crate::sweep`].
//!
//! `run` executes one cell (it is literally a 1x1 sweep, so a cell from a
//! full sweep can be reproduced bit-for-bit by pinning the same workload,
//! split and base seed). `sweep` executes the whole matrix. Both write the
//! same artifact layout under --out.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Config, GatewayMode, Split};
use crate::export::write_sweep_artifacts;
use crate::replicator::load_manifest;
use crate::sweep::{sweep, SweepResult};
use crate::workload::WorkloadKind;

#[derive(Parser)]
#[command(
    name = "edgesim",
    version,
    about = "Deterministic simulator for latency-driven edge-to-cloud offloading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single run and write its artifacts.
    Run {
        /// Flat key=value config file; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides run.seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Traffic split for this run: a percentage in [0, 100] or 'auto'.
        #[arg(long)]
        split: Option<Split>,
        /// Overrides workload.kind from the config.
        #[arg(long)]
        workload: Option<WorkloadKind>,
        /// Output directory for summary.csv, summary.json and runs/.
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute the full workload x split matrix from the config.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, String> {
    match path {
        Some(p) => Config::from_file(p).map_err(|e| format!("config {}: {e}", p.display())),
        None => Ok(Config::default()),
    }
}

/// Fails fast on anything that would otherwise abort mid-experiment:
/// unreadable manifest, unwritable output directory.
fn preflight(cfg: &Config, out: &Path) -> Result<(), String> {
    if let Some(p) = &cfg.manifest_path {
        load_manifest(p).map_err(|e| format!("manifest {}: {e}", p.display()))?;
    }
    std::fs::create_dir_all(out)
        .map_err(|e| format!("cannot create output dir {}: {e}", out.display()))?;
    let probe = out.join(".writable");
    std::fs::write(&probe, b"")
        .map_err(|e| format!("output dir {} is not writable: {e}", out.display()))?;
    let _ = std::fs::remove_file(&probe);
    Ok(())
}

fn render_table(result: &SweepResult) -> String {
    let mut out = format!(
        "{:<10}{:<8}{:>12}{:>9}{:>12}{:>12}\n",
        "workload", "split", "successful", "failed", "mean_s", "p95_s"
    );
    for cell in &result.cells {
        out.push_str(&format!(
            "{:<10}{:<8}{:>12}{:>9}{:>12.6}{:>12.6}\n",
            cell.workload.to_string(),
            cell.split.to_string(),
            cell.result.successful,
            cell.result.failed,
            cell.result.mean_latency_s,
            cell.result.p95_latency_s,
        ));
    }
    out
}

fn finish(cfg: &Config, out: &Path) -> Result<(), String> {
    preflight(cfg, out)?;
    let result = sweep(cfg);
    write_sweep_artifacts(out, &result)
        .map_err(|e| format!("writing artifacts to {}: {e}", out.display()))?;
    print!("{}", render_table(&result));
    println!(
        "{} cell(s) in {:.2}s -> {}",
        result.cells.len(),
        result.wall_time_s,
        out.display()
    );
    Ok(())
}

fn execute(command: Command) -> Result<(), String> {
    match command {
        Command::Run {
            config,
            seed,
            split,
            workload,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workload {
                cfg.workload = w;
            }
            let split = split.unwrap_or(match cfg.gateway_mode {
                GatewayMode::Auto => Split::Auto,
                GatewayMode::Fixed => Split::Fixed(cfg.fixed_pct),
            });
            cfg.sweep_workloads = vec![cfg.workload];
            cfg.sweep_splits = vec![split];
            cfg.sweep_repetitions = 1;
            finish(&cfg, &out)
        }
        Command::Sweep { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            finish(&cfg, &out)
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_accepts_split_and_workload_overrides() {
        let cli = Cli::try_parse_from([
            "edgesim", "run", "--split", "auto", "--workload", "io", "--out", "/tmp/x",
        ])
        .unwrap();
        match cli.command {
            Command::Run {
                split, workload, ..
            } => {
                assert_eq!(split, Some(Split::Auto));
                assert_eq!(workload, Some(WorkloadKind::Io));
            }
            _ => panic!("expected run"),
        }
    }

    #[test]
    fn out_is_required() {
        assert!(Cli::try_parse_from(["edgesim", "run"]).is_err());
        assert!(Cli::try_parse_from(["edgesim", "sweep"]).is_err());
    }

    #[test]
    fn bad_split_is_rejected_at_parse_time() {
        assert!(Cli::try_parse_from(["edgesim", "run", "--split", "150", "--out", "/tmp/x"]).is_err());
        assert!(Cli::try_parse_from(["edgesim", "run", "--split", "fast", "--out", "/tmp/x"]).is_err());
    }

    #[test]
    fn missing_config_file_is_a_clean_error() {
        let err = load_config(&Some(PathBuf::from("/definitely/missing.conf"))).unwrap_err();
        assert!(err.contains("missing.conf"));
    }
}
