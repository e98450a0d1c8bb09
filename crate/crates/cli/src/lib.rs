//! `fqc`: runs constructions, generates sets, builds and verifies measures and
//! writes JSON reports and CSV plot data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "fqc", version, about = "Fourier quasicrystal construction and verification")]
pub struct Cli {
    /// JSON configuration; every field is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Number of construction stages.
    #[arg(long, global = true, default_value_t = 3)]
    pub steps: usize,
    /// Overrides the set, measure, decomposition and triple windows.
    #[arg(long, global = true)]
    pub window: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `KEY=VAL`, repeatable. Keys: node_residual, vanish, normalization,
    /// truncation, seminorm_step, cond_cap, atom, support, psf, ap_tau.
    #[arg(long, global = true, value_name = "KEY=VAL")]
    pub tolerance: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Run the construction and write `state.json`.
    Construct,
    /// Write the configured sets as CSV and the staircase boundary as JSON.
    Sets,
    /// Write `mu.csv` and `mu_hat.csv` for the constructed function.
    Measure,
    #[command(subcommand)]
    Verify(VerifyKind),
    #[command(subcommand)]
    Probe(ProbeKind),
    #[command(subcommand)]
    Ap(ApKind),
    /// Split `μ` into a model-set part and a remainder for each `h_N`.
    Decompose,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum VerifyKind {
    /// Summation formula against Gaussian test functions.
    Psf,
    /// Atoms of `μ`, `μ̂` lie on `Λ`, `S`; `φ̂` vanishes on `Q` and `φ` on `Z_N`.
    Support,
    /// Translation-bounded norms at the window and twice the window.
    Tb,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum ProbeKind {
    /// Gram conditioning on a model set below and above the density threshold.
    Interpolation,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum ApKind {
    Count,
    Saturate,
    Cover,
    Triples,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Config { field: Option<String>, message: String },
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }

    fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
            message: String,
        }
        let (kind, field) = match self {
            CliError::Config { field, .. } => ("config", field.as_deref()),
            CliError::Io(_) => ("io", None),
            CliError::Compute(_) => ("computation", None),
        };
        let body = serde_json::json!({ "error": Body { kind, field, message: self.to_string() } });
        body.to_string()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(w) = cli.window {
        if !(w > 0.0) || !w.is_finite() {
            return Err(CliError::Config { field: Some("--window".into()), message: format!("window must be positive, got {w}") });
        }
        cfg.sets.window = w;
        cfg.measures.mu_window = w;
        cfg.measures.mu_hat_window = w;
        cfg.decompose.window = w;
        cfg.ap.triples_window = w;
    }
    for kv in &cli.tolerance {
        cfg.set_tolerance(kv)?;
    }
    cfg.construction.validate().map_err(|e| CliError::Config { field: Some("construction".into()), message: e.to_string() })?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = effective_config(cli)?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Config { field: Some("--out".into()), message: format!("{}: {e}", cli.out.display()) })?;
    let ctx = commands::Context { cfg, out: cli.out.clone(), steps: cli.steps, seed: cli.seed };
    commands::dispatch(&ctx, cli.command)
}

/// Parses the process arguments, runs the command and maps the outcome to an
/// exit code.
pub fn run_main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                e.exit();
            }
            let err = CliError::Config { field: None, message: e.to_string().trim().to_string() };
            eprintln!("{}", err.to_json());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
