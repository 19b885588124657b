//! `ergolab`: runs one experiment per config file and writes CSV, a JSON
//! summary and a plot script.

mod config;
mod experiments;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergolab::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Batch driver for ergolab experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Write a plot script for a JSON report.
    Plot { report: PathBuf },
    /// List experiments with their CSV columns.
    List,
}

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_ASSERTION: u8 = 3;
pub const EXIT_DOMAIN: u8 = 4;

/// A failed invocation: exit code plus a machine-readable diagnostic.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    key: Option<String>,
}

impl Failure {
    pub fn validation(message: String, key: Option<String>) -> Self {
        Self { code: EXIT_VALIDATION, kind: "validation", message, key }
    }

    pub fn missing(key: &str) -> Self {
        Self::validation(format!("missing key `{key}`"), Some(key.into()))
    }

    pub fn unreadable(message: String) -> Self {
        Self { code: EXIT_DOMAIN, kind: "unreadable", message, key: None }
    }

    /// Serde names the offending field in backticks; keep it as the key.
    pub fn from_serde(e: &serde_json::Error, prefix: &str) -> Self {
        let msg = e.to_string();
        let key = msg.split('`').nth(1).map(|k| format!("{prefix}{k}"));
        Self::validation(format!("{prefix}{msg}"), key)
    }

    pub fn core(e: Error) -> Self {
        let (code, kind) = match e {
            Error::Margin(_) => (EXIT_DOMAIN, "margin"),
            Error::Domain(_) | Error::IntegrationDomain(_) | Error::BoundaryUncertainty(_) | Error::Positivity(_) => {
                (EXIT_DOMAIN, "domain")
            }
            _ => (EXIT_VALIDATION, "validation"),
        };
        Self { code, kind, message: e.to_string(), key: None }
    }

    pub fn with_key(mut self, key: &str) -> Self {
        self.key.get_or_insert_with(|| key.into());
        self
    }

    fn diagnostic(&self) -> Value {
        json!({ "status": "error", "exit_code": self.code, "kind": self.kind, "key": self.key, "message": self.message })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::core(e)
    }
}

fn workers(cfg: &config::ExperimentConfig) -> Result<Option<usize>, Failure> {
    let bad = |key: &str| Failure::validation("worker count must be a positive integer".into(), Some(key.into()));
    if let Ok(v) = std::env::var("ERGOLAB_WORKERS") {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(bad("ERGOLAB_WORKERS")),
        };
    }
    match cfg.workers {
        Some(0) => Err(bad("workers")),
        w => Ok(w),
    }
}

fn run(path: &std::path::Path) -> Result<Value, Failure> {
    let cfg = config::load(path)?;
    let allowed = experiments::blocks(&cfg.experiment);
    let present = [
        ("seeds", cfg.seeds.is_some()),
        ("group", cfg.group.is_some()),
        ("density", cfg.density.is_some()),
        ("window", cfg.window.is_some()),
        ("levels", cfg.levels.is_some()),
        ("quadrature", cfg.quadrature.is_some()),
        ("params", cfg.params.is_some()),
    ];
    if let Some((key, _)) = present.iter().find(|(k, set)| *set && !allowed.contains(k)) {
        return Err(Failure::validation(
            format!("key `{key}` is not used by experiment `{}`", cfg.experiment),
            Some((*key).into()),
        ));
    }
    if let Some(n) = workers(&cfg)? {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let report = experiments::run(&cfg)?;
    let summary = report.write(&cfg.output)?;
    if !report.passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Err(Failure {
            code: EXIT_ASSERTION,
            kind: "assertion",
            message: format!("failed checks: {}", failed.join(", ")),
            key: None,
        });
    }
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { config } => run(&config).map(|s| json!({ "status": "pass", "experiment": s["experiment"], "checks": s["checks"] })),
        Cmd::Plot { report } => plot::emit(&report).map(|p| json!({ "status": "ok", "script": p })),
        Cmd::List => {
            for (name, cols, about) in experiments::CATALOG {
                println!("{name}\n    {about}\n    csv: {cols}");
            }
            return ExitCode::SUCCESS;
        }
    };
    match result {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            println!("{}", f.diagnostic());
            ExitCode::from(f.code)
        }
    }
}
