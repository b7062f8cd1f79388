//! Scenario runner: reads a JSON scenario, runs it and writes CSV or JSON.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure. Failures
//! are also described by one JSON object on standard error.

pub mod config;
pub mod emit;
pub mod scenarios;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use config::{Format, Issue, Overrides, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "iontrap", version, about = "Run a trapped-ion simulation scenario")]
pub struct Args {
    /// Scenario config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output path, overriding the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format, overriding the config.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Validate the config and print the report without running.
    #[arg(long)]
    pub check: bool,
    /// Fock cutoff, overriding the config.
    #[arg(long, allow_negative_numbers = true)]
    pub fock_cutoff: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureKind {
    Validation,
    Numerical,
}

/// A failed run, as reported on standard error.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
    pub issues: Vec<Issue>,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            kind: FailureKind::Validation,
            message: message.into(),
            issues: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Validation => EXIT_INVALID,
            FailureKind::Numerical => EXIT_NUMERICAL,
        }
    }

    pub fn to_json(&self) -> String {
        let v = json!({
            "error": {
                "kind": self.kind,
                "exit_code": self.exit_code(),
                "message": self.message,
                "issues": self.issues,
            }
        });
        v.to_string()
    }
}

impl From<iontrap_core::Error> for Failure {
    fn from(e: iontrap_core::Error) -> Self {
        let kind = if e.is_numerical() { FailureKind::Numerical } else { FailureKind::Validation };
        Failure {
            kind,
            message: e.to_string(),
            issues: Vec::new(),
        }
    }
}

impl Args {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            format: self.format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            }),
            fock_cutoff: self.fock_cutoff,
        }
    }
}

/// Reads the config file and applies command-line overrides.
pub fn load_config(args: &Args) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::validation(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| Failure::validation(format!("config is not valid JSON: {e}")))?;
    args.overrides().apply(&mut value);
    Ok(value)
}

fn parse(value: &Value) -> Result<ScenarioConfig, Failure> {
    ScenarioConfig::from_value(value).map_err(|issues| Failure {
        kind: FailureKind::Validation,
        message: format!("{} problem(s) in config", issues.len()),
        issues,
    })
}

/// Runs a validated config and writes its output file.
pub fn run_config(cfg: &ScenarioConfig) -> Result<(), Failure> {
    let output = scenarios::execute(cfg)?;
    let text = output.render(cfg.format);
    emit::write_atomic(&cfg.path, &text)
        .map_err(|e| Failure::validation(format!("cannot write {}: {e}", cfg.path.display())))?;
    log::info!("{} → {}", cfg.scenario, cfg.path.display());
    Ok(())
}

/// The whole command: returns the process exit code.
pub fn run(args: &Args, stdout: &mut impl Write, stderr: &mut impl Write) -> i32 {
    let value = match load_config(args) {
        Ok(v) => v,
        Err(f) => return report(&f, stderr),
    };
    if args.check {
        let issues = config::validate(&value);
        let doc = json!({"valid": issues.is_empty(), "issues": issues});
        let _ = writeln!(stdout, "{doc}");
        return if issues.is_empty() {
            EXIT_OK
        } else {
            report(
                &Failure {
                    kind: FailureKind::Validation,
                    message: format!("{} problem(s) in config", issues.len()),
                    issues,
                },
                stderr,
            )
        };
    }
    let result = parse(&value).and_then(|cfg| run_config(&cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => report(&f, stderr),
    }
}

fn report(f: &Failure, stderr: &mut impl Write) -> i32 {
    let _ = writeln!(stderr, "{}", f.to_json());
    f.exit_code()
}
