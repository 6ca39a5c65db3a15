mod commands;
mod error;
mod output;

use clap::{Parser, Subcommand};
use error::CliError;
use output::{config_hash, TableWriter};
use serde::Serialize;
use sl2cont::config::{parse_config, Command, SweepConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Batch numerics for continued spherical vectors of SL(2,R).
#[derive(Parser)]
#[command(name = "sl2cont", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// JSON configuration; subcommand defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Norm growth of the continued vector along the epsilon path.
    NormSweep,
    /// Invariant-norm bound for the continued vector.
    InvariantBound,
    /// Dyadic certificates for homogeneous test families.
    Dyadic,
    /// Q+ membership and factorization of random point pairs.
    Geometry,
    /// Direct norms against the spherical function.
    SphericalCheck,
    /// Partial spectral sums against the propagated bound.
    Propagate,
    /// Horocycle diameter times fiber weight over the Siegel set.
    CuspScan,
    /// Every acceptance check.
    Selftest,
}

impl Sub {
    fn command(self) -> Command {
        match self {
            Sub::NormSweep => Command::NormSweep,
            Sub::InvariantBound => Command::InvariantBound,
            Sub::Dyadic => Command::Dyadic,
            Sub::Geometry => Command::Geometry,
            Sub::SphericalCheck => Command::SphericalCheck,
            Sub::Propagate => Command::Propagate,
            Sub::CuspScan => Command::CuspScan,
            Sub::Selftest => Command::Selftest,
        }
    }
}

#[derive(Serialize)]
struct FailureReport<'a> {
    command: &'a str,
    exit_code: u8,
    kind: &'a str,
    config_hash: Option<&'a str>,
    failures: &'a [String],
    warnings: &'a [String],
}

fn resolve(cli: &Cli) -> Result<SweepConfig, CliError> {
    let want = cli.command.command();
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => SweepConfig::defaults(want),
    };
    if cfg.command != want {
        return Err(CliError::Config(format!("config is for {}, not {}", cfg.command.name(), want.name())));
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn report(dir: Option<&Path>, r: &FailureReport) {
    let text = serde_json::to_string_pretty(r).expect("report serializes");
    eprintln!("{text}");
    if let Some(d) = dir {
        if std::fs::create_dir_all(d).is_ok() {
            let _ = std::fs::write(d.join("failures.json"), text + "\n");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.command().name();
    if let Some(j) = cli.jobs {
        if j == 0 {
            report(cli.out.as_deref(), &FailureReport {
                command: name,
                exit_code: 2,
                kind: "config",
                config_hash: None,
                failures: &["--jobs must be positive".to_string()],
                warnings: &[],
            });
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().expect("thread pool starts once");
    }

    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            report(cli.out.as_deref(), &FailureReport {
                command: name,
                exit_code: code,
                kind: e.kind(),
                config_hash: None,
                failures: &[e.to_string()],
                warnings: &[],
            });
            return ExitCode::from(code);
        }
    };
    let dir = cli.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    // The output location does not change the numbers, so it stays out of the hash.
    let hash = config_hash(&SweepConfig { output: None, ..cfg.clone() });
    let mut out = TableWriter::new(&dir, hash.clone());

    match commands::run(&cfg, &mut out) {
        Ok(o) => {
            for line in &o.summary {
                println!("{line}");
            }
            for w in &o.warnings {
                eprintln!("warning: {w}");
            }
            for p in &out.written {
                println!("wrote {}", p.display());
            }
            let mut failures = o.failures.clone();
            if cli.strict {
                failures.extend(o.warnings.iter().map(|w| format!("warning: {w}")));
            }
            if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                report(Some(&dir), &FailureReport {
                    command: name,
                    exit_code: 1,
                    kind: "assertion",
                    config_hash: Some(&hash),
                    failures: &failures,
                    warnings: &o.warnings,
                });
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let code = e.exit_code();
            report(Some(&dir), &FailureReport {
                command: name,
                exit_code: code,
                kind: e.kind(),
                config_hash: Some(&hash),
                failures: &[e.to_string()],
                warnings: &[],
            });
            ExitCode::from(code)
        }
    }
}
