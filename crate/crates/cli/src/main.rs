//! `fhn-zh`: equilibria, zero-Hopf classification, orbit prediction,
//! shooting verification and parameter sweeps for the FitzHugh–Nagumo system.
//!
//! Exit codes: 0 success, 2 usage, 3 domain, 4 numerical.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;
mod sweep;

use clap::{Args, Parser, Subcommand};
use commands::{FamilyArgs, ParamArgs, VerifyArgs};
use config::{FileConfig, Overrides, Settings};
use fhn_zerohopf::error::Error;
use fhn_zerohopf::reduction::{Condition, Theorem};
use report::{ErrorBlock, Report, Timings, SCHEMA_VERSION, TOOL};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use sweep::Grid;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain { message: String, conditions: Vec<Condition> },
    Numerical(String),
}

impl Failure {
    pub fn from_core(e: Error, conditions: Vec<Condition>) -> Self {
        match e {
            Error::Domain(_) | Error::DegenerateFamily(_) | Error::FirstOrderNotZero { .. } => {
                Failure::Domain { message: e.to_string(), conditions }
            }
            other => Failure::Numerical(other.to_string()),
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Domain { message: m, .. } => m.clone(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Domain { .. } => "domain",
            Failure::Numerical(_) => "numerical",
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain { .. } => 3,
            Failure::Numerical(_) => 4,
        }
    }

    fn block(&self) -> ErrorBlock {
        let conditions = match self {
            Failure::Domain { conditions, .. } => conditions.clone(),
            _ => Vec::new(),
        };
        ErrorBlock { kind: self.kind(), message: self.message(), conditions }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fhn-zh", version, about = "Zero-Hopf periodic orbits of the FitzHugh–Nagumo system")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Equality tolerance for `classify`, quadrature tolerance elsewhere.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Initial quadrature nodes (power of two).
    #[arg(long, global = true)]
    quad_nodes: Option<usize>,

    /// JSON report path; for `sweep`, the CSV path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// TOML config file (default: $FHN_ZH_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Leave the timings block out of the report.
    #[arg(long, global = true)]
    no_timings: bool,
}

#[derive(Debug, Clone, Default, Args)]
struct IntegratorArgs {
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    max_time: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List equilibria with their linear type.
    Equilibria(ParamArgs),
    /// Report which zero-Hopf families the parameters lie on.
    Classify(ParamArgs),
    /// Predict periodic orbits from one unfolding by averaging.
    Predict {
        #[arg(long, value_parser = parse_theorem)]
        theorem: Theorem,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Refine predictions (or one explicit guess) by shooting.
    Verify {
        #[command(flatten)]
        target: VerifyArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
    },
    /// Predict over a parameter grid and write one CSV row per cell.
    Sweep {
        #[arg(long, value_parser = parse_theorem)]
        theorem: Theorem,
        #[command(flatten)]
        family: FamilyArgs,
        /// `name=lo:hi:count`, repeatable; the first grid varies slowest.
        #[arg(long = "grid", required = true)]
        grids: Vec<Grid>,
    },
}

fn parse_theorem(s: &str) -> Result<Theorem, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Serialize)]
struct SweepInputs<'a> {
    theorem: Theorem,
    family: &'a FamilyArgs,
    grids: &'a [Grid],
}

struct Ctx {
    settings: Settings,
    start: Instant,
    timings: bool,
    out: Option<PathBuf>,
}

impl Ctx {
    fn emit<I: Serialize, R: Serialize>(&self, command: &'static str, inputs: I, res: Result<R, Failure>) -> ExitCode {
        let (results, error, code) = match res {
            Ok(r) => (Some(r), None, 0),
            Err(f) => {
                eprintln!("fhn-zh {command}: {}", f.message());
                (None, Some(f.block()), f.code())
            }
        };
        let report = Report {
            schema_version: SCHEMA_VERSION,
            tool: TOOL,
            command,
            inputs,
            settings: self.settings.clone(),
            results,
            error,
            timings: self.timings.then(|| Timings { total_seconds: self.start.elapsed().as_secs_f64() }),
        };
        let text = report::to_json(&report);
        match &self.out {
            Some(p) => {
                if let Err(e) = std::fs::write(p, text) {
                    eprintln!("fhn-zh: cannot write {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            }
            None => print!("{text}"),
        }
        ExitCode::from(code)
    }
}

fn settings_for(cli: &Cli, integrator: &IntegratorArgs) -> Result<Settings, Failure> {
    let (file, path) = FileConfig::resolve(cli.config.as_deref())?;
    let flags = Overrides {
        tol: cli.tol,
        quad_nodes: cli.quad_nodes,
        jobs: cli.jobs,
        rel_tol: integrator.rel_tol,
        abs_tol: integrator.abs_tol,
        max_step: integrator.max_step,
        max_time: integrator.max_time,
    };
    Settings::resolve(&flags, &file, path, matches!(cli.command, Command::Classify(_)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let none = IntegratorArgs::default();
    let integrator = match &cli.command {
        Command::Verify { integrator, .. } => integrator,
        _ => &none,
    };
    let settings = match settings_for(&cli, integrator) {
        Ok(s) => s,
        Err(f) => {
            eprintln!("fhn-zh: {}", f.message());
            return ExitCode::from(f.code());
        }
    };
    let sweeping = matches!(cli.command, Command::Sweep { .. });
    let ctx = Ctx { settings, start, timings: !cli.no_timings, out: if sweeping { None } else { cli.out.clone() } };

    match &cli.command {
        Command::Equilibria(p) => ctx.emit("equilibria", p, Ok(commands::cmd_equilibria(p))),
        Command::Classify(p) => ctx.emit("classify", p, Ok(commands::cmd_classify(p, &ctx.settings))),
        Command::Predict { theorem, family } => {
            let res = family.family(*theorem);
            match res {
                Ok(fam) => {
                    let inputs = commands::PredictInputs { theorem: *theorem, family: fam };
                    ctx.emit("predict", inputs, commands::cmd_predict(&fam, &ctx.settings))
                }
                Err(f) => ctx.emit::<_, ()>("predict", family, Err(f)),
            }
        }
        Command::Verify { target, .. } => ctx.emit("verify", target, commands::cmd_verify(target, &ctx.settings)),
        Command::Sweep { theorem, family, grids } => {
            let inputs = SweepInputs { theorem: *theorem, family, grids };
            let res = match &cli.out {
                Some(path) => sweep::cmd_sweep(*theorem, family, grids, Path::new(path), &ctx.settings),
                None => Err(Failure::Usage("sweep needs --out FILE for the CSV".into())),
            };
            ctx.emit("sweep", inputs, res)
        }
    }
}
