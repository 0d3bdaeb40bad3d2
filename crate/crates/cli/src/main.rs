//! `bellsep` — measurement-dependent local models and Bell separability from
//! the command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 value-check failure.

mod commands;
mod output;

use std::path::PathBuf;

use bellsep_core::error::{Error, Result};
use bellsep_core::quad::DEFAULT_QUADRATURE_ORDER;
use clap::{Parser, Subcommand};
use serde_json::Value;

use output::OutputFormat;

#[derive(Parser)]
#[command(
    name = "bellsep",
    version,
    about = "Local hidden-variable models of quantum correlations: \
             measurement-dependence cost and Bell separability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master random seed (Monte Carlo streams and random directions).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo samples (per estimate; per correlator pair for CHSH).
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Gauss-Legendre order of the sphere quadrature.
    #[arg(long, global = true)]
    quadrature_order: Option<usize>,

    /// Report format.
    #[arg(long, global = true, value_enum)]
    output: Option<OutputFormat>,

    /// Check computed values against their known targets; exit 2 on failure.
    #[arg(long, global = true)]
    check: bool,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// JSON file with defaults for the flags above (explicit flags win).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify that a singlet model reproduces p(a,b|x,y) = (1 − ab·x·y)/4.
    SingletCheck {
        /// brans | degorre | hall | all
        #[arg(long, default_value = "all")]
        model: String,
        /// Number of random measurement-direction pairs.
        #[arg(long, default_value_t = 50)]
        pairs: usize,
    },
    /// Measurement-dependence capacity report (H_max, inf H(λ|x,y), bound).
    CmdReport {
        /// brans | degorre | hall
        #[arg(long, conflicts_with = "model_file")]
        model: Option<String>,
        /// Finite-model JSON file (λ labels, weights, outcome rules).
        #[arg(long)]
        model_file: Option<PathBuf>,
    },
    /// CHSH: exact on a table file, or Monte Carlo for a singlet model.
    Chsh {
        /// Correlation-table JSON file (exact evaluation).
        #[arg(long, conflicts_with = "model")]
        table: Option<PathBuf>,
        /// brans | degorre | hall (Monte Carlo estimation).
        #[arg(long)]
        model: Option<String>,
        /// Coplanar xz-plane angles x x′ y y′ in radians
        /// (default: the singlet-optimal 0 3π/2 3π/4 5π/4).
        #[arg(long, num_args = 4, allow_negative_numbers = true)]
        angles: Option<Vec<f64>>,
        /// Setting labels x x′ y y′ for table mode (default: first two per side).
        #[arg(long, num_args = 4)]
        settings: Option<Vec<String>>,
        /// Emit an exact (angle, correlator) series with this many points.
        #[arg(long, conflicts_with_all = ["table", "angles"])]
        scan: Option<usize>,
    },
    /// Local-polytope membership: witness mixture or violated functional.
    Separability {
        /// Correlation-table JSON file.
        table: PathBuf,
    },
    /// Detect signalling, then reproduce the table with a local
    /// deterministic model whose weights depend on the settings.
    SignallingDemo {
        /// Correlation-table JSON file.
        #[arg(long)]
        table: Option<PathBuf>,
        /// b-equals-x | singlet | uniform
        #[arg(long, default_value = "b-equals-x", conflicts_with = "table")]
        builtin: String,
    },
    /// Generalized Brans model for a state and POVM family.
    GeneralModel {
        /// Density-matrix JSON file (row-major, entries [re, im]).
        #[arg(long)]
        rho: PathBuf,
        /// POVM-family JSON file.
        #[arg(long)]
        povm: PathBuf,
    },
    /// Common-cause completion of setting-dependent weights.
    CausalDecompose {
        /// Weight-table JSON file (λ labels, settings, weights, optional p_xy).
        weights: PathBuf,
    },
}

/// Flag values after applying precedence: flags > config file > defaults.
struct RunConfig {
    seed: u64,
    samples: u64,
    quadrature_order: usize,
    output: OutputFormat,
    check: bool,
    out: Option<PathBuf>,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let file: Value = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| {
                Error::InvalidInput(format!("{} is not valid JSON: {e}", path.display()))
            })?;
            if !v.is_object() {
                return Err(Error::InvalidInput(format!(
                    "{} must hold a JSON object",
                    path.display()
                )));
            }
            v
        }
        None => Value::Null,
    };

    let samples =
        cli.samples.or_else(|| file.get("samples").and_then(Value::as_u64)).unwrap_or(100_000);
    if samples == 0 {
        return Err(Error::InvalidInput("--samples must be positive".into()));
    }
    let quadrature_order = cli
        .quadrature_order
        .or_else(|| file.get("quadrature_order").and_then(Value::as_u64).map(|v| v as usize))
        .unwrap_or(DEFAULT_QUADRATURE_ORDER);
    let output = match cli.output {
        Some(f) => f,
        None => match file.get("output").and_then(Value::as_str) {
            Some("json") | None => OutputFormat::Json,
            Some("csv") => OutputFormat::Csv,
            Some(other) => {
                return Err(Error::InvalidInput(format!(
                    "config output format {other:?} (expected \"json\" or \"csv\")"
                )))
            }
        },
    };
    Ok(RunConfig {
        seed: cli.seed.or_else(|| file.get("seed").and_then(Value::as_u64)).unwrap_or(0),
        samples,
        quadrature_order,
        output,
        check: cli.check || file.get("check").and_then(Value::as_bool).unwrap_or(false),
        out: cli.out.clone().or_else(|| file.get("out").and_then(Value::as_str).map(PathBuf::from)),
    })
}

/// `BELLSEP_THREADS` caps the rayon worker count for the whole process.
fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("BELLSEP_THREADS") {
        let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            Error::InvalidInput(format!("BELLSEP_THREADS must be a positive integer, got {raw:?}"))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<commands::CommandOutcome> {
    match command {
        Command::SingletCheck { model, pairs } => {
            commands::singlet_check(model, *pairs, cfg.quadrature_order, cfg.samples, cfg.seed)
        }
        Command::CmdReport { model, model_file } => commands::cmd_report(
            model.as_deref(),
            model_file.as_deref(),
            cfg.quadrature_order,
            cfg.check,
        ),
        Command::Chsh { table, model, angles, settings, scan } => commands::chsh(
            table.as_deref(),
            model.as_deref(),
            angles.as_deref(),
            settings.as_deref(),
            *scan,
            cfg.quadrature_order,
            cfg.samples,
            cfg.seed,
            cfg.check,
        ),
        Command::Separability { table } => commands::separability(table, cfg.check),
        Command::SignallingDemo { table, builtin } => {
            commands::signalling_demo(table.as_deref(), builtin, cfg.check)
        }
        Command::GeneralModel { rho, povm } => commands::general_model(rho, povm, cfg.check),
        Command::CausalDecompose { weights } => commands::causal_decompose(weights, cfg.check),
    }
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 1;
    }
    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match dispatch(&cli.command, &cfg) {
        Ok(outcome) => {
            if let Err(e) = output::emit(outcome.report, cfg.output, cfg.out.as_deref()) {
                eprintln!("error: {e}");
                return 1;
            }
            if outcome.checks_failed {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn main() {
    std::process::exit(run());
}
