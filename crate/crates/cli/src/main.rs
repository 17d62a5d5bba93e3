use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use hausdorff::Exponent;
use hausdorff_cli::config::Overrides;
use hausdorff_cli::expr::Expr;
use hausdorff_cli::report::{render, write_divergence_csv, write_samples_csv};
use hausdorff_cli::run::{apply_report, bound_report, load_instance, parse_grid, scenario_report, verify_report};
use hausdorff_cli::{scenarios, CliError, NormReport};

/// Norm bounds and empirical checks for Hausdorff-type operators.
///
/// Exit codes: 0 success (including BOUND_DIVERGENT), 1 runtime failure,
/// 2 DOMINANCE_VIOLATED, 3 invalid configuration or arguments.
#[derive(Parser, Debug)]
#[command(name = "hausdorff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every randomized search (default: config, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative quadrature and dominance tolerance (default: config, then 1e-6).
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write samples (apply) or probe values (scenario) as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the theoretical upper bound.
    Bound { config: PathBuf },
    /// Compare the bound with an empirical lower bound.
    Verify { config: PathBuf },
    /// Evaluate Hf on a grid.
    Apply {
        config: PathBuf,
        /// f as an expression in t (or x, x1, x2, ...).
        #[arg(long = "f")]
        function: String,
        /// lin:a:b:n, log:a:b:n, a:b:n, a comma list, or "all".
        #[arg(long)]
        grid: String,
    },
    /// Run a built-in scenario.
    Scenario {
        name: String,
        /// Use p = q = P.
        #[arg(long)]
        p: Option<String>,
        /// Print the scenario file instead of running it.
        #[arg(long)]
        show: bool,
    },
    /// List the built-in scenarios.
    List,
}

#[derive(Serialize)]
struct ErrorSection {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ErrorReport {
    error: ErrorSection,
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_csv(cli: &Cli, write: impl FnOnce(std::fs::File) -> std::io::Result<()>) -> Result<(), CliError> {
    let Some(path) = &cli.csv else {
        return Ok(());
    };
    let err = |source| CliError::Write {
        path: path.clone(),
        source,
    };
    write(std::fs::File::create(path).map_err(err)?).map_err(err)
}

fn finish(cli: &Cli, report: &NormReport, start: Instant) -> Result<ExitCode, CliError> {
    if let Some(d) = &report.divergence {
        write_csv(cli, |f| write_divergence_csv(f, d))?;
    } else if cli.csv.is_some() {
        log::warn!("--csv has nothing to write for this command");
    }
    emit(cli, &render(report, start.elapsed()))?;
    Ok(ExitCode::from(report.verdict().map_or(0, |v| v.exit_code())))
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let over = Overrides {
        seed: cli.seed,
        rel_tol: cli.rel_tol,
        p: None,
    };
    match &cli.command {
        Command::Bound { config } => finish(cli, &bound_report(&load_instance(config, &over)?)?, start),
        Command::Verify { config } => finish(cli, &verify_report(&load_instance(config, &over)?)?, start),
        Command::Apply { config, function, grid } => {
            let inst = load_instance(config, &over)?;
            let f = Expr::parse(function).map_err(|e| CliError::Usage(format!("--f: {e}")))?;
            let points = parse_grid(grid, &inst)?;
            let report = apply_report(&inst, &f, &points)?;
            write_csv(cli, |file| write_samples_csv(file, &report.samples))?;
            emit(cli, &render(&report, start.elapsed()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Scenario { name, p, show } => {
            if *show {
                emit(cli, scenarios::source(name)?)?;
                return Ok(ExitCode::SUCCESS);
            }
            let p = p
                .as_deref()
                .map(|s| s.parse::<Exponent>().map_err(|e| CliError::Usage(format!("--p: {e}"))))
                .transpose()?;
            let inst = scenarios::load(name)?.build(&Overrides { p, ..over })?;
            finish(cli, &scenario_report(&inst)?, start)
        }
        Command::List => {
            let mut out = String::new();
            for name in scenarios::names() {
                let cfg = scenarios::load(name)?;
                out.push_str(&format!("{name:<20} {}\n", cfg.description.unwrap_or_default()));
            }
            emit(cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors share the configuration exit code; 2 is reserved
            // for violated dominance.
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            let report = ErrorReport {
                error: ErrorSection {
                    kind: if e.exit_code() == 3 { "CONFIG_INVALID" } else { "RUNTIME" },
                    message: e.to_string(),
                },
            };
            if let Err(write_error) = emit(&cli, &toml::to_string(&report).unwrap_or_default()) {
                let _ = writeln!(std::io::stderr(), "error: {write_error}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
