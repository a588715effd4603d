use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cqed_core::config::{parse_angle, Format, Preset, RunConfig, ScenarioKind, SweepAxis};
use cqed_core::run::{self, RunError};
use cqed_core::validation;

const EXIT_VALIDATION: u8 = 3;

/// Cavity QED entanglement calculations.
#[derive(Debug, Parser)]
#[command(name = "cqed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Atom-cavity entanglement swapped from a lossy cavity pair.
    ScenarioA(RunArgs),
    /// Two atoms entangled through one lossy cavity.
    ScenarioB(RunArgs),
    /// Micromaser steady state and two-atom probe entanglement.
    Micromaser(RunArgs),
    /// Run the acceptance suite and print a pass/fail report.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Fock-space truncation for every cavity.
    #[arg(long)]
    fock_dim: Option<usize>,
    #[arg(long, value_parser = ["table1", "fig1"])]
    preset: Option<String>,
    /// Parameter override, e.g. `gt=3pi/4`. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
    /// Sweep axis, e.g. `kappa_over_g=0,0.1,0.2`. Repeatable; the first is outermost.
    #[arg(long = "sweep", value_name = "NAME=V1,V2,..")]
    sweep: Vec<String>,
    /// Skip the master-equation columns in scenarios A and B.
    #[arg(long)]
    no_oracle: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

fn build_config(kind: ScenarioKind, args: &RunArgs) -> Result<RunConfig, RunError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let cfg = RunConfig::from_json(&text)?;
            if cfg.kind() != kind {
                return Err(usage(format!("config is for {}, not {}", cfg.kind(), kind)));
            }
            cfg
        }
        None => RunConfig::new(kind),
    };
    for item in &args.set {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects NAME=VALUE, got {item:?}")))?;
        cfg.base.set(name.trim(), parse_angle(value)?)?;
    }
    for spec in &args.sweep {
        let axis = SweepAxis::parse(spec)?;
        cfg.sweep.retain(|a| a.name != axis.name);
        cfg.sweep.push(axis);
    }
    if let Some(path) = &args.out {
        cfg.output.path = Some(path.clone());
    }
    if let Some(f) = &args.format {
        cfg.output.format = f.parse::<Format>()?;
    }
    if let Some(k) = args.fock_dim {
        cfg.fock_dim = Some(k);
    }
    if let Some(p) = &args.preset {
        cfg.preset = Some(p.parse::<Preset>()?);
    }
    if args.no_oracle {
        cfg.oracle = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_scenario(kind: ScenarioKind, args: &RunArgs) -> Result<u8, RunError> {
    let cfg = build_config(kind, args)?;
    let outcome = run::run(&cfg)?;
    if cfg.output.path.is_none() {
        std::io::stdout()
            .write_all(outcome.rendered.as_bytes())
            .map_err(|e| RunError::Io(e.to_string()))?;
    }
    if cfg.preset == Some(Preset::Table1) && outcome.tolerance_failed {
        eprintln!("table1: at least one row is outside tolerance");
        return Ok(EXIT_VALIDATION);
    }
    if outcome.table.any_status(cqed_core::record::Status::TruncationWarning) {
        eprintln!("warning: some rows lose more than 1e-12 of weight to the Fock cutoff");
    }
    Ok(0)
}

fn validate(args: &ValidateArgs) -> Result<u8, RunError> {
    if let Some(path) = &args.out {
        run::check_output_path(path)?;
    }
    let reports = validation::run_all();
    let gaps = validation::secular_gaps()?;
    let text = validation::render_report(&reports, Some(&gaps));
    print!("{text}");
    if let Some(path) = &args.out {
        fs::write(path, &text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(if reports.iter().all(|r| r.passed()) {
        0
    } else {
        EXIT_VALIDATION
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::ScenarioA(a) => run_scenario(ScenarioKind::ScenarioA, a),
        Command::ScenarioB(a) => run_scenario(ScenarioKind::ScenarioB, a),
        Command::Micromaser(a) => run_scenario(ScenarioKind::Micromaser, a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
