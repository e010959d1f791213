//! `isac-ed`: reproduction harness for the ZP/CP-OFDM energy-detection
//! analyses. Experiments read a flat scenario file and emit plot-ready CSV;
//! all randomness is seed-driven, so identical invocations produce
//! byte-identical outputs.
//!
//! Exit codes: 0 success, 2 usage (clap), 3 malformed scenario,
//! 4 output I/O failure, 5 computation failure.

use clap::{Args, Parser, Subcommand};
use isac_ed_cli::experiments;
use isac_ed_cli::scenario::{ModelSpec, Scenario};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "isac-ed", version, about = "ZP/CP-OFDM energy-detection analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (flat key = value document).
    #[arg(long)]
    scenario: PathBuf,
    /// Output CSV path (written atomically).
    #[arg(long)]
    out: PathBuf,
    /// Override sim.trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Override sim.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override detect.model (auto|exact|gamma|gaussian).
    #[arg(long)]
    model: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// ZP PD validation sweep: analytic curves plus Monte Carlo.
    ValidateZp(RunArgs),
    /// CP PD validation sweep: analytic curves plus Monte Carlo.
    ValidateCp(RunArgs),
    /// PD over distance for the fixed window against the matched-window bound.
    UpperBound(RunArgs),
    /// CP/ZP range ratio over RSI with the equal-range crossing.
    RangeRatio(RunArgs),
    /// PD-over-distance curves for both waveforms at matched CFAR.
    RangeCurves(RunArgs),
    /// KLD clutter analysis over residual clutter power.
    Clutter(RunArgs),
    /// Counting-formula conformance report (closed forms vs oracles).
    Conformance {
        #[arg(long)]
        out: PathBuf,
    },
    /// Human-readable summary of the scenario's derived quantities.
    PrintScene {
        #[arg(long)]
        scenario: PathBuf,
        /// Override detect.model (auto|exact|gamma|gaussian).
        #[arg(long)]
        model: Option<String>,
    },
}

const EXIT_SCENARIO: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_COMPUTE: u8 = 5;

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn parse_model(raw: &str) -> Result<ModelSpec, String> {
    match raw {
        "auto" => Ok(ModelSpec::Auto),
        "exact" => Ok(ModelSpec::Exact),
        "gamma" => Ok(ModelSpec::Gamma),
        "gaussian" => Ok(ModelSpec::Gaussian),
        other => Err(format!("unknown model '{other}' (expected auto|exact|gamma|gaussian)")),
    }
}

fn load_scenario(path: &Path, trials: Option<usize>, seed: Option<u64>, model: Option<&str>)
    -> Result<Scenario, (u8, String)>
{
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_SCENARIO, format!("cannot read scenario {}: {e}", path.display())))?;
    let mut s = Scenario::parse(&text).map_err(|e| (EXIT_SCENARIO, e.to_string()))?;
    if let Some(t) = trials {
        s.trials = t;
    }
    if let Some(v) = seed {
        s.seed = v;
    }
    if let Some(m) = model {
        s.model = parse_model(m).map_err(|e| (EXIT_SCENARIO, e))?;
    }
    Ok(s)
}

/// Write-then-rename so a crashed run never leaves a truncated CSV behind.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn run_experiment(
    args: &RunArgs,
    f: impl Fn(&Scenario) -> anyhow::Result<String>,
) -> ExitCode {
    let scenario = match load_scenario(
        &args.scenario,
        args.trials,
        args.seed,
        args.model.as_deref(),
    ) {
        Ok(s) => s,
        Err((code, msg)) => return fail(code, msg),
    };
    let csv = match f(&scenario) {
        Ok(csv) => csv,
        Err(e) => return fail(EXIT_COMPUTE, e),
    };
    match write_atomic(&args.out, &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_IO, format!("cannot write {}: {e}", args.out.display())),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ValidateZp(args) => run_experiment(&args, experiments::validate_zp),
        Command::ValidateCp(args) => run_experiment(&args, experiments::validate_cp),
        Command::UpperBound(args) => run_experiment(&args, experiments::upper_bound),
        Command::RangeRatio(args) => run_experiment(&args, experiments::range_ratio),
        Command::RangeCurves(args) => run_experiment(&args, experiments::range_curves),
        Command::Clutter(args) => run_experiment(&args, experiments::clutter),
        Command::Conformance { out } => {
            let csv = match experiments::conformance_report() {
                Ok(csv) => csv,
                Err(e) => return fail(EXIT_COMPUTE, e),
            };
            match write_atomic(&out, &csv) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_IO, format!("cannot write {}: {e}", out.display())),
            }
        }
        Command::PrintScene { scenario, model } => {
            let s = match load_scenario(&scenario, None, None, model.as_deref()) {
                Ok(s) => s,
                Err((code, msg)) => return fail(code, msg),
            };
            match experiments::print_scene(&s) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_COMPUTE, e),
            }
        }
    }
}
