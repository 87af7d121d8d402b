use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zenosim_cli::report::{emit_csv, emit_json, write_csv};
use zenosim_cli::{parse_config_with, run_scenario, ScenarioKind};

#[derive(Parser)]
#[command(
    name = "zenosim",
    version,
    about = "Measurement-chain scenarios: Zeno, anti-Zeno, steering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated measurement of a fixed rank-1 projector.
    Zeno(Common),
    /// Measurement steered along a unitary path.
    Antizeno(Common),
    /// Non-selective steering between orthogonal states.
    Steer(Common),
    /// Series terms of the spin family against closed forms.
    SpinSeries(Common),
    /// A spectral window swept across a lattice.
    SweepWindow(Common),
    /// Probability sum over all outcome histories.
    Closure(Common),
    /// Run whatever scenario the config names.
    Run(RunArgs),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration naming its scenario.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the full JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Include wall-clock time in the JSON report.
    #[arg(long)]
    timing: bool,
}

fn execute(config: Option<PathBuf>, scenario: Option<ScenarioKind>, output: Output) -> Result<bool, String> {
    let text = match &config {
        Some(path) => std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        None => b"{}".to_vec(),
    };
    let cfg = parse_config_with(&text, scenario, output.seed).map_err(|e| e.to_string())?;
    let report = run_scenario(&cfg).map_err(|e| e.to_string())?;
    match &output.out {
        Some(path) => emit_csv(&report, path).map_err(|e| e.to_string())?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&report, &mut lock).map_err(|e| e.to_string())?;
            lock.flush().map_err(|e| e.to_string())?;
        }
    }
    if let Some(path) = &output.json {
        emit_json(&report, path, output.timing).map_err(|e| e.to_string())?;
    }
    let failures = report.failures();
    let mut summary = format!(
        "{}: {} rows, {} failed, config {}",
        report.scenario,
        report.rows.len(),
        failures,
        &report.config_hash[..12]
    );
    if output.timing {
        if let Some(t) = report.wall_time_s {
            summary.push_str(&format!(", {t:.3} s"));
        }
    }
    eprintln!("{summary}");
    Ok(failures == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, scenario, output) = match cli.command {
        Command::Zeno(c) => (c.config, Some(ScenarioKind::Zeno), c.output),
        Command::Antizeno(c) => (c.config, Some(ScenarioKind::Antizeno), c.output),
        Command::Steer(c) => (c.config, Some(ScenarioKind::Steering), c.output),
        Command::SpinSeries(c) => (c.config, Some(ScenarioKind::SpinSeries), c.output),
        Command::SweepWindow(c) => (c.config, Some(ScenarioKind::SweptWindow), c.output),
        Command::Closure(c) => (c.config, Some(ScenarioKind::Closure), c.output),
        Command::Run(r) => (Some(r.config), None, r.output),
    };
    match execute(config, scenario, output) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
