mod config;
mod error;
mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adiashort::engine::{run_experiment, sweep};
use adiashort::protocols::presets;
use adiashort::verification::acceptance_report;
use clap::{Parser, Subcommand};

use crate::config::{parse_config, parse_sweep, read_text};
use crate::error::{CliError, Result};
use crate::output::{summary_json, write_json, write_run};
use crate::plot::PlotKind;

const THREADS_ENV: &str = "ADIASHORT_THREADS";

#[derive(Parser)]
#[command(name = "adiashort", version, about = "Pi-pulse accelerated adiabatic evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trajectory.csv, summary.json, report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid step override, us.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Run every experiment of a sweep config, one subdirectory per run.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Run the acceptance checks and write acceptance_report.json.
    Verify {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render an SVG from a run directory's trajectory.csv.
    Plot {
        run_dir: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Directory for the SVG; defaults to the run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List compiled-in presets.
    ListPresets,
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.parse().map_err(|_| CliError::Threads(format!("{THREADS_ENV}={value} is not a count")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Threads(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn out_dir(flag: Option<PathBuf>, from_config: Option<&String>) -> PathBuf {
    flag.or_else(|| from_config.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn cmd_run(config: &Path, out: Option<PathBuf>, step: Option<f64>) -> Result<()> {
    let cfg = parse_config(&read_text(config)?)?;
    let exp = cfg.build(step)?;
    let dir = out_dir(out, cfg.output_dir.as_ref());
    let run = run_experiment(&exp)?;
    write_run(&dir, &exp, &run)?;
    println!("{}", serde_json::to_string(&summary_json(&run)).expect("plain data serializes"));
    Ok(())
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>, step: Option<f64>) -> Result<()> {
    let cfg = parse_sweep(&read_text(config)?)?;
    let exps = cfg.runs.iter().map(|r| r.build(step)).collect::<Result<Vec<_>>>()?;
    let dir = out_dir(out, None);
    let results = sweep(&exps)?;
    let mut summaries = Vec::with_capacity(exps.len());
    for (i, (exp, run)) in exps.iter().zip(results).enumerate() {
        let run = run?;
        write_run(&dir.join(format!("{i:02}-{}", exp.label)), exp, &run)?;
        summaries.push(summary_json(&run));
    }
    write_json(&dir.join("sweep_summary.json"), &summaries)?;
    for s in &summaries {
        println!("{s}");
    }
    Ok(())
}

fn cmd_verify(out: &Path) -> Result<()> {
    let report = acceptance_report()?;
    for c in &report.criteria {
        println!("{}", c.line());
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_json(&out.join("acceptance_report.json"), &report)?;
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, out, step } => cmd_run(&config, out, step),
        Command::Sweep { config, out, step } => cmd_sweep(&config, out, step),
        Command::Verify { out } => cmd_verify(&out),
        Command::Plot { run_dir, kind, out } => {
            let target = out.unwrap_or_else(|| run_dir.clone());
            let path = plot::plot(&run_dir, &target, kind)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::ListPresets => {
            for p in presets() {
                println!("{}\t{}", p.name, p.description);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
