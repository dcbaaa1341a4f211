//! `gvcov`: batch runner for guaranteed Voronoi coverage scenarios.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gv_coverage::control::{ControlLaw, NetworkSnapshot};
use gv_coverage::io::{
    emit_coverage_csv, emit_svg_frame, emit_trace_csv, parse_scenario, Scenario, ScenarioError,
};
use gv_coverage::sim::{check_collision_free, run_with};
use log::info;

#[derive(Parser)]
#[command(
    name = "gvcov",
    version,
    about = "Guaranteed Voronoi coverage control simulator"
)]
struct Cli {
    /// Increase log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write the trace, coverage curve and SVG frames.
    Run {
        scenario: PathBuf,
        /// Override the scenario's control law.
        #[arg(long)]
        law: Option<ControlLaw>,
        /// Output directory (default: the scenario's `outputs.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a frame every N steps (0: final frame only).
        #[arg(long)]
        svg_every: Option<usize>,
    },
    /// Draw the diagram of the initial configuration.
    Diagram {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
}

enum Failure {
    Validation(ScenarioError),
    Runtime(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Validation(e)
    }
}

impl From<gv_coverage::Error> for Failure {
    fn from(e: gv_coverage::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn write_failed(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("cannot write {}: {e}", path.display()))
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
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { scenario } => {
            let s = parse_scenario(&scenario)?;
            println!(
                "{}: ok ({} agents, law {}, dt {}, max_steps {})",
                scenario.display(),
                s.config.agents.len(),
                s.config.law,
                s.config.dt,
                s.config.max_steps
            );
            Ok(())
        }
        Command::Diagram { scenario, out } => {
            let s = parse_scenario(&scenario)?;
            let snapshot = NetworkSnapshot::new(&s.config.agents, &s.config.region)?;
            emit_svg_frame(&snapshot, &out).map_err(|e| write_failed(&out, e))?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Run {
            scenario,
            law,
            out,
            svg_every,
        } => {
            let mut s = parse_scenario(&scenario)?;
            if let Some(law) = law {
                s.config.law = law;
            }
            let dir = out.unwrap_or_else(|| {
                scenario
                    .parent()
                    .unwrap_or(Path::new("."))
                    .join(&s.outputs.dir)
            });
            let every = svg_every.unwrap_or(s.outputs.svg_every);
            simulate(&s, &dir, every)
        }
    }
}

fn simulate(s: &Scenario, dir: &Path, svg_every: usize) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| write_failed(dir, e))?;
    let cfg = &s.config;
    let initial = NetworkSnapshot::new(&cfg.agents, &cfg.region)?;
    let first = dir.join("initial.svg");
    emit_svg_frame(&initial, &first).map_err(|e| write_failed(&first, e))?;

    let mut frame_error = None;
    let mut last = initial;
    let trace = run_with(cfg, |state, row| {
        if svg_every > 0 && state.step % svg_every == 0 && frame_error.is_none() {
            let path = dir.join(format!("frame_{:05}.svg", state.step));
            if let Err(e) = emit_svg_frame(&state.snapshot, &path) {
                frame_error = Some(write_failed(&path, e));
            }
        }
        info!(
            "step {}: H = {:.6}, coverage = {:.4}",
            row.step, row.h, row.coverage_fraction
        );
        last = state.snapshot.clone();
    })?;
    if let Some(e) = frame_error {
        return Err(e);
    }

    let files = [
        (
            "trace.csv",
            emit_trace_csv as fn(&_, &Path) -> std::io::Result<()>,
        ),
        ("coverage.csv", emit_coverage_csv),
    ];
    for (name, emit) in files {
        let path = dir.join(name);
        emit(&trace, &path).map_err(|e| write_failed(&path, e))?;
    }
    let fin = dir.join("final.svg");
    emit_svg_frame(&last, &fin).map_err(|e| write_failed(&fin, e))?;

    let end = trace.last();
    println!(
        "{} steps, {}, final H = {:.6}, coverage = {:.4}, collision free: {}",
        end.step,
        if trace.diagnostics.converged {
            "converged"
        } else {
            "step budget reached"
        },
        end.h,
        end.coverage_fraction,
        check_collision_free(&trace, s.r_u)
    );
    println!("outputs in {}", dir.display());
    Ok(())
}
