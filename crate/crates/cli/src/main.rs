//! `vortexlab` command line.
//!
//! Exit status is 0 on success, 1 when a run or summary has a failing
//! check, and 2 on any error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use vortexlab::measure::spec::MeasureSpec;
use vortexlab::measure::{dirac_approximate, DiracApproximationRecord};
use vortexlab::pipeline::{export, load_config, run_pipeline, summarize_dir, Summary};
use vortexlab::vortex::{
    max_spacing, min_half_width, solve_vortex, total_energy, write_field_file, GridSpec, SolverSettings,
};
use vortexlab::{Point64, ZeroConfig64};

#[derive(Debug, Parser)]
#[command(name = "vortexlab", version, about = "Rescaled vortex solutions and their concentration measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single vortex solves.
    #[command(subcommand)]
    Vortex(VortexCmd),
    /// Full multi-level runs.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
    /// Target measures.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Exported runs.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Debug, Subcommand)]
enum VortexCmd {
    /// Solve the vortex equation for a zero configuration and write the field dump.
    Solve {
        /// One zero per line as `x,y` or `x,y,m`; `#` starts a comment.
        #[arg(long)]
        zeros: PathBuf,
        #[arg(long)]
        r: f64,
        /// Grid spacing (default: the coarsest compliant spacing).
        #[arg(long)]
        h: Option<f64>,
        /// Grid half-width (default: the smallest compliant half-width).
        #[arg(long = "R")]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum PipelineCmd {
    /// Run every level of a config and export the artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum MeasureCmd {
    /// Print the Dirac approximation of a measure file as JSON.
    Approx {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        cell_radius: f64,
        #[arg(long, default_value_t = 400)]
        denominator_cap: u64,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCmd {
    /// Verify an export directory and recompute its summary.
    Summarize {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn read_zeros(path: &Path) -> anyhow::Result<ZeroConfig64> {
    let text = fs::read_to_string(path).with_context(|| format!("could not read {}", path.display()))?;
    let mut points = Vec::new();
    let mut mults = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let at = || format!("{}:{}", path.display(), k + 1);
        if !(2..=3).contains(&cols.len()) {
            bail!("{}: expected `x,y` or `x,y,m`, got {line:?}", at());
        }
        let x: f64 = cols[0].parse().with_context(at)?;
        let y: f64 = cols[1].parse().with_context(at)?;
        let m: u64 = match cols.get(2) {
            Some(s) => s.parse().with_context(at)?,
            None => 1,
        };
        points.push(Point64::new(x, y));
        mults.push(m);
    }
    Ok(ZeroConfig64::new(points, mults)?)
}

fn print_summary(summary: &Summary) -> ExitCode {
    for (name, ok) in &summary.checks {
        println!("{:<24} {}", name, if *ok { "pass" } else { "FAIL" });
    }
    if summary.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Vortex(VortexCmd::Solve { zeros, r, h, half_width, tol, out }) => {
            let zeros = read_zeros(&zeros)?;
            let settings = SolverSettings { tol, ..SolverSettings::default() };
            let grid = match (h, half_width) {
                (None, None) => settings.grid_for(r)?,
                (h, w) => GridSpec::new(
                    w.unwrap_or_else(|| min_half_width(r)),
                    h.unwrap_or_else(|| max_spacing(r, settings.kappa, settings.h_max)),
                    Point64::origin(),
                )?,
            };
            let field = solve_vortex(&zeros, r, &grid, &settings)?;
            write_field_file(&field, &out)?;
            let n = zeros.degree();
            let e = total_energy(&field);
            println!("nodes per side   {}", grid.side());
            println!("newton steps     {}", field.convergence.iterations);
            println!("residual         {:.3e}", field.convergence.residual);
            println!("energy           {e:.10}");
            if n > 0 {
                println!("energy / 2piN    {:.10}", e / (2.0 * std::f64::consts::PI * n as f64));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Pipeline(PipelineCmd::Run { config, out }) => {
            let cfg = load_config(&config)?;
            let run = run_pipeline(&cfg)?;
            if let Some(f) = &run.failure {
                eprintln!("level {} failed at {}: {}", f.level, f.stage, f.message);
            }
            let manifest = export(&run, &out)?;
            println!("wrote {} files to {}", manifest.files.len() + 1, out.display());
            Ok(print_summary(&run.summary))
        }
        Command::Measure(MeasureCmd::Approx { measure, cell_radius, denominator_cap }) => {
            let m = MeasureSpec::from_file(&measure)?.build::<f64>()?;
            let a = dirac_approximate(&m, cell_radius, denominator_cap)?;
            let record = DiracApproximationRecord::from(&a);
            println!("{}", serde_json::to_string_pretty(&record)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Report(ReportCmd::Summarize { dir }) => Ok(print_summary(&summarize_dir(&dir)?)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
