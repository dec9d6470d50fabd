use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shalegas::config::Scenario;
use shalegas::runner::{run_scenario, write_csv, write_json, write_outputs};
use shalegas::study::{contrast_sweep, convergence_study, parse_basis_rule};
use shalegas::{Error, Result};

/// Gas transport in fractured shale with a spectral two-grid preconditioner.
///
/// Set SHALEGAS_THREADS to size the worker pool and RUST_LOG for logging.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its outputs.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Temporal convergence of the linearly implicit scheme against a Picard reference.
    Converge {
        config: PathBuf,
        /// Step counts to compare.
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
        nt: Vec<usize>,
        /// Step count of the reference run.
        #[arg(long, default_value_t = 320)]
        reference_nt: usize,
        /// Picard stopping tolerance of the reference run, percent.
        #[arg(long, default_value_t = 1e-3)]
        reference_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-grid PCG iterations across permeability contrasts and basis rules.
    Contrast {
        config: PathBuf,
        /// Fracture permeability multipliers.
        #[arg(long, value_delimiter = ',', default_value = "1e3,1e6,1e9")]
        kf: Vec<f64>,
        /// Basis rules: fixed:M, adaptive:DELTA or adaptive+1:DELTA; repeatable.
        #[arg(long = "basis", default_values_t = ["fixed:1".to_string(), "fixed:2".to_string(), "adaptive:1e-3".to_string()])]
        basis: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("SHALEGAS_THREADS") {
        match v.parse::<usize>() {
            Ok(n) => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("SHALEGAS_THREADS ignored: {e}");
                }
            }
            Err(_) => log::warn!("SHALEGAS_THREADS='{v}' is not a thread count"),
        }
    }
}

fn out_dir(explicit: Option<PathBuf>, s: &Scenario) -> Option<PathBuf> {
    explicit.or_else(|| s.output.clone())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let s = Scenario::load(&config)?;
            let report = run_scenario(&s)?;
            let m = &report.summary;
            println!(
                "{}: {} DOFs, {} steps, {:.2} PCG iterations per step, coarse dimension {}",
                m.scenario,
                m.n_dofs,
                m.steps,
                m.average_iterations,
                m.n_coarse.map_or("-".to_string(), |n| n.to_string())
            );
            if m.any_out_of_bounds {
                println!("warning: the concentration left [c_min, c_max] in at least one step");
            }
            if let Some(dir) = out_dir(out, &s) {
                write_outputs(&dir, &s, &report)?;
                println!("outputs written to {}", dir.display());
            }
        }
        Command::Converge {
            config,
            nt,
            reference_nt,
            reference_tol,
            out,
        } => {
            let s = Scenario::load(&config)?;
            let table = convergence_study(&s, &nt, reference_nt, reference_tol)?;
            println!("{:>6} {:>12} {:>12} {:>8} {:>7} {:>8}", "N_t", "tau [s]", "error [%]", "ratio", "order", "Picard");
            for r in &table.rows {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
                println!(
                    "{:>6} {:>12.1} {:>12.5} {:>8} {:>7} {:>8}",
                    r.nt,
                    r.tau_s,
                    r.error_percent,
                    fmt(r.ratio),
                    fmt(r.order),
                    r.picard_iterations
                );
            }
            if let Some(dir) = out_dir(out, &s) {
                create(&dir)?;
                write_csv(&dir.join("convergence.csv"), &table.rows)?;
                write_json(&dir.join("convergence.json"), &table)?;
            }
        }
        Command::Contrast { config, kf, basis, out } => {
            let s = Scenario::load(&config)?;
            let rules = basis.iter().map(|b| parse_basis_rule(b)).collect::<Result<Vec<_>>>()?;
            let rows = contrast_sweep(&s, &kf, &rules)?;
            println!("{:>8} {:>18} {:>8} {:>10}", "k_f", "basis", "N_H", "iterations");
            for r in &rows {
                println!("{:>8.0e} {:>18} {:>8} {:>10}", r.kf, r.basis, r.n_coarse, r.iterations);
            }
            if let Some(dir) = out_dir(out, &s) {
                create(&dir)?;
                write_csv(&dir.join("contrast.csv"), &rows)?;
            }
        }
    }
    Ok(())
}

fn create(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
