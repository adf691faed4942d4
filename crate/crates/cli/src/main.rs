use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use hotmesh_core::grid::DEFAULT_CELL_AREA_MM2;
use hotmesh_core::report::{report, text_summary, trace_csv, write_file};
use hotmesh_core::{
    build_network, place, plan, run, sweep, GridSpec, Mapping, MigrationCostParams, MigrationFunction, ScenarioConfig,
    SweepCell, DEFAULT_PERIODS,
};

/// Thermal hotspot simulator for mesh NoCs with runtime workload migration.
#[derive(Parser)]
#[command(name = "hotmesh", version)]
struct Cli {
    /// Output directory for reports and traces.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write summary.csv / summary.txt.
    Run {
        scenario: PathBuf,
        /// Also write the per-step temperature trace to trace.csv.
        #[arg(long)]
        trace: bool,
    },
    /// Run every function x period combination of a scenario.
    Sweep {
        scenario: PathBuf,
        /// Comma-separated functions, e.g. rotation,mirror_xy,translate_xy:1:1.
        #[arg(long, value_delimiter = ',')]
        functions: Vec<MigrationFunction>,
        /// Comma-separated migration periods in microseconds.
        #[arg(long, value_delimiter = ',')]
        periods_us: Vec<f64>,
    },
    /// Print the phase schedule of one migration on an nx x ny mesh.
    Plan { function: MigrationFunction, nx: usize, ny: usize },
    /// Anneal an initial placement and write mapping.csv.
    Place { scenario: PathBuf },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::from_file(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn finish(cells: &[SweepCell], out: &Path) -> Result<()> {
    let (csv, _) = report(cells, out)?;
    print!("{}", text_summary(cells));
    println!("wrote {}", csv.display());
    let failed: Vec<_> = cells.iter().filter_map(|c| c.result.as_ref().err()).collect();
    if let Some(first) = failed.first() {
        bail!("{} of {} runs failed, first: {first}", failed.len(), cells.len());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { scenario, trace } => {
            let cfg = load(&scenario, cli.seed)?;
            let output = run(&cfg)?;
            if trace {
                write_file(&cli.out.join("trace.csv"), &trace_csv(&output.trace))?;
            }
            write_file(&cli.out.join("final_mapping.csv"), &output.final_mapping.to_csv())?;
            finish(&[output.summary.into()], &cli.out)
        }
        Command::Sweep { scenario, functions, periods_us } => {
            let cfg = load(&scenario, cli.seed)?;
            let functions = if functions.is_empty() { MigrationFunction::STANDARD.to_vec() } else { functions };
            let periods: Vec<f64> = if periods_us.is_empty() {
                DEFAULT_PERIODS.to_vec()
            } else {
                periods_us.iter().map(|p| p * 1e-6).collect()
            };
            finish(&sweep(&cfg, &functions, &periods)?, &cli.out)
        }
        Command::Plan { function, nx, ny } => {
            let grid = GridSpec::new(nx, ny, DEFAULT_CELL_AREA_MM2)?;
            let p = plan(function, &grid, &MigrationCostParams::default())?;
            print!("{}", p.to_text());
            Ok(())
        }
        Command::Place { scenario } => {
            let cfg = load(&scenario, cli.seed)?;
            cfg.validate()?;
            let net = build_network(&cfg.grid, &cfg.thermal)?;
            let placed = place(&cfg.profile, &cfg.grid, &net, &cfg.anneal_config())?;
            let identity = hotmesh_core::placement::evaluate(&Mapping::identity(&cfg.grid), &cfg.profile, &net)?;
            let path = cli.out.join("mapping.csv");
            write_file(&path, &placed.mapping.to_csv())?;
            print!("{}", placed.mapping.to_csv());
            println!("peak {:.6} C (identity {:.6} C)", placed.peak, identity);
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("hotmesh: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hotmesh: {e}");
            ExitCode::FAILURE
        }
    }
}
