//! Command-line front end: optimize, baseline, sweep, and simulate.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;

use epibo::dimension::{ControlStrategy, FillStrategy};
use epibo::epidemic::simulate;
use epibo::error::{Error, Result};
use epibo::optimizer::{run, run_baseline_standard_bo, RunReport};

use epibo_bench::config::{
    optimizer_config, parse_control_values, parse_pairs, sweep_spec, Overrides,
};
use epibo_bench::io::{save_report, write_sweep_csv, write_trajectory_csv};
use epibo_bench::sweep::run_sweep;

#[derive(Parser)]
#[command(
    name = "epibench",
    version,
    about = "Dimension-reduced Bayesian optimization benchmarks on epidemic control models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimizer once and write a JSON report plus the best control
    Optimize(RunArgs),
    /// Run the plain-BO comparison arm (no reduction, bandit, or local search)
    Baseline(RunArgs),
    /// Run the (d, fill, seed) grid from the config and write a ratio table
    Sweep(SweepArgs),
    /// Simulate a control file on the configured model and write the trajectory
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (key = value lines)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the run seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the reduced dimension
    #[arg(long)]
    d: Option<usize>,
    /// Override the fill strategy (identical|uniform|linear|normal|gp)
    #[arg(long)]
    fill: Option<String>,
    /// Override the model (seir|sis)
    #[arg(long)]
    model: Option<String>,
    /// Override the iteration budget
    #[arg(long)]
    iterations: Option<usize>,
    /// Run the plain-BO comparison arm instead
    #[arg(long)]
    baseline: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Configuration file with d_values / fill_strategies / seeds lists
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the model (seir|sis)
    #[arg(long)]
    model: Option<String>,
    /// Run sweep cells on the thread pool (timings get noisier)
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Configuration file describing the model instance
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Control file, one value per epoch; zero control when omitted
    #[arg(long)]
    control: Option<PathBuf>,
    /// Override the noise seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the model (seir|sis)
    #[arg(long)]
    model: Option<String>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(Error::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(2)
        }
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Optimize(args) => run_once(args, false),
        Command::Baseline(args) => run_once(args, true),
        Command::Sweep(args) => run_grid(args),
        Command::Simulate(args) => run_simulation(args),
    }
}

fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse_fill(raw: &Option<String>) -> Result<Option<FillStrategy>> {
    match raw {
        None => Ok(None),
        Some(text) => text
            .parse::<FillStrategy>()
            .map(Some)
            .map_err(|e| Error::Config(e.to_string())),
    }
}

fn run_once(args: RunArgs, force_baseline: bool) -> Result<ExitCode> {
    let text = read_config(&args.config)?;
    let overrides = Overrides {
        model: args.model.clone(),
        seed: args.seed,
        d: args.d,
        fill: parse_fill(&args.fill)?,
        iterations: args.iterations,
    };
    let config = optimizer_config(&parse_pairs(&text)?, &overrides)?;
    let baseline = force_baseline || args.baseline;
    let mut report: RunReport = if baseline {
        run_baseline_standard_bo(&config)?
    } else {
        run(&config)?
    };
    report.config_text = Some(text);

    fs::create_dir_all(&args.out)?;
    let report_path = args.out.join("report.json");
    save_report(&report_path, &report)?;
    let control_path = args.out.join("best_control.txt");
    let control_text: String = report
        .best_full
        .iter()
        .map(|v| format!("{v}\n"))
        .collect();
    fs::write(&control_path, control_text)?;

    println!(
        "model={} d={} fill={} seed={} arm={} aofv={} rt={:.3}s",
        report.config.instance.model.name(),
        report.config.d,
        report.config.fill_strategy,
        report.seed,
        if baseline { "baseline" } else { "full" },
        report.best_objective_full,
        report.wall_time_seconds,
    );
    println!("report: {}", report_path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_grid(args: SweepArgs) -> Result<ExitCode> {
    let text = read_config(&args.config)?;
    let overrides = Overrides {
        model: args.model.clone(),
        ..Overrides::default()
    };
    let spec = sweep_spec(&parse_pairs(&text)?, &overrides)?;
    let report = run_sweep(&spec, args.parallel)?;

    fs::create_dir_all(&args.out)?;
    let table_path = args.out.join("sweep.csv");
    write_sweep_csv(&table_path, &report)?;
    for (cell, mut run_report) in report.cells.iter().zip(report.reports.iter().cloned()) {
        run_report.config_text = Some(text.clone());
        let name = format!(
            "report_{}_d{}_{}_seed{}.json",
            cell.model, cell.d, cell.fill, cell.seed
        );
        save_report(&args.out.join(name), &run_report)?;
    }

    for cell in &report.cells {
        println!(
            "model={} d={} fill={} seed={} aofv={} rt={:.3}s aofv_ratio={:.4} rt_ratio={:.4}",
            cell.model,
            cell.d,
            cell.fill,
            cell.seed,
            cell.aofv,
            cell.rt_seconds,
            cell.aofv_ratio,
            cell.rt_ratio
        );
    }
    println!("table: {}", table_path.display());

    if report.has_failures() {
        for failure in &report.failures {
            eprintln!(
                "cell model={} d={} fill={} seed={} failed: {}",
                failure.model, failure.d, failure.fill, failure.seed, failure.message
            );
        }
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_simulation(args: SimulateArgs) -> Result<ExitCode> {
    let text = read_config(&args.config)?;
    let overrides = Overrides {
        model: args.model.clone(),
        seed: args.seed,
        ..Overrides::default()
    };
    let config = optimizer_config(&parse_pairs(&text)?, &overrides)?;
    let instance = &config.instance;
    let t_f = instance.objective.t_f;

    let values = match &args.control {
        None => vec![0.0; t_f],
        Some(path) => {
            let control_text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_control_values(&control_text)?
        }
    };
    if values.len() != t_f {
        return Err(Error::Config(format!(
            "control file has {} values but the horizon is {t_f}",
            values.len()
        )));
    }
    let control = ControlStrategy::full(values, instance.objective.bounds)
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut rng = StdRng::seed_from_u64(config.seed);
    let trajectory = simulate(instance, &control, Some(&mut rng))?;

    fs::create_dir_all(&args.out)?;
    let path = args.out.join("trajectory.csv");
    write_trajectory_csv(&path, &trajectory)?;
    println!(
        "model={} t_f={} total_cost={}",
        instance.model.name(),
        t_f,
        trajectory.total_cost()
    );
    println!("trajectory: {}", path.display());
    Ok(ExitCode::SUCCESS)
}
