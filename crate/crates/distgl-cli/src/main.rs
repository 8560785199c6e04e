use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use distgl_cli::{cmd_gen, cmd_run, cmd_sweep, cmd_verify, load_spec, plot, SpecOverrides};

#[derive(Parser)]
#[command(
    name = "distgl",
    about = "Distributed graph learning simulator: generate instances, run \
             cost/accuracy experiments, plot results, verify acceptance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Experiment config (TOML). CLI flags override file values; the
    /// DISTGL_OUTPUT_DIR environment variable overrides the output directory.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n_nodes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    n_signals: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Absolute connection radii.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Radius factors c giving radius c/sqrt(N).
    #[arg(long, value_delimiter = ',')]
    radius_factors: Option<Vec<f64>>,
    #[arg(long)]
    removal_rate: Option<f64>,
    /// Target minimum weighted degree.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl SpecArgs {
    fn overrides(&self) -> SpecOverrides {
        SpecOverrides {
            name: self.name.clone(),
            n_nodes: self.n_nodes.clone(),
            n_signals: self.n_signals.clone(),
            seeds: self.seeds.clone(),
            radii: self.radii.clone(),
            radius_factors: self.radius_factors.clone(),
            removal_rate: self.removal_rate,
            eta: self.eta,
            lr: self.lr,
            output_dir: self.output_dir.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Materialize graphs and signals for every grid instance.
    Gen(SpecArgs),
    /// Run a single grid point and write results.csv / summary.csv.
    Run(SpecArgs),
    /// Run the full grid and write results.csv / summary.csv.
    Sweep(SpecArgs),
    /// Render SVG plots from a results.csv.
    Plot {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = "plots")]
        output_dir: PathBuf,
    },
    /// Run the acceptance suite and print one line per criterion.
    Verify,
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Gen(args) => {
            let spec = load_spec(&args.config, &args.overrides())?;
            let dirs = cmd_gen(&spec)?;
            for dir in &dirs {
                println!("{}", dir.display());
            }
            println!("materialized {} instances", dirs.len());
        }
        Command::Run(args) => {
            let spec = load_spec(&args.config, &args.overrides())?;
            let out = cmd_run(&spec)?;
            report(&out);
        }
        Command::Sweep(args) => {
            let spec = load_spec(&args.config, &args.overrides())?;
            let out = cmd_sweep(&spec)?;
            report(&out);
        }
        Command::Plot {
            results,
            output_dir,
        } => {
            let written = plot::emit_plots(&results, &output_dir)?;
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Verify => {
            let failures = cmd_verify();
            if failures > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report(out: &distgl::experiment::ExperimentOutput) {
    let failed = out.rows.iter().filter(|r| !r.error.is_empty()).count();
    println!(
        "{} runs ({} failed) -> {}",
        out.rows.len(),
        failed,
        out.results_path.display()
    );
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
