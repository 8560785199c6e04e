//! Command implementations for the `distgl` binary, split from `main` so the
//! integration tests can call them directly.

pub mod plot;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use distgl::experiment::{run_experiment, ExperimentOutput, ExperimentSpec};
use distgl::io;
use distgl::synth::{generate_comm_graph, generate_data_graph, generate_smooth_signals};

/// CLI-level overrides applied on top of the config file. The output
/// directory can additionally be overridden by `DISTGL_OUTPUT_DIR` (the only
/// environment variable the tool reads).
#[derive(Debug, Default, Clone)]
pub struct SpecOverrides {
    pub name: Option<String>,
    pub n_nodes: Option<Vec<usize>>,
    pub n_signals: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    pub radii: Option<Vec<f64>>,
    pub radius_factors: Option<Vec<f64>>,
    pub removal_rate: Option<f64>,
    pub eta: Option<f64>,
    pub lr: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

/// Loads a spec from TOML and applies overrides (file < flags < env).
pub fn load_spec(config: &std::path::Path, overrides: &SpecOverrides) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(config)
        .with_context(|| format!("cannot read config {}", config.display()))?;
    let mut spec = ExperimentSpec::from_toml(&text)
        .with_context(|| format!("cannot parse config {}", config.display()))?;
    if let Some(v) = &overrides.name {
        spec.name = v.clone();
    }
    if let Some(v) = &overrides.n_nodes {
        spec.n_nodes = v.clone();
    }
    if let Some(v) = &overrides.n_signals {
        spec.n_signals = v.clone();
    }
    if let Some(v) = &overrides.seeds {
        spec.seeds = v.clone();
    }
    if let Some(v) = &overrides.radii {
        spec.radii = Some(v.clone());
    }
    if let Some(v) = &overrides.radius_factors {
        spec.radius_factors = Some(v.clone());
    }
    if let Some(v) = overrides.removal_rate {
        spec.removal_rate = v;
    }
    if let Some(v) = overrides.eta {
        spec.run.eta = v;
    }
    if let Some(v) = overrides.lr {
        spec.run.lr = v;
    }
    if let Some(v) = &overrides.output_dir {
        spec.output_dir = v.clone();
    }
    if let Ok(dir) = std::env::var("DISTGL_OUTPUT_DIR") {
        if !dir.is_empty() {
            spec.output_dir = PathBuf::from(dir);
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// `gen`: materializes every grid instance (graphs plus signals) to disk
/// under `<output_dir>/instances/`.
pub fn cmd_gen(spec: &ExperimentSpec) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for &n in &spec.n_nodes {
        for &radius in &spec.effective_radii(n) {
            for &m in &spec.n_signals {
                for &seed in &spec.seeds {
                    let mut cfg = distgl::GenConfig::new(n, seed);
                    cfg.radius = radius;
                    cfg.n_signals = m;
                    cfg.removal_rate = spec.removal_rate;
                    cfg.weight_low = spec.weight_low;
                    cfg.weight_high = spec.weight_high;
                    cfg.signal_noise = spec.signal_noise;
                    let g = std::sync::Arc::new(generate_comm_graph(&cfg)?);
                    let d = generate_data_graph(&g, &cfg)?;
                    let x = generate_smooth_signals(&d, &cfg)?;
                    let dir = spec
                        .output_dir
                        .join("instances")
                        .join(format!("n{n}_r{radius:.4}_m{m}_seed{seed}"));
                    io::write_comm_graph(&dir, &g)?;
                    io::write_data_graph(&dir, &d)?;
                    io::write_signals(&dir, &x)?;
                    dirs.push(dir);
                }
            }
        }
    }
    Ok(dirs)
}

/// `run`: a single grid point (any number of seeds).
pub fn cmd_run(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let radii = spec.effective_radii(spec.n_nodes[0]);
    if spec.n_nodes.len() != 1 || spec.n_signals.len() != 1 || radii.len() != 1 {
        bail!(
            "`run` expects a single grid point (one node count, one signal count, one radius); \
             use `sweep` for grids"
        );
    }
    Ok(run_experiment(spec)?)
}

/// `sweep`: the full grid.
pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    Ok(run_experiment(spec)?)
}

/// `verify`: the acceptance suite; returns the failing criteria count.
pub fn cmd_verify() -> usize {
    let results = distgl::acceptance::run_all();
    let mut failures = 0;
    for r in &results {
        println!("{}", r.line());
        if !r.passed {
            failures += 1;
        }
    }
    println!(
        "{}/{} criteria passed",
        results.len() - failures,
        results.len()
    );
    failures
}
