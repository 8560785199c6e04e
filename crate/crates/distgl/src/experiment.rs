//! Configuration-driven experiment runner: sweeps a grid of instance sizes,
//! radii, signal counts and seeds, runs the three methods on every point,
//! and appends one CSV row per (method, grid point, seed).
//!
//! Output files under the spec's output directory:
//! * `results.csv` — one row per run (schema below).
//! * `summary.csv` — per grid point and method, means over seeds.
//! * `config_echo.toml` — the full effective spec, for provenance.
//!
//! Reruns of the same spec produce byte-identical CSVs: generation is
//! seed-driven, iteration order is fixed, and no timestamps are written.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{
    run_baseline_logdegree, run_centralized, run_distributed, GlobalRunConfig, RunResult,
};
use crate::graph::{edge_differences, CommGraph, DataGraph, SignalMatrix};
use crate::init::run_initialization;
use crate::ledger::{Phase, Transport};
use crate::metrics::MetricsReport;
use crate::synth::{generate_comm_graph, generate_data_graph, generate_smooth_signals, GenConfig};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("failed to encode config echo: {0}")]
    Echo(#[from] toml::ser::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SparseSweep,
    DenseSweep,
    SparsityCrossover,
    SignalSweep,
    Single,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::SparseSweep => "sparse_sweep",
            ExperimentKind::DenseSweep => "dense_sweep",
            ExperimentKind::SparsityCrossover => "sparsity_crossover",
            ExperimentKind::SignalSweep => "signal_sweep",
            ExperimentKind::Single => "single",
        }
    }

    /// Radius factors (multiplying 1/sqrt(N)) used when the spec does not
    /// override them.
    fn default_radius_factors(&self) -> Vec<f64> {
        match self {
            ExperimentKind::DenseSweep => vec![3.0],
            ExperimentKind::SparsityCrossover => {
                vec![2.0, 2.2, 2.4, 2.6, 2.8, 3.0, 3.2, 3.4, 3.6]
            }
            _ => vec![2.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Distributed,
    Centralized,
    Baseline,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Distributed, Method::Centralized, Method::Baseline];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Distributed => "distributed",
            Method::Centralized => "centralized",
            Method::Baseline => "baseline",
        }
    }
}

/// Full description of an experiment grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub n_nodes: Vec<usize>,
    /// Radius factors c, giving radius c/sqrt(N). Ignored when `radii` is
    /// set; defaults depend on the experiment kind.
    pub radius_factors: Option<Vec<f64>>,
    /// Absolute radii, overriding `radius_factors`.
    pub radii: Option<Vec<f64>>,
    pub removal_rate: f64,
    pub n_signals: Vec<usize>,
    pub seeds: Vec<u64>,
    pub weight_low: f64,
    pub weight_high: f64,
    pub signal_noise: f64,
    pub baseline_alpha: f64,
    pub baseline_beta: f64,
    pub run: GlobalRunConfig,
    pub output_dir: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            name: "experiment".into(),
            kind: ExperimentKind::Single,
            n_nodes: vec![50],
            radius_factors: None,
            radii: None,
            removal_rate: 0.5,
            n_signals: vec![100],
            seeds: vec![1],
            weight_low: 0.1,
            weight_high: 1.0,
            signal_noise: 0.1,
            baseline_alpha: 1.0,
            baseline_beta: 0.1,
            run: GlobalRunConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::InvalidSpec(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: &str| Err(ExperimentError::InvalidSpec(msg.into()));
        if self.n_nodes.is_empty() || self.n_signals.is_empty() || self.seeds.is_empty() {
            return bad("sweep lists must be nonempty");
        }
        let mut seen = std::collections::BTreeSet::new();
        for &s in &self.seeds {
            if !seen.insert(s) {
                return bad("seeds must be distinct");
            }
        }
        if let Some(radii) = &self.radii {
            if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                return bad("explicit radii must be nonempty and positive");
            }
        }
        if let Some(factors) = &self.radius_factors {
            if factors.is_empty() || factors.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
                return bad("radius factors must be nonempty and positive");
            }
        }
        if !(0.0..1.0).contains(&self.removal_rate) {
            return bad("removal_rate must lie in [0, 1)");
        }
        self.run
            .validate()
            .map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
        Ok(())
    }

    /// Radii swept for a given node count.
    pub fn effective_radii(&self, n: usize) -> Vec<f64> {
        if let Some(radii) = &self.radii {
            return radii.clone();
        }
        let factors = self
            .radius_factors
            .clone()
            .unwrap_or_else(|| self.kind.default_radius_factors());
        factors.iter().map(|c| c / (n as f64).sqrt()).collect()
    }

    fn gen_config(&self, n: usize, radius: f64, m: usize, seed: u64) -> GenConfig {
        GenConfig {
            n_nodes: n,
            radius,
            removal_rate: self.removal_rate,
            n_signals: m,
            seed,
            weight_low: self.weight_low,
            weight_high: self.weight_high,
            signal_noise: self.signal_noise,
            retry_cap: 1000,
        }
    }
}

/// One `results.csv` row. Optional columns stay empty on failed runs or
/// undefined metrics.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub kind: &'static str,
    pub method: &'static str,
    pub n_nodes: usize,
    pub radius: f64,
    pub mean_degree: Option<f64>,
    pub removal_rate: f64,
    pub n_signals: usize,
    pub seed: u64,
    pub frobenius: Option<f64>,
    pub normalized_frobenius: Option<f64>,
    pub wasserstein: Option<f64>,
    pub wasserstein_truth_support: Option<f64>,
    pub total_messages: Option<u64>,
    pub init_signals: Option<u64>,
    pub init_results: Option<u64>,
    pub weight_exchange: Option<u64>,
    pub central_up: Option<u64>,
    pub central_down: Option<u64>,
    pub init_rounds: Option<usize>,
    pub rounds_used: Option<usize>,
    pub converged: Option<bool>,
    pub error: String,
}

impl ResultRow {
    fn empty(
        spec: &ExperimentSpec,
        n: usize,
        radius: f64,
        m: usize,
        seed: u64,
        method: Method,
    ) -> Self {
        ResultRow {
            experiment: spec.name.clone(),
            kind: spec.kind.label(),
            method: method.label(),
            n_nodes: n,
            radius,
            mean_degree: None,
            removal_rate: spec.removal_rate,
            n_signals: m,
            seed,
            frobenius: None,
            normalized_frobenius: None,
            wasserstein: None,
            wasserstein_truth_support: None,
            total_messages: None,
            init_signals: None,
            init_results: None,
            weight_exchange: None,
            central_up: None,
            central_down: None,
            init_rounds: None,
            rounds_used: None,
            converged: None,
            error: String::new(),
        }
    }
}

/// Result of running one method on one generated instance.
pub struct MethodOutcome {
    pub result: RunResult,
    pub report: MetricsReport,
    pub init_rounds: Option<usize>,
}

/// Runs one method end to end on an instance (initialization included for
/// the distributed method).
pub fn run_method(
    method: Method,
    g: &Arc<CommGraph>,
    d: &DataGraph,
    x: &SignalMatrix,
    run_cfg: &GlobalRunConfig,
    baseline_alpha: f64,
    baseline_beta: f64,
) -> Result<MethodOutcome, String> {
    let mut transport = Transport::new();
    let (result, init_rounds) = match method {
        Method::Distributed => {
            let init = run_initialization(g, x, &mut transport).map_err(|e| e.to_string())?;
            let res = run_distributed(g, &init.differences, run_cfg, &mut transport)
                .map_err(|e| e.to_string())?;
            (res, Some(init.rounds))
        }
        Method::Centralized => {
            let z = edge_differences(x, g).map_err(|e| e.to_string())?;
            let res = run_centralized(g, &z, run_cfg, x.n_signals(), &mut transport)
                .map_err(|e| e.to_string())?;
            (res, None)
        }
        Method::Baseline => {
            let z = edge_differences(x, g).map_err(|e| e.to_string())?;
            let res = run_baseline_logdegree(
                g,
                &z,
                baseline_alpha,
                baseline_beta,
                run_cfg,
                x.n_signals(),
                &mut transport,
            )
            .map_err(|e| e.to_string())?;
            (res, None)
        }
    };
    if result.transport_recount != result.ledger.total() {
        return Err(format!(
            "ledger mismatch: charged {} but delivered {}",
            result.ledger.total(),
            result.transport_recount
        ));
    }
    let report = MetricsReport::compute(&result.learned, d.weights(), g, &result.ledger, run_cfg)
        .map_err(|e| e.to_string())?;
    Ok(MethodOutcome {
        result,
        report,
        init_rounds,
    })
}

/// Everything `run_experiment` leaves behind.
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, ExperimentError> {
    spec.validate()?;
    fs::create_dir_all(&spec.output_dir)?;

    let mut rows: Vec<ResultRow> = Vec::new();
    for &n in &spec.n_nodes {
        for &radius in &spec.effective_radii(n) {
            for &m in &spec.n_signals {
                for &seed in &spec.seeds {
                    rows.extend(run_grid_point(spec, n, radius, m, seed));
                }
            }
        }
    }

    let results_path = spec.output_dir.join("results.csv");
    let mut writer = csv::Writer::from_path(&results_path)?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;

    let summary_path = spec.output_dir.join("summary.csv");
    write_summary(&summary_path, &rows)?;

    let echo = toml::to_string_pretty(spec)?;
    fs::write(spec.output_dir.join("config_echo.toml"), echo)?;

    Ok(ExperimentOutput {
        rows,
        results_path,
        summary_path,
    })
}

fn run_grid_point(
    spec: &ExperimentSpec,
    n: usize,
    radius: f64,
    m: usize,
    seed: u64,
) -> Vec<ResultRow> {
    let cfg = spec.gen_config(n, radius, m, seed);
    let instance = (|| {
        let g = Arc::new(generate_comm_graph(&cfg)?);
        let d = generate_data_graph(&g, &cfg)?;
        let x = generate_smooth_signals(&d, &cfg)?;
        Ok::<_, crate::synth::GenError>((g, d, x))
    })();

    let (g, d, x) = match instance {
        Ok(t) => t,
        Err(e) => {
            return Method::ALL
                .iter()
                .map(|&method| {
                    let mut row = ResultRow::empty(spec, n, radius, m, seed, method);
                    row.error = format!("generation failed: {e}");
                    row
                })
                .collect();
        }
    };

    Method::ALL
        .iter()
        .map(|&method| {
            let mut row = ResultRow::empty(spec, n, radius, m, seed, method);
            row.mean_degree = Some(g.mean_degree());
            match run_method(
                method,
                &g,
                &d,
                &x,
                &spec.run,
                spec.baseline_alpha,
                spec.baseline_beta,
            ) {
                Ok(outcome) => {
                    row.frobenius = Some(outcome.report.frobenius);
                    row.normalized_frobenius = outcome.report.normalized_frobenius;
                    row.wasserstein = Some(outcome.report.wasserstein);
                    row.wasserstein_truth_support = Some(outcome.report.wasserstein_truth_support);
                    row.total_messages = Some(outcome.result.ledger.total());
                    row.init_signals = Some(outcome.result.ledger.count(Phase::InitSignals));
                    row.init_results = Some(outcome.result.ledger.count(Phase::InitResults));
                    row.weight_exchange = Some(outcome.result.ledger.count(Phase::WeightExchange));
                    row.central_up = Some(outcome.result.ledger.count(Phase::CentralUp));
                    row.central_down = Some(outcome.result.ledger.count(Phase::CentralDown));
                    row.init_rounds = outcome.init_rounds;
                    row.rounds_used = Some(outcome.result.rounds_used);
                    row.converged = Some(outcome.result.converged);
                }
                Err(e) => {
                    row.error = e;
                }
            }
            row
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct SummaryRow {
    experiment: String,
    kind: &'static str,
    method: &'static str,
    n_nodes: usize,
    radius: f64,
    n_signals: usize,
    n_runs: usize,
    n_failed: usize,
    mean_degree: Option<f64>,
    mean_frobenius: Option<f64>,
    mean_normalized_frobenius: Option<f64>,
    mean_wasserstein: Option<f64>,
    mean_total_messages: Option<f64>,
    mean_rounds: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn write_summary(path: &PathBuf, rows: &[ResultRow]) -> Result<(), ExperimentError> {
    // Group on (n, radius, m, method); f64 radii ordered via their bit
    // pattern (all positive here, so the order matches numeric order).
    let mut groups: BTreeMap<(usize, u64, usize, &'static str), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.n_nodes, row.radius.to_bits(), row.n_signals, row.method))
            .or_default()
            .push(row);
    }
    let mut writer = csv::Writer::from_path(path)?;
    for ((n, radius_bits, m, method), group) in groups {
        let ok: Vec<&&ResultRow> = group.iter().filter(|r| r.error.is_empty()).collect();
        let collect = |f: &dyn Fn(&ResultRow) -> Option<f64>| -> Vec<f64> {
            ok.iter().filter_map(|r| f(r)).collect()
        };
        let row = SummaryRow {
            experiment: group[0].experiment.clone(),
            kind: group[0].kind,
            method,
            n_nodes: n,
            radius: f64::from_bits(radius_bits),
            n_signals: m,
            n_runs: group.len(),
            n_failed: group.len() - ok.len(),
            mean_degree: mean(&collect(&|r| r.mean_degree)),
            mean_frobenius: mean(&collect(&|r| r.frobenius)),
            mean_normalized_frobenius: mean(&collect(&|r| r.normalized_frobenius)),
            mean_wasserstein: mean(&collect(&|r| r.wasserstein)),
            mean_total_messages: mean(&collect(&|r| r.total_messages.map(|v| v as f64))),
            mean_rounds: mean(&collect(&|r| r.rounds_used.map(|v| v as f64))),
        };
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec(dir: &std::path::Path) -> ExperimentSpec {
        ExperimentSpec {
            name: "tiny".into(),
            n_nodes: vec![12],
            n_signals: vec![8],
            seeds: vec![1, 2],
            radii: Some(vec![0.6]),
            output_dir: dir.to_path_buf(),
            ..Default::default()
        }
    }

    #[test]
    fn runs_grid_and_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny_spec(dir.path());
        let out = run_experiment(&spec).unwrap();
        assert_eq!(out.rows.len(), 2 * 3); // 2 seeds x 3 methods
        assert!(out.rows.iter().all(|r| r.error.is_empty()));
        assert!(out.results_path.exists());
        assert!(out.summary_path.exists());
        assert!(dir.path().join("config_echo.toml").exists());
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let mut spec1 = tiny_spec(dir1.path());
        spec1.seeds = vec![7];
        let mut spec2 = spec1.clone();
        spec2.output_dir = dir2.path().to_path_buf();
        run_experiment(&spec1).unwrap();
        run_experiment(&spec2).unwrap();
        let a = fs::read(dir1.path().join("results.csv")).unwrap();
        let b = fs::read(dir2.path().join("results.csv")).unwrap();
        assert_eq!(a, b);
        let a = fs::read(dir1.path().join("summary.csv")).unwrap();
        let b = fs::read(dir2.path().join("summary.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generation_failure_is_recorded_per_row() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = tiny_spec(dir.path());
        spec.radii = Some(vec![1e-5]); // unconnectable
        let out = run_experiment(&spec).unwrap();
        assert!(out
            .rows
            .iter()
            .all(|r| r.error.contains("generation failed")));
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = tiny_spec(std::path::Path::new("out"));
        let text = toml::to_string_pretty(&spec).unwrap();
        let back = ExperimentSpec::from_toml(&text).unwrap();
        assert_eq!(back.n_nodes, spec.n_nodes);
        assert_eq!(back.seeds, spec.seeds);
        assert_eq!(back.radii, spec.radii);
    }

    #[test]
    fn distinct_seeds_enforced() {
        let mut spec = tiny_spec(std::path::Path::new("out"));
        spec.seeds = vec![1, 1];
        assert!(spec.validate().is_err());
    }
}
