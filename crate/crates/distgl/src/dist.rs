//! Global learning loops and cost models.
//!
//! Three solvers share the edge-restricted weight space:
//! * [`run_distributed`]: per-node local convergence, one weight exchange
//!   per edge and direction per outer round, symmetry projection by
//!   averaging, until the projection stops moving weights.
//! * [`run_centralized`]: one optimizer over all edge weights, with the
//!   symmetry constraint holding at every step by construction; charged a
//!   hub aggregation cost model.
//! * [`run_baseline_logdegree`]: smoothness plus log-degree barrier plus L2,
//!   the classic centralized formulation, same cost model.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CommGraph, EdgeDifferences, GraphError, UpperWeights};
use crate::ledger::{MessageLedger, Phase, Transport};
use crate::node::{DataTermNormalization, NodeError, NodeState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};

pub use crate::node::OptimizerMode;

#[derive(Debug, Error)]
pub enum DistError {
    #[error(transparent)]
    Node(#[from] NodeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge differences are incomplete")]
    IncompleteDifferences,
    #[error("invalid run config: {0}")]
    InvalidConfig(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

/// What the hub sends back after a centralized solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownlinkVariant {
    /// Every node receives its incident learned weights, one scalar per
    /// communication neighbor.
    #[default]
    IncidentRow,
    /// Every node receives the full learned edge list.
    FullMatrix,
}

/// Knobs for the global solvers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalRunConfig {
    /// Target minimum weighted degree (input of the problem).
    pub eta: f64,
    pub lr: f64,
    /// Local convergence: relative objective change over `local_window`
    /// steps below this value.
    pub local_tol: f64,
    pub local_window: usize,
    /// Per-phase step budget for each node.
    pub local_step_cap: u64,
    /// Outer-loop convergence: largest weight change caused by the symmetry
    /// projection below this value.
    pub global_tol: f64,
    pub global_round_cap: usize,
    /// Step budget for the centralized solvers.
    pub central_step_cap: u64,
    pub optimizer_mode: OptimizerMode,
    pub data_normalization: DataTermNormalization,
    pub downlink: DownlinkVariant,
}

impl Default for GlobalRunConfig {
    fn default() -> Self {
        GlobalRunConfig {
            eta: 1.0,
            lr: 0.01,
            local_tol: 1e-6,
            local_window: 10,
            local_step_cap: 5000,
            global_tol: 1e-4,
            global_round_cap: 100,
            central_step_cap: 50_000,
            optimizer_mode: OptimizerMode::Adam,
            data_normalization: DataTermNormalization::NetworkSize,
            downlink: DownlinkVariant::IncidentRow,
        }
    }
}

impl GlobalRunConfig {
    pub fn validate(&self) -> Result<(), DistError> {
        let bad = |msg: &str| Err(DistError::InvalidConfig(msg.into()));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.eta) {
            return bad("eta must be > 0");
        }
        if !positive(self.lr) {
            return bad("lr must be > 0");
        }
        if !positive(self.local_tol) || !positive(self.global_tol) {
            return bad("tolerances must be > 0");
        }
        if self.local_window == 0 {
            return bad("local_window must be >= 1");
        }
        if self.local_step_cap == 0 || self.global_round_cap == 0 || self.central_step_cap == 0 {
            return bad("step and round caps must be >= 1");
        }
        Ok(())
    }
}

/// One outer-round summary.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub round: usize,
    /// Sum of local objectives right after the local phases, before any
    /// weight exchange.
    pub objective_after_local: f64,
    /// Global objective of the assembled symmetric weights after averaging
    /// and projection.
    pub objective: f64,
    /// Largest single-weight change caused by the symmetry projection (for
    /// the centralized solvers: since the previous trace entry).
    pub max_change: f64,
}

/// Output of a solver run: learned weights, cost accounting and trace.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub learned: UpperWeights,
    pub ledger: MessageLedger,
    /// Independent transport-layer recount of delivered scalars.
    pub transport_recount: u64,
    pub rounds_used: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

/// Arithmetic mean adopted by both endpoints of an edge.
#[inline]
pub fn symmetry_project(wi_j: f64, wj_i: f64) -> f64 {
    0.5 * (wi_j + wj_i)
}

fn per_node_scales(g: &CommGraph, normalization: DataTermNormalization) -> Vec<f64> {
    let n = g.n_nodes();
    (0..n)
        .map(|i| match normalization {
            DataTermNormalization::NetworkSize => 1.0 / n as f64,
            DataTermNormalization::NeighborhoodSize => {
                let d = g.degree(i);
                if d == 0 {
                    0.0
                } else {
                    1.0 / d as f64
                }
            }
        })
        .collect()
}

/// Objective the whole network minimizes, evaluated on symmetric weights:
/// the per-node scaled data terms (each edge counted from both endpoints)
/// plus the squared-hinge degree penalties.
pub fn global_objective(
    w: &UpperWeights,
    g: &CommGraph,
    z: &EdgeDifferences,
    eta: f64,
    normalization: DataTermNormalization,
) -> f64 {
    let scales = per_node_scales(g, normalization);
    let mut degrees = vec![0.0; g.n_nodes()];
    let mut data = 0.0;
    for &(i, j) in g.edges() {
        let wij = w.get(i, j);
        let zij = z.get(g, i, j).expect("complete edge differences");
        data += (scales[i] + scales[j]) * wij * zij;
        degrees[i] += wij;
        degrees[j] += wij;
    }
    let penalty: f64 = degrees
        .iter()
        .map(|&d| {
            let h = (eta - d).max(0.0);
            h * h
        })
        .sum();
    data + penalty
}

fn assemble(g: &CommGraph, nodes: &[NodeState]) -> UpperWeights {
    let mut w = UpperWeights::zeros(g.n_nodes());
    for &(i, j) in g.edges() {
        w.set(i, j, nodes[i].weight_to(j));
    }
    w
}

/// Runs the distributed algorithm: alternating local convergence, weight
/// exchange (two scalars per edge per round), symmetry averaging and
/// reprojection, until the averaging no longer moves any weight by more
/// than `global_tol` or the round cap is hit (reported via `converged`).
pub fn run_distributed(
    g: &CommGraph,
    z: &EdgeDifferences,
    cfg: &GlobalRunConfig,
    transport: &mut Transport,
) -> Result<RunResult, DistError> {
    let order: Vec<usize> = (0..g.n_nodes()).collect();
    run_distributed_with_order(g, z, cfg, transport, &order)
}

/// [`run_distributed`] with an explicit node processing order; the result
/// must not depend on it (nodes only interact through the per-edge
/// exchanges, which are commutative reductions).
pub fn run_distributed_with_order(
    g: &CommGraph,
    z: &EdgeDifferences,
    cfg: &GlobalRunConfig,
    transport: &mut Transport,
    order: &[usize],
) -> Result<RunResult, DistError> {
    cfg.validate()?;
    if !z.is_complete() {
        return Err(DistError::IncompleteDifferences);
    }
    let n = g.n_nodes();
    let mut nodes: Vec<NodeState> = (0..n)
        .map(|i| {
            NodeState::new(
                i,
                g.neighbors(i).to_vec(),
                z.node_values(i),
                cfg.eta,
                n,
                cfg.data_normalization,
            )
        })
        .collect();

    let mut trace = Vec::new();
    let mut converged = false;
    let mut rounds_used = 0;

    for round in 1..=cfg.global_round_cap {
        rounds_used = round;

        for &i in order {
            let node = &mut nodes[i];
            node.begin_phase(cfg.local_window);
            while !node.local_converged(cfg.local_tol, cfg.local_window, cfg.local_step_cap) {
                node.local_step(cfg.lr, cfg.optimizer_mode)?;
            }
        }
        let objective_after_local: f64 = nodes.iter().map(|s| s.local_objective()).sum();

        // Weight exchange and symmetry projection, one scalar per direction.
        let mut max_change = 0.0f64;
        for &(i, j) in g.edges() {
            let wi = nodes[i].weight_to(j);
            let wj = nodes[j].weight_to(i);
            transport.send(Phase::WeightExchange, 1);
            transport.deliver(1);
            transport.send(Phase::WeightExchange, 1);
            transport.deliver(1);
            let avg = symmetry_project(wi, wj);
            max_change = max_change.max((wi - avg).abs()).max((wj - avg).abs());
            nodes[i].set_weight_to(j, avg);
            nodes[j].set_weight_to(i, avg);
        }
        for &i in order {
            nodes[i].project_local();
        }

        let assembled = assemble(g, &nodes);
        let objective = global_objective(&assembled, g, z, cfg.eta, cfg.data_normalization);
        if !objective.is_finite() || !max_change.is_finite() {
            return Err(DistError::NonFinite(format!(
                "objective {objective} / max change {max_change} in round {round}"
            )));
        }
        trace.push(TraceEntry {
            round,
            objective_after_local,
            objective,
            max_change,
        });
        if max_change < cfg.global_tol {
            converged = true;
            break;
        }
    }

    let learned = assemble(g, &nodes);
    learned.validate(Some(g))?;
    Ok(RunResult {
        learned,
        ledger: transport.ledger().clone(),
        transport_recount: transport.delivered(),
        rounds_used,
        converged,
        trace,
    })
}

/// Hub choice and cost of the centralized schemes: all signals travel to a
/// node with minimum eccentricity (ties to the lowest id), results travel
/// back per the downlink variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CentralizedCost {
    pub center: usize,
    pub up: u64,
    pub down: u64,
}

impl CentralizedCost {
    pub fn total(&self) -> u64 {
        self.up + self.down
    }
}

/// Computes the centralized cost model for a connected graph.
pub fn centralized_cost(
    g: &CommGraph,
    n_signals: usize,
    downlink: DownlinkVariant,
) -> CentralizedCost {
    let n = g.n_nodes();
    if n == 0 {
        return CentralizedCost {
            center: 0,
            up: 0,
            down: 0,
        };
    }
    let mut center = 0;
    let mut best_ecc = usize::MAX;
    for i in 0..n {
        let hops = g.hop_distances(i);
        let ecc = hops.iter().copied().max().unwrap_or(0);
        assert!(
            ecc != usize::MAX,
            "centralized cost model requires a connected graph"
        );
        if ecc < best_ecc {
            best_ecc = ecc;
            center = i;
        }
    }
    let hops = g.hop_distances(center);
    let up: u64 = hops.iter().map(|&h| h as u64 * n_signals as u64).sum();
    let down: u64 = match downlink {
        DownlinkVariant::IncidentRow => (0..n).map(|i| hops[i] as u64 * g.degree(i) as u64).sum(),
        DownlinkVariant::FullMatrix => (0..n).map(|i| hops[i] as u64 * g.n_edges() as u64).sum(),
    };
    CentralizedCost { center, up, down }
}

/// Adam state over the edge-weight vector, shared by the centralized
/// solvers.
struct EdgeOptimizer {
    w: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl EdgeOptimizer {
    fn new(n_edges: usize) -> Self {
        EdgeOptimizer {
            w: vec![1.0; n_edges],
            m: vec![0.0; n_edges],
            v: vec![0.0; n_edges],
            step: 0,
        }
    }

    fn step(&mut self, grad: &[f64], lr: f64, mode: OptimizerMode) {
        self.step += 1;
        match mode {
            OptimizerMode::Sgd => {
                for (w, g) in self.w.iter_mut().zip(grad) {
                    *w -= lr * g;
                }
            }
            OptimizerMode::Adam => {
                let t = self.step as i32;
                let bc1 = 1.0 - ADAM_BETA1.powi(t);
                let bc2 = 1.0 - ADAM_BETA2.powi(t);
                for (k, w) in self.w.iter_mut().enumerate() {
                    let g = grad[k];
                    self.m[k] = ADAM_BETA1 * self.m[k] + (1.0 - ADAM_BETA1) * g;
                    self.v[k] = ADAM_BETA2 * self.v[k] + (1.0 - ADAM_BETA2) * g * g;
                    let m_hat = self.m[k] / bc1;
                    let v_hat = self.v[k] / bc2;
                    *w -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
            }
        }
        for w in &mut self.w {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
    }
}

/// Driver shared by [`run_centralized`] and [`run_baseline_logdegree`]:
/// projected Adam over the edge weights with a windowed objective stopping
/// rule and the hub cost model charged to the ledger.
fn run_central_solver<FObj, FGrad>(
    g: &CommGraph,
    cfg: &GlobalRunConfig,
    n_signals: usize,
    transport: &mut Transport,
    mut objective: FObj,
    mut gradient: FGrad,
) -> Result<RunResult, DistError>
where
    FObj: FnMut(&[f64]) -> f64,
    FGrad: FnMut(&[f64], &mut [f64]),
{
    cfg.validate()?;
    let cost = centralized_cost(g, n_signals, cfg.downlink);
    transport.send(Phase::CentralUp, cost.up);
    transport.deliver(cost.up);

    let n_edges = g.n_edges();
    let mut opt = EdgeOptimizer::new(n_edges);
    let mut grad = vec![0.0; n_edges];
    let mut history: VecDeque<f64> = VecDeque::new();
    history.push_back(objective(&opt.w));
    let mut trace = Vec::new();
    let mut last_traced = opt.w.clone();
    let mut converged = false;
    let mut steps = 0usize;

    while (steps as u64) < cfg.central_step_cap {
        gradient(&opt.w, &mut grad);
        for (k, gk) in grad.iter().enumerate() {
            if !gk.is_finite() {
                return Err(DistError::NonFinite(format!(
                    "gradient component {k} at step {steps}"
                )));
            }
        }
        opt.step(&grad, cfg.lr, cfg.optimizer_mode);
        steps += 1;
        let obj = objective(&opt.w);
        if !obj.is_finite() {
            return Err(DistError::NonFinite(format!("objective at step {steps}")));
        }
        history.push_back(obj);
        while history.len() > cfg.local_window + 1 {
            history.pop_front();
        }
        if steps.is_multiple_of(cfg.local_window) {
            let max_change = opt
                .w
                .iter()
                .zip(&last_traced)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            trace.push(TraceEntry {
                round: steps,
                objective_after_local: obj,
                objective: obj,
                max_change,
            });
            last_traced = opt.w.clone();
        }
        if history.len() == cfg.local_window + 1 {
            let oldest = *history.front().unwrap();
            let newest = *history.back().unwrap();
            if (newest - oldest).abs() <= cfg.local_tol * (1.0 + oldest.abs()) {
                converged = true;
                break;
            }
        }
    }

    transport.send(Phase::CentralDown, cost.down);
    transport.deliver(cost.down);

    let mut learned = UpperWeights::zeros(g.n_nodes());
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        learned.set(i, j, opt.w[k]);
    }
    learned.validate(Some(g))?;
    Ok(RunResult {
        learned,
        ledger: transport.ledger().clone(),
        transport_recount: transport.delivered(),
        rounds_used: steps,
        converged,
        trace,
    })
}

/// Centralized solve of the same objective the distributed loop targets;
/// the symmetry constraint holds at every step because a single weight per
/// edge is optimized.
pub fn run_centralized(
    g: &CommGraph,
    z: &EdgeDifferences,
    cfg: &GlobalRunConfig,
    n_signals: usize,
    transport: &mut Transport,
) -> Result<RunResult, DistError> {
    if !z.is_complete() {
        return Err(DistError::IncompleteDifferences);
    }
    let edges = g.edges().to_vec();
    let z_e: Vec<f64> = edges
        .iter()
        .map(|&(i, j)| z.get(g, i, j).expect("complete"))
        .collect();
    let scales = per_node_scales(g, cfg.data_normalization);
    let n = g.n_nodes();
    let eta = cfg.eta;

    let edges_o = edges.clone();
    let z_o = z_e.clone();
    let scales_o = scales.clone();
    let objective = move |w: &[f64]| -> f64 {
        let mut d = vec![0.0; n];
        let mut data = 0.0;
        for (k, &(i, j)) in edges_o.iter().enumerate() {
            data += (scales_o[i] + scales_o[j]) * w[k] * z_o[k];
            d[i] += w[k];
            d[j] += w[k];
        }
        let penalty: f64 = d
            .iter()
            .map(|&di| {
                let h = (eta - di).max(0.0);
                h * h
            })
            .sum();
        data + penalty
    };
    let gradient = move |w: &[f64], out: &mut [f64]| {
        let mut d = vec![0.0; n];
        for (k, &(i, j)) in edges.iter().enumerate() {
            d[i] += w[k];
            d[j] += w[k];
        }
        let hinge: Vec<f64> = d.iter().map(|&di| (eta - di).max(0.0)).collect();
        for (k, &(i, j)) in edges.iter().enumerate() {
            out[k] = (scales[i] + scales[j]) * z_e[k] - 2.0 * hinge[i] - 2.0 * hinge[j];
        }
    };

    run_central_solver(g, cfg, n_signals, transport, objective, gradient)
}

/// Simplified centralized log-degree baseline: smoothness plus a log-barrier
/// on degrees plus L2 regularization (symmetric-matrix conventions: the data
/// term counts both orientations and the L2 term is the matrix Frobenius
/// norm). Degrees are clamped at 1e-12 inside the barrier.
pub fn run_baseline_logdegree(
    g: &CommGraph,
    z: &EdgeDifferences,
    alpha: f64,
    beta: f64,
    cfg: &GlobalRunConfig,
    n_signals: usize,
    transport: &mut Transport,
) -> Result<RunResult, DistError> {
    if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
        return Err(DistError::InvalidConfig(
            "baseline alpha and beta must be > 0".into(),
        ));
    }
    if !z.is_complete() {
        return Err(DistError::IncompleteDifferences);
    }
    const DEG_FLOOR: f64 = 1e-12;
    let edges = g.edges().to_vec();
    let z_e: Vec<f64> = edges
        .iter()
        .map(|&(i, j)| z.get(g, i, j).expect("complete"))
        .collect();
    let n = g.n_nodes();

    let edges_o = edges.clone();
    let z_o = z_e.clone();
    let objective = move |w: &[f64]| -> f64 {
        let mut d = vec![0.0; n];
        let mut data = 0.0;
        let mut l2 = 0.0;
        for (k, &(i, j)) in edges_o.iter().enumerate() {
            data += 2.0 * w[k] * z_o[k];
            l2 += 2.0 * w[k] * w[k];
            d[i] += w[k];
            d[j] += w[k];
        }
        let barrier: f64 = d.iter().map(|&di| di.max(DEG_FLOOR).ln()).sum();
        data - alpha * barrier + beta * l2
    };
    let gradient = move |w: &[f64], out: &mut [f64]| {
        let mut d = vec![0.0; n];
        for (k, &(i, j)) in edges.iter().enumerate() {
            d[i] += w[k];
            d[j] += w[k];
        }
        for (k, &(i, j)) in edges.iter().enumerate() {
            out[k] = 2.0 * z_e[k] - alpha * (1.0 / d[i].max(DEG_FLOOR) + 1.0 / d[j].max(DEG_FLOOR))
                + 4.0 * beta * w[k];
        }
    };

    run_central_solver(g, cfg, n_signals, transport, objective, gradient)
}
