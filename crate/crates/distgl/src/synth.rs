//! Synthetic instances: random geometric communication graphs, ground-truth
//! data graphs obtained by random edge removal, and smooth signals drawn
//! from a Gaussian whose covariance is the Laplacian pseudoinverse plus a
//! noise floor.
//!
//! Everything is driven by a single 64-bit seed through ChaCha8 streams
//! (stream 0: positions, 1: edge removal, 2: edge weights, 3: signals), so
//! a `(config, seed)` pair reproduces the same instance bit for bit.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{laplacian_from_weights, CommGraph, DataGraph, SignalMatrix, UpperWeights};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error(
        "no connected geometric graph after {attempts} attempts \
         (n={n}, radius={radius}): radius too small for this node count"
    )]
    RadiusTooSmall {
        n: usize,
        radius: f64,
        attempts: usize,
    },
}

/// Parameters for synthetic instance generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_nodes: usize,
    /// Connection radius in unit-square units.
    pub radius: f64,
    /// Fraction of communication edges removed from the data graph.
    pub removal_rate: f64,
    pub n_signals: usize,
    pub seed: u64,
    /// Ground-truth edge weights are uniform on [weight_low, weight_high].
    pub weight_low: f64,
    pub weight_high: f64,
    /// Noise floor added to the signal covariance.
    pub signal_noise: f64,
    /// Connected-graph regeneration attempts before giving up.
    pub retry_cap: usize,
}

impl GenConfig {
    /// Defaults mirroring the sparse experimental regime: radius 2/sqrt(N),
    /// removal rate 0.5, weights on [0.1, 1.0], noise floor 0.1.
    pub fn new(n_nodes: usize, seed: u64) -> Self {
        GenConfig {
            n_nodes,
            radius: default_radius(n_nodes),
            removal_rate: 0.5,
            n_signals: 100,
            seed,
            weight_low: 0.1,
            weight_high: 1.0,
            signal_noise: 0.1,
            retry_cap: 1000,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.n_nodes == 0 {
            return Err(GenError::InvalidConfig("n_nodes must be positive".into()));
        }
        if !positive(self.radius) {
            return Err(GenError::InvalidConfig("radius must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.removal_rate) {
            return Err(GenError::InvalidConfig(
                "removal_rate must lie in [0, 1)".into(),
            ));
        }
        if self.n_signals == 0 {
            return Err(GenError::InvalidConfig("n_signals must be >= 1".into()));
        }
        if !positive(self.weight_low) {
            return Err(GenError::InvalidConfig("weight_low must be > 0".into()));
        }
        if self.weight_high < self.weight_low {
            return Err(GenError::InvalidConfig(
                "weight_high must be >= weight_low".into(),
            ));
        }
        if self.signal_noise < 0.0 {
            return Err(GenError::InvalidConfig("signal_noise must be >= 0".into()));
        }
        if self.retry_cap == 0 {
            return Err(GenError::InvalidConfig("retry_cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sparse-regime radius 2/sqrt(N).
pub fn default_radius(n_nodes: usize) -> f64 {
    2.0 / (n_nodes as f64).sqrt()
}

/// Dense-regime radius 3/sqrt(N).
pub fn dense_radius(n_nodes: usize) -> f64 {
    3.0 / (n_nodes as f64).sqrt()
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws node positions i.i.d. uniform on the unit square and connects pairs
/// within `radius`, redrawing from the same seeded stream until the graph is
/// connected.
pub fn generate_comm_graph(cfg: &GenConfig) -> Result<CommGraph, GenError> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, 0);
    for _ in 0..cfg.retry_cap {
        let positions: Vec<[f64; 2]> = (0..cfg.n_nodes)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let g = CommGraph::from_positions(positions, cfg.radius);
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GenError::RadiusTooSmall {
        n: cfg.n_nodes,
        radius: cfg.radius,
        attempts: cfg.retry_cap,
    })
}

/// Removes floor(removal_rate * |E|) uniformly chosen communication edges and
/// assigns i.i.d. uniform weights on [weight_low, weight_high] to the
/// survivors (visited in canonical edge order).
pub fn generate_data_graph(g: &Arc<CommGraph>, cfg: &GenConfig) -> Result<DataGraph, GenError> {
    cfg.validate()?;
    let n_edges = g.n_edges();
    let n_remove = (cfg.removal_rate * n_edges as f64).floor() as usize;

    // Partial Fisher-Yates over edge indices: the first n_remove slots are
    // the removed sample, drawn without replacement.
    let mut order: Vec<usize> = (0..n_edges).collect();
    let mut removal_rng = stream_rng(cfg.seed, 1);
    for t in 0..n_remove {
        let pick = removal_rng.gen_range(t..n_edges);
        order.swap(t, pick);
    }
    let mut removed = vec![false; n_edges];
    for &k in &order[..n_remove] {
        removed[k] = true;
    }

    let mut weight_rng = stream_rng(cfg.seed, 2);
    let mut weights = UpperWeights::zeros(g.n_nodes());
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        if !removed[k] {
            weights.set(i, j, weight_rng.gen_range(cfg.weight_low..=cfg.weight_high));
        }
    }
    Ok(DataGraph::new(weights, Arc::clone(g)).expect("generated weights span the source graph"))
}

/// Draws `n_signals` columns i.i.d. from a zero-mean Gaussian with covariance
/// pinv(L) + noise * I, where L is the Laplacian of the ground-truth weights.
/// Sampling goes through the eigendecomposition L = V diag(lambda) V^T:
/// each column is V (s .* g) with s_k = sqrt(pinv(lambda_k) + noise) and g
/// standard normal, so eigenvalues at (numerical) zero contribute nothing
/// beyond the noise floor.
pub fn generate_smooth_signals(d: &DataGraph, cfg: &GenConfig) -> Result<SignalMatrix, GenError> {
    cfg.validate()?;
    let n = d.weights().n_nodes();
    let lap = laplacian_from_weights(d.weights());
    let eig = lap.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let tol = 1e-9 * lambda_max.max(1.0);
    let scale: DVector<f64> = eig
        .eigenvalues
        .map(|l| (if l > tol { 1.0 / l } else { 0.0 } + cfg.signal_noise).sqrt());

    let mut rng = stream_rng(cfg.seed, 3);
    let m = cfg.n_signals;
    // Row-major N x M storage, filled column by column.
    let mut values = vec![0.0f64; n * m];
    let mut coeff = DVector::zeros(n);
    for col in 0..m {
        for k in 0..n {
            let g: f64 = rng.sample(StandardNormal);
            coeff[k] = scale[k] * g;
        }
        let x = &eig.eigenvectors * &coeff;
        for i in 0..n {
            values[i * m + col] = x[i];
        }
    }
    Ok(SignalMatrix::from_raw(n, m, values))
}

/// Convenience wrapper: communication graph, data graph and signals from one
/// config.
pub fn generate_instance(
    cfg: &GenConfig,
) -> Result<(Arc<CommGraph>, DataGraph, SignalMatrix), GenError> {
    let g = Arc::new(generate_comm_graph(cfg)?);
    let d = generate_data_graph(&g, cfg)?;
    let x = generate_smooth_signals(&d, cfg)?;
    Ok((g, d, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::smoothness;
    use rand::seq::SliceRandom;

    #[test]
    fn two_nodes_radius_two_always_connected() {
        // Unit-square diameter sqrt(2) < 2, so any two nodes connect.
        for seed in 0..20 {
            let mut cfg = GenConfig::new(2, seed);
            cfg.radius = 2.0;
            let g = generate_comm_graph(&cfg).unwrap();
            assert!(g.is_connected());
            assert_eq!(g.n_edges(), 1);
        }
    }

    #[test]
    fn comm_graph_is_deterministic() {
        let cfg = GenConfig::new(150, 42);
        let a = generate_comm_graph(&cfg).unwrap();
        let b = generate_comm_graph(&cfg).unwrap();
        assert!(a.is_connected());
        assert_eq!(a.positions(), b.positions());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn radius_too_small_gives_diagnostic() {
        let mut cfg = GenConfig::new(50, 1);
        cfg.radius = 1e-4;
        cfg.retry_cap = 5;
        match generate_comm_graph(&cfg) {
            Err(GenError::RadiusTooSmall { n, attempts, .. }) => {
                assert_eq!(n, 50);
                assert_eq!(attempts, 5);
            }
            other => panic!("expected RadiusTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn sparse_regime_mean_degree_is_plausible() {
        // Sparse regime at N = 150: observed mean degree should sit near
        // 11.57 (accept +/- 4 averaged over seeds).
        let mut total = 0.0;
        let seeds = 20;
        for seed in 0..seeds {
            let cfg = GenConfig::new(150, seed);
            let g = generate_comm_graph(&cfg).unwrap();
            total += g.mean_degree();
        }
        let mean = total / seeds as f64;
        assert!(
            (mean - 11.57).abs() <= 4.0,
            "mean comm degree {mean} too far from 11.57"
        );
    }

    #[test]
    fn removal_rate_zero_keeps_all_edges() {
        let mut cfg = GenConfig::new(40, 3);
        cfg.removal_rate = 0.0;
        let g = Arc::new(generate_comm_graph(&cfg).unwrap());
        let d = generate_data_graph(&g, &cfg).unwrap();
        assert_eq!(d.edges().len(), g.n_edges());
    }

    #[test]
    fn removal_rate_half_removes_floor_half() {
        // 100-edge graph: exactly 50 survivors at removal rate 0.5.
        let edges: Vec<(usize, usize)> = (0..100).map(|k| (k, k + 1)).collect();
        let g = Arc::new(CommGraph::from_edges(101, &edges));
        let mut cfg = GenConfig::new(101, 9);
        cfg.removal_rate = 0.5;
        let d = generate_data_graph(&g, &cfg).unwrap();
        assert_eq!(d.edges().len(), 50);
    }

    #[test]
    fn surviving_weights_stay_in_bounds() {
        let mut drawn = 0;
        for seed in 0..40 {
            let cfg = GenConfig::new(30, seed);
            let g = Arc::new(generate_comm_graph(&cfg).unwrap());
            let d = generate_data_graph(&g, &cfg).unwrap();
            for (_, _, w) in d.edges() {
                assert!((cfg.weight_low..=cfg.weight_high).contains(&w));
                drawn += 1;
            }
        }
        assert!(drawn >= 1000, "only {drawn} weights drawn");
    }

    #[test]
    fn data_graph_support_stays_inside_comm_graph() {
        for seed in 0..10 {
            let cfg = GenConfig::new(35, seed);
            let g = Arc::new(generate_comm_graph(&cfg).unwrap());
            let d = generate_data_graph(&g, &cfg).unwrap();
            d.weights().validate(Some(&g)).unwrap();
        }
    }

    #[test]
    fn signals_have_requested_shape() {
        let mut cfg = GenConfig::new(30, 5);
        cfg.n_signals = 5000;
        let g = Arc::new(generate_comm_graph(&cfg).unwrap());
        let d = generate_data_graph(&g, &cfg).unwrap();
        let x = generate_smooth_signals(&d, &cfg).unwrap();
        assert_eq!(x.n_nodes(), 30);
        assert_eq!(x.n_signals(), 5000);
    }

    #[test]
    fn signals_are_deterministic() {
        let cfg = GenConfig::new(20, 77);
        let g = Arc::new(generate_comm_graph(&cfg).unwrap());
        let d = generate_data_graph(&g, &cfg).unwrap();
        let a = generate_smooth_signals(&d, &cfg).unwrap();
        let b = generate_smooth_signals(&d, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_columns_sum_to_zero() {
        // With zero noise the covariance kills the constant direction on a
        // connected data graph, so every column sum vanishes. Check the
        // empirical mean of column sums against 3 sigma of the sample (with
        // a numerical floor for the degenerate exact-zero case).
        let mut cfg = GenConfig::new(12, 13);
        cfg.signal_noise = 0.0;
        cfg.removal_rate = 0.0; // keep the data graph connected
        cfg.n_signals = 10_000;
        let g = Arc::new(generate_comm_graph(&cfg).unwrap());
        let d = generate_data_graph(&g, &cfg).unwrap();
        let x = generate_smooth_signals(&d, &cfg).unwrap();

        let m = cfg.n_signals;
        let mut sums = vec![0.0f64; m];
        for i in 0..x.n_nodes() {
            let row = x.row(i);
            for (c, s) in sums.iter_mut().enumerate() {
                *s += row[c];
            }
        }
        let mean = sums.iter().sum::<f64>() / m as f64;
        let var = sums.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / m as f64;
        let three_sigma_of_mean = 3.0 * (var / m as f64).sqrt();
        assert!(
            mean.abs() <= three_sigma_of_mean.max(1e-9),
            "mean column sum {mean} exceeds 3 sigma {three_sigma_of_mean}"
        );
    }

    /// Double-edge swaps preserving the unweighted degree sequence; each
    /// weight travels with its rewired edge.
    fn degree_matched_rewire(w: &UpperWeights, seed: u64) -> UpperWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize, f64)> =
            w.iter_pairs().filter(|&(_, _, v)| v != 0.0).collect();
        let target_swaps = 4 * edges.len();
        let mut done = 0;
        let mut attempts = 0;
        while done < target_swaps && attempts < 100 * target_swaps {
            attempts += 1;
            let a = rng.gen_range(0..edges.len());
            let b = rng.gen_range(0..edges.len());
            if a == b {
                continue;
            }
            let (i, j, wa) = edges[a];
            let (k, l, wb) = edges[b];
            if i == k || i == l || j == k || j == l {
                continue;
            }
            let (p1, q1) = if i < l { (i, l) } else { (l, i) };
            let (p2, q2) = if k < j { (k, j) } else { (j, k) };
            let exists = |p: usize, q: usize| edges.iter().any(|&(u, v, _)| u == p && v == q);
            if exists(p1, q1) || exists(p2, q2) {
                continue;
            }
            edges[a] = (p1, q1, wa);
            edges[b] = (p2, q2, wb);
            done += 1;
        }
        edges.shuffle(&mut rng);
        let mut out = UpperWeights::zeros(w.n_nodes());
        for (i, j, v) in edges {
            out.set(i, j, v);
        }
        out
    }

    #[test]
    fn signals_are_smoother_on_truth_than_on_rewired_graph() {
        let mut wins = 0;
        let trials = 100;
        for seed in 0..trials {
            let mut cfg = GenConfig::new(25, 1000 + seed);
            cfg.n_signals = 30;
            let g = Arc::new(generate_comm_graph(&cfg).unwrap());
            let d = generate_data_graph(&g, &cfg).unwrap();
            let x = generate_smooth_signals(&d, &cfg).unwrap();
            let truth_smooth = smoothness(d.weights(), &x).unwrap();
            let rewired = degree_matched_rewire(d.weights(), 9000 + seed);
            let rewired_smooth = smoothness(&rewired, &x).unwrap();
            if truth_smooth < rewired_smooth {
                wins += 1;
            }
        }
        assert!(
            wins >= 95,
            "smoothness on truth beat rewiring only {wins}/{trials} times"
        );
    }
}
