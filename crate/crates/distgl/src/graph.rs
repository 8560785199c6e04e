//! Core graph types: communication topology, upper-triangular weight
//! vectors, the Laplacian operator and the smoothness quadratic form.

use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("weight for pair ({i},{j}) lies outside the communication graph")]
    OutsideSupport { i: usize, j: usize },
    #[error("negative weight {w} for pair ({i},{j})")]
    NegativeWeight { i: usize, j: usize, w: f64 },
    #[error("node index {0} out of range for {1} nodes")]
    NodeOutOfRange(usize, usize),
}

/// Unweighted, connected communication topology over `n` nodes.
///
/// Nodes live in the unit square; an edge is present exactly when the
/// Euclidean distance between the endpoints is at most `radius`. Neighbor
/// lists are kept sorted so that iteration order is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    n_nodes: usize,
    positions: Vec<[f64; 2]>,
    radius: f64,
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl CommGraph {
    /// Builds a graph from positions and a radius, connecting every pair at
    /// distance <= radius. Connectivity is not checked here.
    pub fn from_positions(positions: Vec<[f64; 2]>, radius: f64) -> Self {
        let n = positions.len();
        let mut neighbors = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = positions[i][0] - positions[j][0];
                let dy = positions[i][1] - positions[j][1];
                if (dx * dx + dy * dy).sqrt() <= radius {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                    edges.push((i, j));
                }
            }
        }
        // Pairs are visited in lexicographic order, so neighbor lists and the
        // edge list come out sorted already; sort anyway to keep the invariant
        // independent of construction details.
        for list in &mut neighbors {
            list.sort_unstable();
        }
        edges.sort_unstable();
        CommGraph {
            n_nodes: n,
            positions,
            radius,
            neighbors,
            edges,
        }
    }

    /// Builds a graph from stored positions and an explicit edge list, used
    /// when deserializing (the radius is not stored on disk).
    pub fn from_positions_and_edges(
        positions: Vec<[f64; 2]>,
        edge_list: Vec<(usize, usize)>,
    ) -> Self {
        let mut g = Self::from_edges(positions.len(), &edge_list);
        g.positions = positions;
        g
    }

    /// Builds a graph directly from an edge list (positions are synthetic).
    /// Intended for tests and hand-crafted topologies.
    pub fn from_edges(n_nodes: usize, edge_list: &[(usize, usize)]) -> Self {
        let mut neighbors = vec![Vec::new(); n_nodes];
        let mut edges = Vec::new();
        for &(a, b) in edge_list {
            assert!(a != b, "self-loops are not allowed");
            assert!(a < n_nodes && b < n_nodes, "edge endpoint out of range");
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if !neighbors[i].contains(&j) {
                neighbors[i].push(j);
                neighbors[j].push(i);
                edges.push((i, j));
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        edges.sort_unstable();
        CommGraph {
            n_nodes,
            positions: vec![[0.0, 0.0]; n_nodes],
            radius: 0.0,
            neighbors,
            edges,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Sorted neighbor list of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Edges as (i, j) with i < j, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        if a == b || a >= self.n_nodes || b >= self.n_nodes {
            return false;
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Position of neighbor `j` within node `i`'s sorted neighbor list.
    pub fn neighbor_index(&self, i: usize, j: usize) -> Option<usize> {
        self.neighbors[i].binary_search(&j).ok()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n_nodes == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.n_nodes as f64
    }

    /// BFS connectivity check.
    pub fn is_connected(&self) -> bool {
        if self.n_nodes == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_nodes];
        let mut queue = std::collections::VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n_nodes
    }

    /// Hop distances from `source` to every node (usize::MAX if unreachable).
    pub fn hop_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_nodes];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Nonnegative weights for the upper-triangular part of a symmetric
/// zero-diagonal N x N weight matrix, stored as a flat vector.
///
/// Pair (i, j) with i < j maps to flat index `i*N - i*(i+1)/2 + (j - i - 1)`,
/// i.e. row-major over the strict upper triangle. The mapping is O(1) in both
/// directions ([`UpperWeights::flat_index`] / [`UpperWeights::pair_at`]).
#[derive(Debug, Clone, PartialEq)]
pub struct UpperWeights {
    n_nodes: usize,
    values: Vec<f64>,
}

impl UpperWeights {
    pub fn zeros(n_nodes: usize) -> Self {
        UpperWeights {
            n_nodes,
            values: vec![0.0; n_nodes * n_nodes.saturating_sub(1) / 2],
        }
    }

    pub fn from_values(n_nodes: usize, values: Vec<f64>) -> Result<Self, GraphError> {
        let expected = n_nodes * n_nodes.saturating_sub(1) / 2;
        if values.len() != expected {
            return Err(GraphError::DimensionMismatch(format!(
                "expected {expected} upper-triangular values for {n_nodes} nodes, got {}",
                values.len()
            )));
        }
        Ok(UpperWeights { n_nodes, values })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Flat index of pair (i, j), i < j.
    #[inline]
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n_nodes);
        i * self.n_nodes - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Inverse of [`flat_index`](Self::flat_index): the (i, j) pair stored at
    /// flat position `k`.
    pub fn pair_at(&self, k: usize) -> (usize, usize) {
        debug_assert!(k < self.values.len());
        let n = self.n_nodes;
        // Row i starts at offset i*n - i*(i+1)/2; solve for the largest i
        // whose offset does not exceed k via the quadratic formula, then
        // nudge for rounding.
        let kf = k as f64;
        let nf = n as f64;
        let mut i = ((2.0 * nf - 1.0 - ((2.0 * nf - 1.0).powi(2) - 8.0 * kf).sqrt()) / 2.0).floor()
            as usize;
        while i + 1 < n && Self::row_offset(n, i + 1) <= k {
            i += 1;
        }
        while Self::row_offset(n, i) > k {
            i -= 1;
        }
        let j = i + 1 + (k - Self::row_offset(n, i));
        (i, j)
    }

    #[inline]
    fn row_offset(n: usize, i: usize) -> usize {
        i * n - i * (i + 1) / 2
    }

    /// Weight of the unordered pair {a, b}; order of arguments is irrelevant.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.values[self.flat_index(i, j)]
    }

    pub fn set(&mut self, a: usize, b: usize, w: f64) {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let k = self.flat_index(i, j);
        self.values[k] = w;
    }

    /// Iterates (i, j, w) over all stored pairs in flat order.
    pub fn iter_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_nodes).flat_map(move |i| {
            ((i + 1)..self.n_nodes).map(move |j| (i, j, self.values[self.flat_index(i, j)]))
        })
    }

    /// Weighted degree vector of the induced symmetric matrix.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_nodes];
        for (i, j, w) in self.iter_pairs() {
            d[i] += w;
            d[j] += w;
        }
        d
    }

    /// Frobenius norm of the induced symmetric matrix.
    pub fn frobenius_norm(&self) -> f64 {
        (2.0 * self.values.iter().map(|w| w * w).sum::<f64>()).sqrt()
    }

    /// Checks nonnegativity and (optionally) that the support stays within
    /// the communication graph.
    pub fn validate(&self, comm: Option<&CommGraph>) -> Result<(), GraphError> {
        for (i, j, w) in self.iter_pairs() {
            if w < 0.0 {
                return Err(GraphError::NegativeWeight { i, j, w });
            }
            if let Some(g) = comm {
                if w != 0.0 && !g.contains_edge(i, j) {
                    return Err(GraphError::OutsideSupport { i, j });
                }
            }
        }
        Ok(())
    }
}

/// Ground-truth weighted data graph spanning a communication graph.
#[derive(Debug, Clone)]
pub struct DataGraph {
    weights: UpperWeights,
    source: Arc<CommGraph>,
}

impl DataGraph {
    /// Wraps weights after checking nonnegativity and that the support is a
    /// subset of the communication edges.
    pub fn new(weights: UpperWeights, source: Arc<CommGraph>) -> Result<Self, GraphError> {
        if weights.n_nodes() != source.n_nodes() {
            return Err(GraphError::DimensionMismatch(format!(
                "weights over {} nodes, communication graph has {}",
                weights.n_nodes(),
                source.n_nodes()
            )));
        }
        weights.validate(Some(&source))?;
        Ok(DataGraph { weights, source })
    }

    pub fn weights(&self) -> &UpperWeights {
        &self.weights
    }

    pub fn source(&self) -> &Arc<CommGraph> {
        &self.source
    }

    /// Edges with nonzero weight, in flat order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.weights
            .iter_pairs()
            .filter(|&(_, _, w)| w != 0.0)
            .collect()
    }
}

/// N x M matrix of graph signals; row i holds the M features of node i.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    n_nodes: usize,
    n_signals: usize,
    values: Vec<f64>, // row-major
}

impl SignalMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, GraphError> {
        let n_nodes = rows.len();
        let n_signals = rows.first().map_or(0, |r| r.len());
        let mut values = Vec::with_capacity(n_nodes * n_signals);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_signals {
                return Err(GraphError::DimensionMismatch(format!(
                    "row {i} has length {}, expected {n_signals}",
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(GraphError::DimensionMismatch(format!(
                        "non-finite entry in row {i}"
                    )));
                }
                values.push(v);
            }
        }
        Ok(SignalMatrix {
            n_nodes,
            n_signals,
            values,
        })
    }

    pub(crate) fn from_raw(n_nodes: usize, n_signals: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n_nodes * n_signals);
        SignalMatrix {
            n_nodes,
            n_signals,
            values,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_signals(&self) -> usize {
        self.n_signals
    }

    /// Feature vector of node `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_signals..(i + 1) * self.n_signals]
    }
}

/// Squared Euclidean distance between the signals of two nodes, with a fixed
/// subtraction order (lower id minus higher id, features in storage order) so
/// that every computation of the same pair is bit-identical.
pub fn signal_sq_dist(x: &SignalMatrix, a: usize, b: usize) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let ra = x.row(lo);
    let rb = x.row(hi);
    let mut acc = 0.0;
    for m in 0..ra.len() {
        let d = ra[m] - rb[m];
        acc += d * d;
    }
    acc
}

/// Pairwise squared signal distances over the communication edges, stored
/// per node and aligned with the sorted neighbor lists.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDifferences {
    per_node: Vec<Vec<Option<f64>>>,
}

impl EdgeDifferences {
    /// Empty table shaped after the communication graph.
    pub fn new_empty(g: &CommGraph) -> Self {
        EdgeDifferences {
            per_node: (0..g.n_nodes()).map(|i| vec![None; g.degree(i)]).collect(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.per_node.len()
    }

    /// Value of z for node `i`'s `idx`-th neighbor, if held.
    pub fn get_at(&self, i: usize, idx: usize) -> Option<f64> {
        self.per_node[i][idx]
    }

    pub fn set_at(&mut self, i: usize, idx: usize, z: f64) {
        self.per_node[i][idx] = Some(z);
    }

    /// z for the pair {i, j}, looked up in node i's table.
    pub fn get(&self, g: &CommGraph, i: usize, j: usize) -> Option<f64> {
        g.neighbor_index(i, j).and_then(|idx| self.per_node[i][idx])
    }

    /// True when every node holds z for all of its neighbors.
    pub fn is_complete(&self) -> bool {
        self.per_node
            .iter()
            .all(|row| row.iter().all(|z| z.is_some()))
    }

    /// Values held by node `i`, aligned with its sorted neighbor list.
    /// Panics if the table is incomplete for that node.
    pub fn node_values(&self, i: usize) -> Vec<f64> {
        self.per_node[i]
            .iter()
            .map(|z| z.expect("incomplete edge differences"))
            .collect()
    }

    /// Checks completeness and that both endpoint copies of every edge agree
    /// exactly.
    pub fn is_consistent(&self, g: &CommGraph) -> bool {
        for &(i, j) in g.edges() {
            let zi = self.get(g, i, j);
            let zj = self.get(g, j, i);
            match (zi, zj) {
                (Some(a), Some(b)) if a == b => {}
                _ => return false,
            }
        }
        true
    }
}

/// Laplacian L = D - W induced by an upper-triangular weight vector:
/// off-diagonals are -w, diagonals the weighted degrees.
pub fn laplacian_from_weights(w: &UpperWeights) -> DMatrix<f64> {
    let n = w.n_nodes();
    let mut l = DMatrix::zeros(n, n);
    for (i, j, wij) in w.iter_pairs() {
        l[(i, j)] = -wij;
        l[(j, i)] = -wij;
        l[(i, i)] += wij;
        l[(j, j)] += wij;
    }
    l
}

/// Smoothness of signals X under weights w: the sum over node pairs of
/// w_ij * ||x_i - x_j||^2, equal to tr(X^T L X) for L built from w.
pub fn smoothness(w: &UpperWeights, x: &SignalMatrix) -> Result<f64, GraphError> {
    if w.n_nodes() != x.n_nodes() {
        return Err(GraphError::DimensionMismatch(format!(
            "weights over {} nodes, signals over {}",
            w.n_nodes(),
            x.n_nodes()
        )));
    }
    let mut acc = 0.0;
    for (i, j, wij) in w.iter_pairs() {
        if wij != 0.0 {
            acc += wij * signal_sq_dist(x, i, j);
        }
    }
    Ok(acc)
}

/// Centralized oracle for the pairwise squared distances over communication
/// edges. The distributed initialization protocol must reproduce this table
/// bit-exactly.
pub fn edge_differences(x: &SignalMatrix, g: &CommGraph) -> Result<EdgeDifferences, GraphError> {
    if x.n_nodes() != g.n_nodes() {
        return Err(GraphError::DimensionMismatch(format!(
            "signals over {} nodes, graph has {}",
            x.n_nodes(),
            g.n_nodes()
        )));
    }
    let mut table = EdgeDifferences::new_empty(g);
    for &(i, j) in g.edges() {
        let z = signal_sq_dist(x, i, j);
        let idx_i = g.neighbor_index(i, j).unwrap();
        let idx_j = g.neighbor_index(j, i).unwrap();
        table.set_at(i, idx_i, z);
        table.set_at(j, idx_j, z);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_weights(n: usize, seed: u64) -> UpperWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = UpperWeights::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                w.set(i, j, rng.gen_range(0.0..1.0));
            }
        }
        w
    }

    fn random_signals(n: usize, m: usize, seed: u64) -> SignalMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SignalMatrix::from_rows(
            (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn flat_index_round_trip() {
        for n in [2usize, 3, 5, 9, 17] {
            let w = UpperWeights::zeros(n);
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    assert_eq!(w.flat_index(i, j), k);
                    assert_eq!(w.pair_at(k), (i, j));
                    k += 1;
                }
            }
            assert_eq!(k, w.len());
        }
    }

    #[test]
    fn laplacian_single_edge() {
        let mut w = UpperWeights::zeros(2);
        w.set(0, 1, 1.0);
        let l = laplacian_from_weights(&w);
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(l[(0, 1)], -1.0);
        assert_eq!(l[(1, 0)], -1.0);
        assert_eq!(l[(1, 1)], 1.0);
    }

    #[test]
    fn laplacian_zero_weights() {
        let w = UpperWeights::zeros(4);
        let l = laplacian_from_weights(&w);
        assert!(l.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_row_sums_vanish() {
        let w = random_weights(5, 7);
        let l = laplacian_from_weights(&w);
        for i in 0..5 {
            // independent summation of the definition
            let row_sum: f64 = (0..5).map(|j| l[(i, j)]).sum();
            assert_abs_diff_eq!(row_sum, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn smoothness_identical_rows_is_zero() {
        let x = SignalMatrix::from_rows(vec![vec![1.0, 2.0]; 4]).unwrap();
        let w = random_weights(4, 3);
        assert_eq!(smoothness(&w, &x).unwrap(), 0.0);
    }

    #[test]
    fn smoothness_zero_weights_is_zero() {
        let x = random_signals(4, 3, 11);
        let w = UpperWeights::zeros(4);
        assert_eq!(smoothness(&w, &x).unwrap(), 0.0);
    }

    #[test]
    fn smoothness_path_hand_value() {
        // 3-node path, w01 = 1, w12 = 2, one signal column (0, 1, 3):
        // 1*1 + 2*4 = 9, cross-checked against tr(X^T L X).
        let mut w = UpperWeights::zeros(3);
        w.set(0, 1, 1.0);
        w.set(1, 2, 2.0);
        let x = SignalMatrix::from_rows(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let s = smoothness(&w, &x).unwrap();
        assert_abs_diff_eq!(s, 9.0, epsilon = 1e-12);

        let l = laplacian_from_weights(&w);
        let xm = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 3.0]);
        let tr = (xm.transpose() * &l * &xm).trace();
        assert_abs_diff_eq!(s, tr, epsilon = 1e-12);
    }

    #[test]
    fn smoothness_dimension_mismatch_rejected() {
        let w = UpperWeights::zeros(3);
        let x = random_signals(4, 2, 5);
        assert!(smoothness(&w, &x).is_err());
    }

    #[test]
    fn edge_differences_identical_rows() {
        let g = CommGraph::from_edges(3, &[(0, 1), (1, 2)]);
        let x = SignalMatrix::from_rows(vec![vec![5.0, -1.0]; 3]).unwrap();
        let z = edge_differences(&x, &g).unwrap();
        assert!(z.is_complete());
        assert_eq!(z.get(&g, 0, 1), Some(0.0));
        assert_eq!(z.get(&g, 1, 2), Some(0.0));
    }

    #[test]
    fn edge_differences_scalar_square() {
        let g = CommGraph::from_edges(2, &[(0, 1)]);
        let x = SignalMatrix::from_rows(vec![vec![0.0], vec![3.0]]).unwrap();
        let z = edge_differences(&x, &g).unwrap();
        assert_eq!(z.get(&g, 0, 1), Some(9.0));
        assert!(z.is_consistent(&g));
    }

    #[test]
    fn data_graph_rejects_weights_outside_support() {
        let g = Arc::new(CommGraph::from_edges(3, &[(0, 1)]));
        let mut w = UpperWeights::zeros(3);
        w.set(1, 2, 0.5);
        assert!(DataGraph::new(w, g).is_err());
    }

    #[test]
    fn comm_graph_radius_rule() {
        let positions = vec![[0.0, 0.0], [0.3, 0.0], [1.0, 1.0]];
        let g = CommGraph::from_positions(positions, 0.5);
        assert!(g.contains_edge(0, 1));
        assert!(!g.contains_edge(0, 2));
        assert!(!g.contains_edge(1, 2));
        assert_eq!(g.degree(0), 1);
        assert!(!g.is_connected());
    }

    proptest! {
        #[test]
        fn smoothness_matches_trace_route(seed in 0u64..500) {
            let n = 4 + (seed as usize % 4);
            let w = random_weights(n, seed);
            let x = random_signals(n, 3, seed.wrapping_add(1));
            let s = smoothness(&w, &x).unwrap();
            let l = laplacian_from_weights(&w);
            let mut xm = DMatrix::zeros(n, 3);
            for i in 0..n {
                for m in 0..3 {
                    xm[(i, m)] = x.row(i)[m];
                }
            }
            let tr = (xm.transpose() * &l * &xm).trace();
            prop_assert!((s - tr).abs() <= 1e-9 * (1.0 + s.abs()));
        }

        #[test]
        fn laplacian_is_linear(seed in 0u64..200, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let n = 5;
            let w1 = random_weights(n, seed);
            let w2 = random_weights(n, seed.wrapping_add(7));
            let mut combo = UpperWeights::zeros(n);
            for k in 0..combo.len() {
                let (i, j) = combo.pair_at(k);
                combo.set(i, j, a * w1.get(i, j) + b * w2.get(i, j));
            }
            let lc = laplacian_from_weights(&combo);
            let l1 = laplacian_from_weights(&w1);
            let l2 = laplacian_from_weights(&w2);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((lc[(i, j)] - (a * l1[(i, j)] + b * l2[(i, j)])).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn laplacian_is_psd_for_nonnegative_weights(seed in 0u64..200) {
            let n = 6;
            let w = random_weights(n, seed);
            let l = laplacian_from_weights(&w);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(99));
            for _ in 0..10 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let xv = nalgebra::DVector::from_vec(x);
                let q = (xv.transpose() * &l * &xv)[(0, 0)];
                prop_assert!(q >= -1e-9);
            }
        }
    }
}
