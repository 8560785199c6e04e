//! Distributed initialization: every node obtains z_ij = ||x_i - x_j||^2 for
//! each of its communication neighbors while transmitting as few signal
//! vectors as possible.
//!
//! The simulator runs synchronous rounds. In a round, every node whose z-set
//! is incomplete picks the highest-degree neighbor among those with an
//! undetermined z (ties broken toward the lowest id) and transmits its own
//! length-M signal there, but only if the receiver's degree is at least its
//! own (on equal degrees the lower id sends) and it has not already received
//! that neighbor's signal. Nodes holding several signals then compute every
//! z they can for edges of the communication graph and forward each value to
//! endpoints that still lack it, one scalar per delivery; values consumed by
//! the computing node itself are free. When one value could be supplied by
//! several neighbors, the lowest-id holder sends, which keeps rounds
//! independent of node processing order.
//!
//! Raw signals only ever travel one hop; z results are likewise only
//! forwarded to direct neighbors.

use thiserror::Error;

use crate::graph::{signal_sq_dist, CommGraph, EdgeDifferences, SignalMatrix};
use crate::ledger::{Phase, Transport};

#[derive(Debug, Error)]
pub enum InitError {
    #[error("signals cover {signals} nodes, graph has {nodes}")]
    DimensionMismatch { signals: usize, nodes: usize },
    #[error(
        "initialization livelocked: {missing} z values still undetermined \
         after {rounds} rounds"
    )]
    Livelock { rounds: usize, missing: usize },
}

/// Outcome of the initialization protocol.
#[derive(Debug, Clone)]
pub struct InitOutcome {
    pub differences: EdgeDifferences,
    pub rounds: usize,
    /// Number of own-signal transmissions (each costing M messages).
    pub signal_transmissions: u64,
}

/// Cost of the naive scheme where both endpoints of every edge exchange
/// their full signals: 2 |E| M messages.
pub fn naive_initialization_cost(g: &CommGraph, n_signals: usize) -> u64 {
    2 * g.n_edges() as u64 * n_signals as u64
}

/// Runs the initialization protocol, charging `transport` for every scalar.
pub fn run_initialization(
    g: &CommGraph,
    x: &SignalMatrix,
    transport: &mut Transport,
) -> Result<InitOutcome, InitError> {
    let order: Vec<usize> = (0..g.n_nodes()).collect();
    run_initialization_with_order(g, x, transport, &order)
}

/// Same as [`run_initialization`] but iterating nodes in the given order
/// inside every phase. The outcome must not depend on it; tests exercise
/// random permutations.
pub fn run_initialization_with_order(
    g: &CommGraph,
    x: &SignalMatrix,
    transport: &mut Transport,
    order: &[usize],
) -> Result<InitOutcome, InitError> {
    let n = g.n_nodes();
    if x.n_nodes() != n {
        return Err(InitError::DimensionMismatch {
            signals: x.n_nodes(),
            nodes: n,
        });
    }
    let m = x.n_signals() as u64;

    // knows[i][a]: node i holds x_a.
    let mut knows: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|a| a == i).collect()).collect();
    let mut z = EdgeDifferences::new_empty(g);
    let mut signal_transmissions = 0u64;

    let missing_count = |z: &EdgeDifferences| -> usize {
        (0..n)
            .map(|i| {
                (0..g.degree(i))
                    .filter(|&k| z.get_at(i, k).is_none())
                    .count()
            })
            .sum()
    };

    let mut rounds = 0usize;
    while !z.is_complete() {
        if rounds >= n {
            return Err(InitError::Livelock {
                rounds,
                missing: missing_count(&z),
            });
        }
        rounds += 1;
        let mut progressed = false;

        // Send decisions from the round-start state.
        let mut sends: Vec<(usize, usize)> = Vec::new();
        for &i in order {
            let target = g
                .neighbors(i)
                .iter()
                .enumerate()
                .filter(|&(k, _)| z.get_at(i, k).is_none())
                .map(|(_, &j)| j)
                .max_by(|&a, &b| {
                    g.degree(a).cmp(&g.degree(b)).then_with(|| b.cmp(&a)) // prefer the lower id on ties
                });
            if let Some(j) = target {
                let send = (g.degree(j) > g.degree(i) || (g.degree(j) == g.degree(i) && i < j))
                    && !knows[i][j];
                if send {
                    sends.push((i, j));
                }
            }
        }
        for &(i, j) in &sends {
            transport.send(Phase::InitSignals, m);
            transport.deliver(m);
            knows[j][i] = true;
            signal_transmissions += 1;
            progressed = true;
        }

        // Local fills: a node holding a neighbor's signal computes the z
        // itself at no message cost.
        for &i in order {
            for (k, &j) in g.neighbors(i).iter().enumerate() {
                if z.get_at(i, k).is_none() && knows[i][j] {
                    z.set_at(i, k, signal_sq_dist(x, i, j));
                    progressed = true;
                }
            }
        }

        // Result deliveries: for each still-missing value, the lowest-id
        // neighbor holding both endpoint signals computes it and sends one
        // scalar. Candidate sets are fixed by the post-fill state, so the
        // iteration order cannot change what happens.
        let mut deliveries: Vec<(usize, usize, usize)> = Vec::new(); // (endpoint, neighbor idx, supplier)
        for &e in order {
            for (k, &j) in g.neighbors(e).iter().enumerate() {
                if z.get_at(e, k).is_some() {
                    continue;
                }
                let supplier = g
                    .neighbors(e)
                    .iter()
                    .copied()
                    .filter(|&r| knows[r][e] && knows[r][j])
                    .min();
                if let Some(r) = supplier {
                    deliveries.push((e, k, r));
                }
            }
        }
        for &(e, k, _supplier) in &deliveries {
            let j = g.neighbors(e)[k];
            transport.send(Phase::InitResults, 1);
            transport.deliver(1);
            z.set_at(e, k, signal_sq_dist(x, e, j));
            progressed = true;
        }

        if !progressed {
            return Err(InitError::Livelock {
                rounds,
                missing: missing_count(&z),
            });
        }
    }

    Ok(InitOutcome {
        differences: z,
        rounds,
        signal_transmissions,
    })
}
