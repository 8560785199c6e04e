//! Accuracy metrics between learned and ground-truth weight matrices, plus
//! the per-run report combining them with the message cost breakdown.

use serde::Serialize;
use thiserror::Error;

use crate::dist::GlobalRunConfig;
use crate::graph::{CommGraph, UpperWeights};
use crate::ledger::{MessageLedger, Phase};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("weight vectors cover {a} and {b} nodes")]
    DimensionMismatch { a: usize, b: usize },
    #[error("normalized Frobenius error is undefined for a zero matrix")]
    ZeroMatrix,
}

/// Frobenius norm of the difference of the induced full symmetric matrices
/// (each off-diagonal pair counts twice).
pub fn frobenius_error(a: &UpperWeights, b: &UpperWeights) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((2.0 * sum).sqrt())
}

/// Frobenius distance after rescaling both matrices to unit Frobenius norm;
/// invariant to positive rescaling of either argument and bounded by 2.
pub fn normalized_frobenius_error(a: &UpperWeights, b: &UpperWeights) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let na = a.frobenius_norm();
    let nb = b.frobenius_norm();
    if na == 0.0 || nb == 0.0 {
        return Err(MetricsError::ZeroMatrix);
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| {
            let d = x / na - y / nb;
            d * d
        })
        .sum();
    Ok((2.0 * sum).sqrt())
}

/// Which entries feed the Wasserstein comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WassersteinSupport {
    /// All pairs connected in the communication graph, structural zeros
    /// included.
    CommEdges,
    /// Only pairs carrying nonzero ground-truth weight.
    TruthEdges,
}

/// Order-2 one-dimensional Wasserstein distance between the multisets of
/// weights over the given pair set: sort both value lists and take the root
/// mean square of the positional differences.
pub fn wasserstein_distance(
    a: &UpperWeights,
    b: &UpperWeights,
    pairs: &[(usize, usize)],
) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let mut va: Vec<f64> = pairs.iter().map(|&(i, j)| a.get(i, j)).collect();
    let mut vb: Vec<f64> = pairs.iter().map(|&(i, j)| b.get(i, j)).collect();
    va.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let sum: f64 = va.iter().zip(&vb).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum / pairs.len() as f64).sqrt())
}

fn check_dims(a: &UpperWeights, b: &UpperWeights) -> Result<(), MetricsError> {
    if a.n_nodes() != b.n_nodes() {
        return Err(MetricsError::DimensionMismatch {
            a: a.n_nodes(),
            b: b.n_nodes(),
        });
    }
    Ok(())
}

/// Accuracy-and-cost summary for one learned graph.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub frobenius: f64,
    /// None when either matrix is identically zero.
    pub normalized_frobenius: Option<f64>,
    /// Wasserstein over all communication edges (structural zeros included).
    pub wasserstein: f64,
    /// Wasserstein restricted to ground-truth edges, emitted alongside the
    /// full-support variant.
    pub wasserstein_truth_support: f64,
    pub total_messages: u64,
    pub phase_breakdown: Vec<(String, u64)>,
    pub config: GlobalRunConfig,
}

impl MetricsReport {
    pub fn compute(
        learned: &UpperWeights,
        truth: &UpperWeights,
        g: &CommGraph,
        ledger: &MessageLedger,
        config: &GlobalRunConfig,
    ) -> Result<Self, MetricsError> {
        let truth_pairs: Vec<(usize, usize)> = truth
            .iter_pairs()
            .filter(|&(_, _, w)| w != 0.0)
            .map(|(i, j, _)| (i, j))
            .collect();
        Ok(MetricsReport {
            frobenius: frobenius_error(learned, truth)?,
            normalized_frobenius: match normalized_frobenius_error(learned, truth) {
                Ok(v) => Some(v),
                Err(MetricsError::ZeroMatrix) => None,
                Err(e) => return Err(e),
            },
            wasserstein: wasserstein_distance(learned, truth, g.edges())?,
            wasserstein_truth_support: wasserstein_distance(learned, truth, &truth_pairs)?,
            total_messages: ledger.total(),
            phase_breakdown: Phase::ALL
                .iter()
                .map(|p| (p.label().to_string(), ledger.count(*p)))
                .collect(),
            config: config.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn upper(n: usize, entries: &[(usize, usize, f64)]) -> UpperWeights {
        let mut w = UpperWeights::zeros(n);
        for &(i, j, v) in entries {
            w.set(i, j, v);
        }
        w
    }

    fn random_upper(n: usize, seed: u64) -> UpperWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = UpperWeights::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                w.set(i, j, rng.gen_range(0.0..2.0));
            }
        }
        w
    }

    fn all_pairs(n: usize) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                v.push((i, j));
            }
        }
        v
    }

    #[test]
    fn frobenius_zero_on_equal_inputs() {
        let a = random_upper(5, 1);
        assert_eq!(frobenius_error(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn frobenius_counts_symmetric_pair_twice() {
        let a = upper(3, &[(0, 1, 3.0)]);
        let b = upper(3, &[]);
        assert_abs_diff_eq!(
            frobenius_error(&a, &b).unwrap(),
            18.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn frobenius_matches_dense_oracle() {
        let a = random_upper(6, 2);
        let b = random_upper(6, 3);
        let la = crate::graph::laplacian_from_weights(&a);
        // dense oracle: build both symmetric matrices explicitly
        let mut acc = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                let va = if i == j { 0.0 } else { a.get(i, j) };
                let vb = if i == j { 0.0 } else { b.get(i, j) };
                acc += (va - vb) * (va - vb);
            }
        }
        assert_abs_diff_eq!(
            frobenius_error(&a, &b).unwrap(),
            acc.sqrt(),
            epsilon = 1e-12
        );
        drop(la);
    }

    #[test]
    fn normalized_is_scale_invariant() {
        let a = random_upper(5, 4);
        let b = random_upper(5, 5);
        let base = normalized_frobenius_error(&a, &b).unwrap();
        for c in [1e-3, 0.5, 3.0, 1e3] {
            let mut scaled = UpperWeights::zeros(5);
            for (i, j, w) in a.iter_pairs() {
                scaled.set(i, j, c * w);
            }
            let v = normalized_frobenius_error(&scaled, &b).unwrap();
            assert!((v - base).abs() <= 1e-12, "c={c}: {v} vs {base}");
        }
        // proportional inputs collapse to zero
        let mut prop = UpperWeights::zeros(5);
        for (i, j, w) in b.iter_pairs() {
            prop.set(i, j, 2.5 * w);
        }
        assert_abs_diff_eq!(
            normalized_frobenius_error(&prop, &b).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn normalized_orthogonal_supports_give_sqrt_two() {
        let a = upper(4, &[(0, 1, 2.0)]);
        let b = upper(4, &[(2, 3, 5.0)]);
        assert_abs_diff_eq!(
            normalized_frobenius_error(&a, &b).unwrap(),
            2.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn normalized_never_exceeds_two() {
        for seed in 0..50 {
            let a = random_upper(5, seed);
            let b = random_upper(5, seed + 1000);
            let v = normalized_frobenius_error(&a, &b).unwrap();
            assert!(v <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn normalized_rejects_zero_matrix() {
        let a = UpperWeights::zeros(4);
        let b = random_upper(4, 9);
        assert_eq!(
            normalized_frobenius_error(&a, &b),
            Err(MetricsError::ZeroMatrix)
        );
    }

    #[test]
    fn wasserstein_ignores_permutations() {
        let a = upper(3, &[(0, 1, 0.0), (0, 2, 1.0)]);
        let b = upper(3, &[(0, 1, 1.0), (0, 2, 0.0)]);
        let pairs = vec![(0, 1), (0, 2)];
        assert_eq!(wasserstein_distance(&a, &b, &pairs).unwrap(), 0.0);
    }

    #[test]
    fn wasserstein_constant_shift_value() {
        let a = upper(3, &[(0, 1, 0.0), (0, 2, 0.0)]);
        let b = upper(3, &[(0, 1, 1.0), (0, 2, 1.0)]);
        let pairs = vec![(0, 1), (0, 2)];
        assert_abs_diff_eq!(
            wasserstein_distance(&a, &b, &pairs).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn metrics_are_symmetric_and_identify_equals() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..30 {
            let n = 4 + (seed as usize % 3);
            let a = random_upper(n, seed);
            let b = random_upper(n, seed + 500);
            let pairs = all_pairs(n);
            assert_eq!(
                frobenius_error(&a, &b).unwrap(),
                frobenius_error(&b, &a).unwrap()
            );
            assert_abs_diff_eq!(
                normalized_frobenius_error(&a, &b).unwrap(),
                normalized_frobenius_error(&b, &a).unwrap(),
                epsilon = 1e-12
            );
            assert_eq!(
                wasserstein_distance(&a, &b, &pairs).unwrap(),
                wasserstein_distance(&b, &a, &pairs).unwrap()
            );
            assert_eq!(frobenius_error(&a, &a).unwrap(), 0.0);
            assert_eq!(wasserstein_distance(&a, &a, &pairs).unwrap(), 0.0);

            // positive whenever the multisets differ
            let mut c = a.clone();
            let k = rng.gen_range(0..c.len());
            let (i, j) = c.pair_at(k);
            c.set(i, j, c.get(i, j) + 1.0 + rng.gen_range(0.0..1.0));
            assert!(frobenius_error(&a, &c).unwrap() > 0.0);
            assert!(wasserstein_distance(&a, &c, &pairs).unwrap() > 0.0);
        }
    }
}
