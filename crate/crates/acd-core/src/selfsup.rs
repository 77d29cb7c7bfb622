//! Metric-learning objectives over point embeddings: the pairwise contrastive
//! loss on component labels, cross-entropy, their joint combination, pair
//! sampling, and analytic gradients for external trainers.
//!
//! Embeddings are unit-length row vectors. For a pair with similarity
//! `s = dot(e_i, e_j)`, same-component pairs contribute `1 - s` and
//! different-component pairs `max(0, s - m)`; the batch loss is the mean.

use crate::accum::NeumaierSum;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("embedding row {row} has norm {norm}, expected unit length")]
    NotNormalized { row: usize, norm: f64 },
    #[error("pair ({i}, {j}) out of range for {n} embeddings")]
    PairOutOfRange { i: usize, j: usize, n: usize },
    #[error("pair ({0}, {0}) repeats an index")]
    DegeneratePair(usize),
    #[error("vector length {len} does not match {n} x {d}")]
    ShapeMismatch { len: usize, n: usize, d: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("labels and logits row counts differ: {labels} vs {rows}")]
    LengthMismatch { labels: usize, rows: usize },
    #[error("need at least two distinct labels to sample different-label pairs")]
    SingleLabel,
    #[error("margin must satisfy 0 <= m < 1, got {0}")]
    InvalidMargin(f64),
    #[error("lambda must be non-negative, got {0}")]
    InvalidLambda(f64),
}

/// Norm deviation beyond which loss operations reject an embedding row.
pub const NORM_TOLERANCE: f64 = 1e-4;

/// `n` unit vectors of dimension `d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub n: usize,
    pub d: usize,
    vectors: Vec<f64>,
}

impl EmbeddingSet {
    pub fn new(n: usize, d: usize, vectors: Vec<f64>) -> Result<Self, LossError> {
        if vectors.len() != n * d {
            return Err(LossError::ShapeMismatch {
                len: vectors.len(),
                n,
                d,
            });
        }
        Ok(Self { n, d, vectors })
    }

    /// Builds the set after normalizing every row to unit length.
    pub fn new_normalized(n: usize, d: usize, mut vectors: Vec<f64>) -> Result<Self, LossError> {
        if vectors.len() != n * d {
            return Err(LossError::ShapeMismatch {
                len: vectors.len(),
                n,
                d,
            });
        }
        for row in 0..n {
            let norm = vectors[row * d..(row + 1) * d]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                for v in &mut vectors[row * d..(row + 1) * d] {
                    *v /= norm;
                }
            }
        }
        Ok(Self { n, d, vectors })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vectors
    }

    fn check_normalized(&self) -> Result<(), LossError> {
        for i in 0..self.n {
            let norm = self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(LossError::NotNormalized { row: i, norm });
            }
        }
        Ok(())
    }
}

/// A batch of embedding index pairs with a same-component flag each.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairBatch {
    pub pairs: Vec<(usize, usize, bool)>,
}

impl PairBatch {
    pub fn new(pairs: Vec<(usize, usize, bool)>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn validate(&self, n: usize) -> Result<(), LossError> {
        for &(i, j, _) in &self.pairs {
            if i >= n || j >= n {
                return Err(LossError::PairOutOfRange { i, j, n });
            }
            if i == j {
                return Err(LossError::DegeneratePair(i));
            }
        }
        Ok(())
    }
}

/// Margin and joint-loss weight. Defaults: `m = 0.5`, `lambda = 10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub margin: f64,
    pub lambda: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            margin: 0.5,
            lambda: 10.0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), LossError> {
        if !(0.0..1.0).contains(&self.margin) {
            return Err(LossError::InvalidMargin(self.margin));
        }
        if self.lambda < 0.0 {
            return Err(LossError::InvalidLambda(self.lambda));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean pairwise contrastive loss over a batch.
pub fn pairwise_loss(e: &EmbeddingSet, b: &PairBatch, cfg: &LossConfig) -> Result<f64, LossError> {
    cfg.validate()?;
    e.check_normalized()?;
    b.validate(e.n)?;
    if b.is_empty() {
        return Ok(0.0);
    }
    let mut acc = NeumaierSum::new();
    for &(i, j, same) in &b.pairs {
        let s = dot(e.row(i), e.row(j));
        acc.add(if same {
            1.0 - s
        } else {
            (s - cfg.margin).max(0.0)
        });
    }
    Ok(acc.total() / b.len() as f64)
}

/// Gradient of the mean pairwise loss with respect to the pre-normalization
/// embeddings, including the unit-normalization Jacobian `(I - vv^T)/||v||`.
/// Returns an `n x d` row-major matrix.
pub fn pairwise_loss_grad(
    e: &EmbeddingSet,
    b: &PairBatch,
    cfg: &LossConfig,
) -> Result<Vec<f64>, LossError> {
    cfg.validate()?;
    e.check_normalized()?;
    b.validate(e.n)?;
    let mut grad = vec![0.0f64; e.n * e.d];
    if b.is_empty() {
        return Ok(grad);
    }
    let scale = 1.0 / b.len() as f64;
    for &(i, j, same) in &b.pairs {
        let s = dot(e.row(i), e.row(j));
        // d(loss)/ds: same pairs -1, different pairs 1 on the active hinge.
        let dl_ds = if same {
            -1.0
        } else if s > cfg.margin {
            1.0
        } else {
            0.0
        };
        if dl_ds == 0.0 {
            continue;
        }
        for k in 0..e.d {
            grad[i * e.d + k] += scale * dl_ds * e.row(j)[k];
            grad[j * e.d + k] += scale * dl_ds * e.row(i)[k];
        }
    }
    // Project through the normalization Jacobian; rows are unit length so
    // J = I - vv^T.
    for row in 0..e.n {
        let v = e.row(row);
        let g = &grad[row * e.d..(row + 1) * e.d];
        let vg = dot(v, g);
        let projected: Vec<f64> = g.iter().zip(v).map(|(gi, vi)| gi - vg * vi).collect();
        grad[row * e.d..(row + 1) * e.d].copy_from_slice(&projected);
    }
    Ok(grad)
}

/// Mean negative log-softmax of the true class. `logits` is `n x classes`
/// row-major, stabilized by max-subtraction.
pub fn cross_entropy(logits: &[f64], classes: usize, labels: &[usize]) -> Result<f64, LossError> {
    if classes == 0 || logits.len() != labels.len() * classes {
        return Err(LossError::ShapeMismatch {
            len: logits.len(),
            n: labels.len(),
            d: classes,
        });
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let mut acc = NeumaierSum::new();
    for (row, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(LossError::LabelOutOfRange { label, classes });
        }
        let r = &logits[row * classes..(row + 1) * classes];
        let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum: f64 = r.iter().map(|&x| (x - max).exp()).sum::<f64>().ln() + max;
        acc.add(log_sum - r[label]);
    }
    Ok(acc.total() / labels.len() as f64)
}

/// Joint objective: `ce + lambda * pair`.
pub fn joint_loss(ce: f64, pair: f64, cfg: &LossConfig) -> f64 {
    ce + cfg.lambda * pair
}

/// Samples `n_same` same-label and `n_diff` cross-label index pairs, uniform
/// and without replacement where possible (falling back to replacement once
/// the pool is exhausted). Deterministic per seed.
pub fn sample_pairs(
    labels: &[usize],
    n_same: usize,
    n_diff: usize,
    seed: u64,
) -> Result<PairBatch, LossError> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    if n_diff > 0 && groups.len() < 2 {
        return Err(LossError::SingleLabel);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_same + n_diff);

    // Same-label pool: weighted choice of group, then a pair inside it.
    let group_list: Vec<&Vec<usize>> = groups.values().collect();
    let same_weights: Vec<u64> = group_list
        .iter()
        .map(|g| (g.len() * g.len().saturating_sub(1) / 2) as u64)
        .collect();
    let total_same: u64 = same_weights.iter().sum();
    if n_same > 0 && total_same > 0 {
        let target = n_same.min(total_same as usize);
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        if (total_same as usize) <= target {
            for g in &group_list {
                for a in 0..g.len() {
                    for b in a + 1..g.len() {
                        pairs.push((g[a], g[b], true));
                    }
                }
            }
        } else {
            let cumulative: Vec<u64> = same_weights
                .iter()
                .scan(0u64, |acc, &w| {
                    *acc += w;
                    Some(*acc)
                })
                .collect();
            let mut guard = 0usize;
            while seen.len() < target && guard < 1000 * target {
                guard += 1;
                let t = rng.gen_range(0..total_same);
                let gi = cumulative.partition_point(|&c| c <= t);
                let g = group_list[gi];
                let a = rng.gen_range(0..g.len());
                let b = rng.gen_range(0..g.len());
                if a == b {
                    continue;
                }
                let key = (g[a].min(g[b]), g[a].max(g[b]));
                if seen.insert(key) {
                    pairs.push((key.0, key.1, true));
                }
            }
        }
        // Remainder with replacement.
        while pairs.iter().filter(|p| p.2).count() < n_same {
            let t = rng.gen_range(0..total_same);
            let gi = same_weights
                .iter()
                .scan(0u64, |acc, &w| {
                    *acc += w;
                    Some(*acc)
                })
                .collect::<Vec<u64>>()
                .partition_point(|&c| c <= t);
            let g = group_list[gi];
            let a = rng.gen_range(0..g.len());
            let b = rng.gen_range(0..g.len());
            if a != b {
                pairs.push((g[a].min(g[b]), g[a].max(g[b]), true));
            }
        }
    }

    // Cross-label pairs by rejection over the index range.
    if n_diff > 0 {
        let n = labels.len();
        let same_count: u64 = total_same;
        let all_pairs = (n * (n - 1) / 2) as u64;
        let total_diff = all_pairs - same_count;
        let target = n_diff.min(total_diff as usize);
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut guard = 0usize;
        while seen.len() < target && guard < 10_000 * target.max(1) {
            guard += 1;
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a == b || labels[a] == labels[b] {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key) {
                pairs.push((key.0, key.1, false));
            }
        }
        if seen.len() < target {
            // Rejection stalled (tiny pools): enumerate deterministically.
            'outer: for a in 0..n {
                for b in a + 1..n {
                    if labels[a] != labels[b] && seen.insert((a, b)) {
                        pairs.push((a, b, false));
                        if seen.len() >= target {
                            break 'outer;
                        }
                    }
                }
            }
        }
        // Remainder with replacement.
        let mut guard = 0usize;
        while pairs.iter().filter(|p| !p.2).count() < n_diff && guard < 100_000 {
            guard += 1;
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b && labels[a] != labels[b] {
                pairs.push((a.min(b), a.max(b), false));
            }
        }
    }

    Ok(PairBatch::new(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn identical_same_pair_zero_loss() {
        let row = unit(vec![1.0, 2.0, 3.0]);
        let mut data = row.clone();
        data.extend(&row);
        let e = EmbeddingSet::new(2, 3, data).unwrap();
        let b = PairBatch::new(vec![(0, 1, true)]);
        let loss = pairwise_loss(&e, &b, &LossConfig::default()).unwrap();
        assert!(loss.abs() < 1e-12);
    }

    #[test]
    fn orthogonal_diff_pair_inactive_hinge() {
        let e = EmbeddingSet::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = PairBatch::new(vec![(0, 1, false)]);
        let loss = pairwise_loss(&e, &b, &LossConfig::default()).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn hand_computed_mixed_batch() {
        // Two unit vectors at cos = 0.8.
        let e = EmbeddingSet::new(2, 2, vec![1.0, 0.0, 0.8, 0.6]).unwrap();
        let cfg = LossConfig::default();
        let diff = pairwise_loss(&e, &PairBatch::new(vec![(0, 1, false)]), &cfg).unwrap();
        assert!((diff - 0.3).abs() < 1e-12);
        let same = pairwise_loss(&e, &PairBatch::new(vec![(0, 1, true)]), &cfg).unwrap();
        assert!((same - 0.2).abs() < 1e-12);
        let both =
            pairwise_loss(&e, &PairBatch::new(vec![(0, 1, false), (0, 1, true)]), &cfg).unwrap();
        assert!((both - 0.25).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_rows_rejected() {
        let e = EmbeddingSet::new(2, 2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        let b = PairBatch::new(vec![(0, 1, true)]);
        assert!(matches!(
            pairwise_loss(&e, &b, &LossConfig::default()),
            Err(LossError::NotNormalized { row: 0, .. })
        ));
    }

    #[test]
    fn zero_loss_zero_gradient() {
        let e = EmbeddingSet::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = PairBatch::new(vec![(0, 1, false)]);
        let g = pairwise_loss_grad(&e, &b, &LossConfig::default()).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn doubling_batch_keeps_mean_gradient() {
        let e = EmbeddingSet::new_normalized(
            3,
            4,
            vec![
                0.3, -1.0, 0.2, 0.5, 1.0, 0.1, -0.4, 0.2, -0.2, 0.8, 0.9, -0.5,
            ],
        )
        .unwrap();
        let b = PairBatch::new(vec![(0, 1, true), (1, 2, false), (0, 2, true)]);
        let doubled = PairBatch::new([b.pairs.clone(), b.pairs.clone()].concat());
        let cfg = LossConfig::default();
        let g1 = pairwise_loss_grad(&e, &b, &cfg).unwrap();
        let g2 = pairwise_loss_grad(&e, &doubled, &cfg).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_analytic() {
        // Dominant true logit: loss ~ 0.
        let ce = cross_entropy(&[100.0, 0.0, 0.0], 3, &[0]).unwrap();
        assert!(ce < 1e-12);
        // Uniform logits: ln P.
        let ce = cross_entropy(&[0.5, 0.5, 0.5, 0.5], 4, &[2]).unwrap();
        assert!((ce - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_errors() {
        assert!(matches!(
            cross_entropy(&[1.0, 2.0], 2, &[2]),
            Err(LossError::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            cross_entropy(&[1.0, 2.0, 3.0], 2, &[0]),
            Err(LossError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn joint_loss_arithmetic() {
        let cfg = LossConfig {
            margin: 0.5,
            lambda: 10.0,
        };
        assert_eq!(joint_loss(1.0, 0.2, &cfg), 3.0);
        let supervised_only = LossConfig {
            margin: 0.5,
            lambda: 0.0,
        };
        assert_eq!(joint_loss(0.7, 0.9, &supervised_only), 0.7);
        assert_eq!(joint_loss(0.0, 0.25, &cfg), 2.5);
    }

    #[test]
    fn sample_pairs_single_label() {
        let labels = vec![1, 1, 1, 1];
        let batch = sample_pairs(&labels, 4, 0, 7).unwrap();
        assert_eq!(batch.len(), 4);
        assert!(batch.pairs.iter().all(|&(_, _, same)| same));
        assert_eq!(
            sample_pairs(&labels, 0, 2, 7).unwrap_err(),
            LossError::SingleLabel
        );
    }

    #[test]
    fn sample_pairs_flags_match_labels() {
        let labels = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let batch = sample_pairs(&labels, 10, 10, 3).unwrap();
        assert_eq!(batch.len(), 20);
        for (i, j, same) in batch.pairs {
            assert_ne!(i, j);
            assert_eq!(labels[i] == labels[j], same);
        }
    }

    #[test]
    fn sample_pairs_deterministic() {
        let labels = vec![0, 1, 2, 0, 1, 2, 0, 1];
        let a = sample_pairs(&labels, 5, 5, 11).unwrap();
        let b = sample_pairs(&labels, 5, 5, 11).unwrap();
        assert_eq!(a, b);
    }
}
