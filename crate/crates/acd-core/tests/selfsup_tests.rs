//! Loss oracles: central finite differences for the gradient, invariance
//! under global orthogonal transforms, and linearity in lambda.

use acd_core::selfsup::{
    cross_entropy, joint_loss, pairwise_loss, pairwise_loss_grad, sample_pairs, EmbeddingSet,
    LossConfig, PairBatch,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_embeddings(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<f64> {
    (0..n * d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
}

fn random_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> PairBatch {
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            pairs.push((i, j, rng.gen::<bool>()));
        }
    }
    PairBatch::new(pairs)
}

/// Loss as a function of raw (pre-normalization) vectors: normalize rows,
/// then evaluate. This is the function the analytic gradient differentiates.
fn loss_of_raw(raw: &[f64], n: usize, d: usize, b: &PairBatch, cfg: &LossConfig) -> f64 {
    let e = EmbeddingSet::new_normalized(n, d, raw.to_vec()).unwrap();
    pairwise_loss(&e, b, cfg).unwrap()
}

#[test]
fn gradient_matches_central_finite_differences() {
    let cfg = LossConfig::default();
    let (n, d) = (10, 8);
    let step = 1e-6;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_embeddings(&mut rng, n, d);
        let batch = random_pairs(&mut rng, n, 30);

        let e = EmbeddingSet::new_normalized(n, d, raw.clone()).unwrap();
        let analytic = pairwise_loss_grad(&e, &batch, &cfg).unwrap();

        // The analytic gradient is with respect to the unit-normalized
        // vectors' raw inputs; evaluate the finite difference at the
        // normalized point (norm 1), where the Jacobian form (I - vv^T)
        // applies directly.
        let base: Vec<f64> = e.as_slice().to_vec();
        let mut fd_grad = vec![0.0f64; n * d];
        for (idx, fd) in fd_grad.iter_mut().enumerate() {
            let mut plus = base.clone();
            plus[idx] += step;
            let mut minus = base.clone();
            minus[idx] -= step;
            *fd = (loss_of_raw(&plus, n, d, &batch, &cfg)
                - loss_of_raw(&minus, n, d, &batch, &cfg))
                / (2.0 * step);
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&fd_grad).map(|(a, b)| a - b).collect();
        let denom = norm(&analytic).max(norm(&fd_grad));
        assert!(denom > 0.0, "seed {seed}: zero gradient fixture");
        let rel = norm(&diff) / denom;
        assert!(rel < 1e-5, "seed {seed}: relative gradient error {rel}");
    }
}

#[test]
fn loss_invariant_under_global_orthogonal_transform() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (n, d) = (12, 6);
    let e = EmbeddingSet::new_normalized(n, d, random_embeddings(&mut rng, n, d)).unwrap();
    let batch = random_pairs(&mut rng, n, 40);
    let cfg = LossConfig::default();
    let before = pairwise_loss(&e, &batch, &cfg).unwrap();

    // Random orthogonal matrix by Gram-Schmidt on a random d x d matrix.
    let mut q: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.gen::<f64>() - 0.5).collect())
        .collect();
    for i in 0..d {
        for j in 0..i {
            let dot: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            let qj = q[j].clone();
            for (a, b) in q[i].iter_mut().zip(qj) {
                *a -= dot * b;
            }
        }
        let norm: f64 = q[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut q[i] {
            *v /= norm;
        }
    }
    let mut rotated = vec![0.0f64; n * d];
    for row in 0..n {
        for c in 0..d {
            rotated[row * d + c] = (0..d).map(|k| e.row(row)[k] * q[c][k]).sum();
        }
    }
    let re = EmbeddingSet::new(n, d, rotated).unwrap();
    let after = pairwise_loss(&re, &batch, &cfg).unwrap();
    assert!(
        (before - after).abs() < 1e-12,
        "loss drifted under rotation: {before} vs {after}"
    );
}

#[test]
fn loss_nonnegative_and_zero_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let (n, d) = (8, 5);
        let e = EmbeddingSet::new_normalized(n, d, random_embeddings(&mut rng, n, d)).unwrap();
        let batch = random_pairs(&mut rng, n, 20);
        let loss = pairwise_loss(&e, &batch, &LossConfig::default()).unwrap();
        assert!(loss >= 0.0);
    }
    // Zero iff same pairs at s = 1 and different pairs at s <= m.
    let e = EmbeddingSet::new(3, 2, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
    let batch = PairBatch::new(vec![(0, 1, true), (0, 2, false)]);
    assert_eq!(
        pairwise_loss(&e, &batch, &LossConfig::default()).unwrap(),
        0.0
    );
}

#[test]
fn joint_loss_linear_in_lambda() {
    let (ce, pair) = (0.731, 0.219);
    let at = |lambda: f64| {
        joint_loss(
            ce,
            pair,
            &LossConfig {
                margin: 0.5,
                lambda,
            },
        )
    };
    // Exact linearity: the value is bit-identical to ce + lambda * pair.
    assert_eq!(at(0.0), ce);
    for lambda in [0.25, 1.0, 2.5, 10.0, 1000.0] {
        assert_eq!(at(lambda), ce + lambda * pair);
    }
}

#[test]
fn cross_entropy_random_fixture_matches_direct_sum() {
    let logits = [
        0.3, -1.2, 2.0, 0.1, //
        1.5, 0.4, -0.7, 0.9, //
        -0.2, 0.0, 0.6, -1.4,
    ];
    let labels = [2usize, 0, 1];
    let got = cross_entropy(&logits, 4, &labels).unwrap();

    let mut expected = 0.0;
    for (row, &label) in labels.iter().enumerate() {
        let r = &logits[row * 4..(row + 1) * 4];
        let z: f64 = r.iter().map(|&x| x.exp()).sum();
        expected += -(r[label].exp() / z).ln();
    }
    expected /= labels.len() as f64;
    assert!((got - expected).abs() < 1e-9);
}

#[test]
fn sampled_pairs_drive_loss_end_to_end() {
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let labels: Vec<usize> = (0..40).map(|i| i % 4).collect();
    let batch = sample_pairs(&labels, 25, 25, 7).unwrap();
    assert_eq!(batch.len(), 50);
    let e = EmbeddingSet::new_normalized(40, 16, random_embeddings(&mut rng, 40, 16)).unwrap();
    let loss = pairwise_loss(&e, &batch, &LossConfig::default()).unwrap();
    assert!(loss.is_finite() && loss > 0.0);
}
