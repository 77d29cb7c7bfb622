//! Agreement between decompositions and reference part labels: normalized
//! mutual information and pair precision/recall, plus the K-means, HAC and
//! spectral clustering baselines run on raw point coordinates.

use crate::geometry::{Point3, PointCloud};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("label vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("cluster id {id} out of range for k = {k}")]
    IdOutOfRange { id: usize, k: usize },
    #[error("k = {k} exceeds the number of points {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("kNN graph has {components} connected components, fewer than k = {k}")]
    Disconnected { components: usize, k: usize },
}

/// A clustering: one cluster id per point, ids in `[0, k)`. Empty clusters
/// are permitted.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self, ClusterError> {
        for &id in &labels {
            if id >= k {
                return Err(ClusterError::IdOutOfRange { id, k });
            }
        }
        Ok(Self { labels, k })
    }
}

/// Reference part labels, one integer per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartLabels {
    pub labels: Vec<usize>,
}

impl PartLabels {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }
}

/// Plug-in entropy of a labeling from empirical frequencies, natural log.
pub fn entropy(labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len() as f64;
    -counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

fn contingency(a: &[usize], b: &[usize]) -> BTreeMap<(usize, usize), usize> {
    let mut table = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
    }
    table
}

/// Plug-in mutual information between two labelings, natural log.
/// Both must be non-empty and the same length.
pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must have equal length");
    if a.is_empty() {
        return 0.0;
    }
    let n = a.len() as f64;
    let table = contingency(a, b);
    let mut row: BTreeMap<usize, usize> = BTreeMap::new();
    let mut col: BTreeMap<usize, usize> = BTreeMap::new();
    for (&(x, y), &c) in &table {
        *row.entry(x).or_default() += c;
        *col.entry(y).or_default() += c;
    }
    let mut mi = 0.0;
    for (&(x, y), &c) in &table {
        let pxy = c as f64 / n;
        let px = row[&x] as f64 / n;
        let py = col[&y] as f64 / n;
        mi += pxy * (pxy / (px * py)).ln();
    }
    mi.max(0.0)
}

/// Normalized mutual information: `I(a; b) / ((H(a) + H(b)) / 2)`.
/// Returns 1.0 when both labelings are constant (both entropies zero).
pub fn nmi(truth: &PartLabels, clusters: &ClusterAssignment) -> Result<f64, ClusterError> {
    nmi_labels(&truth.labels, &clusters.labels)
}

/// NMI on raw label vectors.
pub fn nmi_labels(a: &[usize], b: &[usize]) -> Result<f64, ClusterError> {
    if a.len() != b.len() {
        return Err(ClusterError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(ClusterError::Empty);
    }
    let ha = entropy(a);
    let hb = entropy(b);
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    let denom = (ha + hb) / 2.0;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(mutual_information(a, b) / denom)
}

fn pairs_of(count: usize) -> u64 {
    let c = count as u64;
    c * c.saturating_sub(1) / 2
}

/// Pair-counting precision and recall of a clustering against reference
/// parts, computed from contingency-table pair counts.
///
/// Over all unordered point pairs: precision is the fraction of same-cluster
/// pairs that are also same-part; recall the fraction of same-part pairs that
/// are same-cluster. A metric with a zero denominator is defined as 1.0.
pub fn pair_precision_recall(
    pred: &ClusterAssignment,
    truth: &PartLabels,
) -> Result<(f64, f64), ClusterError> {
    if pred.labels.len() != truth.labels.len() {
        return Err(ClusterError::LengthMismatch(
            pred.labels.len(),
            truth.labels.len(),
        ));
    }
    let table = contingency(&pred.labels, &truth.labels);
    let mut pred_sizes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut truth_sizes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut both: u64 = 0;
    for (&(p, t), &c) in &table {
        *pred_sizes.entry(p).or_default() += c;
        *truth_sizes.entry(t).or_default() += c;
        both += pairs_of(c);
    }
    let same_pred: u64 = pred_sizes.values().map(|&c| pairs_of(c)).sum();
    let same_truth: u64 = truth_sizes.values().map(|&c| pairs_of(c)).sum();
    let precision = if same_pred == 0 {
        1.0
    } else {
        both as f64 / same_pred as f64
    };
    let recall = if same_truth == 0 {
        1.0
    } else {
        both as f64 / same_truth as f64
    };
    Ok((precision, recall))
}

/// Histogram of metric values over 20 equal bins of [0, 1]; values at 1.0
/// land in the last bin.
pub fn histogram_20(values: &[f64]) -> [u64; 20] {
    let mut bins = [0u64; 20];
    for &v in values {
        let idx = ((v * 20.0).floor() as i64).clamp(0, 19) as usize;
        bins[idx] += 1;
    }
    bins
}

fn squared_distance(a: Point3, b: Point3) -> f64 {
    (a - b).norm_squared()
}

/// Lloyd's K-means with k-means++ seeding on point coordinates.
/// Converges when assignments are stable, capped at 300 iterations;
/// deterministic per seed.
pub fn kmeans(cloud: &PointCloud, k: usize, seed: u64) -> Result<ClusterAssignment, ClusterError> {
    let n = cloud.len();
    if n == 0 {
        return Err(ClusterError::Empty);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = &cloud.points;

    // k-means++ seeding.
    let mut centers: Vec<Point3> = Vec::with_capacity(k);
    centers.push(pts[rng.gen_range(0..n)]);
    let mut d2: Vec<f64> = pts
        .iter()
        .map(|&p| squared_distance(p, centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc >= target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.push(pts[next]);
        for (i, &p) in pts.iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(p, pts[next]));
        }
    }

    let mut assignment = vec![0usize; n];
    for _ in 0..300 {
        let mut changed = false;
        for (i, &p) in pts.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = squared_distance(p, centers[0]);
            for (c, &center) in centers.iter().enumerate().skip(1) {
                let d = squared_distance(p, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![Point3::default(); k];
        let mut counts = vec![0usize; k];
        for (i, &p) in pts.iter().enumerate() {
            sums[assignment[i]] = sums[assignment[i]] + p;
            counts[assignment[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] * (1.0 / counts[c] as f64);
            }
            // Empty clusters keep their previous centroid.
        }
    }
    ClusterAssignment::new(assignment, k)
}

/// Linkage criteria for hierarchical agglomerative clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Single,
    Complete,
    Average,
    Ward,
}

impl std::str::FromStr for Linkage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "ward" => Ok(Linkage::Ward),
            other => Err(format!("unknown linkage: {other}")),
        }
    }
}

/// Agglomerates singletons under the chosen linkage until `k` clusters
/// remain. Distance ties break toward the lower index pair, so the result is
/// deterministic.
pub fn hac(
    cloud: &PointCloud,
    k: usize,
    linkage: Linkage,
) -> Result<ClusterAssignment, ClusterError> {
    let n = cloud.len();
    if n == 0 {
        return Err(ClusterError::Empty);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    let pts = &cloud.points;
    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = (pts[i] - pts[j]).norm();
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<usize> = vec![1; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    for _ in 0..n.saturating_sub(k) {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                if dist[i][j] < best.0 {
                    best = (dist[i][j], i, j);
                }
            }
        }
        let (dij, i, j) = best;
        // Lance-Williams update of distances to every other active cluster.
        for m in 0..n {
            if !active[m] || m == i || m == j {
                continue;
            }
            let (dim, djm) = (dist[i][m], dist[j][m]);
            let merged = match linkage {
                Linkage::Single => dim.min(djm),
                Linkage::Complete => dim.max(djm),
                Linkage::Average => {
                    (size[i] as f64 * dim + size[j] as f64 * djm) / (size[i] + size[j]) as f64
                }
                Linkage::Ward => {
                    let (ni, nj, nm) = (size[i] as f64, size[j] as f64, size[m] as f64);
                    (((ni + nm) * dim * dim + (nj + nm) * djm * djm - nm * dij * dij)
                        / (ni + nj + nm))
                        .max(0.0)
                        .sqrt()
                }
            };
            dist[i][m] = merged;
            dist[m][i] = merged;
        }
        size[i] += size[j];
        active[j] = false;
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
    }

    // Ids by smallest member index, ascending.
    let mut clusters: Vec<&Vec<usize>> =
        (0..n).filter(|&i| active[i]).map(|i| &members[i]).collect();
    clusters.sort_by_key(|m| m.iter().min().copied().unwrap_or(usize::MAX));
    let mut labels = vec![0usize; n];
    for (id, cluster) in clusters.iter().enumerate() {
        for &p in cluster.iter() {
            labels[p] = id;
        }
    }
    ClusterAssignment::new(labels, k)
}

/// Spectral clustering: symmetrized kNN graph with Gaussian weights
/// (`sigma` = median kNN distance), symmetric normalized Laplacian, the k
/// smallest eigenvectors by orthogonal (subspace) power iteration,
/// row-normalization, then K-means in the embedding.
///
/// A disconnected graph is clustered by its components directly when there
/// are at least `k` of them, merging the smallest into their nearest cluster
/// until exactly `k` remain; fewer components than `k` is an error.
pub fn spectral(
    cloud: &PointCloud,
    k: usize,
    n_neighbors: usize,
    seed: u64,
) -> Result<ClusterAssignment, ClusterError> {
    let n = cloud.len();
    if n == 0 {
        return Err(ClusterError::Empty);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }
    if k == 1 {
        return ClusterAssignment::new(vec![0; n], 1);
    }
    let pts = &cloud.points;
    let knn = n_neighbors.max(1).min(n - 1);

    // kNN edges; ties on distance resolve to the lower point index.
    let mut neighbor_dists: Vec<f64> = Vec::with_capacity(n * knn);
    let mut adjacency: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for i in 0..n {
        let mut by_dist: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| ((pts[i] - pts[j]).norm(), j))
            .collect();
        by_dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &(d, j) in by_dist.iter().take(knn) {
            neighbor_dists.push(d);
            adjacency[i].insert(j, d);
        }
    }
    // Symmetrize by union.
    for i in 0..n {
        let entries: Vec<(usize, f64)> = adjacency[i].iter().map(|(&j, &d)| (j, d)).collect();
        for (j, d) in entries {
            adjacency[j].entry(i).or_insert(d);
        }
    }
    neighbor_dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sigma = neighbor_dists[neighbor_dists.len() / 2].max(f64::MIN_POSITIVE);

    // Connected components of the graph.
    let components = graph_components(&adjacency);
    let n_comps = components.iter().copied().max().unwrap_or(0) + 1;
    if n_comps > 1 {
        if n_comps < k {
            return Err(ClusterError::Disconnected {
                components: n_comps,
                k,
            });
        }
        return Ok(components_as_clusters(pts, &components, n_comps, k));
    }

    // Weighted graph and normalized adjacency.
    let mut weights: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut degree = vec![0.0f64; n];
    for i in 0..n {
        for (&j, &d) in &adjacency[i] {
            let w = (-d * d / (2.0 * sigma * sigma)).exp();
            weights[i].push((j, w));
            degree[i] += w;
        }
    }
    let inv_sqrt_d: Vec<f64> = degree.iter().map(|&d| 1.0 / d.sqrt()).collect();

    // Subspace iteration on M = I + D^-1/2 W D^-1/2, whose top eigenvectors
    // are the smallest of the normalized Laplacian.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect())
        .collect();
    orthonormalize(&mut x);
    for _ in 0..500 {
        let mut y: Vec<Vec<f64>> = x
            .iter()
            .map(|col| {
                let mut out = col.clone();
                for i in 0..n {
                    let mut acc = 0.0;
                    for &(j, w) in &weights[i] {
                        acc += w * col[j] * inv_sqrt_d[j];
                    }
                    out[i] += inv_sqrt_d[i] * acc;
                }
                out
            })
            .collect();
        orthonormalize(&mut y);
        let drift = subspace_drift(&x, &y);
        x = y;
        if drift < 1e-12 {
            break;
        }
    }

    kmeans_nd(&x, n, k, seed.wrapping_add(1))
}

/// K-means on the row-normalized k-dimensional spectral embedding.
fn kmeans_nd(
    cols: &[Vec<f64>],
    n: usize,
    k: usize,
    seed: u64,
) -> Result<ClusterAssignment, ClusterError> {
    let dim = cols.len();
    let row = |i: usize| -> Vec<f64> {
        let mut r: Vec<f64> = cols.iter().map(|c| c[i]).collect();
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut r {
                *v /= norm;
            }
        }
        r
    };
    let rows: Vec<Vec<f64>> = (0..n).map(row).collect();
    let d2 =
        |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = vec![rows[rng.gen_range(0..n)].clone()];
    let mut dist: Vec<f64> = rows.iter().map(|r| d2(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in dist.iter().enumerate() {
                acc += w;
                if acc >= target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.push(rows[next].clone());
        for i in 0..n {
            dist[i] = dist[i].min(d2(&rows[i], &rows[next]));
        }
    }
    let mut assignment = vec![0usize; n];
    for _ in 0..300 {
        let mut changed = false;
        for (i, r) in rows.iter().enumerate() {
            let mut best = 0;
            let mut best_d = d2(r, &centers[0]);
            for (c, center) in centers.iter().enumerate().skip(1) {
                let d = d2(r, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, r) in rows.iter().enumerate() {
            for (s, v) in sums[assignment[i]].iter_mut().zip(r) {
                *s += v;
            }
            counts[assignment[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centers[c] = sums[c].clone();
            }
        }
    }
    ClusterAssignment::new(assignment, k)
}

fn graph_components(adjacency: &[BTreeMap<usize, f64>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0usize;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(i) = stack.pop() {
            for &j in adjacency[i].keys() {
                if comp[j] == usize::MAX {
                    comp[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    comp
}

fn components_as_clusters(
    pts: &[Point3],
    components: &[usize],
    n_comps: usize,
    k: usize,
) -> ClusterAssignment {
    // Merge smallest components into the nearest (centroid distance) until k.
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_comps];
    for (i, &c) in components.iter().enumerate() {
        groups[c].push(i);
    }
    while groups.len() > k {
        let (smallest, _) = groups
            .iter()
            .enumerate()
            .min_by_key(|(i, g)| (g.len(), *i))
            .unwrap();
        let centroid = |g: &[usize]| -> Point3 {
            let mut c = Point3::default();
            for &i in g {
                c = c + pts[i];
            }
            c * (1.0 / g.len() as f64)
        };
        let cs = centroid(&groups[smallest]);
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, g) in groups.iter().enumerate() {
            if i == smallest {
                continue;
            }
            let d = (centroid(g) - cs).norm_squared();
            if d < best.0 {
                best = (d, i);
            }
        }
        let moved = groups.remove(smallest);
        let target = if best.1 > smallest {
            best.1 - 1
        } else {
            best.1
        };
        groups[target].extend(moved);
    }
    groups.sort_by_key(|g| g.iter().min().copied().unwrap_or(usize::MAX));
    let mut labels = vec![0usize; pts.len()];
    for (id, g) in groups.iter().enumerate() {
        for &i in g {
            labels[i] = id;
        }
    }
    ClusterAssignment {
        labels,
        k: groups.len(),
    }
}

fn orthonormalize(cols: &mut [Vec<f64>]) {
    let k = cols.len();
    for i in 0..k {
        for j in 0..i {
            let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            let cj = cols[j].clone();
            for (a, b) in cols[i].iter_mut().zip(cj) {
                *a -= dot * b;
            }
        }
        let norm: f64 = cols[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            for v in &mut cols[i] {
                *v /= norm;
            }
        }
    }
}

fn subspace_drift(old: &[Vec<f64>], new: &[Vec<f64>]) -> f64 {
    // Frobenius norm of (new - old * (old^T new)): zero when spans agree.
    let k = old.len();
    let n = old[0].len();
    let mut proj = vec![vec![0.0f64; k]; k];
    for (a, row) in proj.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            *entry = old[a].iter().zip(&new[b]).map(|(x, y)| x * y).sum();
        }
    }
    let mut acc = 0.0;
    for b in 0..k {
        for i in 0..n {
            let mut reconstructed = 0.0;
            for a in 0..k {
                reconstructed += old[a][i] * proj[a][b];
            }
            let r = new[b][i] - reconstructed;
            acc += r * r;
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_analytic() {
        assert!((entropy(&[0, 1, 0, 1]) - 2.0f64.ln()).abs() < 1e-12);
        assert_eq!(entropy(&[3, 3, 3]), 0.0);
    }

    #[test]
    fn independent_labelings_zero_mi() {
        // Product table: every (a, b) combination equally often.
        let a = vec![0, 0, 1, 1, 0, 0, 1, 1];
        let b = vec![0, 1, 0, 1, 0, 1, 0, 1];
        assert!(mutual_information(&a, &b).abs() < 1e-12);
    }

    #[test]
    fn nmi_identical_is_one() {
        let labels = vec![0, 1, 2, 0, 1, 2];
        let truth = PartLabels::new(labels.clone());
        let pred = ClusterAssignment::new(labels, 3).unwrap();
        assert!((nmi(&truth, &pred).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_single_cluster_is_zero() {
        let truth = PartLabels::new(vec![0, 1, 2, 0, 1, 2]);
        let pred = ClusterAssignment::new(vec![0; 6], 1).unwrap();
        assert_eq!(nmi(&truth, &pred).unwrap(), 0.0);
    }

    #[test]
    fn nmi_contingency_fixture_matches_oracle() {
        // Contingency table [[5, 0], [1, 4]].
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..5 {
            a.push(0);
            b.push(0);
        }
        for _ in 0..1 {
            a.push(1);
            b.push(0);
        }
        for _ in 0..4 {
            a.push(1);
            b.push(1);
        }
        // Direct I/H summation oracle.
        let n = 10.0;
        let p: [[f64; 2]; 2] = [[5.0 / n, 0.0], [1.0 / n, 4.0 / n]];
        let pa = [0.5, 0.5];
        let pb = [0.6, 0.4];
        let mut i_oracle = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                if p[x][y] > 0.0 {
                    i_oracle += p[x][y] * (p[x][y] / (pa[x] * pb[y])).ln();
                }
            }
        }
        let h = |probs: &[f64]| -> f64 { -probs.iter().map(|&q| q * q.ln()).sum::<f64>() };
        let expected = i_oracle / ((h(&pa) + h(&pb)) / 2.0);
        let got = nmi_labels(&a, &b).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn nmi_length_mismatch_errors() {
        assert_eq!(
            nmi_labels(&[0, 1], &[0]).unwrap_err(),
            ClusterError::LengthMismatch(2, 1)
        );
    }

    #[test]
    fn precision_recall_identity_and_refinement() {
        let truth = PartLabels::new(vec![0, 0, 0, 0, 1, 1, 1, 1]);
        let same = ClusterAssignment::new(truth.labels.clone(), 2).unwrap();
        assert_eq!(pair_precision_recall(&same, &truth).unwrap(), (1.0, 1.0));

        // Split each true part in two equal halves: precision 1, recall < 1.
        let split = ClusterAssignment::new(vec![0, 0, 1, 1, 2, 2, 3, 3], 4).unwrap();
        let (p, r) = pair_precision_recall(&split, &truth).unwrap();
        assert_eq!(p, 1.0);
        assert!(r < 1.0);
    }

    #[test]
    fn precision_recall_matches_brute_force() {
        // 6-point fixture with a known mixed table.
        let truth = PartLabels::new(vec![0, 0, 0, 1, 1, 1]);
        let pred = ClusterAssignment::new(vec![0, 0, 1, 1, 1, 1], 2).unwrap();
        let (p, r) = pair_precision_recall(&pred, &truth).unwrap();

        let n = 6;
        let mut both = 0u64;
        let mut same_p = 0u64;
        let mut same_t = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                let sp = pred.labels[i] == pred.labels[j];
                let st = truth.labels[i] == truth.labels[j];
                same_p += sp as u64;
                same_t += st as u64;
                both += (sp && st) as u64;
            }
        }
        assert_eq!(p, both as f64 / same_p as f64);
        assert_eq!(r, both as f64 / same_t as f64);
    }

    fn blobs(centers: &[Point3], per: usize, spread: f64, seed: u64) -> (PointCloud, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (c, &center) in centers.iter().enumerate() {
            for _ in 0..per {
                pts.push(
                    center
                        + Point3::new(
                            rng.gen::<f64>() - 0.5,
                            rng.gen::<f64>() - 0.5,
                            rng.gen::<f64>() - 0.5,
                        ) * spread,
                );
                labels.push(c);
            }
        }
        (PointCloud::new(pts), labels)
    }

    #[test]
    fn kmeans_separated_blobs() {
        let (cloud, truth) = blobs(
            &[
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(10.0, 0.0, 0.0),
                Point3::new(0.0, 10.0, 0.0),
            ],
            50,
            1.0,
            17,
        );
        let pred = kmeans(&cloud, 3, 0).unwrap();
        let score = nmi_labels(&truth, &pred.labels).unwrap();
        assert!(score >= 0.99, "NMI {score}");
    }

    #[test]
    fn kmeans_edge_cases() {
        let (cloud, _) = blobs(&[Point3::new(0.0, 0.0, 0.0)], 20, 1.0, 3);
        let one = kmeans(&cloud, 1, 0).unwrap();
        assert!(one.labels.iter().all(|&l| l == 0));

        let all = kmeans(&cloud, 20, 0).unwrap();
        // Each point its own cluster: inertia 0 means every cluster is a
        // distinct point.
        let mut sorted = all.labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 20);

        assert!(matches!(
            kmeans(&cloud, 21, 0),
            Err(ClusterError::KTooLarge { .. })
        ));
    }

    #[test]
    fn hac_two_blobs_any_linkage() {
        let (cloud, truth) = blobs(
            &[Point3::new(0.0, 0.0, 0.0), Point3::new(10.0, 0.0, 0.0)],
            30,
            1.0,
            5,
        );
        for linkage in [
            Linkage::Single,
            Linkage::Complete,
            Linkage::Average,
            Linkage::Ward,
        ] {
            let pred = hac(&cloud, 2, linkage).unwrap();
            let score = nmi_labels(&truth, &pred.labels).unwrap();
            assert!(score > 0.999, "{linkage:?} NMI {score}");
        }
    }

    #[test]
    fn hac_singletons_and_chain() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(6.0, 0.0, 0.0),
            Point3::new(7.0, 0.0, 0.0),
        ]);
        let all = hac(&cloud, 5, Linkage::Ward).unwrap();
        assert_eq!(all.labels, vec![0, 1, 2, 3, 4]);

        // Chain splits at the largest gap under single linkage.
        let two = hac(&cloud, 2, Linkage::Single).unwrap();
        assert_eq!(two.labels, vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn spectral_two_blobs() {
        let (cloud, truth) = blobs(
            &[Point3::new(0.0, 0.0, 0.0), Point3::new(10.0, 0.0, 0.0)],
            40,
            1.0,
            9,
        );
        let pred = spectral(&cloud, 2, 8, 0).unwrap();
        let score = nmi_labels(&truth, &pred.labels).unwrap();
        assert!(score > 0.95, "NMI {score}");
    }

    #[test]
    fn spectral_concentric_rings() {
        // Classic fixture where raw-coordinate K-means fails.
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        let n = 80;
        for i in 0..n {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            pts.push(Point3::new(t.cos(), t.sin(), 0.0));
            truth.push(0);
        }
        for i in 0..n {
            let t = (i as f64 + 0.35) / n as f64 * std::f64::consts::TAU;
            pts.push(Point3::new(4.0 * t.cos(), 4.0 * t.sin(), 0.0));
            truth.push(1);
        }
        let cloud = PointCloud::new(pts);
        let pred = spectral(&cloud, 2, 6, 0).unwrap();
        let score = nmi_labels(&truth, &pred.labels).unwrap();
        assert!(score >= 0.95, "NMI {score}");

        let km = kmeans(&cloud, 2, 0).unwrap();
        let km_score = nmi_labels(&truth, &km.labels).unwrap();
        assert!(km_score < score, "kmeans should fail on rings");
    }

    #[test]
    fn spectral_k1_single_cluster() {
        let (cloud, _) = blobs(&[Point3::new(0.0, 0.0, 0.0)], 15, 1.0, 2);
        let pred = spectral(&cloud, 1, 4, 0).unwrap();
        assert!(pred.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn histogram_binning() {
        let bins = histogram_20(&[0.0, 0.049, 0.05, 0.999, 1.0]);
        assert_eq!(bins[0], 2);
        assert_eq!(bins[1], 1);
        assert_eq!(bins[19], 2);
    }
}
