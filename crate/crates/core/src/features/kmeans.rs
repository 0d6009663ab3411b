use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};

/// Outcome of a k-means run over `N` points in `dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub dim: usize,
    pub assignments: Vec<usize>,
    /// Row-major `k × dim`.
    pub centroids: Vec<f64>,
    /// Sum of squared distances to the assigned centroids.
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub history: Vec<f64>,
    pub converged: bool,
}

impl KMeans {
    pub fn k(&self) -> usize {
        self.centroids.len() / self.dim
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid and its squared distance; ties go to the lower index.
fn nearest_centroid(p: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.chunks(dim).enumerate() {
        let d = sq_dist(p, cen);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm over the row-major `N × dim` matrix `data`.
pub fn kmeans(data: &[f64], dim: usize, k: usize, max_iter: usize, rng_seed: u64) -> Result<KMeans> {
    if dim == 0 || !data.len().is_multiple_of(dim) {
        return Err(Error::InvalidArgument(format!(
            "{} values do not form rows of dimension {dim}",
            data.len()
        )));
    }
    let n = data.len() / dim;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} needs 1 <= k <= {n} points")));
    }
    let row = |i: usize| &data[i * dim..(i + 1) * dim];

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut picks = sample(&mut rng, n, k).into_vec();
    picks.sort_unstable();
    let mut centroids: Vec<f64> = picks.iter().flat_map(|&i| row(i).iter().copied()).collect();

    let mut assignments: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;
    for iter in 0..max_iter.max(1) {
        let mut next = Vec::with_capacity(n);
        let mut inertia = 0.0;
        for i in 0..n {
            let (c, d) = nearest_centroid(row(i), &centroids, dim);
            next.push(c);
            inertia += d;
        }
        history.push(inertia);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
        if iter + 1 == max_iter.max(1) {
            break;
        }
        centroids = update(data, dim, k, &assignments);
    }

    if !converged {
        centroids = update(data, dim, k, &assignments);
    }
    let inertia = (0..n).map(|i| sq_dist(row(i), &centroids[assignments[i] * dim..][..dim])).sum();
    Ok(KMeans {
        dim,
        assignments,
        centroids,
        inertia,
        history,
        converged,
    })
}

/// Cluster means; an empty cluster moves onto the point farthest from its
/// own centroid (each point used at most once).
fn update(data: &[f64], dim: usize, k: usize, assignments: &[usize]) -> Vec<f64> {
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (p, &c) in data.chunks(dim).zip(assignments) {
        counts[c] += 1;
        for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(p) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            sums[c * dim..(c + 1) * dim].iter_mut().for_each(|s| *s /= n);
        }
    }
    let mut used = vec![false; assignments.len()];
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let far = data
            .chunks(dim)
            .enumerate()
            .filter(|&(i, _)| !used[i])
            .map(|(i, p)| (i, sq_dist(p, &sums[assignments[i] * dim..][..dim])))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = far {
            used[i] = true;
            sums[c * dim..(c + 1) * dim].copy_from_slice(&data[i * dim..(i + 1) * dim]);
        }
    }
    sums
}

/// Tokens sharing a k-means cluster with any of `known`, nearest to their
/// centroid first. Clustering runs on unit-length word vectors so that it
/// follows the cosine geometry.
pub fn suggest_seeds(
    model: &EmbeddingModel,
    k: usize,
    known: &[String],
    n: usize,
    max_iter: usize,
    rng_seed: u64,
) -> Result<Vec<String>> {
    if known.is_empty() {
        return Err(Error::InvalidArgument("no known tokens".into()));
    }
    let missing: Vec<String> = known.iter().filter(|t| model.index_of(t).is_none()).cloned().collect();
    if !missing.is_empty() {
        return Err(Error::OutOfVocabulary(missing));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let known_idx: Vec<usize> = known.iter().map(|t| model.index_of(t).expect("checked")).collect();
    let data: Vec<f64> = (0..model.len()).flat_map(|i| model.unit_vector(i).iter().copied()).collect();
    let km = kmeans(&data, model.dim(), k, max_iter, rng_seed)?;

    let clusters: Vec<usize> = known_idx.iter().map(|&i| km.assignments[i]).collect();
    let mut candidates: Vec<(usize, f64)> = (0..model.len())
        .filter(|i| !known_idx.contains(i) && clusters.contains(&km.assignments[*i]))
        .map(|i| (i, sq_dist(model.unit_vector(i), km.centroid(km.assignments[i]))))
        .collect();
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(candidates
        .into_iter()
        .take(n)
        .map(|(i, _)| model.vocab().token(i).to_owned())
        .collect())
}
