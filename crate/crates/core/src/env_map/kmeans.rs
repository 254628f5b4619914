//! Plain Lloyd k-means over fixed-dimension feature vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// `k * dim` row-major cluster centers.
    pub centers: Vec<f64>,
    pub labels: Vec<usize>,
    /// Sum of squared distances to the assigned center, one entry per assignment step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl KMeansResult {
    pub fn center(&self, cluster: usize, dim: usize) -> &[f64] {
        &self.centers[cluster * dim..(cluster + 1) * dim]
    }

    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate(features: &[f64], dim: usize, k: usize) -> Result<usize> {
    if dim == 0 || features.is_empty() || !features.len().is_multiple_of(dim) {
        return Err(Error::InvalidInput("empty or ragged feature set".into()));
    }
    let n = features.len() / dim;
    if k == 0 {
        return Err(Error::InvalidInput("cluster count must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidInput(format!(
            "cluster count {k} exceeds observation count {n}"
        )));
    }
    Ok(n)
}

/// k-means++ seeding followed by Lloyd iterations.
pub fn kmeans(features: &[f64], dim: usize, k: usize, seed: u64, max_iter: usize) -> Result<KMeansResult> {
    let n = validate(features, dim, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centers = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(&features[first * dim..(first + 1) * dim]);
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| sq_dist(&features[i * dim..(i + 1) * dim], &centers[..dim]))
        .collect();
    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in nearest.iter().enumerate() {
                if target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            // every point coincides with a chosen center
            rng.random_range(0..n)
        };
        let c = &features[pick * dim..(pick + 1) * dim];
        centers.extend_from_slice(c);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(&features[i * dim..(i + 1) * dim], c));
        }
    }

    kmeans_from_centers(features, dim, centers, max_iter)
}

/// Lloyd iterations from explicit initial centers. Stops when no assignment changes.
pub fn kmeans_from_centers(
    features: &[f64],
    dim: usize,
    mut centers: Vec<f64>,
    max_iter: usize,
) -> Result<KMeansResult> {
    if centers.is_empty() || !centers.len().is_multiple_of(dim) {
        return Err(Error::InvalidInput("ragged center list".into()));
    }
    let k = centers.len() / dim;
    let n = validate(features, dim, k)?;

    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        let mut objective = 0.0;
        for i in 0..n {
            let x = &features[i * dim..(i + 1) * dim];
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = sq_dist(x, &centers[c * dim..(c + 1) * dim]);
                // strict comparison keeps the lowest index on ties
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            objective += best_d;
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        trace.push(objective);
        if !changed {
            converged = true;
            break;
        }

        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = labels[i];
            counts[c] += 1;
            for d in 0..dim {
                sums[c * dim + d] += features[i * dim + d];
            }
        }
        for c in 0..k {
            // empty clusters keep their previous center
            if counts[c] > 0 {
                for d in 0..dim {
                    centers[c * dim + d] = sums[c * dim + d] / counts[c] as f64;
                }
            }
        }
    }

    Ok(KMeansResult { centers, labels, objective_trace: trace, iterations, converged })
}
