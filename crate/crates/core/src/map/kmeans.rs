//! Seeded k-means with k-means++ initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MapError;

pub const MAX_ITERATIONS: usize = 100;
/// Independent k-means++ starts; the lowest-inertia result wins.
pub const RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster index for every point, in `0..k`.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Sum of squared distances from each point to its centroid.
    pub inertia: f64,
}

/// Partitions `points` into `k` non-empty clusters, keeping the best of
/// [`RESTARTS`] seeded runs (ties go to the earlier run).
///
/// Each run stops when assignments are stable or after [`MAX_ITERATIONS`]
/// rounds. Clusters that empty out are re-seeded with the point farthest
/// from its own centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<Clustering, MapError> {
    let n = points.len();
    if k == 0 || n < k {
        return Err(MapError::TooFewDocuments { docs: n, k });
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..RESTARTS {
        let run = single_run(points, k, seeds.random());
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn single_run(points: &[Vec<f64>], k: usize, seed: u64) -> Clustering {
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_seeds(points, k, &mut rng);
    let mut assignment = vec![usize::MAX; n];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        reseed_empty(points, &mut next, &mut centroids, k);
        let stable = next == assignment;
        assignment = next;
        centroids = recompute(points, &assignment, &centroids, k);
        if stable {
            break;
        }
    }
    let inertia = points
        .iter()
        .zip(&assignment)
        .map(|(p, &a)| squared_distance(p, &centroids[a]))
        .sum();
    Clustering {
        assignment,
        centroids,
        iterations,
        inertia,
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(p, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Greedy k-means++: each new centre is the best (lowest resulting
/// potential) of `2 + ln k` D²-weighted candidates.
fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| squared_distance(p, &points[first])).collect();
    while centroids.len() < k {
        let total: f64 = (0..n).filter(|&i| !chosen[i]).map(|i| dist[i]).sum();
        let pick = if total > 0.0 {
            let mut best: Option<(f64, usize, Vec<f64>)> = None;
            for _ in 0..trials {
                let candidate = weighted_pick(&dist, &chosen, total, rng);
                let next: Vec<f64> = points
                    .iter()
                    .zip(&dist)
                    .map(|(p, d)| d.min(squared_distance(p, &points[candidate])))
                    .collect();
                let potential: f64 = next.iter().sum();
                if best.as_ref().is_none_or(|(bp, _, _)| potential < *bp) {
                    best = Some((potential, candidate, next));
                }
            }
            let (_, pick, next) = best.expect("at least one trial");
            dist = next;
            pick
        } else {
            let remaining: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            remaining[rng.random_range(0..remaining.len())]
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
    }
    centroids
}

/// D²-weighted draw among unchosen points with positive distance.
fn weighted_pick(dist: &[f64], chosen: &[bool], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let n = dist.len();
    let mut target = rng.random::<f64>() * total;
    for i in (0..n).filter(|&i| !chosen[i]) {
        target -= dist[i];
        if target < 0.0 && dist[i] > 0.0 {
            return i;
        }
    }
    // rounding can leave a sliver past the last candidate
    (0..n).rev().find(|&i| !chosen[i] && dist[i] > 0.0).expect("total > 0")
}

/// Moves the farthest-from-centroid point of a multi-member cluster into
/// each empty cluster.
fn reseed_empty(points: &[Vec<f64>], assignment: &mut [usize], centroids: &mut [Vec<f64>], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let a = assignment[i];
            if sizes[a] < 2 {
                continue;
            }
            let d = squared_distance(p, &centroids[a]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let i = far.expect("n >= k guarantees a cluster with two members");
        assignment[i] = empty;
        centroids[empty] = points[i].clone();
    }
}

fn recompute(points: &[Vec<f64>], assignment: &[usize], previous: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let dim = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignment) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(c, (mut s, count))| {
            if count == 0 {
                return previous[c].clone();
            }
            s.iter_mut().for_each(|x| *x /= count as f64);
            s
        })
        .collect()
}
