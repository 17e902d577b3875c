//! Naive reference implementations used as test oracles.
#![allow(dead_code)]

use ffkm::{CenterSet, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

/// Double loop over points and centers.
pub fn naive_objective(points: &[Vec<f64>], centers: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for p in points {
        let mut best = f64::INFINITY;
        for c in centers {
            let mut d = 0.0;
            for a in 0..p.len() {
                d += (p[a] - c[a]) * (p[a] - c[a]);
            }
            if d < best {
                best = d;
            }
        }
        total += best;
    }
    total / points.len() as f64
}

/// Nearest center by full scan, first minimum wins.
pub fn brute_labels(points: &[Vec<f64>], centers: &[Vec<f64>]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let d: Vec<f64> = centers
                .iter()
                .map(|c| p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect();
            let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
            d.iter().position(|&x| x == min).unwrap()
        })
        .collect()
}

/// Minimum within-cluster SSE / n over every labelling of `xs` into at most
/// `k` groups.
pub fn exhaustive_optimum_1d(xs: &[f64], k: usize) -> f64 {
    let n = xs.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sum = vec![0.0; k];
        let mut cnt = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            sum[l] += xs[i];
            cnt[l] += 1;
        }
        let mut sse = 0.0;
        for (i, &l) in labels.iter().enumerate() {
            let m = sum[l] / cnt[l] as f64;
            sse += (xs[i] - m) * (xs[i] - m);
        }
        best = best.min(sse / n as f64);
        // next labelling in base k
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
    }
}

/// Centroid index from its definition: a true center counts as found when
/// some fitted center has it as its first nearest true center.
pub fn naive_ci(fitted: &[Vec<f64>], truth: &[Vec<f64>]) -> usize {
    let owners = brute_labels(fitted, truth);
    (0..truth.len()).filter(|s| !owners.contains(s)).count()
}

/// Objective after dropping center `i`, recomputed from scratch.
pub fn naive_removal_objective(points: &[Vec<f64>], centers: &[Vec<f64>], i: usize) -> f64 {
    let rest: Vec<Vec<f64>> = centers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, c)| c.clone())
        .collect();
    naive_objective(points, &rest)
}

pub fn rows_of(data: &Dataset) -> Vec<Vec<f64>> {
    data.points().map(|p| p.to_vec()).collect()
}

pub fn center_rows(c: &CenterSet) -> Vec<Vec<f64>> {
    c.to_rows()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Per-cluster mean squared distance and total squared distance, computed
/// directly from a label vector.
pub fn naive_spread(
    points: &[Vec<f64>],
    centers: &[Vec<f64>],
    labels: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let k = centers.len();
    let mut tot = vec![0.0; k];
    let mut cnt = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        tot[l] += p
            .iter()
            .zip(&centers[l])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        cnt[l] += 1;
    }
    let mean = tot.iter().zip(&cnt).map(|(t, &c)| t / c as f64).collect();
    (mean, tot)
}

/// Exhaustive closest pair, `i < j`, first minimum in lexicographic order.
pub fn brute_closest_pair(centers: &[Vec<f64>]) -> (usize, usize) {
    let mut best = ((0, 1), f64::INFINITY);
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let d: f64 = centers[i]
                .iter()
                .zip(&centers[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d < best.1 {
                best = ((i, j), d);
            }
        }
    }
    best.0
}
