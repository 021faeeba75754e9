//! Seeded Lloyd k-means with k-means++ initialization.
#![allow(clippy::needless_range_loop)] // lockstep indexing over rows/centers/assignments

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub struct KmeansResult {
    pub centers: Array2<f64>,
    /// Cluster index per data row; ties go to the lowest center index.
    pub assignment: Vec<usize>,
}

/// Cluster `data` rows into `k` groups. Deterministic given the RNG state:
/// k-means++ seeding, Lloyd iterations capped at `max_iter`, convergence
/// when no center moves more than `tol` (Euclidean). Empty clusters are
/// re-seeded from the point farthest from its current center.
pub fn kmeans(
    data: ArrayView2<'_, f64>,
    k: usize,
    rng: &mut ChaCha8Rng,
    max_iter: usize,
    tol: f64,
) -> KmeansResult {
    let n = data.nrows();
    let d = data.ncols();
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");

    // k-means++ seeding.
    let mut centers = Array2::zeros((k, d));
    let first = rng.gen_range(0..n);
    centers.row_mut(0).assign(&data.row(first));
    let mut best_d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(data.row(i), centers.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = best_d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in best_d2.iter().enumerate() {
                u -= w;
                if u <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All points coincide with existing centers.
            rng.gen_range(0..n)
        };
        centers.row_mut(c).assign(&data.row(pick));
        for i in 0..n {
            let d2 = sq_dist(data.row(i), centers.row(c));
            if d2 < best_d2[i] {
                best_d2[i] = d2;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for _ in 0..max_iter {
        // Assign.
        for i in 0..n {
            let mut best = 0usize;
            let mut best_val = f64::INFINITY;
            for c in 0..k {
                let d2 = sq_dist(data.row(i), centers.row(c));
                if d2 < best_val {
                    best_val = d2;
                    best = c;
                }
            }
            assignment[i] = best;
        }
        // Update.
        let mut counts = vec![0usize; k];
        let mut sums = Array2::<f64>::zeros((k, d));
        for i in 0..n {
            counts[assignment[i]] += 1;
            let mut row = sums.row_mut(assignment[i]);
            row += &data.row(i);
        }
        let mut movement = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed from the point farthest from its assigned center.
                let far = (0..n)
                    .max_by(|&i, &j| {
                        let di = sq_dist(data.row(i), centers.row(assignment[i]));
                        let dj = sq_dist(data.row(j), centers.row(assignment[j]));
                        di.total_cmp(&dj)
                    })
                    .unwrap();
                movement = f64::INFINITY;
                centers.row_mut(c).assign(&data.row(far));
                assignment[far] = c;
            } else {
                let new_center = &sums.row(c) / counts[c] as f64;
                movement = movement.max(sq_dist(new_center.view(), centers.row(c)).sqrt());
                centers.row_mut(c).assign(&new_center);
            }
        }
        if movement <= tol {
            break;
        }
    }

    // Final assignment against the converged centers.
    for i in 0..n {
        let mut best = 0usize;
        let mut best_val = f64::INFINITY;
        for c in 0..k {
            let d2 = sq_dist(data.row(i), centers.row(c));
            if d2 < best_val {
                best_val = d2;
                best = c;
            }
        }
        assignment[i] = best;
    }
    KmeansResult {
        centers,
        assignment,
    }
}
