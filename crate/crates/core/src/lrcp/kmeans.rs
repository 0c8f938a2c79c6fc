//! Seeded k-means (k-means++ initialization, Lloyd iterations).

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::rng::seeded;

pub const DEFAULT_MAX_ITER: usize = 25;

/// Returns a `k x D` matrix of cluster centers for the rows of `data`.
pub fn kmeans(data: ArrayView2<'_, f64>, k: usize, seed: u64, max_iter: usize) -> Array2<f64> {
    let (n, d) = data.dim();
    assert!(k >= 1 && k <= n, "k = {k} must lie in [1, {n}]");
    let mut rng = seeded(seed);

    let mut centers = Array2::zeros((k, d));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&data.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| row_dist(&data, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).assign(&data.row(pick));
        for (i, best) in nearest.iter_mut().enumerate() {
            let dist = row_dist(&data, i, &centers, c);
            if dist < *best {
                *best = dist;
            }
        }
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for c in 0..k {
                let dist = row_dist(&data, i, &centers, c);
                if dist < best_dist {
                    best_dist = dist;
                    best = c;
                }
            }
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros((k, d));
        let mut counts = vec![0usize; k];
        for (i, &label) in labels.iter().enumerate() {
            let mut row = sums.row_mut(label);
            row += &data.row(i);
            counts[label] += 1;
        }
        for (c, &count) in counts.iter().enumerate() {
            // Empty clusters keep their previous center.
            if count > 0 {
                let mean = &sums.row(c) / count as f64;
                centers.row_mut(c).assign(&mean);
            }
        }
    }
    centers
}

fn row_dist(data: &ArrayView2<'_, f64>, i: usize, centers: &Array2<f64>, c: usize) -> f64 {
    data.row(i)
        .iter()
        .zip(centers.row(c))
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separates_two_blobs() {
        let data = array![
            [0.0, 0.0],
            [0.1, 0.0],
            [0.0, 0.1],
            [10.0, 10.0],
            [10.1, 10.0],
            [10.0, 10.1]
        ];
        let centers = kmeans(data.view(), 2, 5, DEFAULT_MAX_ITER);
        let mut xs: Vec<f64> = centers.column(0).to_vec();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] - 1.0 / 30.0).abs() < 1e-12);
        assert!((xs[1] - (10.0 + 1.0 / 30.0)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let data = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64);
        let a = kmeans(data.view(), 4, 9, DEFAULT_MAX_ITER);
        let b = kmeans(data.view(), 4, 9, DEFAULT_MAX_ITER);
        assert_eq!(a, b);
    }

    #[test]
    fn identical_points() {
        let data = Array2::from_elem((5, 2), 1.5);
        let centers = kmeans(data.view(), 3, 0, DEFAULT_MAX_ITER);
        assert!(centers.iter().all(|&v| v == 1.5));
    }
}
