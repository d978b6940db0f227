use rand::Rng;
use rayon::prelude::*;

use crate::community::Partition;
use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::rng;

pub const MAX_ITERATIONS: usize = 300;
pub const SHIFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub partition: Partition,
    pub centroids: Matrix,
    /// Within-cluster sum of squares.
    pub wcss: f64,
    pub iterations: usize,
}

pub fn kmeans_pp(points: &Matrix, k: usize, seed: u64, restarts: usize) -> Result<Partition> {
    Ok(kmeans(points, k, seed, restarts)?.partition)
}

/// Best of `restarts` k-means++ runs by WCSS; ties go to the earlier restart.
pub fn kmeans(points: &Matrix, k: usize, seed: u64, restarts: usize) -> Result<KMeansFit> {
    let n = points.rows();
    if k == 0 {
        return Err(Error::Parameter("k must be >= 1".into()));
    }
    if n < k {
        return Err(Error::Parameter(format!(
            "{n} points cannot form {k} clusters"
        )));
    }
    if !points.is_finite() {
        return Err(Error::Numeric("non-finite point coordinates".into()));
    }
    let fits: Vec<(Vec<usize>, Matrix, f64, usize)> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| lloyd(points, k, rng::split(seed, r)))
        .collect();
    let best = fits
        .into_iter()
        .reduce(|a, b| if b.2 < a.2 { b } else { a })
        .expect("at least one restart");
    Ok(KMeansFit {
        partition: Partition::new(best.0, k)?,
        centroids: best.1,
        wcss: best.2,
        iterations: best.3,
    })
}

fn nearest(p: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.iter_rows().enumerate() {
        let d = sq_dist(p, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_centroids(points: &Matrix, k: usize, r: &mut impl Rng) -> Matrix {
    let n = points.rows();
    let mut chosen = vec![r.random_range(0..n)];
    let mut d2: Vec<f64> = points
        .iter_rows()
        .map(|p| sq_dist(p, points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut t = r.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && t < d {
                    pick = i;
                    break;
                }
                t -= d;
            }
            // Float drift can run past the end; fall back to the last positive weight.
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&d| d > 0.0).expect("total > 0");
            }
            pick
        } else {
            // Remaining points all coincide with a centroid.
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[r.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter_rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, points.row(next)));
        }
    }
    points.select_rows(&chosen)
}

fn lloyd(points: &Matrix, k: usize, seed: u64) -> (Vec<usize>, Matrix, f64, usize) {
    let (n, dim) = (points.rows(), points.cols());
    let mut r = rng::rng(seed);
    let mut centroids = seed_centroids(points, k, &mut r);
    let mut assign = vec![0usize; n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (i, p) in points.iter_rows().enumerate() {
            assign[i] = nearest(p, &centroids).0;
        }
        repair_empty(points, &mut assign, &centroids, k);
        let mut next = Matrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter_rows().enumerate() {
            counts[assign[i]] += 1;
            next.row_mut(assign[i])
                .iter_mut()
                .zip(p)
                .for_each(|(c, x)| *c += x);
        }
        for (c, &m) in counts.iter().enumerate() {
            next.row_mut(c).iter_mut().for_each(|x| *x /= m as f64);
        }
        let shift = centroids
            .iter_rows()
            .zip(next.iter_rows())
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < SHIFT_TOLERANCE || iterations >= MAX_ITERATIONS {
            break;
        }
    }
    let wcss = points
        .iter_rows()
        .zip(&assign)
        .map(|(p, &c)| sq_dist(p, centroids.row(c)))
        .sum();
    (assign, centroids, wcss, iterations)
}

/// Moves the point farthest from its centroid in the largest cluster into
/// each empty cluster.
fn repair_empty(points: &Matrix, assign: &mut [usize], centroids: &Matrix, k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        assign.iter().for_each(|&c| counts[c] += 1);
        let Some(empty) = counts.iter().position(|&m| m == 0) else {
            return;
        };
        let largest = (0..k)
            .max_by_key(|&c| (counts[c], std::cmp::Reverse(c)))
            .unwrap();
        let far = (0..assign.len())
            .filter(|&i| assign[i] == largest)
            .map(|i| (i, sq_dist(points.row(i), centroids.row(largest))))
            .fold(
                (usize::MAX, -1.0),
                |b, (i, d)| if d > b.1 { (i, d) } else { b },
            )
            .0;
        assign[far] = empty;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identical_points_single_cluster() {
        let pts = Matrix::from_rows(&vec![vec![1.5, -2.0]; 7]);
        let fit = kmeans(&pts, 1, 3, 4).unwrap();
        assert_eq!(fit.partition.assignment(), &[0; 7]);
        assert_eq!(fit.centroids.row(0), &[1.5, -2.0]);
        assert_eq!(fit.wcss, 0.0);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let pts = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![5.0], vec![9.0]]);
        let fit = kmeans(&pts, 4, 1, 3).unwrap();
        assert_eq!(fit.wcss, 0.0);
        assert_eq!(fit.partition.sizes(), vec![1; 4]);
    }

    #[test]
    fn duplicates_still_fill_every_cluster() {
        let pts = Matrix::from_rows(&[vec![0.0], vec![0.0], vec![0.0], vec![1.0]]);
        let fit = kmeans(&pts, 3, 0, 1).unwrap();
        assert!(fit.partition.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn too_few_points() {
        let pts = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        assert!(matches!(kmeans_pp(&pts, 3, 0, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn separated_blobs_recovered() {
        let mut exact = 0;
        for run in 0..100u64 {
            let mut r = rng::rng(run);
            let rows: Vec<Vec<f64>> = (0..40)
                .map(|i| {
                    let off = if i < 20 { 0.0 } else { 10.0 };
                    (0..2)
                        .map(|_| off + Distribution::<f64>::sample(&StandardNormal, &mut r))
                        .collect()
                })
                .collect();
            let p = kmeans_pp(&Matrix::from_rows(&rows), 2, run, 5).unwrap();
            let a = p.assignment();
            if a[..20].iter().all(|&c| c == a[0])
                && a[20..].iter().all(|&c| c == a[20])
                && a[0] != a[20]
            {
                exact += 1;
            }
        }
        assert!(exact >= 99, "{exact}/100");
    }

    #[test]
    fn deterministic_given_seed() {
        let mut r = rng::rng(9);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| vec![r.random(), r.random()]).collect();
        let pts = Matrix::from_rows(&rows);
        let a = kmeans(&pts, 4, 11, 6).unwrap();
        let b = kmeans(&pts, 4, 11, 6).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.wcss, b.wcss);
    }
}
