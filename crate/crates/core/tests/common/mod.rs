//! Test-only oracles, independent of the crate's PCA and rank code paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use numprobe::rng::SplitMix64;

pub fn gaussian_matrix(rng: &mut SplitMix64, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, d), || rng.next_gaussian())
}

/// Brute-force PCA: eigendecomposition of the `n - 1` covariance matrix.
pub struct OraclePca {
    /// Descending.
    pub variances: Vec<f64>,
    /// Columns are unit eigenvectors, aligned with `variances`.
    pub vectors: DMatrix<f64>,
    pub centered: DMatrix<f64>,
}

pub fn oracle_pca(x: &Array2<f64>) -> OraclePca {
    let (n, d) = x.dim();
    let m = DMatrix::from_fn(n, d, |i, j| x[[i, j]]);
    let mut centered = m.clone();
    for j in 0..d {
        let mean = m.column(j).sum() / n as f64;
        for i in 0..n {
            centered[(i, j)] -= mean;
        }
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let variances = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    OraclePca {
        variances,
        vectors,
        centered,
    }
}

impl OraclePca {
    /// `|projection|` of sample `i` on eigenvector `j`.
    pub fn abs_projection(&self, i: usize, j: usize) -> f64 {
        (self.centered.row(i) * self.vectors.column(j))[(0, 0)].abs()
    }

    pub fn total_variance(&self) -> f64 {
        self.variances.iter().sum()
    }
}

/// Kendall tau by direct pair counting, for inputs without ties.
pub fn kendall_by_pairs(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut score = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[j] - x[i]).signum() as i64;
            let b = (y[j] - y[i]).signum() as i64;
            score += a * b;
        }
    }
    score as f64 / (n * (n - 1) / 2) as f64
}

/// 1 - 6 sum d^2 / (n (n^2 - 1)) for two permutations of distinct ranks.
pub fn spearman_closed_form(rank_x: &[usize], rank_y: &[usize]) -> f64 {
    let n = rank_x.len() as f64;
    let d2: f64 = rank_x
        .iter()
        .zip(rank_y)
        .map(|(a, b)| {
            let d = *a as f64 - *b as f64;
            d * d
        })
        .sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Lexicographic next permutation; false once the last one is reached.
pub fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Random orthogonal matrix by Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal(rng: &mut SplitMix64, d: usize) -> Array2<f64> {
    loop {
        let g = gaussian_matrix(rng, d, d);
        let mut q = Array2::<f64>::zeros((d, d));
        let mut ok = true;
        for j in 0..d {
            let mut v = g.column(j).to_owned();
            for k in 0..j {
                let qk = q.column(k).to_owned();
                let p = v.dot(&qk);
                v = v - &qk * p;
            }
            let nv = v.dot(&v).sqrt();
            if nv < 1e-6 {
                ok = false;
                break;
            }
            q.column_mut(j).assign(&(v / nv));
        }
        if ok {
            return q;
        }
    }
}
