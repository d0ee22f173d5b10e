//! One-sided (Hestenes) Jacobi SVD for small dense matrices.

use ndarray::ArrayView2;

const MAX_SWEEPS: usize = 80;

/// Singular values below `REL_ZERO * largest` are treated as exact zeros.
pub const REL_ZERO: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonalizes `cols` in place by plane rotations, applying the same rotations to `acc`.
fn jacobi_sweeps(cols: &mut [Vec<f64>], acc: &mut [Vec<f64>]) {
    let m = cols.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cols, p, q, c, s);
                rotate(acc, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Right singular vectors of an `n x d` matrix.
#[derive(Debug, Clone)]
pub struct RightSvd {
    /// Non-increasing, with numerically zero values set to exactly 0.
    pub singular_values: Vec<f64>,
    /// `min(n, d)` orthonormal vectors of length `d`, aligned with `singular_values`.
    pub vectors: Vec<Vec<f64>>,
}

pub fn right_svd(a: ArrayView2<f64>) -> RightSvd {
    let (n, d) = a.dim();
    let r = n.min(d);
    let (mut sigma, mut vecs): (Vec<f64>, Vec<Vec<f64>>) = if d <= n {
        // Rotate the d columns of A; accumulated rotations are the right vectors.
        let mut cols: Vec<Vec<f64>> = (0..d).map(|j| a.column(j).to_vec()).collect();
        let mut v: Vec<Vec<f64>> = (0..d)
            .map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        jacobi_sweeps(&mut cols, &mut v);
        (cols.iter().map(|c| norm(c)).collect(), v)
    } else {
        // Rotate the n columns of A^T; their normalized results are the right vectors.
        let mut cols: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let mut unused: Vec<Vec<f64>> = vec![Vec::new(); n];
        jacobi_sweeps(&mut cols, &mut unused);
        let s: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
        let v = cols
            .into_iter()
            .zip(&s)
            .map(|(c, &sv)| {
                if sv > 0.0 {
                    c.iter().map(|x| x / sv).collect()
                } else {
                    c
                }
            })
            .collect();
        (s, v)
    };

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    sigma = order.iter().map(|&i| sigma[i]).collect();
    vecs = order.iter().map(|&i| std::mem::take(&mut vecs[i])).collect();
    sigma.truncate(r);
    vecs.truncate(r);

    let top = sigma.first().copied().unwrap_or(0.0);
    for s in sigma.iter_mut() {
        if *s <= REL_ZERO * top {
            *s = 0.0;
        }
    }
    let vectors = orthonormalize(vecs, &sigma, d);
    RightSvd {
        singular_values: sigma,
        vectors,
    }
}

/// Modified Gram-Schmidt in order. Directions with zero singular value are rebuilt from
/// standard basis vectors orthogonal to everything before them.
fn orthonormalize(vecs: Vec<Vec<f64>>, sigma: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vecs.len());
    for (v, &s) in vecs.into_iter().zip(sigma) {
        let candidate = if s > 0.0 { Some(reduce(v, &out)) } else { None };
        let next = match candidate {
            Some(c) if norm(&c) > 0.5 => c,
            _ => complete(&out, d),
        };
        let nv = norm(&next);
        out.push(next.iter().map(|x| x / nv).collect());
    }
    out
}

fn reduce(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Vec<f64> {
    for _ in 0..2 {
        for b in basis {
            let proj = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
    }
    v
}

fn complete(basis: &[Vec<f64>], d: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        let r = reduce(e, basis);
        let nr = norm(&r);
        if nr > 0.7 {
            return r;
        }
        if best.as_ref().is_none_or(|(b, _)| nr > *b) {
            best = Some((nr, r));
        }
    }
    best.expect("d > 0").1
}
