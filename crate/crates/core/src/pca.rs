//! Subset PCA with deterministic axis orientation, plus the 1-D layouts used for
//! cross-model strip charts.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::right_svd;
use crate::metrics::spearman_rho;

/// A fitted principal-component basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// `k x dim`, orthonormal rows.
    pub components: Array2<f64>,
    /// Per-component variance with divisor `n - 1`, non-increasing.
    pub explained_variance: Vec<f64>,
    /// Total centered variance over all directions.
    pub total_variance: f64,
    pub n_samples: usize,
}

/// Principal-component coordinates of labeled points.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `n x k`.
    pub coords: Array2<f64>,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl Projection {
    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn k(&self) -> usize {
        self.coords.ncols()
    }

    /// Coordinates along one component.
    pub fn axis(&self, j: usize) -> Vec<f64> {
        self.coords.column(j).to_vec()
    }
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Share of total variance per retained component; zeros when the data has no spread.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        if self.total_variance == 0.0 {
            return vec![0.0; self.k()];
        }
        self.explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect()
    }
}

/// Fits PCA on `vectors` (`n x dim`). `values` orient the first component so its
/// projections have non-negative Spearman correlation with them.
pub fn pca_fit(vectors: ArrayView2<f64>, values: &[f64], k: usize) -> Result<PcaModel> {
    let (n, d) = vectors.dim();
    if n < 2 {
        return Err(Error::DegenerateInput(format!("need at least 2 vectors, got {n}")));
    }
    if values.len() != n {
        return Err(Error::LengthMismatch(n, values.len()));
    }
    let k_max = (n - 1).min(d);
    if k < 1 || k > k_max {
        return Err(Error::DegenerateInput(format!(
            "k = {k} outside 1..={k_max} for {n} vectors of dimension {d}"
        )));
    }
    if vectors.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateInput("non-finite input".into()));
    }

    let mean = vectors.mean_axis(Axis(0)).expect("n >= 2");
    let centered = &vectors - &mean;
    let denom = (n - 1) as f64;
    let total_variance = centered.iter().map(|x| x * x).sum::<f64>() / denom;

    let svd = right_svd(centered.view());
    let mut components = Array2::zeros((k, d));
    for (j, v) in svd.vectors.iter().take(k).enumerate() {
        components.row_mut(j).assign(&Array1::from(v.clone()));
    }
    let explained_variance = svd.singular_values.iter().take(k).map(|s| s * s / denom).collect();

    for j in 0..k {
        let flip = if j == 0 {
            let proj: Vec<f64> = centered.rows().into_iter().map(|r| dot(r, components.row(0))).collect();
            let rho = spearman_rho(values, &proj)?;
            if rho == 0.0 {
                loading_sign(components.row(0).as_slice().expect("contiguous")) < 0.0
            } else {
                rho < 0.0
            }
        } else {
            loading_sign(components.row(j).as_slice().expect("contiguous")) < 0.0
        };
        if flip {
            components.row_mut(j).mapv_inplace(|x| -x);
        }
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
        n_samples: n,
    })
}

/// Sign of the largest-magnitude loading (first index on ties).
fn loading_sign(v: &[f64]) -> f64 {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `coords[i][j] = (vectors[i] - mean) . components[j]`.
pub fn project(model: &PcaModel, vectors: ArrayView2<f64>) -> Result<Array2<f64>> {
    if vectors.ncols() != model.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            got: vectors.ncols(),
        });
    }
    let centered = &vectors - &model.mean;
    Ok(Array2::from_shape_fn((vectors.nrows(), model.k()), |(i, j)| {
        dot(centered.row(i), model.components.row(j))
    }))
}

/// Left-to-right dot product; fixed summation order keeps results reproducible.
fn dot(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// Rescales each row to unit Euclidean norm; zero rows are left as they are.
pub fn unit_normalize(vectors: &mut Array2<f64>) {
    for mut row in vectors.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|x| x / norm);
        }
    }
}

/// Maps positions so the first lands on 0 and the last on 1.
pub fn affine_align(positions: &[f64]) -> Result<Vec<f64>> {
    if positions.len() < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: positions.len(),
        });
    }
    let first = positions[0];
    let span = positions[positions.len() - 1] - first;
    if span == 0.0 || !span.is_finite() {
        return Err(Error::DegenerateEndpoints);
    }
    Ok(positions.iter().map(|x| (x - first) / span).collect())
}

/// Where the values would sit on a logarithmic axis, normalized to the same endpoints.
pub fn log_reference_layout(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::TooFew {
            need: 2,
            got: values.len(),
        });
    }
    if let Some(v) = values.iter().find(|v| **v <= 0.0) {
        return Err(Error::NonPositiveValue(*v));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NotIncreasing);
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (lo, hi) = (logs[0], logs[logs.len() - 1]);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - lo) / (hi - lo)).collect();
    // pin the endpoints against rounding
    out[0] = 0.0;
    *out.last_mut().expect("n >= 2") = 1.0;
    Ok(out)
}
