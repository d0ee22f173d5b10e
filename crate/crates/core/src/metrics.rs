//! Ordering, spacing, scale-fit and cluster metrics over principal-axis positions.
//!
//! All functions are pure. Rank ties use average ranks throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pca::Projection;

/// Two r2 values closer than this are a tie.
pub const R2_TIE: f64 = 1e-9;

fn check_pair(a: &[f64], b: &[f64], need: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < need {
        return Err(Error::TooFew { need, got: a.len() });
    }
    Ok(())
}

fn too_few(need: usize, got: usize) -> Result<()> {
    if got < need {
        Err(Error::TooFew { need, got })
    } else {
        Ok(())
    }
}

/// 1-based ranks, ties receive the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Kendall tau-b over all n(n-1)/2 pairs. Returns 0 when either side is entirely tied.
pub fn kendall_tau(values: &[f64], positions: &[f64]) -> Result<f64> {
    check_pair(values, positions, 2)?;
    let n = values.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_v, mut ties_p) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dv = values[j] - values[i];
            let dp = positions[j] - positions[i];
            if dv == 0.0 {
                ties_v += 1;
            }
            if dp == 0.0 {
                ties_p += 1;
            }
            let s = dv * dp;
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - ties_v) * (n0 - ties_p)) as f64).sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(((concordant - discordant) as f64 / denom).clamp(-1.0, 1.0))
}

/// Spearman rho as the Pearson correlation of average ranks.
pub fn spearman_rho(values: &[f64], positions: &[f64]) -> Result<f64> {
    check_pair(values, positions, 2)?;
    Ok(pearson(&average_ranks(values), &average_ranks(positions)))
}

/// Fraction of consecutive pairs (in value order) whose position strictly increases.
pub fn monotone_fraction(positions: &[f64]) -> Result<f64> {
    too_few(2, positions.len())?;
    let up = positions.windows(2).filter(|w| w[1] > w[0]).count();
    Ok(up as f64 / (positions.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingStats {
    pub kendall_tau: f64,
    pub spearman_rho: f64,
    pub monotone_fraction: f64,
    pub n_used: usize,
}

/// `values` must be in set order (increasing).
pub fn ordering_stats(values: &[f64], positions: &[f64]) -> Result<OrderingStats> {
    Ok(OrderingStats {
        kendall_tau: kendall_tau(values, positions)?,
        spearman_rho: spearman_rho(values, positions)?,
        monotone_fraction: monotone_fraction(positions)?,
        n_used: values.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleModel {
    Linear,
    Logarithmic,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFit {
    pub linear: LineFit,
    pub logarithmic: LineFit,
    pub preferred: ScaleModel,
    pub excluded_nonpositive: usize,
    /// All positions equal; both r2 are reported as 0.
    pub zero_variance: bool,
}

/// Ordinary least squares of `y` on `x`. r2 is clamped to [0, 1].
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    check_pair(x, y, 3)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("regressor has zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let r = b - (slope * a + intercept);
        ss_res += r * r;
        ss_tot += (b - my) * (b - my);
    }
    let r2 = if ss_tot == 0.0 {
        0.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(LineFit { slope, intercept, r2 })
}

/// Linear (`x ~ a*n + b`) versus logarithmic (`x ~ a*ln n + b`) fit of positions on values.
/// Entries with value <= 0 are left out of the logarithmic fit only.
pub fn scale_fit(values: &[f64], positions: &[f64]) -> Result<ScaleFit> {
    check_pair(values, positions, 3)?;
    let (log_x, log_y): (Vec<f64>, Vec<f64>) = values
        .iter()
        .zip(positions)
        .filter(|(v, _)| **v > 0.0)
        .map(|(v, p)| (v.ln(), *p))
        .unzip();
    let excluded_nonpositive = values.len() - log_x.len();
    too_few(3, log_x.len())?;

    let linear = least_squares(values, positions)?;
    let logarithmic = least_squares(&log_x, &log_y)?;
    let zero_variance = positions.iter().all(|p| *p == positions[0]);

    let preferred = if (linear.r2 - logarithmic.r2).abs() < R2_TIE {
        ScaleModel::Tie
    } else if logarithmic.r2 > linear.r2 {
        ScaleModel::Logarithmic
    } else {
        ScaleModel::Linear
    };
    Ok(ScaleFit {
        linear,
        logarithmic,
        preferred,
        excluded_nonpositive,
        zero_variance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    pub gaps: Vec<f64>,
    pub argmin_index: usize,
}

pub fn consecutive_gaps(positions: &[f64]) -> Result<Gaps> {
    too_few(2, positions.len())?;
    let gaps: Vec<f64> = positions.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut argmin_index = 0;
    for (i, g) in gaps.iter().enumerate() {
        if *g < gaps[argmin_index] {
            argmin_index = i;
        }
    }
    Ok(Gaps { gaps, argmin_index })
}

/// Spearman correlation of gap index against gap size. Negative means spacing shrinks as
/// values grow.
pub fn gap_trend(positions: &[f64]) -> Result<f64> {
    too_few(4, positions.len())?;
    let gaps = consecutive_gaps(positions)?.gaps;
    let index: Vec<f64> = (0..gaps.len()).map(|i| i as f64).collect();
    spearman_rho(&index, &gaps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterComparison {
    pub centroid_distance: f64,
    pub mean_within_spread: f64,
    pub separation_ratio: f64,
    pub direction_cosine: f64,
}

fn centroid(pts: &[[f64; 2]]) -> [f64; 2] {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    [sx / n, sy / n]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn planar(p: &Projection) -> Result<Vec<[f64; 2]>> {
    if p.k() < 2 {
        return Err(Error::NotTwoDimensional(p.k()));
    }
    Ok((0..p.len()).map(|i| [p.coords[[i, 0]], p.coords[[i, 1]]]).collect())
}

/// Unit slope vector of the regression of 2-D coordinates on value rank.
fn increase_direction(pts: &[[f64; 2]], values: &[f64]) -> [f64; 2] {
    let ranks = average_ranks(values);
    let n = ranks.len() as f64;
    let mr = ranks.iter().sum::<f64>() / n;
    let c = centroid(pts);
    let (mut srr, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (r, p) in ranks.iter().zip(pts) {
        srr += (r - mr) * (r - mr);
        sx += (r - mr) * (p[0] - c[0]);
        sy += (r - mr) * (p[1] - c[1]);
    }
    if srr == 0.0 {
        return [0.0, 0.0];
    }
    let (ax, ay) = (sx / srr, sy / srr);
    let norm = ax.hypot(ay);
    if norm == 0.0 {
        [0.0, 0.0]
    } else {
        [ax / norm, ay / norm]
    }
}

/// Compares two clusters living in the same 2-D principal-component space.
pub fn cluster_comparison(a: &Projection, b: &Projection) -> Result<ClusterComparison> {
    let pa = planar(a)?;
    let pb = planar(b)?;
    too_few(3, pa.len())?;
    too_few(3, pb.len())?;
    let (ca, cb) = (centroid(&pa), centroid(&pb));
    let spread = |pts: &[[f64; 2]], c: [f64; 2]| pts.iter().map(|p| dist(*p, c)).sum::<f64>() / pts.len() as f64;
    let (sa, sb) = (spread(&pa, ca), spread(&pb, cb));
    if sa == 0.0 || sb == 0.0 {
        return Err(Error::ZeroSpread);
    }
    let centroid_distance = dist(ca, cb);
    let mean_within_spread = (sa + sb) / 2.0;
    let da = increase_direction(&pa, &a.values);
    let db = increase_direction(&pb, &b.values);
    Ok(ClusterComparison {
        centroid_distance,
        mean_within_spread,
        separation_ratio: centroid_distance / mean_within_spread,
        direction_cosine: (da[0] * db[0] + da[1] * db[1]).clamp(-1.0, 1.0),
    })
}

/// Largest k with `base^k` dividing `v`; 0 for v = 0.
pub fn valuation(v: u64, base: u64) -> u32 {
    if v == 0 {
        return 0;
    }
    let (mut v, mut k) = (v, 0);
    while v % base == 0 {
        v /= base;
        k += 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roundness {
    pub spearman_z10: f64,
    pub spearman_v2: f64,
    /// Every point sits on the centroid; both correlations are reported as 0.
    pub degenerate: bool,
}

/// Rank correlation between roundness (powers of 10 and of 2 dividing the value) and
/// closeness to the centroid. Positive means rounder numbers sit nearer the middle.
pub fn roundness_centrality(values: &[f64], coords: &[[f64; 2]]) -> Result<Roundness> {
    if values.len() != coords.len() {
        return Err(Error::LengthMismatch(values.len(), coords.len()));
    }
    too_few(4, values.len())?;
    let ints: Vec<u64> = values
        .iter()
        .map(|v| {
            if *v >= 1.0 && v.fract() == 0.0 && *v < 2f64.powi(53) {
                Ok(*v as u64)
            } else {
                Err(Error::DegenerateInput(format!(
                    "roundness needs integers >= 1, got {v}"
                )))
            }
        })
        .collect::<Result<_>>()?;
    let c = centroid(coords);
    let centrality: Vec<f64> = coords.iter().map(|p| -dist(*p, c)).collect();
    let degenerate = centrality.iter().all(|x| *x == centrality[0]);
    if degenerate {
        return Ok(Roundness {
            spearman_z10: 0.0,
            spearman_v2: 0.0,
            degenerate,
        });
    }
    let z10: Vec<f64> = ints.iter().map(|v| valuation(*v, 10) as f64).collect();
    let v2: Vec<f64> = ints.iter().map(|v| valuation(*v, 2) as f64).collect();
    Ok(Roundness {
        spearman_z10: spearman_rho(&z10, &centrality)?,
        spearman_v2: spearman_rho(&v2, &centrality)?,
        degenerate,
    })
}
