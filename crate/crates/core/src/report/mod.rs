//! Experiment orchestration and canonical JSON reports.

pub mod cli;
mod svg;

pub use svg::{render_scatter, render_strips, ScatterStyle, StripStyle};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{EmbeddingBundle, LookupPolicy};
use crate::error::{Error, Result};
use crate::metrics::{
    cluster_comparison, consecutive_gaps, gap_trend, ordering_stats, roundness_centrality, scale_fit,
    ClusterComparison, Gaps, OrderingStats, Roundness, ScaleFit,
};
use crate::pca::{affine_align, log_reference_layout, pca_fit, project, unit_normalize, Projection};
use crate::probesets::{resolve, ResolvedSet, TokenSet};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub k: usize,
    pub unit_norm: bool,
    pub lookup: LookupPolicy,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            k: 2,
            unit_norm: false,
            lookup: LookupPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub label: String,
    pub surface: String,
    pub value: f64,
    pub coords: Vec<f64>,
}

/// Metrics for one probe set along the first principal axis of the joint fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub name: String,
    pub n_used: usize,
    pub missing: Vec<String>,
    pub ordering: Option<OrderingStats>,
    pub scale_fit: Option<ScaleFit>,
    pub gaps: Option<Gaps>,
    pub gap_trend: Option<f64>,
    pub roundness: Option<Roundness>,
    pub points: Vec<Point>,
}

impl SetReport {
    pub fn projection(&self) -> Projection {
        let k = self.points.first().map_or(0, |p| p.coords.len());
        Projection {
            coords: Array2::from_shape_fn((self.points.len(), k), |(i, j)| self.points[i].coords[j]),
            labels: self.points.iter().map(|p| p.label.clone()).collect(),
            values: self.points.iter().map(|p| p.value).collect(),
        }
    }

    pub fn pc1(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.coords[0]).collect()
    }
}

/// Everything measured for one bundle and one group of probe sets. Field order is the
/// serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub model_name: String,
    pub set_names: Vec<String>,
    pub resolved_count: usize,
    pub missing_count: usize,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub sets: Vec<SetReport>,
    pub cluster_comparison: Option<ClusterComparison>,
    pub tool_version: String,
    pub options: AnalyzeOptions,
}

impl AnalysisReport {
    /// Pretty JSON with a trailing newline; floats use shortest round-trip form.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn gather(bundle: &EmbeddingBundle, rows: &[usize], unit_norm: bool) -> Array2<f64> {
    let mut m = Array2::from_shape_fn((rows.len(), bundle.dim()), |(i, j)| bundle.row(rows[i])[j] as f64);
    if unit_norm {
        unit_normalize(&mut m);
    }
    m
}

fn set_metrics(resolved: &ResolvedSet, coords: Array2<f64>) -> SetReport {
    let entries: Vec<_> = resolved.resolved().map(|(e, _)| e).collect();
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let pc1: Vec<f64> = coords.column(0).to_vec();
    let n = values.len();

    let roundness = if coords.ncols() >= 2 && n >= 4 && resolved.set.is_integer_valued() && values[0] >= 1.0 {
        let planar: Vec<[f64; 2]> = coords.rows().into_iter().map(|r| [r[0], r[1]]).collect();
        roundness_centrality(&values, &planar).ok()
    } else {
        None
    };

    SetReport {
        name: resolved.set.name.clone(),
        n_used: n,
        missing: resolved.missing.clone(),
        ordering: ordering_stats(&values, &pc1).ok(),
        scale_fit: scale_fit(&values, &pc1).ok(),
        gaps: consecutive_gaps(&pc1).ok(),
        gap_trend: gap_trend(&pc1).ok(),
        roundness,
        points: entries
            .iter()
            .zip(coords.rows())
            .map(|(e, c)| Point {
                label: e.label.clone(),
                surface: e.surface.clone(),
                value: e.value,
                coords: c.to_vec(),
            })
            .collect(),
    }
}

/// Resolves every set, fits one joint PCA over all resolved vectors, and measures each
/// set along the shared axes.
pub fn analyze(bundle: &EmbeddingBundle, sets: &[TokenSet], options: &AnalyzeOptions) -> Result<AnalysisReport> {
    if sets.is_empty() {
        return Err(Error::DegenerateInput("no probe sets given".into()));
    }
    let resolved: Vec<ResolvedSet> = sets
        .iter()
        .map(|s| resolve(s, bundle, &options.lookup))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut values = Vec::new();
    for r in &resolved {
        for (e, row) in r.resolved() {
            rows.push(row);
            values.push(e.value);
        }
    }
    let vectors = gather(bundle, &rows, options.unit_norm);
    let model = pca_fit(vectors.view(), &values, options.k)?;
    let coords = project(&model, vectors.view())?;

    let mut offset = 0;
    let set_reports: Vec<SetReport> = resolved
        .iter()
        .map(|r| {
            let n = r.rows().len();
            let block = coords.slice(ndarray::s![offset..offset + n, ..]).to_owned();
            offset += n;
            set_metrics(r, block)
        })
        .collect();

    let cluster = match set_reports.as_slice() {
        [a, b] if options.k >= 2 => cluster_comparison(&a.projection(), &b.projection()).ok(),
        _ => None,
    };

    Ok(AnalysisReport {
        model_name: bundle.model_name().to_string(),
        set_names: sets.iter().map(|s| s.name.clone()).collect(),
        resolved_count: rows.len(),
        missing_count: resolved.iter().map(|r| r.missing.len()).sum(),
        explained_variance: model.explained_variance.clone(),
        explained_variance_ratio: model.explained_variance_ratio(),
        sets: set_reports,
        cluster_comparison: cluster,
        tool_version: TOOL_VERSION.to_string(),
        options: *options,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripRow {
    pub label: String,
    /// First token at 0, last at 1.
    pub positions: Vec<f64>,
    pub tokens: Vec<String>,
}

/// Aligned first-axis positions of one set across models, plus the log-scale reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripLayout {
    pub set_name: String,
    pub rows: Vec<StripRow>,
    /// Absent when some value is not positive.
    pub reference_row: Option<StripRow>,
}

impl StripLayout {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("layout serializes");
        s.push('\n');
        s
    }
}

pub const REFERENCE_LABEL: &str = "log scale";

/// Per-bundle PCA on `set`; PC1 positions aligned so the first and last tokens coincide
/// across rows.
pub fn compare(bundles: &[EmbeddingBundle], set: &TokenSet, options: &AnalyzeOptions) -> Result<StripLayout> {
    if bundles.is_empty() {
        return Err(Error::DegenerateInput("no bundles given".into()));
    }
    let resolved: Vec<ResolvedSet> = bundles
        .iter()
        .map(|b| resolve(set, b, &options.lookup))
        .collect::<Result<_>>()?;
    let first_missing = &resolved[0].missing;
    if let Some(r) = resolved.iter().find(|r| &r.missing != first_missing) {
        let mut diff: Vec<String> = r
            .missing
            .iter()
            .filter(|m| !first_missing.contains(m))
            .chain(first_missing.iter().filter(|m| !r.missing.contains(m)))
            .cloned()
            .collect();
        diff.sort();
        return Err(Error::MissingTokens(diff));
    }

    let rows: Vec<StripRow> = bundles
        .par_iter()
        .zip(resolved.par_iter())
        .map(|(bundle, r)| {
            let entries: Vec<_> = r.resolved().collect();
            let rows: Vec<usize> = entries.iter().map(|(_, row)| *row).collect();
            let values: Vec<f64> = entries.iter().map(|(e, _)| e.value).collect();
            let vectors = gather(bundle, &rows, options.unit_norm);
            let model = pca_fit(vectors.view(), &values, 1)?;
            let pc1 = project(&model, vectors.view())?.column(0).to_vec();
            Ok(StripRow {
                label: bundle.model_name().to_string(),
                positions: affine_align(&pc1)?,
                tokens: entries.iter().map(|(e, _)| e.label.clone()).collect(),
            })
        })
        .collect::<Result<_>>()?;

    let used: Vec<_> = resolved[0].resolved().map(|(e, _)| e).collect();
    let values: Vec<f64> = used.iter().map(|e| e.value).collect();
    let reference_row = log_reference_layout(&values).ok().map(|positions| StripRow {
        label: REFERENCE_LABEL.to_string(),
        positions,
        tokens: used.iter().map(|e| e.label.clone()).collect(),
    });

    Ok(StripLayout {
        set_name: set.name.clone(),
        rows,
        reference_row,
    })
}
