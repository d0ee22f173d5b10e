//! Synthetic bundles with planted linear, logarithmic or no structure.
//!
//! Token `i` has surface `"{i+1}"`, value `v = i + 1`, and embedding `g(v) * u + noise`,
//! where `u` is a seeded random unit direction and the noise is isotropic Gaussian with
//! per-coordinate standard deviation `noise_sigma / sqrt(dim)`.
//!
//! Draw order from one `SplitMix64(seed)` stream: `dim` normals for `u` (normalized, i.e.
//! the first basis vector under a Haar-random rotation), then `dim` normals per token in
//! token order. Entries are computed in `f64` and stored as `f32`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::EmbeddingBundle;
use crate::error::{Error, Result};
use crate::metrics::ScaleModel;
use crate::probesets::{Entry, TokenSet, ValueScale};
use crate::report::{analyze, AnalyzeOptions};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantKind {
    Linear,
    Log,
    Random,
}

impl PlantKind {
    fn generator(self, v: f64) -> f64 {
        match self {
            PlantKind::Linear => v,
            PlantKind::Log => v.ln(),
            PlantKind::Random => 0.0,
        }
    }

    /// Scale model a correct analysis should prefer, if any.
    pub fn expected_model(self) -> Option<ScaleModel> {
        match self {
            PlantKind::Linear => Some(ScaleModel::Linear),
            PlantKind::Log => Some(ScaleModel::Logarithmic),
            PlantKind::Random => None,
        }
    }
}

impl fmt::Display for PlantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlantKind::Linear => "linear",
            PlantKind::Log => "log",
            PlantKind::Random => "random",
        })
    }
}

impl FromStr for PlantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(PlantKind::Linear),
            "log" => Ok(PlantKind::Log),
            "random" => Ok(PlantKind::Random),
            other => Err(Error::InvalidSpec(format!("unknown kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: PlantKind,
    pub n_tokens: usize,
    pub dim: usize,
    /// Noise norm as a fraction of the (unit) planted direction.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_tokens < 2 {
            return Err(Error::InvalidSpec(format!("n_tokens = {} < 2", self.n_tokens)));
        }
        if self.dim < 2 {
            return Err(Error::InvalidSpec(format!("dim = {} < 2", self.dim)));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "noise_sigma = {} must be >= 0",
                self.noise_sigma
            )));
        }
        if self.kind == PlantKind::Random && self.noise_sigma == 0.0 {
            return Err(Error::InvalidSpec("random kind needs noise_sigma > 0".into()));
        }
        Ok(())
    }

    pub fn model_name(&self) -> String {
        format!(
            "synth-{}-n{}-d{}-noise{}-seed{}",
            self.kind, self.n_tokens, self.dim, self.noise_sigma, self.seed
        )
    }

    pub fn values(&self) -> Vec<f64> {
        (1..=self.n_tokens).map(|v| v as f64).collect()
    }
}

pub fn make_planted_bundle(spec: &SynthSpec) -> Result<EmbeddingBundle> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let mut u: Vec<f64> = (0..spec.dim).map(|_| rng.next_gaussian()).collect();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= norm);

    let sigma = spec.noise_sigma / (spec.dim as f64).sqrt();
    let mut matrix = Vec::with_capacity(spec.n_tokens * spec.dim);
    for v in spec.values() {
        let g = spec.kind.generator(v);
        for uj in &u {
            let e = g * uj + sigma * rng.next_gaussian();
            matrix.push(e as f32);
        }
    }
    let vocab = (1..=spec.n_tokens).map(|v| v.to_string()).collect();
    EmbeddingBundle::new(spec.model_name(), vocab, matrix, spec.dim)
}

/// The probe set matching a planted bundle's vocabulary.
pub fn planted_set(spec: &SynthSpec) -> TokenSet {
    let entries = (1..=spec.n_tokens)
        .map(|v| Entry {
            surface: v.to_string(),
            value: v as f64,
            label: v.to_string(),
        })
        .collect();
    TokenSet::new("synthetic", entries, ValueScale::Count).expect("planted set is valid")
}

/// Custom-set text (`surface,value,label`) for a planted bundle.
pub fn planted_set_csv(spec: &SynthSpec) -> String {
    let mut out = String::from("surface,value,label\n");
    for e in planted_set(spec).entries {
        out.push_str(&format!("{},{},{}\n", e.surface, e.value, e.label));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub mean_abs_tau: f64,
    /// Fraction of trials whose preferred scale model matches the plant; absent for
    /// random plants.
    pub hit_rate: Option<f64>,
}

struct Trial {
    abs_tau: f64,
    preferred: Option<ScaleModel>,
}

fn run_trial(spec: &SynthSpec) -> Result<Trial> {
    let bundle = make_planted_bundle(spec)?;
    let set = planted_set(spec);
    let opts = AnalyzeOptions {
        k: 1,
        ..AnalyzeOptions::default()
    };
    let report = analyze(&bundle, std::slice::from_ref(&set), &opts)?;
    let stats = &report.sets[0];
    let tau = stats
        .ordering
        .as_ref()
        .map(|o| o.kendall_tau)
        .ok_or_else(|| Error::DegenerateInput("ordering unavailable".into()))?;
    Ok(Trial {
        abs_tau: tau.abs(),
        preferred: stats.scale_fit.as_ref().map(|f| f.preferred),
    })
}

/// Runs `trials` bundles per sigma (seeded `seed + trial`) and aggregates PC1 order
/// recovery and scale-model hit rate. Trials run in parallel; reduction is in trial order.
pub fn power_sweep(kind: PlantKind, sigmas: &[f64], trials: usize, base: &SynthSpec) -> Result<Vec<SweepRow>> {
    if trials == 0 {
        return Err(Error::InvalidSpec("trials must be >= 1".into()));
    }
    sigmas
        .iter()
        .map(|&sigma| {
            let results: Vec<Trial> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let spec = SynthSpec {
                        kind,
                        noise_sigma: sigma,
                        seed: base.seed.wrapping_add(t as u64),
                        ..*base
                    };
                    run_trial(&spec)
                })
                .collect::<Result<_>>()?;
            let mean_abs_tau = results.iter().map(|r| r.abs_tau).sum::<f64>() / trials as f64;
            let hit_rate = kind
                .expected_model()
                .map(|want| results.iter().filter(|r| r.preferred == Some(want)).count() as f64 / trials as f64);
            Ok(SweepRow {
                sigma,
                mean_abs_tau,
                hit_rate,
            })
        })
        .collect()
}
