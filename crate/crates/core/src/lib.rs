//! Subset-PCA probing of numerical structure in uncontextualized token embeddings.
//!
//! The pipeline loads an embedding table ([`bundle`]), picks probe tokens with known
//! numeric values ([`probesets`]), fits PCA on just those vectors ([`pca`]) and measures
//! order, spacing and scale along the leading axes ([`metrics`]). [`synth`] plants known
//! structure for validating all of it; [`report`] ties the pieces together and renders
//! figures.

pub mod bundle;
pub mod error;
mod linalg;
pub mod metrics;
pub mod pca;
pub mod probesets;
pub mod report;
pub mod rng;
pub mod synth;

pub use bundle::{load_bundle, lookup_token, write_bundle, EmbeddingBundle, LookupPolicy};
pub use error::{Error, Result};
pub use pca::{affine_align, log_reference_layout, pca_fit, project, PcaModel, Projection};
pub use probesets::{builtin_set, parse_custom_set, resolve, ResolvedSet, TokenSet};
pub use report::{analyze, compare, AnalysisReport, AnalyzeOptions, StripLayout};
pub use synth::{make_planted_bundle, power_sweep, PlantKind, SynthSpec};
