//! Numeracy Embedding Bundle (NEB) reading, writing and token lookup.
//!
//! A bundle is a directory with three files:
//!
//! - `meta.json`: `{"format": "neb-1", "model": ..., "vocab_size": ..., "dim": ...,
//!   "dtype": "f32le", "order": "row-major"}`. Unknown keys are ignored.
//! - `vocab.txt`: UTF-8, one token per line, line `i` is the surface form of row `i`.
//! - `embeddings.bin`: `vocab_size * dim` little-endian `f32`, row-major, no header.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT: &str = "neb-1";
pub const DTYPE: &str = "f32le";
pub const ORDER: &str = "row-major";

pub const META_FILE: &str = "meta.json";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const EMBEDDINGS_FILE: &str = "embeddings.bin";

/// Sentencepiece word-boundary marker.
pub const WORD_BOUNDARY: char = '\u{2581}';

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    format: String,
    model: String,
    vocab_size: usize,
    dim: usize,
    dtype: String,
    order: String,
}

/// An uncontextualized token-embedding table. Immutable once built.
#[derive(Debug, Clone)]
pub struct EmbeddingBundle {
    model_name: String,
    vocab: Vec<String>,
    matrix: Vec<f32>,
    dim: usize,
    index: HashMap<String, usize>,
}

impl PartialEq for EmbeddingBundle {
    fn eq(&self, other: &Self) -> bool {
        self.model_name == other.model_name
            && self.vocab == other.vocab
            && self.dim == other.dim
            && self.matrix.len() == other.matrix.len()
            && self
                .matrix
                .iter()
                .zip(&other.matrix)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl EmbeddingBundle {
    /// Builds a bundle from a row-major matrix, validating every invariant.
    pub fn new(model_name: impl Into<String>, vocab: Vec<String>, matrix: Vec<f32>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MetaMismatch("dim must be positive".into()));
        }
        if vocab.is_empty() {
            return Err(Error::MetaMismatch("vocab_size must be positive".into()));
        }
        if matrix.len() != vocab.len() * dim {
            return Err(Error::MetaMismatch(format!(
                "matrix has {} entries, expected {} x {}",
                matrix.len(),
                vocab.len(),
                dim
            )));
        }
        if let Some(line) = vocab.iter().position(String::is_empty) {
            return Err(Error::EmptyToken { line: line + 1 });
        }
        if let Some(pos) = matrix.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, tok) in vocab.iter().enumerate() {
            index.entry(tok.clone()).or_insert(i);
        }
        Ok(Self {
            model_name: model_name.into(),
            vocab,
            matrix,
            dim,
            index,
        })
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `vocab_size x dim` entries.
    pub fn matrix(&self) -> &[f32] {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    /// Lowest row index holding exactly `token`.
    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Same table with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Result<Self> {
        Self::new(
            self.model_name.clone(),
            self.vocab.clone(),
            self.matrix.iter().map(|x| x * factor).collect(),
            self.dim,
        )
    }
}

/// Candidate rules tried, in fixed order, when mapping a surface form to a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupPolicy {
    pub try_exact: bool,
    pub try_word_boundary_prefix: bool,
    pub try_lowercase: bool,
    pub allow_missing: bool,
}

impl Default for LookupPolicy {
    fn default() -> Self {
        Self {
            try_exact: true,
            try_word_boundary_prefix: true,
            try_lowercase: true,
            allow_missing: false,
        }
    }
}

impl LookupPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.try_exact || self.try_word_boundary_prefix || self.try_lowercase {
            Ok(())
        } else {
            Err(Error::InvalidPolicy)
        }
    }

    /// Candidate strings in lookup order: exact, "▁"+surface, lowercase, "▁"+lowercase.
    pub fn candidates(&self, surface: &str) -> Vec<String> {
        let mut out = Vec::with_capacity(4);
        if self.try_exact {
            out.push(surface.to_string());
        }
        if self.try_word_boundary_prefix {
            out.push(format!("{WORD_BOUNDARY}{surface}"));
        }
        if self.try_lowercase {
            let lower = surface.to_lowercase();
            out.push(lower.clone());
            if self.try_word_boundary_prefix {
                out.push(format!("{WORD_BOUNDARY}{lower}"));
            }
        }
        out
    }
}

/// Resolves `surface` to a row index. The vocabulary itself is never case-folded.
pub fn lookup_token(bundle: &EmbeddingBundle, surface: &str, policy: &LookupPolicy) -> Result<usize> {
    policy.validate()?;
    if surface.is_empty() {
        return Err(Error::NotFound(String::new()));
    }
    policy
        .candidates(surface)
        .iter()
        .find_map(|c| bundle.index_of(c))
        .ok_or_else(|| Error::NotFound(surface.to_string()))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

pub fn load_bundle(dir: impl AsRef<Path>) -> Result<EmbeddingBundle> {
    let dir = dir.as_ref();
    let meta_bytes = read_file(&dir.join(META_FILE))?;
    let vocab_bytes = read_file(&dir.join(VOCAB_FILE))?;
    let emb_bytes = read_file(&dir.join(EMBEDDINGS_FILE))?;

    let meta: Meta = serde_json::from_slice(&meta_bytes).map_err(|e| Error::MalformedMeta(e.to_string()))?;
    if meta.format != FORMAT {
        return Err(Error::MalformedMeta(format!("unsupported format {:?}", meta.format)));
    }
    if meta.dtype != DTYPE {
        return Err(Error::MalformedMeta(format!("unsupported dtype {:?}", meta.dtype)));
    }
    if meta.order != ORDER {
        return Err(Error::MalformedMeta(format!("unsupported order {:?}", meta.order)));
    }
    if meta.vocab_size == 0 || meta.dim == 0 {
        return Err(Error::MetaMismatch("vocab_size and dim must be positive".into()));
    }

    let text =
        String::from_utf8(vocab_bytes).map_err(|e| Error::MalformedMeta(format!("vocab.txt is not UTF-8: {e}")))?;
    let body = text.strip_suffix('\n').unwrap_or(&text);
    let vocab: Vec<String> = if body.is_empty() && text.is_empty() {
        Vec::new()
    } else {
        body.split('\n').map(str::to_string).collect()
    };
    if vocab.len() != meta.vocab_size {
        return Err(Error::MetaMismatch(format!(
            "vocab.txt has {} lines, meta declares vocab_size {}",
            vocab.len(),
            meta.vocab_size
        )));
    }

    let expected = meta
        .vocab_size
        .checked_mul(meta.dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::MetaMismatch("declared shape overflows".into()))?;
    if emb_bytes.len() != expected {
        return Err(Error::MetaMismatch(format!(
            "embeddings.bin has {} bytes, expected {} ({} x {} x 4)",
            emb_bytes.len(),
            expected,
            meta.vocab_size,
            meta.dim
        )));
    }
    let matrix = emb_bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();

    EmbeddingBundle::new(meta.model, vocab, matrix, meta.dim)
}

pub fn write_bundle(bundle: &EmbeddingBundle, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let meta = Meta {
        format: FORMAT.into(),
        model: bundle.model_name.clone(),
        vocab_size: bundle.vocab_size(),
        dim: bundle.dim,
        dtype: DTYPE.into(),
        order: ORDER.into(),
    };
    let mut meta_json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    meta_json.push('\n');
    let meta_path = dir.join(META_FILE);
    fs::write(&meta_path, meta_json).map_err(|e| Error::io(&meta_path, e))?;

    let mut vocab = String::new();
    for tok in &bundle.vocab {
        vocab.push_str(tok);
        vocab.push('\n');
    }
    let vocab_path = dir.join(VOCAB_FILE);
    fs::write(&vocab_path, vocab).map_err(|e| Error::io(&vocab_path, e))?;

    let bytes: Vec<u8> = bundle.matrix.iter().flat_map(|x| x.to_le_bytes()).collect();
    let emb_path = dir.join(EMBEDDINGS_FILE);
    fs::write(&emb_path, bytes).map_err(|e| Error::io(&emb_path, e))?;
    Ok(())
}
