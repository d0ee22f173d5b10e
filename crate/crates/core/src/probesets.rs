//! Built-in and custom probe sets, and their resolution against a bundle.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bundle::{lookup_token, EmbeddingBundle, LookupPolicy};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueScale {
    Count,
    Magnitude,
    Rank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub surface: String,
    pub value: f64,
    pub label: String,
}

/// A named list of probe tokens with strictly increasing values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenSet {
    pub name: String,
    pub entries: Vec<Entry>,
    pub value_scale_hint: ValueScale,
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "numerals_0_20",
    "words_zero_twenty",
    "numerals_1_100",
    "magnitudes",
    "ordinals",
];

const NUMBER_WORDS: [&str; 21] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
];

const MAGNITUDES: [(&str, f64); 5] = [
    ("hundred", 1e2),
    ("thousand", 1e3),
    ("million", 1e6),
    ("billion", 1e9),
    ("trillion", 1e12),
];

const ORDINALS: [&str; 10] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
];

impl TokenSet {
    /// Validating constructor: non-empty, unique surfaces, strictly increasing finite values.
    pub fn new(name: impl Into<String>, entries: Vec<Entry>, value_scale_hint: ValueScale) -> Result<Self> {
        let name = name.into();
        if entries.is_empty() {
            return Err(Error::InvalidSet(format!("{name}: no entries")));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if e.surface.is_empty() {
                return Err(Error::InvalidSet(format!("{name}: empty surface")));
            }
            if !e.value.is_finite() {
                return Err(Error::InvalidSet(format!(
                    "{name}: non-finite value for {:?}",
                    e.surface
                )));
            }
            if !seen.insert(e.surface.as_str()) {
                return Err(Error::InvalidSet(format!("{name}: duplicate surface {:?}", e.surface)));
            }
        }
        if entries.windows(2).any(|w| w[1].value <= w[0].value) {
            return Err(Error::InvalidSet(format!("{name}: values not strictly increasing")));
        }
        Ok(Self {
            name,
            entries,
            value_scale_hint,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// True when every value is a non-negative integer.
    pub fn is_integer_valued(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.value >= 0.0 && e.value.fract() == 0.0 && e.value < 2f64.powi(53))
    }
}

fn entry(surface: impl Into<String>, value: f64) -> Entry {
    let surface = surface.into();
    Entry {
        label: surface.clone(),
        surface,
        value,
    }
}

fn numerals(name: &str, range: std::ops::RangeInclusive<u32>) -> TokenSet {
    TokenSet {
        name: name.into(),
        entries: range.map(|v| entry(v.to_string(), v as f64)).collect(),
        value_scale_hint: ValueScale::Count,
    }
}

pub fn builtin_set(name: &str) -> Result<TokenSet> {
    let set = match name {
        "numerals_0_20" => numerals(name, 0..=20),
        "numerals_1_100" => numerals(name, 1..=100),
        "words_zero_twenty" => TokenSet {
            name: name.into(),
            entries: NUMBER_WORDS
                .iter()
                .enumerate()
                .map(|(i, w)| entry(*w, i as f64))
                .collect(),
            value_scale_hint: ValueScale::Count,
        },
        "magnitudes" => TokenSet {
            name: name.into(),
            entries: MAGNITUDES.iter().map(|(w, v)| entry(*w, *v)).collect(),
            value_scale_hint: ValueScale::Magnitude,
        },
        "ordinals" => TokenSet {
            name: name.into(),
            entries: ORDINALS
                .iter()
                .enumerate()
                .map(|(i, w)| entry(*w, (i + 1) as f64))
                .collect(),
            value_scale_hint: ValueScale::Rank,
        },
        other => return Err(Error::UnknownSet(other.to_string())),
    };
    Ok(set)
}

/// Parses `surface,value[,label]` lines (optional `surface,value,label` header) into a set
/// sorted by value.
pub fn parse_custom_set(name: &str, text: &str) -> Result<TokenSet> {
    let mut entries: Vec<Entry> = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if entries.is_empty() && seen.is_empty() && (line == "surface,value,label" || line == "surface,value") {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let surface = parts.next().unwrap_or("").trim();
        let value_txt = parts.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: "expected surface,value[,label]".into(),
        })?;
        let label = parts.next().map(str::trim).filter(|l| !l.is_empty());
        if surface.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: "empty surface".into(),
            });
        }
        let value: f64 = value_txt.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad number {:?}", value_txt.trim()),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("non-finite value {value}"),
            });
        }
        if !seen.insert(surface.to_string()) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate surface {surface:?}"),
            });
        }
        entries.push(Entry {
            surface: surface.to_string(),
            value,
            label: label.unwrap_or(surface).to_string(),
        });
    }
    if entries.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no entries".into(),
        });
    }
    entries.sort_by(|a, b| a.value.total_cmp(&b.value));
    if let Some(w) = entries.windows(2).find(|w| w[0].value == w[1].value) {
        return Err(Error::DuplicateValue(w[0].value));
    }
    TokenSet::new(name, entries, ValueScale::Count)
}

/// A probe set mapped onto bundle rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSet {
    pub set: TokenSet,
    /// One slot per entry, `None` where the surface is missing.
    pub slots: Vec<Option<usize>>,
    pub missing: Vec<String>,
}

impl ResolvedSet {
    /// Row indices of the resolved entries, in entry order.
    pub fn rows(&self) -> Vec<usize> {
        self.slots.iter().flatten().copied().collect()
    }

    /// Resolved entries paired with their rows, in entry order.
    pub fn resolved(&self) -> impl Iterator<Item = (&Entry, usize)> {
        self.set
            .entries
            .iter()
            .zip(&self.slots)
            .filter_map(|(e, s)| s.map(|r| (e, r)))
    }
}

pub fn resolve(set: &TokenSet, bundle: &EmbeddingBundle, policy: &LookupPolicy) -> Result<ResolvedSet> {
    policy.validate()?;
    let mut slots = Vec::with_capacity(set.len());
    let mut missing = Vec::new();
    for e in &set.entries {
        match lookup_token(bundle, &e.surface, policy) {
            Ok(row) => slots.push(Some(row)),
            Err(Error::NotFound(_)) => {
                slots.push(None);
                missing.push(e.surface.clone());
            }
            Err(other) => return Err(other),
        }
    }
    if !missing.is_empty() && !policy.allow_missing {
        return Err(Error::MissingTokens(missing));
    }
    Ok(ResolvedSet {
        set: set.clone(),
        slots,
        missing,
    })
}
