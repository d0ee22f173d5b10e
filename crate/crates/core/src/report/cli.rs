//! `numprobe` command line. Exit codes: 0 success, 1 validation or usage error, 2 I/O error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bundle::{load_bundle, write_bundle, LookupPolicy};
use crate::error::{Error, Result};
use crate::probesets::{builtin_set, parse_custom_set, TokenSet};
use crate::synth::{make_planted_bundle, planted_set_csv, power_sweep, PlantKind, SynthSpec};

use super::{analyze, compare, render_scatter, render_strips, AnalyzeOptions, ScatterStyle, StripStyle};

/// File written next to a synthetic bundle describing its probe set.
pub const PLANTED_SET_FILE: &str = "probe_set.csv";

#[derive(Debug, Parser)]
#[command(name = "numprobe", version, about = "Probe numerical structure in token embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a bundle's model name and shape.
    Info { bundle: PathBuf },
    /// Joint PCA over one or more probe sets of a bundle.
    Analyze {
        #[arg(long)]
        bundle: PathBuf,
        /// Built-in set names, comma-separated.
        #[arg(long, value_delimiter = ',')]
        sets: Vec<String>,
        /// Extra set from a `surface,value[,label]` file.
        #[arg(long)]
        custom_set: Option<PathBuf>,
        /// Principal components to keep.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Scale every vector to unit length before PCA.
        #[arg(long)]
        unit_norm: bool,
        /// Skip tokens absent from the vocabulary instead of failing.
        #[arg(long)]
        allow_missing: bool,
        /// Report JSON path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Aligned first-axis strips of one set across bundles.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        bundles: Vec<PathBuf>,
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        custom_set: Option<PathBuf>,
        #[arg(long)]
        unit_norm: bool,
        #[arg(long)]
        allow_missing: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Write a synthetic bundle with planted structure.
    Synth {
        #[arg(long)]
        kind: PlantKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        noise: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recovery of planted structure as noise grows.
    Sweep {
        #[arg(long)]
        kind: PlantKind,
        #[arg(long, value_delimiter = ',', required = true)]
        sigmas: Vec<f64>,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 21)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON output; the table always goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_custom(path: &Path) -> Result<TokenSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "custom".into());
    parse_custom_set(&name, &text)
}

fn options(k: usize, unit_norm: bool, allow_missing: bool) -> AnalyzeOptions {
    AnalyzeOptions {
        k,
        unit_norm,
        lookup: LookupPolicy {
            allow_missing,
            ..LookupPolicy::default()
        },
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Info { bundle } => {
            let b = load_bundle(&bundle)?;
            println!("model: {}", b.model_name());
            println!("vocab_size: {}", b.vocab_size());
            println!("dim: {}", b.dim());
        }
        Command::Analyze {
            bundle,
            sets,
            custom_set,
            k,
            unit_norm,
            allow_missing,
            out,
            svg,
        } => {
            let mut token_sets: Vec<TokenSet> = sets.iter().map(|s| builtin_set(s)).collect::<Result<_>>()?;
            if let Some(path) = custom_set {
                token_sets.push(read_custom(&path)?);
            }
            if token_sets.is_empty() {
                return Err(Error::DegenerateInput("give --sets and/or --custom-set".into()));
            }
            let b = load_bundle(&bundle)?;
            let report = analyze(&b, &token_sets, &options(k, unit_norm, allow_missing))?;
            if let Some(svg_path) = svg {
                let projections: Vec<_> = report.sets.iter().map(|s| s.projection()).collect();
                let ratio = &report.explained_variance_ratio;
                let style = ScatterStyle {
                    title: Some(report.model_name.clone()),
                    set_names: report.set_names.clone(),
                    variance_ratio: (ratio.len() >= 2).then(|| [ratio[0], ratio[1]]),
                    ..ScatterStyle::default()
                };
                write_text(&svg_path, &render_scatter(&projections, &style)?)?;
            }
            write_text(&out, &report.to_json())?;
        }
        Command::Compare {
            bundles,
            set,
            custom_set,
            unit_norm,
            allow_missing,
            out,
            svg,
        } => {
            let token_set = match (set, custom_set) {
                (Some(name), None) => builtin_set(&name)?,
                (None, Some(path)) => read_custom(&path)?,
                _ => {
                    return Err(Error::DegenerateInput(
                        "give exactly one of --set or --custom-set".into(),
                    ))
                }
            };
            let loaded = bundles.iter().map(load_bundle).collect::<Result<Vec<_>>>()?;
            let layout = compare(&loaded, &token_set, &options(1, unit_norm, allow_missing))?;
            if let Some(svg_path) = svg {
                let style = StripStyle {
                    title: Some(layout.set_name.clone()),
                    ..StripStyle::default()
                };
                write_text(&svg_path, &render_strips(&layout, &style)?)?;
            }
            write_text(&out, &layout.to_json())?;
        }
        Command::Synth {
            kind,
            n,
            dim,
            noise,
            seed,
            out,
        } => {
            let spec = SynthSpec {
                kind,
                n_tokens: n,
                dim,
                noise_sigma: noise,
                seed,
            };
            let b = make_planted_bundle(&spec)?;
            write_bundle(&b, &out)?;
            let set_path = out.join(PLANTED_SET_FILE);
            write_text(&set_path, &planted_set_csv(&spec))?;
            println!("wrote {} ({} tokens, dim {})", out.display(), n, dim);
            println!("probe set: {}", set_path.display());
        }
        Command::Sweep {
            kind,
            sigmas,
            trials,
            n,
            dim,
            seed,
            out,
        } => {
            let base = SynthSpec {
                kind,
                n_tokens: n,
                dim,
                noise_sigma: 0.0,
                seed,
            };
            let rows = power_sweep(kind, &sigmas, trials, &base)?;
            println!("sigma\tmean_abs_tau\thit_rate");
            for r in &rows {
                let hit = r.hit_rate.map_or_else(|| "-".to_string(), |h| format!("{h:.3}"));
                println!("{}\t{:.4}\t{}", r.sigma, r.mean_abs_tau, hit);
            }
            if let Some(path) = out {
                let mut json = serde_json::to_string_pretty(&rows).expect("rows serialize");
                json.push('\n');
                write_text(&path, &json)?;
            }
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs it, returning the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}
