//! Reproduction checks on exported pretrained bundles.
//!
//! Skipped unless `NUMPROBE_REAL_BUNDLES` points at a directory holding
//! `albert-base-v2/` and `albert-xxlarge-v2/` bundles.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use numprobe::metrics::{consecutive_gaps, gap_trend, kendall_tau, monotone_fraction, ScaleModel};
use numprobe::{analyze, builtin_set, compare, load_bundle, AnalyzeOptions};

const MODELS: [&str; 2] = ["albert-base-v2", "albert-xxlarge-v2"];

fn bundle_dirs() -> Option<Vec<PathBuf>> {
    let root = PathBuf::from(std::env::var_os("NUMPROBE_REAL_BUNDLES")?);
    Some(MODELS.iter().map(|m| root.join(m)).collect())
}

#[test]
fn albert_bundles_reproduce_reported_structure() {
    let Some(dirs) = bundle_dirs() else {
        eprintln!("NUMPROBE_REAL_BUNDLES not set; skipping");
        return;
    };
    let options = AnalyzeOptions::default();
    for dir in dirs {
        let start = Instant::now();
        let bundle = load_bundle(&dir).unwrap();
        let name = bundle.model_name().to_string();

        let magnitudes = builtin_set("magnitudes").unwrap();
        let row = &compare(std::slice::from_ref(&bundle), &magnitudes, &options)
            .unwrap()
            .rows[0];
        assert_eq!(
            kendall_tau(&magnitudes.values(), &row.positions).unwrap(),
            1.0,
            "{name}: magnitudes order"
        );
        assert_eq!(
            consecutive_gaps(&row.positions).unwrap().argmin_index,
            0,
            "{name}: hundred-thousand gap"
        );

        let ordinals = builtin_set("ordinals").unwrap();
        let row = &compare(std::slice::from_ref(&bundle), &ordinals, &options)
            .unwrap()
            .rows[0];
        assert_eq!(
            monotone_fraction(&row.positions[..7]).unwrap(),
            1.0,
            "{name}: first..seventh"
        );
        assert!(gap_trend(&row.positions).unwrap() < 0.0, "{name}: ordinal gaps");

        let pair = [
            builtin_set("numerals_0_20").unwrap(),
            builtin_set("words_zero_twenty").unwrap(),
        ];
        let report = analyze(&bundle, &pair, &options).unwrap();
        let cluster = report.cluster_comparison.expect("two sets give a cluster comparison");
        assert!(cluster.separation_ratio > 1.0, "{name}: {cluster:?}");
        assert!(cluster.direction_cosine > 0.5, "{name}: {cluster:?}");

        let report = analyze(&bundle, &[builtin_set("numerals_1_100").unwrap()], &options).unwrap();
        let set = &report.sets[0];
        assert!(set.gap_trend.unwrap() < 0.0, "{name}: 1..100 gaps");
        assert_eq!(
            set.scale_fit.unwrap().preferred,
            ScaleModel::Logarithmic,
            "{name}: 1..100 scale"
        );

        assert!(
            start.elapsed() < Duration::from_secs(30),
            "{name}: took {:?}",
            start.elapsed()
        );
    }
}
