mod common;

use std::collections::HashSet;

use ndarray::{Array1, Array2};
use proptest::prelude::*;

use numprobe::bundle::{load_bundle, lookup_token, write_bundle, EmbeddingBundle, LookupPolicy};
use numprobe::metrics::{
    cluster_comparison, consecutive_gaps, gap_trend, kendall_tau, monotone_fraction, scale_fit, spearman_rho,
    ScaleModel,
};
use numprobe::probesets::{builtin_set, resolve, Entry, TokenSet, ValueScale, BUILTIN_NAMES};
use numprobe::rng::SplitMix64;
use numprobe::synth::planted_set;
use numprobe::{
    affine_align, analyze, compare, make_planted_bundle, pca_fit, AnalyzeOptions, PlantKind, Projection, SynthSpec,
};

use common::{gaussian_matrix, random_orthogonal};

fn token() -> impl Strategy<Value = String> {
    "[a-z0-9\u{2581}]{1,6}"
}

fn bundle_strategy() -> impl Strategy<Value = EmbeddingBundle> {
    (prop::collection::vec(token(), 1..12), 1usize..6, any::<u64>()).prop_map(|(vocab, dim, seed)| {
        let mut rng = SplitMix64::new(seed);
        let matrix = (0..vocab.len() * dim).map(|_| rng.next_gaussian() as f32).collect();
        EmbeddingBundle::new("prop-model", vocab, matrix, dim).unwrap()
    })
}

fn policy_strategy() -> impl Strategy<Value = LookupPolicy> {
    (any::<[bool; 3]>(), any::<bool>())
        .prop_filter("one lookup enabled", |(t, _)| t.iter().any(|b| *b))
        .prop_map(|(t, allow_missing)| LookupPolicy {
            try_exact: t[0],
            try_word_boundary_prefix: t[1],
            try_lowercase: t[2],
            allow_missing,
        })
}

fn strictly_increasing(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-10_000i32..10_000, len).prop_map(|s| s.into_iter().map(f64::from).collect())
}

fn projection(coords: &[[f64; 2]], values: &[f64]) -> Projection {
    Projection {
        coords: Array2::from_shape_fn((coords.len(), 2), |(i, j)| coords[i][j]),
        labels: values.iter().map(|v| v.to_string()).collect(),
        values: values.to_vec(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bundle_write_load_is_identity(b in bundle_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&b, dir.path()).unwrap();
        let back = load_bundle(dir.path()).unwrap();
        prop_assert_eq!(back.vocab(), b.vocab());
        prop_assert_eq!(back.model_name(), b.model_name());
        prop_assert_eq!(back.dim(), b.dim());
        let bits = |m: &[f32]| m.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.matrix()), bits(b.matrix()));
    }

    #[test]
    fn truncated_matrix_is_rejected_at_load(b in bundle_strategy(), cut in 1usize..4) {
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&b, dir.path()).unwrap();
        let path = dir.path().join("embeddings.bin");
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - cut]).unwrap();
        prop_assert!(load_bundle(dir.path()).is_err());
    }

    #[test]
    fn lookup_is_deterministic(b in bundle_strategy(), surface in token(), policy in policy_strategy()) {
        let first = lookup_token(&b, &surface, &policy).map_err(|e| e.to_string());
        for _ in 0..3 {
            prop_assert_eq!(lookup_token(&b, &surface, &policy).map_err(|e| e.to_string()), first.clone());
        }
        if let Ok(i) = first {
            prop_assert!(policy.candidates(&surface).contains(&b.vocab()[i]));
        }
    }

    #[test]
    fn resolve_keeps_order_and_covers_entries(keep in prop::collection::vec(any::<bool>(), 21)) {
        let set = builtin_set("numerals_0_20").unwrap();
        let vocab: Vec<String> = set.entries.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| e.surface.clone()).collect();
        prop_assume!(!vocab.is_empty());
        let matrix = vec![0.5f32; vocab.len()];
        let b = EmbeddingBundle::new("m", vocab, matrix, 1).unwrap();
        let policy = LookupPolicy { allow_missing: true, ..LookupPolicy::default() };
        let r = resolve(&set, &b, &policy).unwrap();
        prop_assert_eq!(r.rows().len() + r.missing.len(), set.len());
        let found: Vec<&str> = r.resolved().map(|(e, _)| e.surface.as_str()).collect();
        let expected: Vec<&str> = set.entries.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| e.surface.as_str()).collect();
        prop_assert_eq!(found, expected);
        for (e, row) in r.resolved() {
            prop_assert_eq!(&b.vocab()[row], &e.surface);
        }
    }
}

#[test]
fn builtin_sets_are_constant_and_increasing() {
    for name in BUILTIN_NAMES {
        let a = builtin_set(name).unwrap();
        assert_eq!(a, builtin_set(name).unwrap());
        let values = a.values();
        assert!(values.windows(2).all(|w| w[0] < w[1]), "{name}");
        let surfaces: HashSet<_> = a.entries.iter().map(|e| &e.surface).collect();
        assert_eq!(surfaces.len(), a.len(), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pca_components_are_orthonormal(n in 2usize..30, d in 1usize..12, seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let mut rng = SplitMix64::new(seed);
        let x = gaussian_matrix(&mut rng, n, d) * scale;
        let k = (n - 1).min(d);
        let values: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let m = pca_fit(x.view(), &values, k).unwrap();
        let gram = m.components.dot(&m.components.t());
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[[i, j]] - target).abs() <= 1e-8, "gram[{},{}] = {}", i, j, gram[[i, j]]);
            }
        }
        prop_assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(m.explained_variance.iter().all(|v| *v >= 0.0));
        let sum: f64 = m.explained_variance.iter().sum();
        prop_assert!(sum <= m.total_variance * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn rank_metrics_negate_under_decreasing_maps(pos in strictly_increasing(3..30).prop_shuffle(), shift in -10.0f64..10.0) {
        let values: Vec<f64> = (1..=pos.len()).map(|v| v as f64).collect();
        let flipped: Vec<f64> = pos.iter().map(|x| shift - x.powi(3)).collect();
        prop_assert_eq!(kendall_tau(&values, &flipped).unwrap(), -kendall_tau(&values, &pos).unwrap());
        prop_assert_eq!(spearman_rho(&values, &flipped).unwrap(), -spearman_rho(&values, &pos).unwrap());
    }

    #[test]
    fn abs_tau_one_iff_strictly_monotone(pos in prop::collection::vec(-5i32..5, 3..12)) {
        let values: Vec<f64> = (1..=pos.len()).map(|v| v as f64).collect();
        let p: Vec<f64> = pos.iter().map(|x| f64::from(*x)).collect();
        let monotone = p.windows(2).all(|w| w[0] < w[1]) || p.windows(2).all(|w| w[0] > w[1]);
        match kendall_tau(&values, &p) {
            Ok(t) => prop_assert_eq!(t.abs() == 1.0, monotone),
            Err(_) => prop_assert!(p.iter().all(|x| *x == p[0])),
        }
    }

    #[test]
    fn ordering_and_gaps_survive_alignment(pos in prop::collection::vec(-100.0f64..100.0, 4..30)) {
        prop_assume!(pos[0] != pos[pos.len() - 1]);
        let values: Vec<f64> = (1..=pos.len()).map(|v| v as f64).collect();
        let aligned = affine_align(&pos).unwrap();
        let slope_positive = pos[pos.len() - 1] > pos[0];
        let tau = kendall_tau(&values, &pos).unwrap();
        let tau_a = kendall_tau(&values, &aligned).unwrap();
        let trend = gap_trend(&pos).unwrap();
        let trend_a = gap_trend(&aligned).unwrap();
        let gaps = consecutive_gaps(&pos).unwrap().gaps;
        let gaps_a = consecutive_gaps(&aligned).unwrap().gaps;
        let span = (pos[pos.len() - 1] - pos[0]).abs();
        for (g, ga) in gaps.iter().zip(&gaps_a) {
            prop_assert!((g / span - ga).abs() <= 1e-9);
        }
        // gap ranks may swap when two gaps are within rounding of each other
        let near_tie = gaps.iter().enumerate().any(|(i, a)| gaps[i + 1..].iter().any(|b| (a - b).abs() <= 1e-9 * span));
        if slope_positive {
            prop_assert_eq!(tau_a, tau);
            prop_assert_eq!(monotone_fraction(&aligned).unwrap(), monotone_fraction(&pos).unwrap());
        } else {
            prop_assert_eq!(tau_a, -tau);
        }
        if !near_tie {
            prop_assert_eq!(trend_a, trend);
        }
    }

    #[test]
    fn reflection_negates_tau_and_keeps_gap_trend(pos in strictly_increasing(4..30).prop_shuffle()) {
        let values: Vec<f64> = (1..=pos.len()).map(|v| v as f64).collect();
        let reflected: Vec<f64> = pos.iter().map(|x| -x).collect();
        prop_assert_eq!(kendall_tau(&values, &reflected).unwrap(), -kendall_tau(&values, &pos).unwrap());
        prop_assert_eq!(gap_trend(&reflected).unwrap(), gap_trend(&pos).unwrap());
    }

    #[test]
    fn exact_log_positions_prefer_logarithmic(
        values in prop::collection::btree_set(1u32..100_000, 3..30),
        a in prop_oneof![0.01f64..100.0, -100.0f64..-0.01],
        b in -100.0f64..100.0,
    ) {
        let values: Vec<f64> = values.into_iter().map(f64::from).collect();
        let pos: Vec<f64> = values.iter().map(|v| a * v.ln() + b).collect();
        let fit = scale_fit(&values, &pos).unwrap();
        prop_assert!(fit.logarithmic.r2 >= 1.0 - 1e-9);
        prop_assume!(fit.linear.r2 < 1.0 - 1e-6);
        prop_assert_eq!(fit.preferred, ScaleModel::Logarithmic);
    }

    #[test]
    fn r2_stays_in_unit_interval(values in strictly_increasing(3..25), pos in prop::collection::vec(-1e3f64..1e3, 25)) {
        let pos = &pos[..values.len()];
        if let Ok(fit) = scale_fit(&values, pos) {
            for r2 in [fit.linear.r2, fit.logarithmic.r2] {
                prop_assert!((0.0..=1.0).contains(&r2));
            }
        }
    }

    #[test]
    fn direction_cosine_is_rigid_motion_invariant(
        a in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..12),
        b in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..12),
        shift in (-50.0f64..50.0, -50.0f64..50.0),
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let pa: Vec<[f64; 2]> = a.iter().map(|&(x, y)| [x, y]).collect();
        let pb: Vec<[f64; 2]> = b.iter().map(|&(x, y)| [x, y]).collect();
        let va: Vec<f64> = (1..=pa.len()).map(|v| v as f64).collect();
        let vb: Vec<f64> = (1..=pb.len()).map(|v| v as f64).collect();
        let Ok(base) = cluster_comparison(&projection(&pa, &va), &projection(&pb, &vb)) else {
            return Ok(());
        };
        let (s, c) = angle.sin_cos();
        let moved = |p: &[[f64; 2]]| -> Vec<[f64; 2]> {
            p.iter().map(|q| [c * q[0] - s * q[1] + shift.0, s * q[0] + c * q[1] + shift.1]).collect()
        };
        let m = cluster_comparison(&projection(&moved(&pa), &va), &projection(&moved(&pb), &vb)).unwrap();
        prop_assert!((m.direction_cosine - base.direction_cosine).abs() <= 1e-9);
        prop_assert!((m.separation_ratio - base.separation_ratio).abs() <= 1e-9 * base.separation_ratio.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synth_is_deterministic(kind in prop_oneof![Just(PlantKind::Linear), Just(PlantKind::Log), Just(PlantKind::Random)],
                              n in 2usize..30, dim in 2usize..16, noise in 0.01f64..5.0, seed in any::<u64>()) {
        let spec = SynthSpec { kind, n_tokens: n, dim, noise_sigma: noise, seed };
        let a = make_planted_bundle(&spec).unwrap();
        let b = make_planted_bundle(&spec).unwrap();
        let bits = |m: &[f32]| m.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(a.matrix()), bits(b.matrix()));
        prop_assert_eq!(a.vocab(), b.vocab());
    }

    #[test]
    fn noiseless_plants_recover_their_generator(linear in any::<bool>(), n in 4usize..40, dim in 2usize..32, seed in any::<u64>()) {
        let kind = if linear { PlantKind::Linear } else { PlantKind::Log };
        let spec = SynthSpec { kind, n_tokens: n, dim, noise_sigma: 0.0, seed };
        let bundle = make_planted_bundle(&spec).unwrap();
        let report = analyze(&bundle, &[planted_set(&spec)], &AnalyzeOptions::default()).unwrap();
        prop_assert!(report.explained_variance_ratio[0] >= 1.0 - 1e-9);
        let set = &report.sets[0];
        prop_assert_eq!(set.ordering.unwrap().kendall_tau, 1.0);
        let fit = set.scale_fit.unwrap();
        let r2 = if linear { fit.linear.r2 } else { fit.logarithmic.r2 };
        prop_assert!(r2 >= 1.0 - 1e-9);
        prop_assert_eq!(Some(fit.preferred), kind.expected_model());
    }

    #[test]
    fn compare_rows_ignore_bundle_scale(seed in any::<u64>(), factor in 0.01f32..100.0) {
        let spec = SynthSpec { kind: PlantKind::Log, n_tokens: 10, dim: 8, noise_sigma: 0.1, seed };
        let b = make_planted_bundle(&spec).unwrap();
        let scaled = b.scaled(factor).unwrap();
        let set = planted_set(&spec);
        let layout = compare(&[b, scaled], &set, &AnalyzeOptions::default()).unwrap();
        for (x, y) in layout.rows[0].positions.iter().zip(&layout.rows[1].positions) {
            prop_assert!((x - y).abs() <= 1e-4, "{} vs {}", x, y);
        }
    }

    #[test]
    fn report_options_reproduce_the_report(seed in any::<u64>(), k in 1usize..4, unit_norm in any::<bool>()) {
        let spec = SynthSpec { kind: PlantKind::Linear, n_tokens: 8, dim: 6, noise_sigma: 0.3, seed };
        let bundle = make_planted_bundle(&spec).unwrap();
        let set = planted_set(&spec);
        let options = AnalyzeOptions { k, unit_norm, ..AnalyzeOptions::default() };
        let json = analyze(&bundle, std::slice::from_ref(&set), &options).unwrap().to_json();
        let echoed: numprobe::AnalysisReport = serde_json::from_str(&json).unwrap();
        let again = analyze(&bundle, &[set], &echoed.options).unwrap().to_json();
        prop_assert_eq!(json, again);
    }
}

#[test]
fn pca_rotation_keeps_variances_on_a_fixed_case() {
    let mut rng = SplitMix64::new(11);
    let x = gaussian_matrix(&mut rng, 12, 5) + &Array1::from_vec(vec![3.0, -1.0, 0.0, 2.0, 7.0]);
    let q = random_orthogonal(&mut rng, 5);
    let values: Vec<f64> = (0..12).map(f64::from).collect();
    let a = pca_fit(x.view(), &values, 5).unwrap();
    let b = pca_fit(x.dot(&q).view(), &values, 5).unwrap();
    for (u, v) in a.explained_variance.iter().zip(&b.explained_variance) {
        assert!((u - v).abs() < 1e-9);
    }
}

#[test]
fn custom_set_with_zero_keeps_ordering_metrics() {
    let entries = (0..6)
        .map(|v| Entry {
            surface: format!("t{v}"),
            value: f64::from(v),
            label: v.to_string(),
        })
        .collect();
    let set = TokenSet::new("with_zero", entries, ValueScale::Count).unwrap();
    let pos = [0.0, 1.0, 2.0, 3.5, 4.0, 4.2];
    let fit = scale_fit(&set.values(), &pos).unwrap();
    assert_eq!(fit.excluded_nonpositive, 1);
    assert_eq!(kendall_tau(&set.values(), &pos).unwrap(), 1.0);
}
