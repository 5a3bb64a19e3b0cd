//! Property tests for the invariants of each layer.

mod common;

use proptest::collection::vec;
use proptest::prelude::*;

use texture_ensemble::classifiers::{
    DecisionTree, ForestParams, GaussianNb, KnnModel, KnnParams, Label, LinearSvm, MaxFeatures, NbParams,
    Prediction, RandomForest, SvmParams, TreeParams,
};
use texture_ensemble::ensemble::{combined_classifier, voting_ensemble, PredictionMatrix};
use texture_ensemble::evaluation::{confusion, metrics, ConfusionMatrix};
use texture_ensemble::glcm::{cooccurrence, marginals, texture_features, Offset};
use texture_ensemble::imaging::{decode_image, encode_pgm, quantize_value, resize, GrayImage, QuantizedImage};
use texture_ensemble::Algorithm;

use common::*;

fn offsets() -> impl Strategy<Value = (i32, i32)> {
    prop_oneof![Just((1, 0)), Just((1, -1)), Just((0, -1)), Just((-1, -1)), Just((2, 1)), Just((0, 2))]
}

/// `(width, height, levels, pixels)` with every pixel below `levels`.
fn quantized() -> impl Strategy<Value = (usize, usize, usize, Vec<u8>)> {
    (3usize..=16, 3usize..=16, 2usize..=8).prop_flat_map(|(w, h, g)| {
        (Just(w), Just(h), Just(g), vec(0..g as u8, w * h))
    })
}

fn gray() -> impl Strategy<Value = GrayImage> {
    (1usize..=12, 1usize..=12)
        .prop_flat_map(|(w, h)| vec(any::<u8>(), w * h).prop_map(move |d| GrayImage::new(w, h, d).unwrap()))
}

proptest! {
    #[test]
    fn quantize_in_range_and_monotone(g in 2usize..=256, p in 0u8..255) {
        let q = quantize_value(p, g) as usize;
        prop_assert!(q < g);
        prop_assert!(quantize_value(p, g) <= quantize_value(p + 1, g));
    }

    #[test]
    fn resize_to_same_size_is_identity(img in gray()) {
        prop_assert_eq!(resize(&img, img.width(), img.height()).unwrap(), img);
    }

    #[test]
    fn pgm_round_trip(img in gray()) {
        prop_assert_eq!(decode_image(&encode_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn glcm_matches_oracle((w, h, g, px) in quantized(), (dx, dy) in offsets(), symmetric in any::<bool>()) {
        prop_assume!(dx.unsigned_abs() < w as u32 && dy.unsigned_abs() < h as u32);
        let img = QuantizedImage::new(w, h, g, px.clone()).unwrap();
        let m = cooccurrence(&img, Offset::new(dx, dy).unwrap(), symmetric).unwrap();
        let got = texture_features(&m);
        let want = oracle_features(&oracle_counts(w, h, &px, g, dx, dy, symmetric));
        for (a, b) in got.iter().zip(want) {
            prop_assert!(close(*a, b, 1e-12), "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn glcm_normalized_symmetric_and_in_range((w, h, g, px) in quantized(), (dx, dy) in offsets()) {
        prop_assume!(dx.unsigned_abs() < w as u32 && dy.unsigned_abs() < h as u32);
        let img = QuantizedImage::new(w, h, g, px).unwrap();
        let m = cooccurrence(&img, Offset::new(dx, dy).unwrap(), true).unwrap();
        let sum: f64 = m.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        for i in 0..g {
            for j in 0..g {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
        let [energy, contrast, homog, entropy, corr] = texture_features(&m);
        prop_assert!(energy > 0.0 && energy <= 1.0 + 1e-12);
        prop_assert!(homog > 0.0 && homog <= 1.0 + 1e-12);
        prop_assert!(contrast >= 0.0);
        prop_assert!((0.0..=2.0 * (g as f64).log2() + 1e-12).contains(&entropy));
        prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&corr));
    }

    #[test]
    fn glcm_translation_invariance(
        (w, h, g, px) in quantized(),
        (dx, dy) in offsets(),
        shift in 1u8..4,
        symmetric in any::<bool>(),
    ) {
        prop_assume!(dx.unsigned_abs() < w as u32 && dy.unsigned_abs() < h as u32);
        let levels = g + shift as usize;
        let off = Offset::new(dx, dy).unwrap();
        let base = QuantizedImage::new(w, h, levels, px.clone()).unwrap();
        let moved = QuantizedImage::new(w, h, levels, px.iter().map(|p| p + shift).collect()).unwrap();
        let a = cooccurrence(&base, off, symmetric).unwrap();
        let b = cooccurrence(&moved, off, symmetric).unwrap();
        let (fa, fb) = (texture_features(&a), texture_features(&b));
        for k in 0..4 {
            prop_assert!((fa[k] - fb[k]).abs() <= 1e-12, "feature {k}: {} vs {}", fa[k], fb[k]);
        }
        let (ma, mb) = (marginals(&a), marginals(&b));
        prop_assert!((mb.mu_x - ma.mu_x - shift as f64).abs() <= 1e-12);
        prop_assert!((mb.mu_y - ma.mu_y - shift as f64).abs() <= 1e-12);
    }
}

/// Distinct points on a quarter-unit grid with both labels present.
fn labeled_points() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
    (1usize..=4).prop_flat_map(|d| {
        vec((vec(-40i32..40, d), 0usize..2), 6..30).prop_filter_map("need distinct points and two classes", |rows| {
            let mut seen = std::collections::BTreeSet::new();
            let mut x = Vec::new();
            let mut y = Vec::new();
            for (p, l) in rows {
                if seen.insert(p.clone()) {
                    x.push(p.iter().map(|&v| v as f64 / 4.0).collect::<Vec<f64>>());
                    y.push(l);
                }
            }
            (y.contains(&0) && y.contains(&1)).then_some((x, y))
        })
    })
}

fn unbounded_forest(bootstrap: bool) -> ForestParams {
    ForestParams {
        n_trees: 15,
        max_depth: 0,
        min_leaf: 1,
        bootstrap,
        max_features: MaxFeatures::Sqrt,
    }
}

/// Fits all five model families and returns their predictions on `probe`.
fn fit_all(x: &[Vec<f64>], y: &[usize], probe: &[Vec<f64>], seed: u64) -> Vec<Vec<Prediction>> {
    let knn = KnnModel::fit(x, y, &KnnParams::default()).unwrap();
    let nb = GaussianNb::fit(x, y, &NbParams::default()).unwrap();
    let dt = DecisionTree::fit(x, y, &TreeParams::unbounded(1)).unwrap();
    let rf = RandomForest::fit(x, y, &unbounded_forest(true), seed).unwrap();
    let svm = LinearSvm::fit(x, y, &SvmParams { epochs: 30, ..SvmParams::default() }, seed).unwrap();
    vec![
        probe.iter().map(|p| knn.predict(p)).collect(),
        probe.iter().map(|p| nb.predict(p)).collect(),
        probe.iter().map(|p| dt.predict(p)).collect(),
        probe.iter().map(|p| rf.predict(p)).collect(),
        probe.iter().map(|p| svm.predict(p)).collect(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fitting_is_deterministic((x, y) in labeled_points(), seed in any::<u64>()) {
        let a = fit_all(&x, &y, &x, seed);
        let b = fit_all(&x, &y, &x, seed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn memorizers_fit_training_data((x, y) in labeled_points(), seed in any::<u64>()) {
        let knn = KnnModel::fit(&x, &y, &KnnParams { k: 1, standardize: true }).unwrap();
        let dt = DecisionTree::fit(&x, &y, &TreeParams::unbounded(1)).unwrap();
        let rf = RandomForest::fit(&x, &y, &unbounded_forest(false), seed).unwrap();
        for (p, &l) in x.iter().zip(&y) {
            prop_assert_eq!(knn.predict(p).label, Label::Class(l));
            prop_assert_eq!(dt.predict(p).label, Label::Class(l));
            prop_assert_eq!(rf.predict(p).label, Label::Class(l));
        }
    }

    #[test]
    fn label_renaming_is_equivariant((x, y) in labeled_points(), seed in any::<u64>()) {
        // 0 -> 7 and 1 -> 2 also flips the sorted order of the ids.
        let rename = |c: usize| if c == 0 { 7 } else { 2 };
        let y2: Vec<usize> = y.iter().map(|&c| rename(c)).collect();
        let a = fit_all(&x, &y, &x, seed);
        let b = fit_all(&x, &y2, &x, seed);
        for (ma, mb) in a.iter().zip(&b) {
            for (pa, pb) in ma.iter().zip(mb) {
                prop_assert_eq!(pb.label, Label::Class(rename(pa.label.class().unwrap())));
            }
        }
    }

    #[test]
    fn standardized_models_ignore_feature_scale(
        (x, y) in labeled_points(),
        exp in -3i32..=10,
        seed in any::<u64>(),
    ) {
        // Powers of two scale every intermediate exactly.
        let c = 2f64.powi(exp);
        let xs: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
        let knn_a = KnnModel::fit(&x, &y, &KnnParams::default()).unwrap();
        let knn_b = KnnModel::fit(&xs, &y, &KnnParams::default()).unwrap();
        let params = SvmParams { epochs: 30, ..SvmParams::default() };
        let svm_a = LinearSvm::fit(&x, &y, &params, seed).unwrap();
        let svm_b = LinearSvm::fit(&xs, &y, &params, seed).unwrap();
        for (p, q) in x.iter().zip(&xs) {
            prop_assert_eq!(knn_a.predict(p).label, knn_b.predict(q).label);
            prop_assert_eq!(svm_a.predict(p).label, svm_b.predict(q).label);
        }
    }

    #[test]
    fn nb_posterior_sums_to_one((x, y) in labeled_points(), probe in vec(-20.0f64..20.0, 4)) {
        let nb = GaussianNb::fit(&x, &y, &NbParams::default()).unwrap();
        let d = x[0].len();
        let post = nb.predict_proba(&probe[..d]);
        prop_assert!((post.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

fn prediction_rows(n_models: usize) -> impl Strategy<Value = Vec<Vec<Option<usize>>>> {
    vec(vec(prop_oneof![3 => (0usize..4).prop_map(Some), 1 => Just(None)], n_models), 1..40)
}

proptest! {
    #[test]
    fn cascade_identity_when_first_model_always_answers(rows in prediction_rows(5), firsts in vec(0usize..4, 40)) {
        let rows: Vec<Vec<Option<usize>>> = rows
            .into_iter()
            .zip(firsts)
            .map(|(mut r, f)| { r[0] = Some(f); r })
            .collect();
        let pm = PredictionMatrix::new(Algorithm::ALL.to_vec(), rows.iter().map(|r| to_predictions(r)).collect());
        prop_assert_eq!(combined_classifier(&pm).unwrap(), pm.column(0));
    }

    #[test]
    fn voting_majority_is_sound(rows in prediction_rows(5)) {
        let pm = PredictionMatrix::new(Algorithm::ALL.to_vec(), rows.iter().map(|r| to_predictions(r)).collect());
        let out = voting_ensemble(&pm).unwrap();
        for (r, p) in rows.iter().zip(&out) {
            for l in 0..4 {
                if r.iter().filter(|v| **v == Some(l)).count() >= 3 {
                    prop_assert_eq!(p.label, Label::Class(l));
                }
            }
            prop_assert_eq!(label_option(p.label), reference_vote(r).0);
        }
    }

    #[test]
    fn macro_f1_between_extremes(c in 2usize..=6, cells in vec(0u64..=100, 36), unknown in vec(0u64..=20, 6)) {
        let counts: Vec<Vec<u64>> = (0..c).map(|i| cells[i * 6..i * 6 + c].to_vec()).collect();
        let cm = ConfusionMatrix {
            classes: (0..c).map(|i| i.to_string()).collect(),
            counts,
            unknown: unknown[..c].to_vec(),
        };
        prop_assume!(cm.total() > 0);
        let m = metrics(&cm).unwrap();
        let f1s: Vec<f64> = m.per_class.iter().map(|p| p.f1).collect();
        let lo = f1s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = f1s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m.f1 >= lo - 1e-15 && m.f1 <= hi + 1e-15);
        for v in [m.accuracy, m.precision, m.recall, m.f1, m.micro_precision, m.micro_recall, m.micro_f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn perfect_predictions_score_one(y in vec(0usize..5, 1..60)) {
        let classes: Vec<String> = (0..5).map(|i| format!("k{i}")).collect();
        let pred: Vec<Label> = y.iter().map(|&c| Label::Class(c)).collect();
        let m = metrics(&confusion(&y, &pred, &classes).unwrap()).unwrap();
        prop_assert_eq!(m.accuracy, 1.0);
    }
}
