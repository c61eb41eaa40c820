//! Cross-module integration: the zero-information null, scale invariance of
//! the standardizing families, and model serialization round-trips.

use twoheads::bench::{run_condition, Condition};
use twoheads::classifiers::{accuracy, fit, predict, ClassifierKind, Hyperparams, TrainedModel};
use twoheads::dataio::{generate_synthetic, GeneratorConfig};
use twoheads::dsp::{extract_features, FilterSpec};
use twoheads::matrix::Matrix;

fn blobs(n: usize, d: usize, sep: f64, seed: u64) -> (Matrix, Vec<u8>) {
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let centre = if label == 1 { sep / 2.0 } else { -sep / 2.0 };
        for _ in 0..d {
            let v: f64 = rng.sample(StandardNormal);
            data.push(centre + v);
        }
        y.push(label);
    }
    let _ = rng.gen::<u8>();
    (Matrix::from_vec(n, d, data).unwrap(), y)
}

/// With contrast 0 both label populations are identical, so every family
/// must land near chance through the whole pipeline.
#[test]
fn zero_contrast_is_chance_for_every_family() {
    let cfg = GeneratorConfig {
        n_channels: 8,
        n_samples: 320,
        contrast: 0.0,
        set_a: vec![0, 1],
        set_b: vec![4, 5],
        ..GeneratorConfig::new(10, 200)
    };
    let set = generate_synthetic(&cfg).unwrap();
    assert_eq!(set.n_trials(), 2000);
    let features = extract_features(&set, &FilterSpec::alpha_band(500.0)).unwrap();
    drop(set);
    let hp = Hyperparams::default();
    for kind in ClassifierKind::ALL {
        let entry =
            run_condition(&features, Condition::Sota, kind, 16, &hp, 0).unwrap();
        let acc = entry.accuracy_pct / 100.0;
        assert!(
            (0.44..=0.56).contains(&acc),
            "{} scored {acc} on label-free data",
            kind.name()
        );
    }
}

/// Standardizing families are invariant to per-feature affine maps of the
/// inputs: fitting on a*X + b and querying a*Q + b reproduces the original
/// predictions.
#[test]
fn standardizing_families_are_affine_invariant() {
    let (x, y) = blobs(240, 6, 4.0, 51);
    let (q, _) = blobs(80, 6, 4.0, 52);
    let scales = [2.0, 0.5, 8.0, 1.0, 4.0, 0.25];
    let offsets = [3.0, -1.0, 0.0, 10.0, -6.0, 2.0];
    let map = |m: &Matrix| {
        let mut t = m.clone();
        for i in 0..t.n_rows() {
            let row = t.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = scales[j] * *v + offsets[j];
            }
        }
        t
    };
    let xt = map(&x);
    let qt = map(&q);
    let hp = Hyperparams::default();
    for kind in [
        ClassifierKind::Knn,
        ClassifierKind::LinearSvm,
        ClassifierKind::RbfSvm,
    ] {
        let a = fit(kind, &x, &y, &hp, 7).unwrap();
        let b = fit(kind, &xt, &y, &hp, 7).unwrap();
        assert_eq!(
            predict(&a, &q).unwrap(),
            predict(&b, &qt).unwrap(),
            "{} predictions moved under affine rescaling",
            kind.name()
        );
    }
}

/// Serialization is lossless for every family: restored models predict
/// identically and re-serialize to the same bytes.
#[test]
fn model_json_roundtrips_bit_exactly() {
    let (x, y) = blobs(60, 4, 3.0, 77);
    let (q, _) = blobs(30, 4, 3.0, 78);
    let hp = Hyperparams {
        forest_trees: 10,
        gb_trees: 10,
        second_order_trees: 10,
        adaboost_rounds: 10,
        linear_svm_epochs: 10,
        rbf_svm_epochs: 10,
        ..Hyperparams::default()
    };
    for kind in ClassifierKind::ALL {
        let model = fit(kind, &x, &y, &hp, 3).unwrap();
        let json = model.to_json();
        let restored = TrainedModel::from_json(&json).unwrap();
        assert_eq!(json, restored.to_json(), "{}: bytes changed", kind.name());
        assert_eq!(
            predict(&model, &q).unwrap(),
            predict(&restored, &q).unwrap(),
            "{}: predictions changed",
            kind.name()
        );
        assert_eq!(restored.kind(), kind);
    }
}

/// Two fits with identical inputs serialize identically, and different
/// seeds actually matter for the seeded families.
#[test]
fn fits_are_deterministic_under_seeds() {
    let (x, y) = blobs(80, 5, 2.0, 91);
    let hp = Hyperparams {
        forest_trees: 8,
        linear_svm_epochs: 20,
        rbf_svm_epochs: 20,
        ..Hyperparams::default()
    };
    for kind in ClassifierKind::ALL {
        let a = fit(kind, &x, &y, &hp, 5).unwrap();
        let b = fit(kind, &x, &y, &hp, 5).unwrap();
        assert_eq!(a.to_json(), b.to_json(), "{} not deterministic", kind.name());
    }
    for kind in [
        ClassifierKind::LinearSvm,
        ClassifierKind::RbfSvm,
        ClassifierKind::RandomForest,
    ] {
        let a = fit(kind, &x, &y, &hp, 5).unwrap();
        let b = fit(kind, &x, &y, &hp, 6).unwrap();
        assert_ne!(a.to_json(), b.to_json(), "{} ignores its seed", kind.name());
    }
}

/// Memorizing family sanity: 1-nn on its own training set is perfect.
#[test]
fn knn_memorizes_training_set() {
    let (x, y) = blobs(50, 3, 1.0, 13);
    let hp = Hyperparams {
        knn_k: 1,
        ..Hyperparams::default()
    };
    let model = fit(ClassifierKind::Knn, &x, &y, &hp, 0).unwrap();
    let pred = predict(&model, &x).unwrap();
    assert_eq!(accuracy(&pred, &y).unwrap(), 1.0);
}
