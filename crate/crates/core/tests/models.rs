mod common;

use common::{oracle_loss, random_dataset};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rootcause::models::{
    load_model, logreg_gradient, logreg_loss, save_model, train_linear_svm, train_logreg_with_history,
    train_random_forest, ClassifierKind, ForestConfig, LinearKind, LinearParams, LogRegConfig, Model, SvmConfig,
    TextClassifier, TrainSpec,
};
use rootcause::synth::{synthetic_corpus, SynthConfig};
use rootcause::textprep::{SparseVector, VectorizerConfig};

#[test]
fn logreg_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for point in 0..20 {
        let ds = random_dataset(&mut rng, 12, 6, 3);
        let lambda = [0.0, 1e-3, 0.1, 1.0][point % 4];
        let mut p = LinearParams::zeros(LinearKind::Logreg, 3, 6, lambda);
        let flat: Vec<f64> = (0..p.flat().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        p.set_flat(&flat);
        let dense: Vec<Vec<f64>> = ds.x().iter().map(|v| v.to_dense()).collect();
        let lib = logreg_loss(&p, ds.x(), ds.y());
        let ora = oracle_loss(&flat, &dense, ds.y(), 3, lambda);
        assert!((lib - ora).abs() < 1e-12, "loss {lib} vs oracle {ora}");
        let analytic = logreg_gradient(&p, ds.x(), ds.y());
        for i in 0..flat.len() {
            let mut plus = flat.clone();
            let mut minus = flat.clone();
            plus[i] += h;
            minus[i] -= h;
            let numeric = (oracle_loss(&plus, &dense, ds.y(), 3, lambda)
                - oracle_loss(&minus, &dense, ds.y(), 3, lambda))
                / (2.0 * h);
            let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn small_step_loss_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ds = random_dataset(&mut rng, 40, 10, 3);
    let cfg = LogRegConfig {
        learning_rate: 0.01,
        epochs: 100,
        ..Default::default()
    };
    let (_, losses) = train_logreg_with_history(&ds, &cfg).unwrap();
    assert_eq!(losses.len(), 100);
    assert!(losses[0] < 3f64.ln());
    for w in losses.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn huge_lambda_shrinks_weights_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ds = random_dataset(&mut rng, 30, 8, 3);
    let cfg = LogRegConfig {
        lambda: 1e6,
        ..Default::default()
    };
    let (p, losses) = train_logreg_with_history(&ds, &cfg).unwrap();
    assert!(p.weight_norm() < 1e-6);
    assert!(losses.iter().all(|l| l.is_finite()));
}

#[test]
fn pegasos_beats_the_zero_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let ds = random_dataset(&mut rng, 60, 12, 3);
        let cfg = SvmConfig {
            lambda: 1e-2,
            ..Default::default()
        };
        let p = train_linear_svm(&ds, &cfg).unwrap();
        let zero = LinearParams::zeros(LinearKind::SvmPegasos, 3, 12, p.lambda);
        let trained = rootcause::models::hinge_objective(&p, &ds);
        let base = rootcause::models::hinge_objective(&zero, &ds);
        for (t, b) in trained.iter().zip(&base) {
            assert!(t <= b, "{t} > {b}");
        }
    }
}

fn model_bytes(m: &Model) -> String {
    serde_json::to_string(m).unwrap()
}

#[test]
fn training_is_deterministic_and_schedule_independent() {
    let docs: Vec<String> = synthetic_corpus(&SynthConfig::default())
        .iter()
        .map(|r| r.issue.text())
        .collect();
    let y: Vec<usize> = (0..docs.len()).map(|i| i % 3).collect();
    let names: Vec<String> = ["semantic", "memory", "concurrency"].map(String::from).to_vec();
    for kind in ClassifierKind::ALL {
        let spec = TrainSpec::default_for(kind).with_seed(11);
        let fit = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| TextClassifier::fit(&docs, &y, &names, &VectorizerConfig::default(), &spec).unwrap())
        };
        let a = fit(1);
        let b = fit(4);
        assert_eq!(model_bytes(&a.model), model_bytes(&b.model), "{kind}");
    }
}

#[test]
fn forests_differ_across_seeds() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ds = random_dataset(&mut rng, 40, 9, 3);
    let cfg = ForestConfig {
        n_trees: 10,
        ..Default::default()
    };
    let a = train_random_forest(&ds, &cfg).unwrap();
    let b = train_random_forest(&ds, &ForestConfig { seed: 1, ..cfg }).unwrap();
    assert_eq!(a, train_random_forest(&ds, &cfg).unwrap());
    assert_ne!(a, b);
}

#[test]
fn save_load_is_bit_exact_on_random_probes() {
    let reports = synthetic_corpus(&SynthConfig::default());
    let docs: Vec<String> = reports.iter().map(|r| r.issue.text()).collect();
    let y: Vec<usize> = (0..docs.len()).map(|i| i % 3).collect();
    let names: Vec<String> = ["semantic", "memory", "concurrency"].map(String::from).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let dir = tempfile::tempdir().unwrap();
    for kind in ClassifierKind::ALL {
        let clf = TextClassifier::fit(
            &docs,
            &y,
            &names,
            &VectorizerConfig::default(),
            &TrainSpec::default_for(kind),
        )
        .unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&clf.model, &clf.vectorizer, &path).unwrap();
        let back = load_model(&path).unwrap();
        let words: Vec<&str> = docs.iter().flat_map(|d| d.split_whitespace()).collect();
        for _ in 0..100 {
            let n = rng.gen_range(0..15);
            let probe: Vec<&str> = (0..n).map(|_| words[rng.gen_range(0..words.len())]).collect();
            let text = probe.join(" ");
            let a = clf.predict_text(&text).unwrap();
            let b = back.predict_text(&text).unwrap();
            assert_eq!(a.class, b.class);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.scores), bits(&b.scores), "{kind}: {text}");
        }
        save_model(&back.model, &back.vectorizer, &dir.path().join("again.json")).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(dir.path().join("again.json")).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn explicit_zeros_do_not_change_predictions(pairs in prop::collection::vec((0usize..8, 0u8..4), 0..16)) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ds = random_dataset(&mut rng, 30, 8, 3);
        let model = TrainSpec::default_for(ClassifierKind::Mnb).train(&ds).unwrap();
        let lr = TrainSpec::default_for(ClassifierKind::Lrc).train(&ds).unwrap();
        let with_zeros = SparseVector::from_pairs(8, pairs.iter().map(|&(i, v)| (i, v as f64)));
        let without = SparseVector::from_pairs(8, pairs.iter().filter(|p| p.1 != 0).map(|&(i, v)| (i, v as f64)));
        prop_assert_eq!(model.predict(&with_zeros).unwrap(), model.predict(&without).unwrap());
        prop_assert_eq!(lr.predict(&with_zeros).unwrap(), lr.predict(&without).unwrap());
        let p = model.predict(&with_zeros).unwrap();
        prop_assert!((p.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
