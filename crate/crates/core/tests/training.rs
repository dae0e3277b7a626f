use hlvfair::aggregation::AggregationConfig;
use hlvfair::annotations::{
    majority_vote, AnnotationRecord, Dataset, Instance, LabelMatrix, Membership, Semantics, Split,
    TaskKind, TaskSchema,
};
use hlvfair::metrics::soft_micro_f1;
use hlvfair::synth::{generate, SynthConfig};
use hlvfair::training::{
    evaluate, featurize, temperature_sweep, train, train_model, FeatureSpec, Method, TrainConfig,
};
use hlvfair::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three classes, each with its own three-word vocabulary.
fn separable(n: usize, seed: u64) -> Dataset {
    let schema = TaskSchema::new(
        TaskKind::SingleLabel,
        vec!["red".into(), "green".into(), "blue".into()],
        vec!["g".into()],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..n)
        .map(|i| {
            let class = rng.random_range(0..3);
            let words: Vec<String> = (0..4)
                .map(|_| format!("c{class}w{}", rng.random_range(0..3)))
                .collect();
            Instance {
                id: format!("i{i}"),
                text: words.join(" "),
                annotations: vec![AnnotationRecord::new(None, vec![class]).unwrap()],
                membership: vec![if i % 2 == 0 {
                    Membership::InGroup
                } else {
                    Membership::OutGroup
                }],
                split: Split::Train,
            }
        })
        .collect();
    Dataset::new(schema, instances).unwrap()
}

#[test]
fn learns_linearly_separable_data() {
    let ds = separable(200, 3);
    let spec = FeatureSpec::default();
    let cfg = TrainConfig {
        batch_size: 1,
        ..TrainConfig::new(Method::Mv)
    };
    assert_eq!((cfg.learning_rate, cfg.epochs), (0.1, 10));
    let (model, loss) = train_model(&ds, &cfg, &spec).unwrap();
    let train: Vec<&Instance> = ds.split_instances(Split::Train).collect();
    let xs: Vec<_> = train.iter().map(|i| featurize(&i.text, &spec)).collect();
    let q = model.predict_matrix(&xs).unwrap();
    let targets: Vec<Vec<f64>> = train
        .iter()
        .map(|i| {
            let mut row = vec![0.0; 3];
            row[majority_vote(i, ds.schema())[0]] = 1.0;
            row
        })
        .collect();
    let p = LabelMatrix::from_rows(&targets, Semantics::Distribution).unwrap();
    let rows: Vec<usize> = (0..p.rows()).collect();
    let f1 = soft_micro_f1(&p, &q, &rows).unwrap();
    assert!(f1 >= 0.9, "train soft micro F1 {f1}, loss {loss}");
}

fn small_synth(seed: u64) -> Dataset {
    generate(&SynthConfig {
        n_instances: 300,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

#[test]
fn training_is_deterministic() {
    let ds = small_synth(1);
    let spec = FeatureSpec { dim: 4096 };
    for method in Method::ALL {
        let cfg = TrainConfig {
            learning_rate: 5.0,
            seed: 11,
            ..TrainConfig::new(method)
        };
        let a = train(&ds, &cfg, &spec).unwrap();
        let b = train(&ds, &cfg, &spec).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = train(&ds, &TrainConfig { seed: 12, ..cfg }, &spec).unwrap();
        assert_ne!(a.predictions, c.predictions, "{method}");
        assert_eq!(
            a.predictions(Split::Test).unwrap().ids,
            ds.split_ids(Split::Test)
        );
    }
}

#[test]
fn unit_temperature_row_matches_plain_run() {
    let ds = small_synth(2);
    let spec = FeatureSpec { dim: 4096 };
    let eval = AggregationConfig::equal(4, 8).unwrap();
    let cfg = TrainConfig {
        learning_rate: 5.0,
        seed: 3,
        ..TrainConfig::new(Method::Sl)
    };
    let rows = temperature_sweep(&ds, &cfg, &[1.0], &eval, &spec).unwrap();
    let run = train(&ds, &cfg, &spec).unwrap();
    let plain = evaluate(&ds, run.predictions(Split::Test).unwrap(), &eval).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(
        (rows[0].perf, rows[0].fairness),
        (plain.perf, plain.fairness)
    );
}

#[test]
fn temperature_sweep_rejects_bad_input() {
    let ds = small_synth(2);
    let spec = FeatureSpec { dim: 256 };
    let eval = AggregationConfig::equal(4, 8).unwrap();
    let sl = TrainConfig::new(Method::Sl);
    assert!(temperature_sweep(&ds, &TrainConfig::new(Method::Mv), &[1.0], &eval, &spec).is_err());
    assert!(temperature_sweep(&ds, &sl, &[], &eval, &spec).is_err());
    assert!(temperature_sweep(&ds, &sl, &[1.0, 0.0], &eval, &spec).is_err());
}

#[test]
fn evaluate_requires_matching_ids() {
    let ds = small_synth(4);
    let spec = FeatureSpec { dim: 256 };
    let run = train(&ds, &TrainConfig::new(Method::Mv), &spec).unwrap();
    let mut preds = run.predictions(Split::Test).unwrap().clone();
    preds.ids.swap(0, 1);
    let eval = AggregationConfig::equal(4, 8).unwrap();
    assert!(matches!(
        evaluate(&ds, &preds, &eval),
        Err(Error::InstanceMismatch(_))
    ));
}
