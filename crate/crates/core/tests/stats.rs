use hlvfair::aggregation::sample_configs;
use hlvfair::annotations::{
    AnnotationRecord, Dataset, Instance, LabelMatrix, Membership, Semantics, Split, TaskKind,
    TaskSchema,
};
use hlvfair::stats::{config_sweep, paired_bootstrap, MethodScores, Verdict};
use hlvfair::synth::{generate, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn mean_of(scores: &Vec<f64>, rows: &[usize]) -> f64 {
    rows.iter().map(|&r| scores[r]).sum::<f64>() / rows.len() as f64
}

#[test]
fn null_rejection_rate_is_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.5, 0.2).unwrap();
    let reps = 500;
    let mut rejected = 0;
    for rep in 0..reps {
        let a: Vec<f64> = (0..200).map(|_| noise.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..200).map(|_| noise.sample(&mut rng)).collect();
        let out = paired_bootstrap(&[a], &[b], 200, mean_of, 1000, rep).unwrap();
        if out.p_value < 0.05 {
            rejected += 1;
        }
    }
    let rate = rejected as f64 / reps as f64;
    assert!((0.03..=0.08).contains(&rate), "rejection rate {rate}");
}

#[test]
fn clear_shift_is_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let a: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
    let b: Vec<f64> = a.iter().map(|x| x + 0.3 + noise.sample(&mut rng)).collect();
    let out = paired_bootstrap(&[a], &[b], 200, mean_of, 10_000, 1).unwrap();
    assert!(out.p_value < 0.001, "p = {}", out.p_value);
    assert!((out.delta + 0.3).abs() < 0.01);
}

fn synth_test_split() -> (Dataset, LabelMatrix) {
    let ds = generate(&SynthConfig {
        n_instances: 3000,
        seed: 9,
        ..SynthConfig::default()
    })
    .unwrap();
    let truth = ds.soft_labels(Split::Test, 1.0).unwrap();
    assert_eq!(truth.rows(), 300);
    (ds, truth)
}

fn scores(name: &str, ds: &Dataset, runs: Vec<LabelMatrix>) -> MethodScores {
    MethodScores::new(name, ds.split_ids(Split::Test), runs).unwrap()
}

#[test]
fn identical_methods_never_differ() {
    let (ds, truth) = synth_test_split();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noisy: Vec<Vec<f64>> = truth
        .to_rows()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|p| (p + rng.random_range(-0.2..0.2)).clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    let q = LabelMatrix::from_rows(&noisy, truth.semantics()).unwrap();
    let configs = sample_configs(40, 4, 8, 3).unwrap();
    let a = scores("MV", &ds, vec![q.clone()]);
    let b = scores("SL", &ds, vec![q]);
    let verdicts = config_sweep(&a, &b, &ds, &configs, 0.05, 200, 7).unwrap();
    assert_eq!(verdicts.len(), configs.len());
    assert!(verdicts
        .iter()
        .all(|v| v.verdict == Verdict::NoSignificantDifference && v.p_value == 1.0));
}

/// Single-label data with five annotators per item. In-group members (of
/// either group, up to 10% flips) are unanimous items; the rest are spread.
fn single_label(n_test: usize, seed: u64) -> Dataset {
    let schema = TaskSchema::new(
        TaskKind::SingleLabel,
        vec!["a".into(), "b".into(), "c".into()],
        vec!["g0".into(), "g1".into()],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..n_test)
        .map(|i| {
            let favourite = rng.random_range(0..3);
            let unanimous = rng.random_bool(0.5);
            let annotations = (0..5)
                .map(|j| {
                    let label = if unanimous {
                        favourite
                    } else {
                        (favourite + j) % 3
                    };
                    AnnotationRecord::new(None, [label]).unwrap()
                })
                .collect();
            let membership = (0..2)
                .map(|_| {
                    if unanimous != rng.random_bool(0.1) {
                        Membership::InGroup
                    } else {
                        Membership::OutGroup
                    }
                })
                .collect();
            Instance {
                id: format!("x{i}"),
                text: String::new(),
                annotations,
                membership,
                split: Split::Test,
            }
        })
        .collect();
    Dataset::new(schema, instances).unwrap()
}

#[test]
fn truth_beats_adversarial_predictions() {
    let ds = single_label(300, 9);
    let truth = ds.soft_labels(Split::Test, 1.0).unwrap();
    let flipped: Vec<Vec<f64>> = truth
        .to_rows()
        .into_iter()
        .map(|r| {
            let total: f64 = r.iter().map(|p| 1.0 - p).sum();
            r.into_iter().map(|p| (1.0 - p) / total).collect()
        })
        .collect();
    let adversarial = LabelMatrix::from_rows(&flipped, Semantics::Distribution).unwrap();
    let configs = sample_configs(50, 2, 3, 11).unwrap();
    let baseline = scores("MV", &ds, vec![adversarial]);
    let hlv = scores("SL", &ds, vec![truth]);
    let verdicts = config_sweep(&baseline, &hlv, &ds, &configs, 0.05, 500, 13).unwrap();

    let count = |v: Verdict| verdicts.iter().filter(|x| x.verdict == v).count();
    assert_eq!(
        count(Verdict::HlvFairer)
            + count(Verdict::BaselineFairer)
            + count(Verdict::NoSignificantDifference),
        configs.len()
    );
    let frac = count(Verdict::HlvFairer) as f64 / configs.len() as f64;
    assert!(frac >= 0.9, "hlv_fairer fraction {frac}");
    for v in &verdicts {
        assert_eq!(
            v.verdict == Verdict::NoSignificantDifference,
            v.p_value >= 0.05
        );
    }
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let (ds, truth) = synth_test_split();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut noisy = |scale: f64| {
        let rows: Vec<Vec<f64>> = truth
            .to_rows()
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|p| (p + rng.random_range(-scale..scale)).clamp(0.0, 1.0))
                    .collect()
            })
            .collect();
        LabelMatrix::from_rows(&rows, truth.semantics()).unwrap()
    };
    let baseline = scores("MV", &ds, vec![noisy(0.4), noisy(0.4)]);
    let hlv = scores("SL", &ds, vec![noisy(0.2), noisy(0.2)]);
    let configs = sample_configs(24, 4, 8, 5).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| config_sweep(&baseline, &hlv, &ds, &configs, 0.05, 200, 21).unwrap())
    };
    assert_eq!(run(1), run(3));
}
