use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use hlvfair::aggregation::{aggregate, AggregationConfig};
use hlvfair::annotations::{Dataset, LabelMatrix, Split};
use hlvfair::metrics::{soft_micro_f1, FairnessEvaluator};
use hlvfair::seed::derive_seed;
use hlvfair::stats::{paired_bootstrap, BootstrapOutcome};
use hlvfair::training::{evaluate, train, Method, RunRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{num, opt, worker_pool, write_csv, write_json};
use crate::spec::ExperimentSpec;
use crate::CliError;

pub const BASELINE: Method = Method::Mv;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub method: Method,
    pub run: usize,
    pub seed: u64,
    /// Path relative to the `runs` directory; absent for failed runs.
    pub file: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub completed: usize,
    pub failed: usize,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub runs: usize,
    /// Mean soft micro F1 on the test split.
    pub perf: f64,
    /// Mean aggregate fairness on the test split.
    pub fair: f64,
    /// Bootstrap p-values against the baseline; absent on the baseline row.
    pub p_perf: Option<f64>,
    pub p_fair: Option<f64>,
    pub significant_perf: Option<bool>,
    pub significant_fair: Option<bool>,
    /// `class/group` cells with an empty subset in any run.
    pub flagged_cells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub baseline: Option<Method>,
    pub alpha: f64,
    pub resamples: usize,
    pub eval: AggregationConfig,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub records: Vec<RunRecord>,
    pub report: Report,
}

fn run_file(method: Method, run: usize) -> String {
    format!("{method}-{run}.json")
}

/// Trains every method for every run, stores the run records and writes
/// `report.csv` / `report.json`.
pub fn cmd_run(spec: &ExperimentSpec) -> Result<RunOutputs, CliError> {
    spec.validate()?;
    let out = spec.out_dir()?;
    let dataset = spec.load_dataset()?;
    let eval = spec
        .eval
        .resolve(dataset.schema().n_groups(), dataset.schema().n_classes())?;
    let pool = worker_pool(spec.workers)?;

    let jobs: Vec<(Method, usize)> = spec
        .methods
        .iter()
        .flat_map(|&m| (0..spec.runs).map(move |r| (m, r)))
        .collect();
    let results: Vec<Result<RunRecord, hlvfair::Error>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(m, r)| {
                train(
                    &dataset,
                    &spec.train.config(m, spec.seed.wrapping_add(r as u64)),
                    &spec.features,
                )
            })
            .collect()
    });

    let runs_dir = out.join("runs");
    let mut entries = Vec::with_capacity(jobs.len());
    let mut records = Vec::with_capacity(jobs.len());
    for (&(method, run), result) in jobs.iter().zip(results) {
        let seed = spec.seed.wrapping_add(run as u64);
        match result {
            Ok(record) => {
                let file = run_file(method, run);
                write_json(&runs_dir.join(&file), &record)?;
                entries.push(ManifestEntry {
                    method,
                    run,
                    seed,
                    file: Some(file),
                    error: None,
                });
                records.push(record);
            }
            Err(e) => entries.push(ManifestEntry {
                method,
                run,
                seed,
                file: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let failed = entries.iter().filter(|e| e.error.is_some()).count();
    write_json(
        &runs_dir.join("manifest.json"),
        &Manifest {
            completed: records.len(),
            failed,
            entries,
        },
    )?;
    if failed > 0 {
        return Err(CliError::runtime(format!(
            "{failed} of {} runs failed; completed runs are listed in {}",
            jobs.len(),
            runs_dir.join("manifest.json").display()
        )));
    }

    let report = pool.install(|| build_report(&dataset, &records, &eval, spec))?;
    write_json(&out.join("report.json"), &report)?;
    write_report_csv(&out.join("report.csv"), &report)?;
    Ok(RunOutputs { records, report })
}

/// Reloads the records of a previous `run` if they match `spec`.
pub fn load_runs(spec: &ExperimentSpec) -> Result<Option<Vec<RunRecord>>, CliError> {
    let runs_dir = spec.out_dir()?.join("runs");
    let Ok(text) = fs::read_to_string(runs_dir.join("manifest.json")) else {
        return Ok(None);
    };
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut records = Vec::new();
    for &method in &spec.methods {
        for run in 0..spec.runs {
            let seed = spec.seed.wrapping_add(run as u64);
            let Some(entry) = manifest
                .entries
                .iter()
                .find(|e| e.method == method && e.run == run && e.seed == seed)
            else {
                return Ok(None);
            };
            let Some(file) = &entry.file else {
                return Ok(None);
            };
            let record: RunRecord =
                serde_json::from_str(&fs::read_to_string(runs_dir.join(file))?)?;
            if record.config != spec.train.config(method, seed) {
                return Ok(None);
            }
            records.push(record);
        }
    }
    Ok(Some(records))
}

/// Test-split prediction matrices of `method`, one per run.
pub(crate) fn test_matrices(
    dataset: &Dataset,
    records: &[RunRecord],
    method: Method,
) -> Result<Vec<LabelMatrix>, CliError> {
    let ids = dataset.split_ids(Split::Test);
    records
        .iter()
        .filter(|r| r.method == method)
        .map(|r| {
            let preds = r.predictions(Split::Test).ok_or_else(|| {
                CliError::runtime(format!("{method} run {} has no test predictions", r.seed))
            })?;
            if preds.ids != ids {
                return Err(CliError::runtime(format!(
                    "{method} predictions do not match the test split"
                )));
            }
            Ok(preds.to_matrix(dataset.schema().task())?)
        })
        .collect()
}

fn method_index(method: Method) -> u64 {
    Method::ALL
        .iter()
        .position(|&m| m == method)
        .expect("known method") as u64
}

/// Paired bootstrap tests of `method` against `baseline` on the test split:
/// `(performance, fairness)`, each with delta = method - baseline.
pub fn report_tests(
    dataset: &Dataset,
    records: &[RunRecord],
    method: Method,
    baseline: Method,
    eval: &AggregationConfig,
    resamples: usize,
    seed: u64,
) -> Result<(BootstrapOutcome, BootstrapOutcome), CliError> {
    let truth = dataset.soft_labels(Split::Test, 1.0)?;
    let a = test_matrices(dataset, records, method)?;
    let b = test_matrices(dataset, records, baseline)?;
    let n = truth.rows();
    let perf = paired_bootstrap(
        &a,
        &b,
        n,
        |q: &LabelMatrix, rows: &[usize]| soft_micro_f1(&truth, q, rows).expect("matching shapes"),
        resamples,
        derive_seed(seed, "report-perf", method_index(method)),
    )?;
    let memberships: Vec<_> = dataset
        .split_instances(Split::Test)
        .map(|i| i.membership.clone())
        .collect();
    let evaluators = |qs: &[LabelMatrix]| {
        qs.iter()
            .map(|q| FairnessEvaluator::new(&truth, q, memberships.clone()))
            .collect::<Result<Vec<_>, _>>()
    };
    let fair = paired_bootstrap(
        &evaluators(&a)?,
        &evaluators(&b)?,
        n,
        |ev: &FairnessEvaluator, rows: &[usize]| {
            aggregate(&ev.evaluate(rows), eval).expect("matching shapes")
        },
        resamples,
        derive_seed(seed, "report-fair", method_index(method)),
    )?;
    Ok((perf, fair))
}

fn build_report(
    dataset: &Dataset,
    records: &[RunRecord],
    eval: &AggregationConfig,
    spec: &ExperimentSpec,
) -> Result<Report, CliError> {
    let schema = dataset.schema();
    let baseline = spec.methods.contains(&BASELINE).then_some(BASELINE);
    let alpha = spec.sweep.alpha;
    let rows = spec
        .methods
        .par_iter()
        .map(|&method| {
            let mut perf = 0.0;
            let mut fair = 0.0;
            let mut flagged = BTreeSet::new();
            let runs: Vec<&RunRecord> = records.iter().filter(|r| r.method == method).collect();
            for r in &runs {
                let e = evaluate(
                    dataset,
                    r.predictions(Split::Test).expect("test predictions"),
                    eval,
                )?;
                perf += e.perf;
                fair += e.fairness;
                flagged.extend(e.matrix.flagged_cells());
            }
            let n = runs.len() as f64;
            let tests = match baseline {
                Some(b) if b != method => Some(report_tests(
                    dataset,
                    records,
                    method,
                    b,
                    eval,
                    spec.sweep.resamples,
                    spec.seed,
                )?),
                _ => None,
            };
            Ok(ReportRow {
                method,
                runs: runs.len(),
                perf: perf / n,
                fair: fair / n,
                p_perf: tests.map(|t| t.0.p_value),
                p_fair: tests.map(|t| t.1.p_value),
                significant_perf: tests.map(|t| t.0.p_value < alpha),
                significant_fair: tests.map(|t| t.1.p_value < alpha),
                flagged_cells: flagged
                    .into_iter()
                    .map(|(k, g)| format!("{}/{}", schema.classes()[k], schema.groups()[g]))
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Report {
        baseline,
        alpha,
        resamples: spec.sweep.resamples,
        eval: eval.clone(),
        rows,
    })
}

fn marker(significant: Option<bool>) -> String {
    match significant {
        Some(true) => "*".into(),
        _ => String::new(),
    }
}

fn write_report_csv(path: &Path, report: &Report) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                r.runs.to_string(),
                num(r.perf),
                num(r.fair),
                opt(r.p_perf),
                opt(r.p_fair),
                marker(r.significant_perf),
                marker(r.significant_fair),
            ]
        })
        .collect();
    write_csv(
        path,
        &[
            "method", "runs", "perf", "fair", "p_perf", "p_fair", "sig_perf", "sig_fair",
        ],
        &rows,
    )
}
