use hlvfair::aggregation::{p_level, sample_configs, AggregationConfig, IndexedConfig};
use hlvfair::annotations::Split;
use hlvfair::seed::derive_seed;
use hlvfair::stats::{
    config_sweep, fraction_summary, MethodScores, SummaryBy, SummaryRow, SweepVerdict,
};
use hlvfair::training::Method;
use serde::{Deserialize, Serialize};

use crate::output::{num, opt, worker_pool, write_csv, write_json, write_jsonl};
use crate::run::{cmd_run, load_runs, test_matrices, BASELINE};
use crate::spec::ExperimentSpec;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSweep {
    pub method: Method,
    pub verdicts: Vec<SweepVerdict>,
    pub summary: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutputs {
    pub configs: Vec<AggregationConfig>,
    pub methods: Vec<MethodSweep>,
}

/// Compares every HLV method with MV under `n_configs` sampled aggregation
/// configurations. Reuses the run records in the output directory when they
/// match the spec and trains them otherwise.
pub fn cmd_sweep(spec: &ExperimentSpec) -> Result<SweepOutputs, CliError> {
    spec.validate()?;
    if !spec.methods.contains(&BASELINE) {
        return Err(CliError::invalid("sweep needs MV among the methods"));
    }
    let hlv_methods: Vec<Method> = spec
        .methods
        .iter()
        .copied()
        .filter(|&m| m != BASELINE)
        .collect();
    if hlv_methods.is_empty() {
        return Err(CliError::invalid(
            "sweep needs at least one method besides MV",
        ));
    }
    let out = spec.out_dir()?;
    let dataset = spec.load_dataset()?;
    let records = match load_runs(spec)? {
        Some(records) => records,
        None => cmd_run(spec)?.records,
    };
    let (n_groups, n_classes) = (dataset.schema().n_groups(), dataset.schema().n_classes());
    let configs = sample_configs(
        spec.sweep.n_configs,
        n_groups,
        n_classes,
        derive_seed(spec.seed, "configs", 0),
    )?;
    let indexed: Vec<IndexedConfig> = configs
        .iter()
        .enumerate()
        .map(|(index, config)| IndexedConfig {
            config: config.clone(),
            index,
        })
        .collect();
    write_jsonl(&out.join("configs.jsonl"), &indexed)?;

    let ids = dataset.split_ids(Split::Test);
    let scores = |m: Method| {
        MethodScores::new(
            m.as_str(),
            ids.clone(),
            test_matrices(&dataset, &records, m)?,
        )
        .map_err(CliError::from)
    };
    let baseline = scores(BASELINE)?;
    let pool = worker_pool(spec.workers)?;
    let mut methods = Vec::new();
    for (i, &method) in hlv_methods.iter().enumerate() {
        let hlv = scores(method)?;
        let verdicts = pool.install(|| {
            config_sweep(
                &baseline,
                &hlv,
                &dataset,
                &configs,
                spec.sweep.alpha,
                spec.sweep.resamples,
                derive_seed(spec.seed, "sweep", i as u64),
            )
        })?;
        let mut summary = Vec::new();
        for (b, by) in [
            SummaryBy::Overall,
            SummaryBy::PGroupLevel,
            SummaryBy::PClassLevel,
        ]
        .into_iter()
        .enumerate()
        {
            summary.extend(fraction_summary(
                &verdicts,
                &configs,
                by,
                spec.sweep.ci_resamples,
                derive_seed(spec.seed, &format!("summary-{method}"), b as u64),
            )?);
        }
        methods.push(MethodSweep {
            method,
            verdicts,
            summary,
        });
    }

    let mut sweep_rows = Vec::new();
    let mut summary_rows = Vec::new();
    for m in &methods {
        for v in &m.verdicts {
            let cfg = &configs[v.config_index];
            sweep_rows.push(vec![
                m.method.to_string(),
                v.config_index.to_string(),
                num(cfg.p_group()),
                p_level(cfg.p_group()).as_str().to_string(),
                num(cfg.p_class()),
                p_level(cfg.p_class()).as_str().to_string(),
                v.verdict.as_str().to_string(),
                num(v.p_value),
                num(v.delta),
            ]);
        }
        for s in &m.summary {
            summary_rows.push(vec![
                m.method.to_string(),
                s.bucket.clone(),
                s.n.to_string(),
                opt(s.frac_not_baseline_fairer),
                opt(s.frac_hlv_fairer),
                opt(s.ci_low),
                opt(s.ci_high),
            ]);
        }
    }
    write_csv(
        &out.join("sweep.csv"),
        &[
            "method",
            "config_index",
            "p_group",
            "p_group_level",
            "p_class",
            "p_class_level",
            "verdict",
            "p_value",
            "delta",
        ],
        &sweep_rows,
    )?;
    write_csv(
        &out.join("summary.csv"),
        &[
            "method",
            "bucket",
            "n",
            "frac_not_baseline_fairer",
            "frac_hlv_fairer",
            "ci_low",
            "ci_high",
        ],
        &summary_rows,
    )?;
    write_json(
        &out.join("summary.json"),
        &methods
            .iter()
            .map(|m| (m.method, &m.summary))
            .collect::<Vec<_>>(),
    )?;
    Ok(SweepOutputs { configs, methods })
}
