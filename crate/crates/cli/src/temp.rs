use hlvfair::training::{temperature_sweep, Method, TemperatureRow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{mean_sd, num, opt, worker_pool, write_csv, write_json};
use crate::spec::ExperimentSpec;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    #[serde(flatten)]
    pub row: TemperatureRow,
}

/// Mean and sample standard deviation over seeds for one temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempSummaryRow {
    pub tau: f64,
    pub n: usize,
    pub perf_mean: f64,
    pub perf_sd: Option<f64>,
    pub fair_mean: f64,
    pub fair_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempOutputs {
    pub runs: Vec<SeedRow>,
    pub summary: Vec<TempSummaryRow>,
}

/// SL trained at every temperature of the grid for each run seed.
pub fn cmd_temp_sweep(spec: &ExperimentSpec) -> Result<TempOutputs, CliError> {
    spec.validate()?;
    if !spec.methods.contains(&Method::Sl) {
        return Err(CliError::invalid(
            "temperature sweep needs SL among the methods",
        ));
    }
    if spec.tau_grid.is_empty() {
        return Err(CliError::invalid("empty temperature grid"));
    }
    let out = spec.out_dir()?;
    let dataset = spec.load_dataset()?;
    let eval = spec
        .eval
        .resolve(dataset.schema().n_groups(), dataset.schema().n_classes())?;
    let pool = worker_pool(spec.workers)?;

    let jobs: Vec<(u64, f64)> = (0..spec.runs)
        .flat_map(|r| {
            let seed = spec.seed.wrapping_add(r as u64);
            spec.tau_grid.iter().map(move |&tau| (seed, tau))
        })
        .collect();
    let runs = pool.install(|| {
        jobs.par_iter()
            .map(|&(seed, tau)| {
                let cfg = spec.train.config(Method::Sl, seed);
                let mut rows = temperature_sweep(&dataset, &cfg, &[tau], &eval, &spec.features)?;
                Ok(SeedRow {
                    seed,
                    row: rows.remove(0),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let summary: Vec<TempSummaryRow> = spec
        .tau_grid
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let at: Vec<&TemperatureRow> = runs
                .iter()
                .skip(i)
                .step_by(spec.tau_grid.len())
                .map(|r| &r.row)
                .collect();
            let (perf_mean, perf_sd) = mean_sd(&at.iter().map(|r| r.perf).collect::<Vec<_>>());
            let (fair_mean, fair_sd) = mean_sd(&at.iter().map(|r| r.fairness).collect::<Vec<_>>());
            TempSummaryRow {
                tau,
                n: at.len(),
                perf_mean,
                perf_sd,
                fair_mean,
                fair_sd,
            }
        })
        .collect();

    write_csv(
        &out.join("temp_sweep_runs.csv"),
        &["seed", "tau", "perf", "fairness"],
        &runs
            .iter()
            .map(|r| {
                vec![
                    r.seed.to_string(),
                    num(r.row.tau),
                    num(r.row.perf),
                    num(r.row.fairness),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    write_csv(
        &out.join("temp_sweep.csv"),
        &["tau", "n", "perf_mean", "perf_sd", "fair_mean", "fair_sd"],
        &summary
            .iter()
            .map(|s| {
                vec![
                    num(s.tau),
                    s.n.to_string(),
                    num(s.perf_mean),
                    opt(s.perf_sd),
                    num(s.fair_mean),
                    opt(s.fair_sd),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    let outputs = TempOutputs { runs, summary };
    write_json(&out.join("temp_sweep.json"), &outputs)?;
    Ok(outputs)
}
