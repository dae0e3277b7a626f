//! Paired bootstrap tests between methods and the configuration-sweep
//! robustness analysis built on them.

use std::cell::RefCell;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate, aggregate_flat, p_level, AggregationConfig, PLevel};
use crate::annotations::{Dataset, LabelMatrix, Split};
use crate::metrics::{EvalScratch, FairnessEvaluator};
use crate::seed::{derive_seed, rng_from_seed};
use crate::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const MIN_RESAMPLES: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Predictions of one method over a split, one matrix per run (seed).
#[derive(Debug, Clone)]
pub struct MethodScores {
    pub method: String,
    pub ids: Vec<String>,
    pub runs: Vec<LabelMatrix>,
}

impl MethodScores {
    pub fn new(
        method: impl Into<String>,
        ids: Vec<String>,
        runs: Vec<LabelMatrix>,
    ) -> Result<Self> {
        let first = runs
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one run required".into()))?;
        if runs.iter().any(|r| !r.same_shape(first)) {
            return Err(Error::ShapeMismatch("runs differ in shape".into()));
        }
        if first.rows() != ids.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ids for {} rows",
                ids.len(),
                first.rows()
            )));
        }
        Ok(MethodScores {
            method: method.into(),
            ids,
            runs,
        })
    }

    fn check_paired(&self, other: &MethodScores) -> Result<()> {
        if self.ids != other.ids {
            return Err(Error::InstanceMismatch(format!(
                "{} and {} were evaluated on different instances",
                self.method, other.method
            )));
        }
        if !self.runs[0].same_shape(&other.runs[0]) {
            return Err(Error::ShapeMismatch(format!(
                "{} and {} differ in shape",
                self.method, other.method
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOutcome {
    /// Observed `mean_a - mean_b` on the full sample.
    pub delta: f64,
    pub p_value: f64,
}

/// Paired bootstrap over items shared by two methods.
///
/// Each resample draws `n_items` item indices with replacement; the same
/// indices are used for both methods. The statistic is averaged over each
/// method's runs and `Δ* = mean_a - mean_b` is recorded. The two-tailed
/// p-value is `2 min(P(Δ* - Δ >= Δ), P(Δ* - Δ <= Δ))`, clamped to 1.
pub fn paired_bootstrap<R, F>(
    a: &[R],
    b: &[R],
    n_items: usize,
    statistic: F,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapOutcome>
where
    F: Fn(&R, &[usize]) -> f64,
{
    if resamples < MIN_RESAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_RESAMPLES} resamples required, got {resamples}"
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "each method needs at least one run".into(),
        ));
    }
    if n_items == 0 {
        return Err(Error::EmptySubset);
    }
    let mean = |runs: &[R], rows: &[usize]| {
        runs.iter().map(|r| statistic(r, rows)).sum::<f64>() / runs.len() as f64
    };

    let all: Vec<usize> = (0..n_items).collect();
    let delta = mean(a, &all) - mean(b, &all);

    let mut rng = rng_from_seed(seed);
    let mut rows = vec![0usize; n_items];
    let (mut upper, mut lower) = (0usize, 0usize);
    for _ in 0..resamples {
        for r in rows.iter_mut() {
            *r = rng.random_range(0..n_items);
        }
        let centred = (mean(a, &rows) - mean(b, &rows)) - delta;
        if centred >= delta {
            upper += 1;
        }
        if centred <= delta {
            lower += 1;
        }
    }
    let p_value = (2.0 * upper.min(lower) as f64 / resamples as f64).min(1.0);
    Ok(BootstrapOutcome { delta, p_value })
}

/// [`paired_bootstrap`] over two methods' prediction runs.
pub fn paired_bootstrap_test<F>(
    a: &MethodScores,
    b: &MethodScores,
    statistic: F,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapOutcome>
where
    F: Fn(&LabelMatrix, &[usize]) -> f64,
{
    a.check_paired(b)?;
    paired_bootstrap(&a.runs, &b.runs, a.ids.len(), statistic, resamples, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BaselineFairer,
    HlvFairer,
    NoSignificantDifference,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::BaselineFairer => "baseline_fairer",
            Verdict::HlvFairer => "hlv_fairer",
            Verdict::NoSignificantDifference => "no_significant_difference",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepVerdict {
    pub config_index: usize,
    pub verdict: Verdict,
    pub p_value: f64,
    /// Observed mean fairness of the HLV method minus the baseline's.
    pub delta: f64,
}

/// Tests every configuration for a significant fairness difference between
/// `hlv` and `baseline` on the test split.
///
/// Resample indices are derived from `(seed, config index)`, so the verdict
/// list does not depend on how configurations are scheduled across threads.
pub fn config_sweep(
    baseline: &MethodScores,
    hlv: &MethodScores,
    dataset: &Dataset,
    configs: &[AggregationConfig],
    alpha: f64,
    resamples: usize,
    seed: u64,
) -> Result<Vec<SweepVerdict>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    baseline.check_paired(hlv)?;
    if dataset.split_ids(Split::Test) != hlv.ids {
        return Err(Error::InstanceMismatch(
            "predictions do not cover the test split in dataset order".into(),
        ));
    }
    let truth = dataset.soft_labels(Split::Test, 1.0)?;
    let memberships: Vec<_> = dataset
        .split_instances(Split::Test)
        .map(|i| i.membership.clone())
        .collect();
    let evaluators = |m: &MethodScores| {
        m.runs
            .iter()
            .map(|q| FairnessEvaluator::new(&truth, q, memberships.clone()))
            .collect::<Result<Vec<_>>>()
    };
    let hlv_eval = evaluators(hlv)?;
    let base_eval = evaluators(baseline)?;
    let n = truth.rows();

    configs
        .par_iter()
        .enumerate()
        .map(|(index, cfg)| {
            let scratch = RefCell::new(EvalScratch::default());
            let statistic = |ev: &FairnessEvaluator, rows: &[usize]| {
                let scratch = &mut *scratch.borrow_mut();
                ev.scores_into(rows, scratch);
                aggregate_flat(&scratch.scores, cfg, &mut scratch.per_class)
            };
            // Surface dimension errors once instead of panicking inside the loop.
            aggregate(&hlv_eval[0].evaluate(&[]), cfg)?;
            let outcome = paired_bootstrap(
                &hlv_eval,
                &base_eval,
                n,
                statistic,
                resamples,
                derive_seed(seed, "config-sweep", index as u64),
            )?;
            let verdict = if outcome.p_value >= alpha {
                Verdict::NoSignificantDifference
            } else if outcome.delta < 0.0 {
                Verdict::BaselineFairer
            } else {
                Verdict::HlvFairer
            };
            Ok(SweepVerdict {
                config_index: index,
                verdict,
                p_value: outcome.p_value,
                delta: outcome.delta,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryBy {
    Overall,
    PGroupLevel,
    PClassLevel,
}

/// One bucket of a fraction summary. Fractions and the interval are `None`
/// for an empty bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub bucket: String,
    pub n: usize,
    pub frac_not_baseline_fairer: Option<f64>,
    pub frac_hlv_fairer: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

/// Fraction of configurations where the baseline is not significantly fairer,
/// overall or per exponent level, with 95% percentile-bootstrap intervals
/// computed over the configurations of each bucket.
pub fn fraction_summary(
    verdicts: &[SweepVerdict],
    configs: &[AggregationConfig],
    by: SummaryBy,
    ci_resamples: usize,
    seed: u64,
) -> Result<Vec<SummaryRow>> {
    if verdicts.len() != configs.len()
        || verdicts
            .iter()
            .enumerate()
            .any(|(i, v)| v.config_index != i)
    {
        return Err(Error::ShapeMismatch(
            "verdicts are not aligned with configurations".into(),
        ));
    }
    if ci_resamples == 0 {
        return Err(Error::InvalidArgument(
            "ci_resamples must be positive".into(),
        ));
    }
    let level_of = |cfg: &AggregationConfig| match by {
        SummaryBy::Overall => None,
        SummaryBy::PGroupLevel => Some(p_level(cfg.p_group())),
        SummaryBy::PClassLevel => Some(p_level(cfg.p_class())),
    };
    let buckets: Vec<Option<PLevel>> = match by {
        SummaryBy::Overall => vec![None],
        _ => PLevel::ALL.iter().copied().map(Some).collect(),
    };
    let prefix = match by {
        SummaryBy::Overall => "",
        SummaryBy::PGroupLevel => "p_group:",
        SummaryBy::PClassLevel => "p_class:",
    };

    Ok(buckets
        .into_iter()
        .enumerate()
        .map(|(b, level)| {
            let bucket = match level {
                None => "overall".to_string(),
                Some(l) => format!("{prefix}{}", l.as_str()),
            };
            let members: Vec<Verdict> = verdicts
                .iter()
                .zip(configs)
                .filter(|(_, cfg)| level_of(cfg) == level)
                .map(|(v, _)| v.verdict)
                .collect();
            let n = members.len();
            if n == 0 {
                return SummaryRow {
                    bucket,
                    n,
                    frac_not_baseline_fairer: None,
                    frac_hlv_fairer: None,
                    ci_low: None,
                    ci_high: None,
                };
            }
            let not_baseline: Vec<bool> = members
                .iter()
                .map(|&v| v != Verdict::BaselineFairer)
                .collect();
            let frac = |xs: &[bool]| xs.iter().filter(|&&x| x).count() as f64 / xs.len() as f64;
            let hlv =
                members.iter().filter(|&&v| v == Verdict::HlvFairer).count() as f64 / n as f64;

            let mut rng = rng_from_seed(derive_seed(seed, "fraction-ci", b as u64));
            let mut resampled: Vec<f64> = (0..ci_resamples)
                .map(|_| {
                    (0..n)
                        .filter(|_| not_baseline[rng.random_range(0..n)])
                        .count() as f64
                        / n as f64
                })
                .collect();
            resampled.sort_by(f64::total_cmp);
            SummaryRow {
                bucket,
                n,
                frac_not_baseline_fairer: Some(frac(&not_baseline)),
                frac_hlv_fairer: Some(hlv),
                ci_low: Some(percentile(&resampled, 0.025)),
                ci_high: Some(percentile(&resampled, 0.975)),
            }
        })
        .collect())
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
