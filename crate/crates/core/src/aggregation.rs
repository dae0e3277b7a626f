//! Weighted generalised means over fairness scores, and the configuration
//! space they are parameterised by.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::metrics::FairnessMatrix;
use crate::seed::rng_from_seed;
use crate::{Error, Result};

const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Exponents with a smaller magnitude use the geometric-mean limit.
pub const GEOMETRIC_THRESHOLD: f64 = 1e-9;

/// Sampled exponents lie in `(-P_RANGE, P_RANGE)`.
pub const P_RANGE: f64 = 15.0;

fn check_simplex(weights: &[f64], what: &str) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights(format!("empty {what} weights")));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!(
            "{what} weight {w} is negative or not finite"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::InvalidWeights(format!(
            "{what} weights sum to {sum}"
        )));
    }
    Ok(())
}

/// `(Σ w_i s_i^p)^(1/p)`.
///
/// Uses the weighted geometric mean for `|p| < 1e-9` and returns 0 for
/// `p < 0` whenever a positively weighted score is 0. Terms with zero weight
/// are ignored, and the result is clamped to the range of the positively
/// weighted scores.
pub fn generalized_mean(scores: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    if scores.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores for {} weights",
            scores.len(),
            weights.len()
        )));
    }
    check_simplex(weights, "mean")?;
    if let Some(s) = scores.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::OutOfRange(format!(
            "score {s} must be finite and non-negative"
        )));
    }
    if p.is_nan() {
        return Err(Error::InvalidArgument("exponent is NaN".into()));
    }

    Ok(mean_core(scores, weights, p))
}

/// [`generalized_mean`] on inputs that are already validated.
fn mean_core(scores: &[f64], weights: &[f64], p: f64) -> f64 {
    let active = || scores.iter().zip(weights).filter(|(_, &w)| w > 0.0);
    let (lo, hi) = active().fold((f64::INFINITY, 0.0f64), |(lo, hi), (&s, _)| {
        (lo.min(s), hi.max(s))
    });

    let value = if lo == hi {
        lo
    } else if p.abs() < GEOMETRIC_THRESHOLD {
        if lo == 0.0 {
            0.0
        } else {
            active().map(|(s, w)| w * s.ln()).sum::<f64>().exp()
        }
    } else if p < 0.0 && lo == 0.0 {
        0.0
    } else {
        // Pivot on the max for p > 0 and the min for p < 0 so every ratio^p lies in (0, 1].
        let pivot = if p > 0.0 { hi } else { lo };
        let sum: f64 = active().map(|(s, w)| w * (s / pivot).powf(p)).sum();
        pivot * sum.powf(1.0 / p)
    };
    value.clamp(lo, hi)
}

/// One point in the aggregation configuration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct AggregationConfig {
    #[serde(rename = "gw")]
    group_weights: Vec<f64>,
    #[serde(rename = "cw")]
    class_weights: Vec<f64>,
    #[serde(rename = "pg")]
    p_group: f64,
    #[serde(rename = "pc")]
    p_class: f64,
}

#[derive(Deserialize)]
struct RawConfig {
    gw: Vec<f64>,
    cw: Vec<f64>,
    pg: f64,
    pc: f64,
}

impl TryFrom<RawConfig> for AggregationConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        AggregationConfig::new(raw.gw, raw.cw, raw.pg, raw.pc)
    }
}

impl AggregationConfig {
    pub fn new(
        group_weights: Vec<f64>,
        class_weights: Vec<f64>,
        p_group: f64,
        p_class: f64,
    ) -> Result<Self> {
        check_simplex(&group_weights, "group")?;
        check_simplex(&class_weights, "class")?;
        for p in [p_group, p_class] {
            if !p.is_finite() || p.abs() < GEOMETRIC_THRESHOLD {
                return Err(Error::InvalidArgument(format!(
                    "exponent {p} must be finite and non-zero"
                )));
            }
        }
        Ok(AggregationConfig {
            group_weights,
            class_weights,
            p_group,
            p_class,
        })
    }

    /// Equal weights with `p = 1` for both aggregations (plain averages).
    pub fn equal(n_groups: usize, n_classes: usize) -> Result<Self> {
        if n_groups == 0 || n_classes == 0 {
            return Err(Error::InvalidArgument(
                "need at least one group and one class".into(),
            ));
        }
        AggregationConfig::new(
            vec![1.0 / n_groups as f64; n_groups],
            vec![1.0 / n_classes as f64; n_classes],
            1.0,
            1.0,
        )
    }

    pub fn group_weights(&self) -> &[f64] {
        &self.group_weights
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }

    pub fn p_group(&self) -> f64 {
        self.p_group
    }

    pub fn p_class(&self) -> f64 {
        self.p_class
    }
}

/// Aggregates `s[k][g]` over groups (per class) and then over classes.
pub fn aggregate(fm: &FairnessMatrix, cfg: &AggregationConfig) -> Result<f64> {
    if fm.n_classes() != cfg.class_weights.len() || fm.n_groups() != cfg.group_weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "fairness matrix is {}x{}, configuration expects {}x{}",
            fm.n_classes(),
            fm.n_groups(),
            cfg.class_weights.len(),
            cfg.group_weights.len()
        )));
    }
    if let Some(s) =
        fm.s.iter()
            .flatten()
            .find(|s| !(**s >= 0.0 && s.is_finite()))
    {
        return Err(Error::OutOfRange(format!(
            "fairness score {s} must be finite and non-negative"
        )));
    }
    let per_class: Vec<f64> =
        fm.s.iter()
            .map(|row| mean_core(row, &cfg.group_weights, cfg.p_group))
            .collect();
    Ok(mean_core(&per_class, &cfg.class_weights, cfg.p_class))
}

/// [`aggregate`] over a class-major `K x G` score array, using `per_class`
/// as scratch. Shapes and scores must already be valid.
pub(crate) fn aggregate_flat(s: &[f64], cfg: &AggregationConfig, per_class: &mut Vec<f64>) -> f64 {
    let g = cfg.group_weights.len();
    per_class.clear();
    per_class.extend(
        s.chunks_exact(g)
            .map(|row| mean_core(row, &cfg.group_weights, cfg.p_group)),
    );
    mean_core(per_class, &cfg.class_weights, cfg.p_class)
}

/// Serialised form of a sampled configuration: `{"gw","cw","pg","pc","index"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedConfig {
    #[serde(flatten)]
    pub config: AggregationConfig,
    pub index: usize,
}

/// Samples configurations with flat Dirichlet weights and exponents from
/// `U(-15, 15)`. Exponents within 1e-9 of zero are redrawn.
pub fn sample_configs(
    count: usize,
    n_groups: usize,
    n_classes: usize,
    seed: u64,
) -> Result<Vec<AggregationConfig>> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "configuration count must be positive".into(),
        ));
    }
    if n_groups == 0 || n_classes == 0 {
        return Err(Error::InvalidArgument(
            "need at least one group and one class".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let flat_dirichlet = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        draws.into_iter().map(|d| d / total).collect::<Vec<_>>()
    };
    let exponent = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let p: f64 = rng.random_range(-P_RANGE..P_RANGE);
        if p.abs() >= GEOMETRIC_THRESHOLD && p > -P_RANGE {
            return p;
        }
    };
    (0..count)
        .map(|_| {
            let gw = flat_dirichlet(n_groups, &mut rng);
            let cw = flat_dirichlet(n_classes, &mut rng);
            let pg = exponent(&mut rng);
            let pc = exponent(&mut rng);
            AggregationConfig::new(gw, cw, pg, pc)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PLevel {
    Low,
    Mid,
    High,
}

impl PLevel {
    pub const ALL: [PLevel; 3] = [PLevel::Low, PLevel::Mid, PLevel::High];

    pub fn as_str(self) -> &'static str {
        match self {
            PLevel::Low => "low",
            PLevel::Mid => "mid",
            PLevel::High => "high",
        }
    }
}

/// low: `p < -5`, mid: `-5 <= p <= 5`, high: `p > 5`.
pub fn p_level(p: f64) -> PLevel {
    if p < -5.0 {
        PLevel::Low
    } else if p > 5.0 {
        PLevel::High
    } else {
        PLevel::Mid
    }
}
