use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use hlvfair::aggregation::AggregationConfig;
use hlvfair::annotations::{load_dataset, load_schema, Dataset};
use hlvfair::stats::{DEFAULT_ALPHA, DEFAULT_RESAMPLES, MIN_RESAMPLES};
use hlvfair::synth::{generate, SynthConfig};
use hlvfair::training::{FeatureSpec, Method, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run, sweep or temperature sweep needs. Relative paths are
/// resolved against the directory of the spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    /// Used when no dataset is given; defaults to the stock generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub train: TrainTemplate,
    #[serde(default)]
    pub features: FeatureSpec,
    #[serde(default)]
    pub eval: EvalSpec,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default = "default_tau_grid")]
    pub tau_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_runs() -> usize {
    3
}

pub fn default_tau_grid() -> Vec<f64> {
    vec![0.1, 0.5, 1.0, 2.0, 10.0]
}

/// Training hyperparameters shared by every method and run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainTemplate {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub tau: f64,
}

impl Default for TrainTemplate {
    fn default() -> Self {
        let base = TrainConfig::new(Method::Mv);
        TrainTemplate {
            learning_rate: base.learning_rate,
            batch_size: base.batch_size,
            epochs: base.epochs,
            tau: base.tau,
        }
    }
}

impl TrainTemplate {
    pub fn config(&self, method: Method, seed: u64) -> TrainConfig {
        TrainConfig {
            method,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            tau: self.tau,
            seed,
        }
    }
}

/// `"equal"` or explicit weights and exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvalSpec {
    Named(String),
    Explicit(AggregationConfig),
}

impl Default for EvalSpec {
    fn default() -> Self {
        EvalSpec::Named("equal".into())
    }
}

impl EvalSpec {
    pub fn resolve(
        &self,
        n_groups: usize,
        n_classes: usize,
    ) -> Result<AggregationConfig, CliError> {
        match self {
            EvalSpec::Named(name) if name == "equal" => {
                Ok(AggregationConfig::equal(n_groups, n_classes)?)
            }
            EvalSpec::Named(name) => Err(CliError::invalid(format!(
                "unknown evaluation config {name:?}"
            ))),
            EvalSpec::Explicit(cfg) => {
                if cfg.group_weights().len() != n_groups || cfg.class_weights().len() != n_classes {
                    return Err(CliError::invalid(format!(
                        "evaluation weights are {}x{}, dataset has {n_groups} groups and {n_classes} classes",
                        cfg.group_weights().len(),
                        cfg.class_weights().len()
                    )));
                }
                Ok(cfg.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub n_configs: usize,
    pub alpha: f64,
    pub resamples: usize,
    /// Resamples for the confidence intervals of the summary fractions.
    pub ci_resamples: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            n_configs: 10_000,
            alpha: DEFAULT_ALPHA,
            resamples: DEFAULT_RESAMPLES,
            ci_resamples: 2000,
        }
    }
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        let mut spec: ExperimentSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut spec.dataset, &mut spec.schema, &mut spec.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(spec)
    }

    /// Checks everything that can be checked before touching the data.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.runs == 0 {
            return Err(CliError::invalid("runs must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(CliError::invalid("no methods listed"));
        }
        let mut seen = HashSet::new();
        if let Some(m) = self.methods.iter().find(|m| !seen.insert(**m)) {
            return Err(CliError::invalid(format!("method {m} listed twice")));
        }
        match (&self.dataset, &self.schema, &self.synth) {
            (Some(d), Some(s), None) => {
                for p in [d, s] {
                    if !p.is_file() {
                        return Err(CliError::invalid(format!("{} does not exist", p.display())));
                    }
                }
            }
            (None, None, Some(cfg)) => cfg.validate()?,
            (None, None, None) => {}
            (Some(_), Some(_), Some(_)) => {
                return Err(CliError::invalid(
                    "give either dataset + schema or synth, not both",
                ))
            }
            _ => {
                return Err(CliError::invalid(
                    "dataset and schema must be given together",
                ))
            }
        }
        self.train.config(Method::Sl, 0).validate()?;
        if self.features.dim == 0 {
            return Err(CliError::invalid("feature dimension must be positive"));
        }
        let sw = &self.sweep;
        if sw.n_configs == 0 || sw.ci_resamples == 0 {
            return Err(CliError::invalid(
                "n_configs and ci_resamples must be positive",
            ));
        }
        if !(sw.alpha > 0.0 && sw.alpha < 1.0) {
            return Err(CliError::invalid(format!(
                "alpha must lie in (0, 1), got {}",
                sw.alpha
            )));
        }
        if sw.resamples < MIN_RESAMPLES {
            return Err(CliError::invalid(format!(
                "at least {MIN_RESAMPLES} resamples required"
            )));
        }
        if let Some(t) = self.tau_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(CliError::invalid(format!(
                "temperature {t} must be positive"
            )));
        }
        if self.workers == Some(0) {
            return Err(CliError::invalid("workers must be positive"));
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<Dataset, CliError> {
        match (&self.dataset, &self.schema) {
            (Some(d), Some(s)) => {
                let schema = load_schema(s)?;
                Ok(load_dataset(d, &schema)?)
            }
            _ => Ok(generate(&self.synth.clone().unwrap_or_default())?),
        }
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::invalid("no output directory (use --out)"))
    }
}
