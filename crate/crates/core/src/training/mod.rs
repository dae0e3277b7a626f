//! Desk-scale classifier trained with one of five objectives, standing in for
//! finetuned transformer encoders.

mod features;
mod loss;
mod model;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate, AggregationConfig};
use crate::annotations::{
    majority_vote, repeated_labels, soft_distribution, Dataset, LabelMatrix, Split, TaskKind,
};
use crate::metrics::{fairness_matrix, soft_micro_f1, FairnessMatrix};
use crate::seed::{derive_seed, rng_from_seed};
use crate::{Error, Result};

pub use features::{featurize, hash_token, tokenize, FeatureSpec, SparseVector, DEFAULT_DIM};
pub use loss::{jsd, loss_and_grad, Batch, Gradient, Method, Targets, PROB_EPS};
pub use model::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub method: Method,
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    #[serde(default = "defaults::epochs")]
    pub epochs: usize,
    /// Temperature of the soft labels used by SL, JSD and SmF1.
    #[serde(default = "defaults::tau")]
    pub tau: f64,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn learning_rate() -> f64 {
        0.1
    }
    pub fn batch_size() -> usize {
        32
    }
    pub fn epochs() -> usize {
        10
    }
    pub fn tau() -> f64 {
        1.0
    }
}

impl TrainConfig {
    pub fn new(method: Method) -> Self {
        TrainConfig {
            method,
            learning_rate: defaults::learning_rate(),
            batch_size: defaults::batch_size(),
            epochs: defaults::epochs(),
            tau: defaults::tau(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidArgument(
                "batch size and epochs must be positive".into(),
            ));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::InvalidArgument(format!("temperature {}", self.tau)));
        }
        Ok(())
    }
}

/// Predicted probabilities for one split: `{"split", "ids", "q"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    pub split: Split,
    pub ids: Vec<String>,
    pub q: Vec<Vec<f64>>,
}

impl Predictions {
    pub fn to_matrix(&self, task: TaskKind) -> Result<LabelMatrix> {
        LabelMatrix::from_rows(&self.q, task.semantics())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    pub config: TrainConfig,
    pub final_train_loss: f64,
    pub predictions: Vec<Predictions>,
}

impl RunRecord {
    pub fn predictions(&self, split: Split) -> Option<&Predictions> {
        self.predictions.iter().find(|p| p.split == split)
    }
}

enum Target {
    Hard(Vec<usize>),
    Soft(Vec<f64>),
}

/// Training examples as `(instance index, target)` pairs.
fn build_examples(
    dataset: &Dataset,
    cfg: &TrainConfig,
    train_idx: &[usize],
) -> Result<Vec<(usize, Target)>> {
    let schema = dataset.schema();
    let instances = dataset.instances();
    Ok(match cfg.method {
        Method::Mv => train_idx
            .iter()
            .map(|&i| (i, Target::Hard(majority_vote(&instances[i], schema))))
            .collect(),
        Method::Rel => repeated_labels(dataset)
            .into_iter()
            .map(|pair| (pair.index, Target::Hard(pair.labels.to_vec())))
            .collect(),
        Method::Sl | Method::Jsd | Method::Smf1 => train_idx
            .iter()
            .map(|&i| {
                Ok((
                    i,
                    Target::Soft(soft_distribution(&instances[i], schema, cfg.tau)?),
                ))
            })
            .collect::<Result<_>>()?,
    })
}

/// Trains a model from zero weights with mini-batch gradient descent.
///
/// Targets follow the method: majority votes for MV, one example per
/// annotation for ReL, temperature-scaled soft labels for SL, JSD and SmF1.
/// Example order is reshuffled each epoch from `cfg.seed`.
pub fn train_model(
    dataset: &Dataset,
    cfg: &TrainConfig,
    spec: &FeatureSpec,
) -> Result<(Model, f64)> {
    cfg.validate()?;
    let schema = dataset.schema();
    let train_idx = dataset.split_indices(Split::Train);
    if train_idx.is_empty() {
        return Err(Error::InsufficientData("empty train split".into()));
    }
    let instances = dataset.instances();
    let features: Vec<Option<SparseVector>> = instances
        .iter()
        .map(|inst| (inst.split == Split::Train).then(|| featurize(&inst.text, spec)))
        .collect();

    let examples = build_examples(dataset, cfg, &train_idx)?;

    let mut model = Model::zeros(schema.task(), schema.n_classes(), spec.dim);
    let mut rng = rng_from_seed(derive_seed(cfg.seed, "shuffle", 0));
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut epoch_loss = f64::NAN;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch_features = chunk
                .iter()
                .map(|&e| features[examples[e].0].as_ref().expect("train features"))
                .collect();
            let targets = if cfg.method.uses_hard_targets() {
                Targets::Hard(
                    chunk
                        .iter()
                        .map(|&e| match &examples[e].1 {
                            Target::Hard(t) => t.clone(),
                            Target::Soft(_) => unreachable!("hard-target method"),
                        })
                        .collect(),
                )
            } else {
                Targets::Soft(
                    chunk
                        .iter()
                        .map(|&e| match &examples[e].1 {
                            Target::Soft(t) => t.clone(),
                            Target::Hard(_) => unreachable!("soft-target method"),
                        })
                        .collect(),
                )
            };
            let batch = Batch {
                features: batch_features,
                targets,
            };
            let (loss, grad) = loss_and_grad(cfg.method, &model, &batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged(format!(
                    "{} loss became {loss} in epoch {epoch} (learning rate {})",
                    cfg.method, cfg.learning_rate
                )));
            }
            model.apply(&grad, cfg.learning_rate);
            weighted += loss * chunk.len() as f64;
        }
        if !model.is_finite() {
            return Err(Error::Diverged(format!(
                "non-finite parameters after epoch {epoch}"
            )));
        }
        epoch_loss = weighted / examples.len() as f64;
    }
    Ok((model, epoch_loss))
}

pub fn predict_split(
    model: &Model,
    dataset: &Dataset,
    split: Split,
    spec: &FeatureSpec,
) -> Predictions {
    let mut ids = Vec::new();
    let mut q = Vec::new();
    for inst in dataset.split_instances(split) {
        ids.push(inst.id.clone());
        q.push(model.predict(&featurize(&inst.text, spec)));
    }
    Predictions { split, ids, q }
}

/// Trains and returns dev and test predictions.
pub fn train(dataset: &Dataset, cfg: &TrainConfig, spec: &FeatureSpec) -> Result<RunRecord> {
    let (model, final_train_loss) = train_model(dataset, cfg, spec)?;
    Ok(RunRecord {
        method: cfg.method,
        seed: cfg.seed,
        config: cfg.clone(),
        final_train_loss,
        predictions: vec![
            predict_split(&model, dataset, Split::Dev, spec),
            predict_split(&model, dataset, Split::Test, spec),
        ],
    })
}

/// Performance and fairness of predictions against `tau = 1` ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub perf: f64,
    pub fairness: f64,
    pub matrix: FairnessMatrix,
}

pub fn evaluate(
    dataset: &Dataset,
    predictions: &Predictions,
    eval_cfg: &AggregationConfig,
) -> Result<Evaluation> {
    if predictions.ids != dataset.split_ids(predictions.split) {
        return Err(Error::InstanceMismatch(format!(
            "predictions do not cover the {} split in dataset order",
            predictions.split
        )));
    }
    let truth = dataset.soft_labels(predictions.split, 1.0)?;
    let q = predictions.to_matrix(dataset.schema().task())?;
    let rows: Vec<usize> = (0..truth.rows()).collect();
    let perf = soft_micro_f1(&truth, &q, &rows)?;
    let matrix = fairness_matrix(&truth, &q, dataset, predictions.split)?;
    let fairness = aggregate(&matrix, eval_cfg)?;
    Ok(Evaluation {
        perf,
        fairness,
        matrix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureRow {
    pub tau: f64,
    pub perf: f64,
    pub fairness: f64,
}

/// Trains SL once per temperature and evaluates on the test split. Only the
/// training targets are scaled; test ground truth always uses `tau = 1`.
pub fn temperature_sweep(
    dataset: &Dataset,
    cfg: &TrainConfig,
    grid: &[f64],
    eval_cfg: &AggregationConfig,
    spec: &FeatureSpec,
) -> Result<Vec<TemperatureRow>> {
    if cfg.method != Method::Sl {
        return Err(Error::InvalidArgument(format!(
            "temperature sweep needs SL, got {}",
            cfg.method
        )));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty temperature grid".into()));
    }
    if let Some(t) = grid.iter().find(|t| t.is_nan() || **t <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "temperature {t} must be positive"
        )));
    }
    grid.iter()
        .map(|&tau| {
            let run = train(dataset, &TrainConfig { tau, ..cfg.clone() }, spec)?;
            let test = run
                .predictions(Split::Test)
                .expect("train emits test predictions");
            let eval = evaluate(dataset, test, eval_cfg)?;
            Ok(TemperatureRow {
                tau,
                perf: eval.perf,
                fairness: eval.fairness,
            })
        })
        .collect()
}
