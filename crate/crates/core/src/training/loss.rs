//! The five training objectives and their exact gradients with respect to
//! the model parameters.
//!
//! CE-style losses (MV, ReL, SL) and JSD are averaged over the batch. SmF1
//! is the negated soft micro F1 of the whole batch. For multi-label tasks the
//! per-class Bernoulli terms are averaged over classes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::features::SparseVector;
use super::model::{log_softmax, sigmoid, softmax, softplus, Model};
use crate::annotations::TaskKind;
use crate::{Error, Result};

/// Floor applied to probabilities inside logarithms of the JSD gradient.
pub const PROB_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Cross-entropy on majority-voted labels.
    #[serde(rename = "MV")]
    Mv,
    /// Cross-entropy on every annotation as its own example.
    #[serde(rename = "ReL")]
    Rel,
    /// Cross-entropy on soft labels.
    #[serde(rename = "SL")]
    Sl,
    /// Jensen-Shannon divergence to soft labels.
    #[serde(rename = "JSD")]
    Jsd,
    /// Negated soft micro F1 against soft labels.
    #[serde(rename = "SmF1")]
    Smf1,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mv,
        Method::Rel,
        Method::Sl,
        Method::Jsd,
        Method::Smf1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mv => "MV",
            Method::Rel => "ReL",
            Method::Sl => "SL",
            Method::Jsd => "JSD",
            Method::Smf1 => "SmF1",
        }
    }

    /// Whether the method trains on hard label sets rather than soft labels.
    pub fn uses_hard_targets(self) -> bool {
        matches!(self, Method::Mv | Method::Rel)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// Class-index sets (singletons for single-label tasks).
    Hard(Vec<Vec<usize>>),
    /// Rows of a label matrix.
    Soft(Vec<Vec<f64>>),
}

impl Targets {
    fn len(&self) -> usize {
        match self {
            Targets::Hard(t) => t.len(),
            Targets::Soft(t) => t.len(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Targets::Hard(_) => "hard",
            Targets::Soft(_) => "soft",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Batch<'a> {
    pub features: Vec<&'a SparseVector>,
    pub targets: Targets,
}

/// Gradient of the loss. Weight gradients are stored only for features that
/// occur in the batch, as `feature -> per-class values`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradient {
    pub bias: Vec<f64>,
    pub weights: BTreeMap<u32, Vec<f64>>,
}

impl Gradient {
    pub fn weight(&self, feature: usize, class: usize) -> f64 {
        self.weights
            .get(&(feature as u32))
            .map_or(0.0, |g| g[class])
    }
}

pub fn loss_and_grad(method: Method, model: &Model, batch: &Batch<'_>) -> Result<(f64, Gradient)> {
    let k = model.n_classes();
    let task = model.task();
    let n = batch.features.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if batch.targets.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{n} examples, {} targets",
            batch.targets.len()
        )));
    }
    let targets = dense_targets(method, task, k, &batch.targets)?;
    let logits: Vec<Vec<f64>> = batch.features.iter().map(|x| model.logits(x)).collect();

    let (loss, dlogits) = match method {
        Method::Smf1 => soft_micro_f1_objective(task, &logits, &targets),
        _ => {
            let mut total = 0.0;
            let mut grads = Vec::with_capacity(n);
            for (z, t) in logits.iter().zip(&targets) {
                let (l, mut g) = match (method, task) {
                    (Method::Jsd, TaskKind::SingleLabel) => jsd_softmax(z, t),
                    (Method::Jsd, TaskKind::MultiLabel) => jsd_sigmoid(z, t),
                    (_, TaskKind::SingleLabel) => cross_entropy_softmax(z, t),
                    (_, TaskKind::MultiLabel) => cross_entropy_sigmoid(z, t),
                };
                g.iter_mut().for_each(|v| *v /= n as f64);
                total += l;
                grads.push(g);
            }
            (total / n as f64, grads)
        }
    };

    let mut grad = Gradient {
        bias: vec![0.0; k],
        weights: BTreeMap::new(),
    };
    for (x, dz) in batch.features.iter().zip(&dlogits) {
        for (b, g) in grad.bias.iter_mut().zip(dz) {
            *b += g;
        }
        for (d, v) in x.iter() {
            let row = grad.weights.entry(d as u32).or_insert_with(|| vec![0.0; k]);
            for (w, g) in row.iter_mut().zip(dz) {
                *w += v * g;
            }
        }
    }
    Ok((loss, grad))
}

fn dense_targets(
    method: Method,
    task: TaskKind,
    k: usize,
    targets: &Targets,
) -> Result<Vec<Vec<f64>>> {
    let mismatch = || Error::TargetMismatch {
        method: method.as_str(),
        targets: targets.kind(),
    };
    match targets {
        Targets::Hard(sets) => {
            if !method.uses_hard_targets() {
                return Err(mismatch());
            }
            sets.iter()
                .map(|set| {
                    if set.is_empty() || set.iter().any(|&c| c >= k) {
                        return Err(Error::InvalidArgument(format!(
                            "invalid hard target {set:?}"
                        )));
                    }
                    if task == TaskKind::SingleLabel && set.len() != 1 {
                        return Err(Error::InvalidArgument(format!(
                            "single-label target {set:?}"
                        )));
                    }
                    let mut row = vec![0.0; k];
                    set.iter().for_each(|&c| row[c] = 1.0);
                    Ok(row)
                })
                .collect()
        }
        Targets::Soft(rows) => {
            if method.uses_hard_targets() {
                return Err(mismatch());
            }
            for row in rows {
                let valid = row.len() == k && row.iter().all(|v| (0.0..=1.0).contains(v));
                let sums_to_one = (row.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
                if !valid || (task == TaskKind::SingleLabel && !sums_to_one) {
                    return Err(Error::InvalidArgument(format!(
                        "invalid soft target {row:?}"
                    )));
                }
            }
            Ok(rows.clone())
        }
    }
}

/// `-Σ t_k ln softmax(z)_k`.
pub(crate) fn cross_entropy_softmax(z: &[f64], t: &[f64]) -> (f64, Vec<f64>) {
    let log_q = log_softmax(z);
    let loss = -t.iter().zip(&log_q).map(|(t, l)| t * l).sum::<f64>();
    let mass: f64 = t.iter().sum();
    let grad = log_q
        .iter()
        .zip(t)
        .map(|(l, t)| mass * l.exp() - t)
        .collect();
    (loss, grad)
}

/// Mean over classes of the Bernoulli cross-entropy.
pub(crate) fn cross_entropy_sigmoid(z: &[f64], t: &[f64]) -> (f64, Vec<f64>) {
    let k = z.len() as f64;
    let loss = z
        .iter()
        .zip(t)
        .map(|(&z, &t)| t * softplus(-z) + (1.0 - t) * softplus(z))
        .sum::<f64>()
        / k;
    let grad = z
        .iter()
        .zip(t)
        .map(|(&z, &t)| (sigmoid(z) - t) / k)
        .collect();
    (loss, grad)
}

fn xlogy_ratio(x: f64, m: f64) -> f64 {
    if x > 0.0 {
        x * (x / m).ln()
    } else {
        0.0
    }
}

/// Jensen-Shannon divergence (natural log) between two distributions.
pub fn jsd(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let m = 0.5 * (a + b);
            0.5 * xlogy_ratio(a, m) + 0.5 * xlogy_ratio(b, m)
        })
        .sum()
}

fn half_log_ratio(q: f64, m: f64) -> f64 {
    0.5 * (q.max(PROB_EPS) / m.max(PROB_EPS)).ln()
}

/// JSD between the target distribution and `softmax(z)`.
pub(crate) fn jsd_softmax(z: &[f64], t: &[f64]) -> (f64, Vec<f64>) {
    let q = softmax(z);
    let loss = jsd(t, &q);
    // dJSD/dq_k = ½ ln(q_k / m_k); chained through the softmax Jacobian.
    let dq: Vec<f64> = q
        .iter()
        .zip(t)
        .map(|(&q, &t)| half_log_ratio(q, 0.5 * (q + t)))
        .collect();
    let inner: f64 = q.iter().zip(&dq).map(|(q, g)| q * g).sum();
    let grad = q.iter().zip(&dq).map(|(q, g)| q * (g - inner)).collect();
    (loss, grad)
}

/// Mean over classes of the two-outcome JSD between `t_k` and `sigmoid(z_k)`.
pub(crate) fn jsd_sigmoid(z: &[f64], t: &[f64]) -> (f64, Vec<f64>) {
    let k = z.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(z.len());
    for (&z, &t) in z.iter().zip(t) {
        let (q, q_neg) = (sigmoid(z), sigmoid(-z));
        loss += jsd(&[t, 1.0 - t], &[q, q_neg]);
        let m = 0.5 * (q + t);
        let m_neg = 0.5 * (q_neg + (1.0 - t));
        let dq = half_log_ratio(q, m) - half_log_ratio(q_neg, m_neg);
        grad.push(dq * q * q_neg / k);
    }
    (loss / k, grad)
}

/// `-2 Σ min(P, Q) / Σ (P + Q)` over the batch. The subgradient of `min`
/// goes to the smaller argument and is split evenly on exact ties.
pub(crate) fn soft_micro_f1_objective(
    task: TaskKind,
    logits: &[Vec<f64>],
    targets: &[Vec<f64>],
) -> (f64, Vec<Vec<f64>>) {
    let probs: Vec<Vec<f64>> = logits
        .iter()
        .map(|z| match task {
            TaskKind::SingleLabel => softmax(z),
            TaskKind::MultiLabel => z.iter().map(|&v| sigmoid(v)).collect(),
        })
        .collect();
    let (mut overlap, mut total) = (0.0, 0.0);
    for (q, p) in probs.iter().zip(targets) {
        for (&q, &p) in q.iter().zip(p) {
            overlap += p.min(q);
            total += p + q;
        }
    }
    if total <= 0.0 {
        return (0.0, logits.iter().map(|z| vec![0.0; z.len()]).collect());
    }
    let loss = -2.0 * overlap / total;

    let grads = probs
        .iter()
        .zip(logits)
        .zip(targets)
        .map(|((q, z), p)| {
            let dq: Vec<f64> = q
                .iter()
                .zip(p)
                .map(|(&q, &p)| {
                    let dmin = if q < p {
                        1.0
                    } else if q > p {
                        0.0
                    } else {
                        0.5
                    };
                    -2.0 * (dmin * total - overlap) / (total * total)
                })
                .collect();
            match task {
                TaskKind::SingleLabel => {
                    let inner: f64 = q.iter().zip(&dq).map(|(q, g)| q * g).sum();
                    q.iter().zip(&dq).map(|(q, g)| q * (g - inner)).collect()
                }
                TaskKind::MultiLabel => z
                    .iter()
                    .zip(&dq)
                    .map(|(&z, g)| g * sigmoid(z) * sigmoid(-z))
                    .collect(),
            }
        })
        .collect();
    (loss, grads)
}
