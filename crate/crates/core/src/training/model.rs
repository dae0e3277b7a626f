use serde::{Deserialize, Serialize};

use super::features::SparseVector;
use super::loss::Gradient;
use crate::annotations::{LabelMatrix, TaskKind};
use crate::Result;

/// Linear layer over hashed features with a softmax (single-label) or
/// element-wise sigmoid (multi-label) output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    task: TaskKind,
    n_classes: usize,
    dim: usize,
    /// Feature-major: the `n_classes` weights of feature `d` are contiguous.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Model {
    pub fn zeros(task: TaskKind, n_classes: usize, dim: usize) -> Self {
        Model {
            task,
            n_classes,
            dim,
            weights: vec![0.0; n_classes * dim],
            bias: vec![0.0; n_classes],
        }
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self, feature: usize, class: usize) -> f64 {
        self.weights[feature * self.n_classes + class]
    }

    pub fn weight_mut(&mut self, feature: usize, class: usize) -> &mut f64 {
        &mut self.weights[feature * self.n_classes + class]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|w| w.is_finite())
    }

    pub fn logits(&self, x: &SparseVector) -> Vec<f64> {
        let mut z = self.bias.clone();
        for (d, v) in x.iter() {
            let row = &self.weights[d * self.n_classes..(d + 1) * self.n_classes];
            for (zk, w) in z.iter_mut().zip(row) {
                *zk += v * w;
            }
        }
        z
    }

    pub fn predict(&self, x: &SparseVector) -> Vec<f64> {
        let z = self.logits(x);
        match self.task {
            TaskKind::SingleLabel => softmax(&z),
            TaskKind::MultiLabel => z.iter().map(|&v| sigmoid(v)).collect(),
        }
    }

    pub fn predict_matrix<'a>(
        &self,
        xs: impl IntoIterator<Item = &'a SparseVector>,
    ) -> Result<LabelMatrix> {
        let mut values = Vec::new();
        let mut rows = 0;
        for x in xs {
            values.extend(self.predict(x));
            rows += 1;
        }
        LabelMatrix::new(rows, self.n_classes, values, self.task.semantics())
    }

    pub fn apply(&mut self, grad: &Gradient, learning_rate: f64) {
        for (b, g) in self.bias.iter_mut().zip(&grad.bias) {
            *b -= learning_rate * g;
        }
        for (&d, g) in &grad.weights {
            let row =
                &mut self.weights[d as usize * self.n_classes..(d as usize + 1) * self.n_classes];
            for (w, gk) in row.iter_mut().zip(g) {
                *w -= learning_rate * gk;
            }
        }
    }
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub(crate) fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
