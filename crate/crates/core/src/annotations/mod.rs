//! Disaggregated multi-annotator datasets and the label distributions built
//! from them.

mod agreement;
mod io;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use agreement::{krippendorff_alpha, masi_distance, Distance};
pub use io::{load_dataset, load_schema, read_dataset, write_dataset, write_jsonl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// One class per annotation; predictions are a softmax distribution.
    SingleLabel,
    /// A set of classes per annotation; predictions are per-class sigmoids.
    MultiLabel,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::SingleLabel => "single_label",
            TaskKind::MultiLabel => "multi_label",
        }
    }

    /// Row semantics of label matrices for this kind of task.
    pub fn semantics(self) -> Semantics {
        match self {
            TaskKind::SingleLabel => Semantics::Distribution,
            TaskKind::MultiLabel => Semantics::Marginals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct TaskSchema {
    task: TaskKind,
    classes: Vec<String>,
    groups: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    task: TaskKind,
    classes: Vec<String>,
    groups: Vec<String>,
}

impl TryFrom<RawSchema> for TaskSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        TaskSchema::new(raw.task, raw.classes, raw.groups)
    }
}

impl From<TaskSchema> for RawSchema {
    fn from(s: TaskSchema) -> Self {
        RawSchema {
            task: s.task,
            classes: s.classes,
            groups: s.groups,
        }
    }
}

impl TaskSchema {
    pub fn new(task: TaskKind, classes: Vec<String>, groups: Vec<String>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::InvalidSchema("at least two classes required".into()));
        }
        if groups.is_empty() {
            return Err(Error::InvalidSchema("at least one group required".into()));
        }
        for (what, ids) in [("class", &classes), ("group", &groups)] {
            let mut seen = HashSet::new();
            for id in ids {
                if id.is_empty() {
                    return Err(Error::InvalidSchema(format!("empty {what} identifier")));
                }
                if !seen.insert(id.as_str()) {
                    return Err(Error::InvalidSchema(format!(
                        "duplicate {what} identifier {id:?}"
                    )));
                }
            }
        }
        Ok(TaskSchema {
            task,
            classes,
            groups,
        })
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g == name)
    }
}

/// One annotator's judgement. `labels` is kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub annotator: Option<String>,
    labels: Vec<usize>,
}

impl AnnotationRecord {
    pub fn new(annotator: Option<String>, labels: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut labels: Vec<usize> = labels.into_iter().collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.is_empty() {
            return Err(Error::InvalidAnnotation("empty label set".into()));
        }
        Ok(AnnotationRecord { annotator, labels })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn contains(&self, class: usize) -> bool {
        self.labels.binary_search(&class).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Membership {
    #[serde(rename = "in")]
    InGroup,
    #[default]
    #[serde(rename = "out")]
    OutGroup,
    /// Membership withheld ("prefer not to say"); excluded from fairness subsets.
    #[serde(rename = "unknown")]
    Unknown,
}

impl Membership {
    pub fn as_str(self) -> &'static str {
        match self {
            Membership::InGroup => "in",
            Membership::OutGroup => "out",
            Membership::Unknown => "unknown",
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub text: String,
    pub annotations: Vec<AnnotationRecord>,
    /// Indexed by group position in the schema.
    pub membership: Vec<Membership>,
    pub split: Split,
}

impl Instance {
    /// `c_k`: number of annotations containing each class.
    pub fn label_counts(&self, n_classes: usize) -> Vec<usize> {
        let mut counts = vec![0; n_classes];
        for ann in &self.annotations {
            for &k in ann.labels() {
                counts[k] += 1;
            }
        }
        counts
    }

    fn check(&self, schema: &TaskSchema) -> Result<()> {
        if self.annotations.is_empty() {
            return Err(Error::InvalidAnnotation(format!(
                "instance {:?} has no annotations",
                self.id
            )));
        }
        if self.membership.len() != schema.n_groups() {
            return Err(Error::ShapeMismatch(format!(
                "instance {:?} has {} membership entries, schema has {} groups",
                self.id,
                self.membership.len(),
                schema.n_groups()
            )));
        }
        for ann in &self.annotations {
            if let Some(&k) = ann.labels().last() {
                if k >= schema.n_classes() {
                    return Err(Error::InvalidAnnotation(format!(
                        "instance {:?}: class index {k} out of range",
                        self.id
                    )));
                }
            }
            if schema.task() == TaskKind::SingleLabel && ann.labels().len() != 1 {
                return Err(Error::InvalidAnnotation(format!(
                    "instance {:?}: single-label annotation with {} labels",
                    self.id,
                    ann.labels().len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: TaskSchema,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema: TaskSchema, instances: Vec<Instance>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, inst) in instances.iter().enumerate() {
            inst.check(&schema)?;
            if !seen.insert(inst.id.as_str()) {
                return Err(Error::DuplicateId {
                    line: i + 1,
                    id: inst.id.clone(),
                });
            }
        }
        Ok(Dataset { schema, instances })
    }

    pub fn schema(&self) -> &TaskSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Positions of the instances in `split`, in dataset order.
    pub fn split_indices(&self, split: Split) -> Vec<usize> {
        self.instances
            .iter()
            .enumerate()
            .filter(|(_, inst)| inst.split == split)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn split_ids(&self, split: Split) -> Vec<String> {
        self.split_instances(split)
            .map(|inst| inst.id.clone())
            .collect()
    }

    pub fn split_instances(&self, split: Split) -> impl Iterator<Item = &Instance> + '_ {
        self.instances
            .iter()
            .filter(move |inst| inst.split == split)
    }

    /// Ground-truth label matrix of a split, one row per instance in dataset order.
    pub fn soft_labels(&self, split: Split, tau: f64) -> Result<LabelMatrix> {
        let k = self.schema.n_classes();
        let mut values = Vec::new();
        let mut rows = 0;
        for inst in self.split_instances(split) {
            values.extend(soft_distribution(inst, &self.schema, tau)?);
            rows += 1;
        }
        LabelMatrix::new(rows, k, values, self.schema.task().semantics())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// Each row is a probability distribution over classes.
    Distribution,
    /// Each entry is an independent per-class probability.
    Marginals,
}

/// Row-major N×K matrix of per-instance class probabilities. Houses both
/// ground truths and predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    semantics: Semantics,
}

const ROW_SUM_TOLERANCE: f64 = 1e-9;

impl LabelMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, semantics: Semantics) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidLabelMatrix(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidLabelMatrix(format!(
                "entry {v} outside [0, 1]"
            )));
        }
        if semantics == Semantics::Distribution && cols > 0 {
            for (i, row) in values.chunks(cols).enumerate() {
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::InvalidLabelMatrix(format!("row {i} sums to {sum}")));
                }
            }
        }
        Ok(LabelMatrix {
            rows,
            cols,
            values,
            semantics,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], semantics: Semantics) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidLabelMatrix("ragged rows".into()));
        }
        let values = rows.iter().flatten().copied().collect();
        LabelMatrix::new(rows.len(), cols, values, semantics)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn same_shape(&self, other: &LabelMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.semantics == other.semantics
    }
}

/// Temperature-scaled soft label of one instance.
///
/// Single-label: `p_k ∝ c_k^(1/tau)`. Multi-label: per class, the two outcomes
/// "selected" (`c_k`) and "not selected" (`n - c_k`) are scaled and normalised,
/// so `tau = 1` gives `c_k / n`. Zero counts stay at zero mass for every `tau`.
pub fn soft_distribution(instance: &Instance, schema: &TaskSchema, tau: f64) -> Result<Vec<f64>> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "temperature must be positive, got {tau}"
        )));
    }
    let n = instance.annotations.len();
    if n == 0 {
        return Err(Error::InvalidAnnotation(format!(
            "instance {:?} has no annotations",
            instance.id
        )));
    }
    let counts = instance.label_counts(schema.n_classes());
    let inv_tau = 1.0 / tau;
    Ok(match schema.task() {
        TaskKind::SingleLabel => {
            // Scale by the largest count in log space so 1/tau up to 1e3 cannot overflow.
            let max = *counts.iter().max().expect("K >= 2") as f64;
            let scaled: Vec<f64> = counts
                .iter()
                .map(|&c| {
                    if c == 0 {
                        0.0
                    } else {
                        (((c as f64).ln() - max.ln()) * inv_tau).exp()
                    }
                })
                .collect();
            let total: f64 = scaled.iter().sum();
            scaled.into_iter().map(|v| v / total).collect()
        }
        TaskKind::MultiLabel => counts
            .iter()
            .map(|&c| {
                if c == 0 {
                    0.0
                } else if c == n {
                    1.0
                } else {
                    // c^a / (c^a + (n-c)^a) = 1 / (1 + exp(a * ln((n-c)/c)))
                    let r = inv_tau * (((n - c) as f64).ln() - (c as f64).ln());
                    logistic(-r)
                }
            })
            .collect(),
    })
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Hard label set by majority vote.
///
/// Single-label picks the most-voted class, lowest index on ties. Multi-label
/// keeps classes chosen by a strict majority (`c_k > n/2`) and falls back to
/// the single most-voted class when none is.
pub fn majority_vote(instance: &Instance, schema: &TaskSchema) -> Vec<usize> {
    let n = instance.annotations.len();
    let counts = instance.label_counts(schema.n_classes());
    let argmax = counts
        .iter()
        .enumerate()
        .fold(
            (0, 0),
            |best, (k, &c)| if c > best.1 { (k, c) } else { best },
        )
        .0;
    match schema.task() {
        TaskKind::SingleLabel => vec![argmax],
        TaskKind::MultiLabel => {
            let majority: Vec<usize> = counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| 2 * c > n)
                .map(|(k, _)| k)
                .collect();
            if majority.is_empty() {
                vec![argmax]
            } else {
                majority
            }
        }
    }
}

/// One (instance, annotation) training pair for repeated labelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelPair<'a> {
    /// Position of the instance in the dataset.
    pub index: usize,
    pub id: &'a str,
    pub labels: &'a [usize],
}

/// Every annotation of every train-split instance, in instance then annotation order.
pub fn repeated_labels(dataset: &Dataset) -> Vec<LabelPair<'_>> {
    dataset
        .instances()
        .iter()
        .enumerate()
        .filter(|(_, inst)| inst.split == Split::Train)
        .flat_map(|(index, inst)| {
            inst.annotations.iter().map(move |ann| LabelPair {
                index,
                id: &inst.id,
                labels: ann.labels(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schema(task: TaskKind, k: usize) -> TaskSchema {
        TaskSchema::new(
            task,
            (0..k).map(|i| format!("c{i}")).collect(),
            vec!["g".into()],
        )
        .unwrap()
    }

    /// Instance whose annotations realise the given per-class counts. For
    /// multi-label, class occurrences are dealt round-robin over `n`
    /// annotations, which needs `sum(counts) >= n` and every count `<= n`.
    fn instance(task: TaskKind, counts: &[usize], n: usize) -> Instance {
        let annotations = match task {
            TaskKind::SingleLabel => counts
                .iter()
                .enumerate()
                .flat_map(|(k, &c)| std::iter::repeat_n(k, c))
                .map(|k| AnnotationRecord::new(None, [k]).unwrap())
                .collect(),
            TaskKind::MultiLabel => {
                let mut sets = vec![Vec::new(); n];
                let mut pos = 0;
                for (k, &c) in counts.iter().enumerate() {
                    for _ in 0..c {
                        sets[pos % n].push(k);
                        pos += 1;
                    }
                }
                sets.into_iter()
                    .map(|l| AnnotationRecord::new(None, l).unwrap())
                    .collect()
            }
        };
        Instance {
            id: "i".into(),
            text: String::new(),
            annotations,
            membership: vec![Membership::OutGroup],
            split: Split::Train,
        }
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn schema_rejects_bad_identifiers() {
        assert!(
            TaskSchema::new(TaskKind::SingleLabel, vec!["a".into()], vec!["g".into()]).is_err()
        );
        assert!(TaskSchema::new(
            TaskKind::SingleLabel,
            vec!["a".into(), "a".into()],
            vec!["g".into()]
        )
        .is_err());
        assert!(
            TaskSchema::new(TaskKind::SingleLabel, vec!["a".into(), "b".into()], vec![]).is_err()
        );
        assert!(TaskSchema::new(
            TaskKind::SingleLabel,
            vec!["a".into(), "".into()],
            vec!["g".into()]
        )
        .is_err());
    }

    #[test]
    fn soft_distribution_single_label() {
        let s = schema(TaskKind::SingleLabel, 3);
        let inst = instance(TaskKind::SingleLabel, &[2, 1, 0], 3);
        assert_close(
            &soft_distribution(&inst, &s, 1.0).unwrap(),
            &[2.0 / 3.0, 1.0 / 3.0, 0.0],
            1e-12,
        );
        assert_close(
            &soft_distribution(&inst, &s, 0.01).unwrap(),
            &[1.0, 0.0, 0.0],
            1e-3,
        );
        assert_close(
            &soft_distribution(&inst, &s, 1e6).unwrap(),
            &[0.5, 0.5, 0.0],
            1e-3,
        );
    }

    #[test]
    fn soft_distribution_multi_label() {
        let s = schema(TaskKind::MultiLabel, 3);
        let inst = instance(TaskKind::MultiLabel, &[4, 2, 0], 5);
        assert_eq!(inst.label_counts(3), vec![4, 2, 0]);
        assert_close(
            &soft_distribution(&inst, &s, 1.0).unwrap(),
            &[0.8, 0.4, 0.0],
            1e-12,
        );
    }

    #[test]
    fn soft_distribution_rejects_non_positive_tau() {
        let s = schema(TaskKind::SingleLabel, 3);
        let inst = instance(TaskKind::SingleLabel, &[2, 1, 0], 3);
        assert!(soft_distribution(&inst, &s, 0.0).is_err());
        assert!(soft_distribution(&inst, &s, -1.0).is_err());
        assert!(soft_distribution(&inst, &s, f64::NAN).is_err());
    }

    #[test]
    fn majority_vote_rules() {
        let s = schema(TaskKind::SingleLabel, 3);
        assert_eq!(
            majority_vote(&instance(TaskKind::SingleLabel, &[2, 1, 0], 3), &s),
            vec![0]
        );
        assert_eq!(
            majority_vote(&instance(TaskKind::SingleLabel, &[1, 1, 0], 2), &s),
            vec![0]
        );
        assert_eq!(
            majority_vote(&instance(TaskKind::SingleLabel, &[0, 1, 1], 2), &s),
            vec![1]
        );

        let m = schema(TaskKind::MultiLabel, 3);
        assert_eq!(
            majority_vote(&instance(TaskKind::MultiLabel, &[4, 2, 0], 5), &m),
            vec![0]
        );
        // no class reaches a strict majority of 4, fall back to most voted
        assert_eq!(
            majority_vote(&instance(TaskKind::MultiLabel, &[2, 2, 1], 4), &m),
            vec![0]
        );
        assert_eq!(
            majority_vote(&instance(TaskKind::MultiLabel, &[5, 3, 3], 5), &m),
            vec![0, 1, 2]
        );
    }

    fn dataset_with(annotation_counts: &[(usize, Split)]) -> Dataset {
        let s = schema(TaskKind::SingleLabel, 2);
        let instances = annotation_counts
            .iter()
            .enumerate()
            .map(|(i, &(n, split))| Instance {
                id: format!("i{i}"),
                text: String::new(),
                annotations: (0..n)
                    .map(|j| AnnotationRecord::new(None, [j % 2]).unwrap())
                    .collect(),
                membership: vec![Membership::OutGroup],
                split,
            })
            .collect();
        Dataset::new(s, instances).unwrap()
    }

    #[test]
    fn repeated_labels_expands_train_annotations() {
        let ds = dataset_with(&[(3, Split::Train)]);
        assert_eq!(repeated_labels(&ds).len(), 3);

        let ds = dataset_with(&[(2, Split::Train), (4, Split::Test), (5, Split::Train)]);
        let pairs = repeated_labels(&ds);
        assert_eq!(pairs.len(), 7);
        assert!(pairs[..2].iter().all(|p| p.id == "i0" && p.index == 0));
        assert!(pairs[2..].iter().all(|p| p.id == "i2" && p.index == 2));

        let ds = dataset_with(&[(2, Split::Dev), (4, Split::Test)]);
        assert!(repeated_labels(&ds).is_empty());
    }

    #[test]
    fn label_matrix_invariants() {
        assert!(LabelMatrix::from_rows(&[vec![0.5, 0.5]], Semantics::Distribution).is_ok());
        assert!(LabelMatrix::from_rows(&[vec![0.5, 0.4]], Semantics::Distribution).is_err());
        assert!(LabelMatrix::from_rows(&[vec![0.5, 0.4]], Semantics::Marginals).is_ok());
        assert!(LabelMatrix::from_rows(&[vec![1.5, 0.4]], Semantics::Marginals).is_err());
        assert!(
            LabelMatrix::from_rows(&[vec![0.5], vec![0.5, 0.5]], Semantics::Marginals).is_err()
        );
    }

    fn counts_strategy() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(0usize..6, 2..6)
            .prop_filter("need an annotation", |c| c.iter().sum::<usize>() > 0)
    }

    proptest! {
        #[test]
        fn soft_rows_are_valid_for_all_temperatures(counts in counts_strategy(), log_tau in -3.0f64..6.0) {
            let tau = 10f64.powf(log_tau);
            let single = schema(TaskKind::SingleLabel, counts.len());
            let row = soft_distribution(&instance(TaskKind::SingleLabel, &counts, 0), &single, tau).unwrap();
            prop_assert!(LabelMatrix::new(1, counts.len(), row, Semantics::Distribution).is_ok());

            let n = *counts.iter().max().unwrap();
            let multi = schema(TaskKind::MultiLabel, counts.len());
            let row = soft_distribution(&instance(TaskKind::MultiLabel, &counts, n), &multi, tau).unwrap();
            prop_assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn soft_labels_ignore_annotation_order(counts in counts_strategy(), tau in 0.01f64..100.0, rot in 0usize..10) {
            let s = schema(TaskKind::SingleLabel, counts.len());
            let inst = instance(TaskKind::SingleLabel, &counts, 0);
            let mut shuffled = inst.clone();
            let len = shuffled.annotations.len();
            shuffled.annotations.rotate_left(rot % len);
            shuffled.annotations.reverse();
            prop_assert_eq!(soft_distribution(&inst, &s, tau).unwrap(), soft_distribution(&shuffled, &s, tau).unwrap());
            prop_assert_eq!(majority_vote(&inst, &s), majority_vote(&shuffled, &s));
        }

        #[test]
        fn temperature_preserves_unique_argmax(counts in counts_strategy(), log_tau in -3.0f64..6.0) {
            let max = *counts.iter().max().unwrap();
            prop_assume!(counts.iter().filter(|&&c| c == max).count() == 1);
            let s = schema(TaskKind::SingleLabel, counts.len());
            let inst = instance(TaskKind::SingleLabel, &counts, 0);
            let row = soft_distribution(&inst, &s, 10f64.powf(log_tau)).unwrap();
            let argmax = (0..row.len()).fold(0, |b, k| if row[k] > row[b] { k } else { b });
            prop_assert_eq!(vec![argmax], majority_vote(&inst, &s));
        }
    }
}
