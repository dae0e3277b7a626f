//! Soft performance metrics and the class × group fairness matrix.
//!
//! Row indices passed to the metrics refer to rows of the label matrices and
//! may repeat, which is how bootstrap resamples are evaluated.

use serde::{Deserialize, Serialize};

use crate::annotations::{Dataset, LabelMatrix, Membership, Split};
use crate::{Error, Result};

fn check_pair(p: &LabelMatrix, q: &LabelMatrix, rows: &[usize]) -> Result<()> {
    if !p.same_shape(q) {
        return Err(Error::ShapeMismatch(format!(
            "P is {}x{} ({:?}), Q is {}x{} ({:?})",
            p.rows(),
            p.cols(),
            p.semantics(),
            q.rows(),
            q.cols(),
            q.semantics()
        )));
    }
    if rows.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&r) = rows.iter().find(|&&r| r >= p.rows()) {
        return Err(Error::ShapeMismatch(format!(
            "row {r} out of range for {} rows",
            p.rows()
        )));
    }
    Ok(())
}

fn overlap_ratio(overlap: f64, total: f64) -> f64 {
    if total > 0.0 {
        (2.0 * overlap / total).min(1.0)
    } else {
        0.0
    }
}

/// Soft F1 of one class: `2 Σ min(P_ik, Q_ik) / Σ (P_ik + Q_ik)` over `rows`,
/// or 0 when neither matrix has mass on the class.
pub fn soft_f1_class(
    p: &LabelMatrix,
    q: &LabelMatrix,
    class: usize,
    rows: &[usize],
) -> Result<f64> {
    check_pair(p, q, rows)?;
    if class >= p.cols() {
        return Err(Error::ShapeMismatch(format!(
            "class {class} out of range for {} classes",
            p.cols()
        )));
    }
    let (mut overlap, mut total) = (0.0, 0.0);
    for &i in rows {
        let (a, b) = (p.get(i, class), q.get(i, class));
        overlap += a.min(b);
        total += a + b;
    }
    Ok(overlap_ratio(overlap, total))
}

/// Soft micro F1: the soft F1 ratio pooled over instances and classes.
pub fn soft_micro_f1(p: &LabelMatrix, q: &LabelMatrix, rows: &[usize]) -> Result<f64> {
    check_pair(p, q, rows)?;
    let (mut overlap, mut total) = (0.0, 0.0);
    for &i in rows {
        for (a, b) in p.row(i).iter().zip(q.row(i)) {
            overlap += a.min(*b);
            total += a + b;
        }
    }
    Ok(overlap_ratio(overlap, total))
}

/// In- and out-of-group rows of one group within a split. Rows index the
/// split's instances in dataset order; unknown memberships are in neither.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetPair {
    pub group: usize,
    pub in_rows: Vec<usize>,
    pub out_rows: Vec<usize>,
    pub unknown: usize,
}

pub fn partition_subsets(dataset: &Dataset, split: Split) -> Vec<SubsetPair> {
    let members: Vec<&[Membership]> = dataset
        .split_instances(split)
        .map(|i| i.membership.as_slice())
        .collect();
    (0..dataset.schema().n_groups())
        .map(|g| {
            let mut pair = SubsetPair {
                group: g,
                in_rows: Vec::new(),
                out_rows: Vec::new(),
                unknown: 0,
            };
            for (row, m) in members.iter().enumerate() {
                match m[g] {
                    Membership::InGroup => pair.in_rows.push(row),
                    Membership::OutGroup => pair.out_rows.push(row),
                    Membership::Unknown => pair.unknown += 1,
                }
            }
            pair
        })
        .collect()
}

/// Ratio of the worse to the better subset performance, 1 when both are 0.
pub fn fairness_score(f0: f64, f1: f64) -> Result<f64> {
    for f in [f0, f1] {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::OutOfRange(format!(
                "subset performance {f} outside [0, 1]"
            )));
        }
    }
    Ok(if f0 == 0.0 && f1 == 0.0 {
        1.0
    } else {
        f0.min(f1) / f0.max(f1)
    })
}

/// Fairness scores with the subset performances they came from. Matrices are
/// class-major (`s[k][g]`). `flags[k][g]` marks cells where a subset was
/// empty and its performance was recorded as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessMatrix {
    pub s: Vec<Vec<f64>>,
    pub f_in: Vec<Vec<f64>>,
    pub f_out: Vec<Vec<f64>>,
    pub flags: Vec<Vec<bool>>,
}

impl FairnessMatrix {
    pub fn n_classes(&self) -> usize {
        self.s.len()
    }

    pub fn n_groups(&self) -> usize {
        self.s.first().map_or(0, Vec::len)
    }

    /// `(class, group)` cells with an empty subset.
    pub fn flagged_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for (k, row) in self.flags.iter().enumerate() {
            for (g, &flag) in row.iter().enumerate() {
                if flag {
                    cells.push((k, g));
                }
            }
        }
        cells
    }
}

/// Fairness matrix of one split.
pub fn fairness_matrix(
    p: &LabelMatrix,
    q: &LabelMatrix,
    dataset: &Dataset,
    split: Split,
) -> Result<FairnessMatrix> {
    let memberships = dataset
        .split_instances(split)
        .map(|i| i.membership.clone())
        .collect();
    let evaluator = FairnessEvaluator::new(p, q, memberships)?;
    let all: Vec<usize> = (0..p.rows()).collect();
    Ok(evaluator.evaluate(&all))
}

/// Precomputed per-row overlaps so fairness matrices of many row multisets
/// (bootstrap resamples) can be evaluated in O(rows × K × G).
#[derive(Debug, Clone)]
pub struct FairnessEvaluator {
    n_classes: usize,
    n_groups: usize,
    /// `min(P_ik, Q_ik)` row-major.
    overlap: Vec<f64>,
    /// `P_ik + Q_ik` row-major.
    total: Vec<f64>,
    memberships: Vec<Vec<Membership>>,
}

impl FairnessEvaluator {
    pub fn new(
        p: &LabelMatrix,
        q: &LabelMatrix,
        memberships: Vec<Vec<Membership>>,
    ) -> Result<Self> {
        if !p.same_shape(q) {
            return Err(Error::ShapeMismatch(
                "P and Q differ in shape or semantics".into(),
            ));
        }
        if memberships.len() != p.rows() {
            return Err(Error::ShapeMismatch(format!(
                "{} membership rows for {} prediction rows",
                memberships.len(),
                p.rows()
            )));
        }
        let n_groups = memberships.first().map_or(0, Vec::len);
        if memberships.iter().any(|m| m.len() != n_groups) {
            return Err(Error::ShapeMismatch("ragged membership rows".into()));
        }
        let overlap = p
            .values()
            .iter()
            .zip(q.values())
            .map(|(a, b)| a.min(*b))
            .collect();
        let total = p
            .values()
            .iter()
            .zip(q.values())
            .map(|(a, b)| a + b)
            .collect();
        Ok(FairnessEvaluator {
            n_classes: p.cols(),
            n_groups,
            overlap,
            total,
            memberships,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.memberships.len()
    }

    fn accumulate(&self, rows: &[usize], acc: &mut Accumulators) {
        let (k, g) = (self.n_classes, self.n_groups);
        acc.reset(g * k, g);
        for &r in rows {
            let ov = &self.overlap[r * k..(r + 1) * k];
            let tot = &self.total[r * k..(r + 1) * k];
            for (grp, m) in self.memberships[r].iter().enumerate() {
                let (acc_ov, acc_tot) = match m {
                    Membership::InGroup => {
                        acc.in_count[grp] += 1;
                        (&mut acc.in_overlap, &mut acc.in_total)
                    }
                    Membership::OutGroup => {
                        acc.out_count[grp] += 1;
                        (&mut acc.out_overlap, &mut acc.out_total)
                    }
                    Membership::Unknown => continue,
                };
                let base = grp * k;
                for c in 0..k {
                    acc_ov[base + c] += ov[c];
                    acc_tot[base + c] += tot[c];
                }
            }
        }
    }

    pub fn evaluate(&self, rows: &[usize]) -> FairnessMatrix {
        let (k, g) = (self.n_classes, self.n_groups);
        let mut acc = Accumulators::default();
        self.accumulate(rows, &mut acc);
        let mut fm = FairnessMatrix {
            s: vec![vec![0.0; g]; k],
            f_in: vec![vec![0.0; g]; k],
            f_out: vec![vec![0.0; g]; k],
            flags: vec![vec![false; g]; k],
        };
        for grp in 0..g {
            for c in 0..k {
                let idx = grp * k + c;
                let f1 = overlap_ratio(acc.in_overlap[idx], acc.in_total[idx]);
                let f0 = overlap_ratio(acc.out_overlap[idx], acc.out_total[idx]);
                fm.f_in[c][grp] = f1;
                fm.f_out[c][grp] = f0;
                fm.flags[c][grp] = acc.in_count[grp] == 0 || acc.out_count[grp] == 0;
                fm.s[c][grp] = fairness_score(f0, f1).expect("soft F1 lies in [0, 1]");
            }
        }
        fm
    }

    /// Fairness scores only, class-major `K x G`, written into `scratch.scores`.
    /// Matches `evaluate(rows).s` exactly.
    pub(crate) fn scores_into(&self, rows: &[usize], scratch: &mut EvalScratch) {
        let (k, g) = (self.n_classes, self.n_groups);
        self.accumulate(rows, &mut scratch.acc);
        let acc = &scratch.acc;
        scratch.scores.clear();
        scratch.scores.resize(k * g, 0.0);
        for grp in 0..g {
            for c in 0..k {
                let idx = grp * k + c;
                let f1 = overlap_ratio(acc.in_overlap[idx], acc.in_total[idx]);
                let f0 = overlap_ratio(acc.out_overlap[idx], acc.out_total[idx]);
                scratch.scores[c * g + grp] =
                    fairness_score(f0, f1).expect("soft F1 lies in [0, 1]");
            }
        }
    }
}

/// Per-subset sums laid out `[group][class]`.
#[derive(Debug, Default)]
struct Accumulators {
    in_overlap: Vec<f64>,
    in_total: Vec<f64>,
    out_overlap: Vec<f64>,
    out_total: Vec<f64>,
    in_count: Vec<usize>,
    out_count: Vec<usize>,
}

impl Accumulators {
    fn reset(&mut self, cells: usize, groups: usize) {
        for v in [
            &mut self.in_overlap,
            &mut self.in_total,
            &mut self.out_overlap,
            &mut self.out_total,
        ] {
            v.clear();
            v.resize(cells, 0.0);
        }
        for v in [&mut self.in_count, &mut self.out_count] {
            v.clear();
            v.resize(groups, 0);
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct EvalScratch {
    acc: Accumulators,
    pub(crate) scores: Vec<f64>,
    pub(crate) per_class: Vec<f64>,
}
