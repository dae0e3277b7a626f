//! Krippendorff's alpha over annotation label sets.

use std::collections::HashMap;

use super::{Dataset, TaskKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    /// 0 for identical labels, 1 otherwise. Single-label tasks only.
    Nominal,
    /// Set-overlap distance of Passonneau (2006). Multi-label tasks only.
    Masi,
}

impl Distance {
    fn name(self) -> &'static str {
        match self {
            Distance::Nominal => "nominal",
            Distance::Masi => "masi",
        }
    }
}

/// `1 - J * M` where `J` is the Jaccard index and `M` is 1 for equal sets,
/// 2/3 when one set contains the other, 1/3 for other overlapping sets and 0
/// for disjoint sets. Inputs must be sorted and deduplicated.
pub fn masi_distance(a: &[usize], b: &[usize]) -> f64 {
    if a == b {
        return 0.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    if inter == 0 {
        return 1.0;
    }
    let union = a.len() + b.len() - inter;
    let jaccard = inter as f64 / union as f64;
    let monotonicity = if inter == a.len() || inter == b.len() {
        2.0 / 3.0
    } else {
        1.0 / 3.0
    };
    1.0 - jaccard * monotonicity
}

/// `alpha = 1 - D_o / D_e` over all instances with at least two annotations.
///
/// Returns `Ok(None)` when the expected disagreement is zero (a single label
/// value is used throughout), where alpha is undefined. Annotator ids are
/// not used.
pub fn krippendorff_alpha(dataset: &Dataset, distance: Distance) -> Result<Option<f64>> {
    let task = dataset.schema().task();
    match (distance, task) {
        (Distance::Nominal, TaskKind::SingleLabel) | (Distance::Masi, TaskKind::MultiLabel) => {}
        _ => {
            return Err(Error::DistanceMismatch {
                distance: distance.name(),
                task: task.as_str(),
            })
        }
    }

    // Map label sets to value ids; units hold the value ids of their annotations.
    let mut ids: HashMap<&[usize], usize> = HashMap::new();
    let mut values: Vec<&[usize]> = Vec::new();
    let mut units: Vec<Vec<usize>> = Vec::new();
    for inst in dataset.instances() {
        if inst.annotations.len() < 2 {
            continue;
        }
        let unit = inst
            .annotations
            .iter()
            .map(|a| {
                *ids.entry(a.labels()).or_insert_with(|| {
                    values.push(a.labels());
                    values.len() - 1
                })
            })
            .collect();
        units.push(unit);
    }
    if units.len() < 2 {
        return Err(Error::InsufficientData(
            "krippendorff's alpha needs at least two instances with two or more annotations".into(),
        ));
    }

    let d = values.len();
    let delta: Vec<f64> = (0..d * d)
        .map(|idx| {
            let (a, b) = (idx / d, idx % d);
            match distance {
                Distance::Nominal => f64::from(u8::from(a != b)),
                Distance::Masi => masi_distance(values[a], values[b]),
            }
        })
        .collect();

    let mut totals = vec![0.0f64; d];
    let mut n = 0.0;
    let mut observed = 0.0;
    for unit in &units {
        let m = unit.len() as f64;
        let mut within = 0.0;
        for (i, &a) in unit.iter().enumerate() {
            totals[a] += 1.0;
            for (j, &b) in unit.iter().enumerate() {
                if i != j {
                    within += delta[a * d + b];
                }
            }
        }
        observed += within / (m - 1.0);
        n += m;
    }
    let observed = observed / n;

    let mut expected = 0.0;
    for a in 0..d {
        for b in 0..d {
            expected += totals[a] * totals[b] * delta[a * d + b];
        }
    }
    let expected = expected / (n * (n - 1.0));

    if expected == 0.0 {
        return Ok(None);
    }
    Ok(Some(1.0 - observed / expected))
}
