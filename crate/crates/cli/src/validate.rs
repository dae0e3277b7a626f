use std::fmt::Write as _;
use std::path::Path;

use hlvfair::annotations::{
    krippendorff_alpha, load_dataset, load_schema, Dataset, Distance, Membership, Split, TaskKind,
};
use hlvfair::metrics::partition_subsets;
use hlvfair::synth::{generate, write_synth, SynthConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub dataset: Dataset,
    /// Human-readable statistics table.
    pub report: String,
    pub warnings: Vec<String>,
}

/// Loads and checks a dataset, then tabulates instance, annotation and
/// subset-size statistics. A group without any known membership is a
/// warning, not an error.
pub fn cmd_validate(dataset: &Path, schema: &Path) -> Result<Validation, CliError> {
    let schema = load_schema(schema).map_err(|e| CliError::invalid(e.to_string()))?;
    let ds = load_dataset(dataset, &schema).map_err(|e| CliError::invalid(e.to_string()))?;

    let n_annotations: usize = ds.instances().iter().map(|i| i.annotations.len()).sum();
    let mut out = String::new();
    let _ = writeln!(out, "task          {}", schema.task().as_str());
    let _ = writeln!(out, "classes       {}", schema.n_classes());
    let _ = writeln!(out, "instances     {}", ds.len());
    let _ = writeln!(
        out,
        "annotations   {n_annotations} ({:.2} per instance)",
        n_annotations as f64 / ds.len().max(1) as f64
    );
    let _ = writeln!(
        out,
        "splits        train {}, dev {}, test {}",
        ds.split_indices(Split::Train).len(),
        ds.split_indices(Split::Dev).len(),
        ds.split_indices(Split::Test).len()
    );
    let distance = match schema.task() {
        TaskKind::SingleLabel => Distance::Nominal,
        TaskKind::MultiLabel => Distance::Masi,
    };
    let alpha = match krippendorff_alpha(&ds, distance) {
        Ok(Some(a)) => format!("{a:.4}"),
        Ok(None) | Err(_) => "undefined".into(),
    };
    let _ = writeln!(out, "alpha         {alpha} ({distance:?})");
    let _ = writeln!(out);

    let width = schema
        .groups()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(5);
    let _ = writeln!(
        out,
        "{:<width$} {:>7} {:>7} {:>8} {:>8} {:>9}",
        "group", "in", "out", "unknown", "test_in", "test_out"
    );
    let test_subsets = partition_subsets(&ds, Split::Test);
    let mut warnings = Vec::new();
    for (g, name) in schema.groups().iter().enumerate() {
        let count = |m: Membership| {
            ds.instances()
                .iter()
                .filter(|i| i.membership[g] == m)
                .count()
        };
        let (n_in, n_out, n_unknown) = (
            count(Membership::InGroup),
            count(Membership::OutGroup),
            count(Membership::Unknown),
        );
        let sub = &test_subsets[g];
        let _ = writeln!(
            out,
            "{name:<width$} {n_in:>7} {n_out:>7} {n_unknown:>8} {:>8} {:>9}",
            sub.in_rows.len(),
            sub.out_rows.len()
        );
        if n_in + n_out == 0 {
            warnings.push(format!("group {name} has no known memberships"));
        } else if sub.in_rows.is_empty() || sub.out_rows.is_empty() {
            warnings.push(format!(
                "group {name} has an empty test subset; its fairness cells will be flagged"
            ));
        }
    }
    Ok(Validation {
        dataset: ds,
        report: out,
        warnings,
    })
}

/// Generates a synthetic dataset and writes it with its schema and
/// provenance into `out`.
pub fn cmd_synth(cfg: &SynthConfig, out: &Path) -> Result<Dataset, CliError> {
    let ds = generate(cfg)?;
    write_synth(cfg, &ds, out).map_err(|e| CliError::runtime(e.to_string()))?;
    Ok(ds)
}
