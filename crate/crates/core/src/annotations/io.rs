//! JSONL dataset format.
//!
//! ```text
//! {"id": str, "text": str,
//!  "annotations": [{"annotator": str?, "labels": [str, ...]}, ...],
//!  "groups": {group_id: "in" | "out" | "unknown", ...},
//!  "split": "train" | "dev" | "test"}
//! ```
//!
//! Missing `groups` entries default to `out`, a missing `split` to `train`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use super::{AnnotationRecord, Dataset, Instance, Membership, Split, TaskSchema};
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    id: String,
    #[serde(default)]
    text: String,
    annotations: Vec<RawAnnotation>,
    #[serde(default)]
    groups: BTreeMap<String, Membership>,
    #[serde(default)]
    split: Split,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotator: Option<String>,
    labels: Vec<String>,
}

#[derive(Serialize)]
struct OutInstance<'a> {
    id: &'a str,
    text: &'a str,
    annotations: Vec<RawAnnotation>,
    groups: GroupMap<'a>,
    split: Split,
}

/// Memberships serialised in schema order.
struct GroupMap<'a> {
    groups: &'a [String],
    membership: &'a [Membership],
}

impl Serialize for GroupMap<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.groups.len()))?;
        for (g, m) in self.groups.iter().zip(self.membership) {
            map.serialize_entry(g, m)?;
        }
        map.end()
    }
}

pub fn load_schema(path: impl AsRef<Path>) -> Result<TaskSchema> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn load_dataset(path: impl AsRef<Path>, schema: &TaskSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), schema).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses JSONL from any reader. Blank lines are skipped but still counted
/// for line numbers in diagnostics.
pub fn read_dataset(reader: impl BufRead, schema: &TaskSchema) -> Result<Dataset> {
    let mut instances = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawInstance = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId {
                line: line_no,
                id: raw.id,
            });
        }
        instances.push(convert(raw, schema, line_no)?);
    }
    Dataset::new(schema.clone(), instances)
}

fn convert(raw: RawInstance, schema: &TaskSchema, line: usize) -> Result<Instance> {
    if raw.annotations.is_empty() {
        return Err(Error::EmptyAnnotations { line });
    }
    let mut annotations = Vec::with_capacity(raw.annotations.len());
    for ann in raw.annotations {
        let labels = ann
            .labels
            .iter()
            .map(|name| {
                schema.class_index(name).ok_or_else(|| Error::UnknownClass {
                    line,
                    name: name.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let record = AnnotationRecord::new(ann.annotator, labels)
            .map_err(|e| Error::InvalidAnnotation(format!("line {line}: {e}")))?;
        if schema.task() == super::TaskKind::SingleLabel && record.labels().len() != 1 {
            return Err(Error::InvalidAnnotation(format!(
                "line {line}: single-label annotation with {} labels",
                record.labels().len()
            )));
        }
        annotations.push(record);
    }
    let mut membership = vec![Membership::OutGroup; schema.n_groups()];
    for (name, m) in raw.groups {
        let g = schema
            .group_index(&name)
            .ok_or(Error::UnknownGroup { line, name })?;
        membership[g] = m;
    }
    Ok(Instance {
        id: raw.id,
        text: raw.text,
        annotations,
        membership,
        split: raw.split,
    })
}

/// Writes one JSON object per line. Every group is written explicitly, in
/// schema order, so load/write round trips are byte-identical.
pub fn write_jsonl(dataset: &Dataset, mut writer: impl Write) -> Result<()> {
    let schema = dataset.schema();
    for inst in dataset.instances() {
        let out = OutInstance {
            id: &inst.id,
            text: &inst.text,
            annotations: inst
                .annotations
                .iter()
                .map(|a| RawAnnotation {
                    annotator: a.annotator.clone(),
                    labels: a
                        .labels()
                        .iter()
                        .map(|&k| schema.classes()[k].clone())
                        .collect(),
                })
                .collect(),
            groups: GroupMap {
                groups: schema.groups(),
                membership: &inst.membership,
            },
            split: inst.split,
        };
        serde_json::to_writer(&mut writer, &out)?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    write_jsonl(dataset, &mut writer)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::TaskKind;

    fn schema() -> TaskSchema {
        TaskSchema::new(
            TaskKind::SingleLabel,
            vec!["off".into(), "not".into(), "maybe".into()],
            vec!["race".into()],
        )
        .unwrap()
    }

    fn parse(text: &str) -> Result<Dataset> {
        read_dataset(text.as_bytes(), &schema())
    }

    #[test]
    fn maps_fields() {
        let ds = parse(r#"{"id":"a","text":"x","annotations":[{"labels":["off"]}],"groups":{"race":"in"},"split":"test"}"#)
            .unwrap();
        let inst = &ds.instances()[0];
        assert_eq!(inst.id, "a");
        assert_eq!(inst.text, "x");
        assert_eq!(inst.annotations[0].labels(), &[0]);
        assert_eq!(inst.membership, vec![Membership::InGroup]);
        assert_eq!(inst.split, Split::Test);
    }

    #[test]
    fn defaults_membership_and_split() {
        let ds = parse(r#"{"id":"a","text":"x","annotations":[{"labels":["not"]}],"groups":{}}"#)
            .unwrap();
        assert_eq!(ds.instances()[0].membership, vec![Membership::OutGroup]);
        assert_eq!(ds.instances()[0].split, Split::Train);
    }

    #[test]
    fn reports_errors_with_line_numbers() {
        let err = parse("{\"id\":\"a\",\"annotations\":[{\"labels\":[\"off\"]}]}\n{not json")
            .unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }), "{err}");

        let err = parse(r#"{"id":"a","text":"x","annotations":[]}"#).unwrap_err();
        assert!(matches!(err, Error::EmptyAnnotations { line: 1 }));
        assert_eq!(err.to_string(), "line 1: empty annotation list");

        let err = parse(r#"{"id":"a","annotations":[{"labels":["nope"]}]}"#).unwrap_err();
        assert!(matches!(err, Error::UnknownClass { line: 1, .. }));

        let err = parse(r#"{"id":"a","annotations":[{"labels":["off"]}],"groups":{"age":"in"}}"#)
            .unwrap_err();
        assert!(matches!(err, Error::UnknownGroup { line: 1, .. }));

        let err = parse(r#"{"id":"a","annotations":[{"labels":["off","not"]}]}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidAnnotation(_)));

        let two = "{\"id\":\"a\",\"annotations\":[{\"labels\":[\"off\"]}]}\n\n{\"id\":\"a\",\"annotations\":[{\"labels\":[\"off\"]}]}";
        let err = parse(two).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { line: 3, ref id } if id == "a"));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = concat!(
            r#"{"id":"a","text":"héllo","annotations":[{"annotator":"x","labels":["off"]},{"labels":["maybe"]}],"groups":{"race":"unknown"},"split":"dev"}"#,
            "\n",
            r#"{"id":"b","text":"","annotations":[{"labels":["not"]}],"groups":{"race":"out"},"split":"train"}"#,
            "\n"
        );
        let ds = parse(text).unwrap();
        let mut out = Vec::new();
        write_jsonl(&ds, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn schema_file_parses() {
        let s: TaskSchema =
            serde_json::from_str(r#"{"task":"multi_label","classes":["a","b"],"groups":["g"]}"#)
                .unwrap();
        assert_eq!(s.task(), TaskKind::MultiLabel);
        assert!(serde_json::from_str::<TaskSchema>(
            r#"{"task":"multi_label","classes":["a"],"groups":["g"]}"#
        )
        .is_err());
    }
}
