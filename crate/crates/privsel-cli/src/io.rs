//! Dataset ingestion: CSV tabular files with a JSON schema sidecar, and
//! whitespace-separated edge lists.
//!
//! The schema sidecar is the only public information used to prepare
//! tabular data: numeric attributes are min-max normalized into [0, 1] with
//! the bounds it declares, never with bounds derived from the data, and
//! categorical values are indexed into its declared domains. Edge lists are
//! read as undirected simple graphs; self loops and duplicate edges are
//! dropped with counts reported, and vertex ids are compacted to 0..n-1
//! with the original ids retained.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use privsel::data::{AttrKind, AttrValue, Attribute, Graph, Record, Schema, TabularDataset};

// ---------------------------------------------------------------------------
// Tabular data
// ---------------------------------------------------------------------------

/// Schema sidecar document: the binary label column and every attribute
/// with its public preparation data.
#[derive(Debug, Clone, Deserialize)]
pub struct SchemaDoc {
    pub label: String,
    pub attributes: Vec<AttributeDoc>,
}

/// One declared attribute column.
#[derive(Debug, Clone, Deserialize)]
pub struct AttributeDoc {
    pub name: String,
    #[serde(flatten)]
    pub kind: AttrKindDoc,
}

/// Attribute kind with its public preparation data: numeric bounds for
/// normalization, or the categorical value domain.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttrKindDoc {
    Numeric { min: f64, max: f64 },
    Categorical { domain: Vec<String> },
}

impl SchemaDoc {
    fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            bail!("schema declares no attributes");
        }
        let mut seen = BTreeSet::new();
        for attr in &self.attributes {
            if attr.name == self.label {
                bail!(
                    "attribute {:?} has the same name as the label column",
                    attr.name
                );
            }
            if !seen.insert(attr.name.as_str()) {
                bail!("attribute {:?} is declared twice", attr.name);
            }
            match &attr.kind {
                AttrKindDoc::Numeric { min, max } => {
                    if !min.is_finite() || !max.is_finite() || min >= max {
                        bail!(
                            "attribute {:?} needs finite bounds with min < max, got [{min}, {max}]",
                            attr.name
                        );
                    }
                }
                AttrKindDoc::Categorical { domain } => {
                    if domain.is_empty() {
                        bail!("attribute {:?} has an empty domain", attr.name);
                    }
                    let unique: BTreeSet<&str> = domain.iter().map(String::as_str).collect();
                    if unique.len() != domain.len() {
                        bail!("attribute {:?} repeats a domain value", attr.name);
                    }
                }
            }
        }
        Ok(())
    }

    /// The core schema this document describes.
    fn core_schema(&self) -> Schema {
        let attributes = self
            .attributes
            .iter()
            .map(|a| Attribute {
                name: a.name.clone(),
                kind: match &a.kind {
                    AttrKindDoc::Numeric { .. } => AttrKind::Numeric,
                    AttrKindDoc::Categorical { domain } => AttrKind::Categorical {
                        arity: domain.len() as u32,
                    },
                },
            })
            .collect();
        Schema::new(attributes, self.label.clone())
    }
}

/// Reads a schema sidecar document.
pub fn load_schema(path: &Path) -> Result<SchemaDoc> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading schema {}", path.display()))?;
    let doc: SchemaDoc = serde_json::from_str(&text)
        .with_context(|| format!("parsing schema {}", path.display()))?;
    doc.validate()
        .with_context(|| format!("invalid schema {}", path.display()))?;
    Ok(doc)
}

fn parse_label_value(s: &str) -> Option<bool> {
    match s {
        "1" => Some(true),
        "0" => Some(false),
        _ if s.eq_ignore_ascii_case("true") => Some(true),
        _ if s.eq_ignore_ascii_case("false") => Some(false),
        _ => None,
    }
}

/// Loads a comma-separated file with a header row against a schema sidecar.
///
/// Numeric values must lie within the schema's public bounds and are
/// normalized to [0, 1]; categorical values must appear in the declared
/// domain; the label column must hold 0/1 or true/false. Any violation is
/// an error naming the offending data row (1-based, header excluded).
pub fn load_tabular(path: &Path, schema_path: &Path) -> Result<TabularDataset> {
    let doc = load_schema(schema_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;

    let headers = reader
        .headers()
        .with_context(|| format!("reading the header row of {}", path.display()))?
        .clone();
    let column_of = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).with_context(|| {
            format!("column {:?} is missing from {}", name, path.display())
        })
    };
    let label_column = column_of(&doc.label)?;
    let mut attr_columns = Vec::with_capacity(doc.attributes.len());
    for attr in &doc.attributes {
        attr_columns.push(column_of(&attr.name)?);
    }

    let mut records = Vec::new();
    for (index, row) in reader.records().enumerate() {
        let number = index + 1;
        let row = row.with_context(|| format!("row {number}: malformed csv"))?;
        let field = |column: usize, name: &str| -> Result<&str> {
            row.get(column)
             .with_context(|| format!("row {number}: missing value for column {name:?}"))
        };

        let mut values = Vec::with_capacity(doc.attributes.len());
        for (attr, &column) in doc.attributes.iter().zip(&attr_columns) {
            let raw = field(column, &attr.name)?;
            let value = match &attr.kind {
                AttrKindDoc::Numeric { min, max } => {
                    let v: f64 = raw.parse().with_context(|| {
                        format!(
                            "row {number}: attribute {:?}: {raw:?} is not a number",
                            attr.name
                        )
                    })?;
                    if !v.is_finite() || v < *min || v > *max {
                        bail!(
                            "row {number}: attribute {:?}: value {v} outside public bounds [{min}, {max}]",
                            attr.name
                        );
                    }
                    AttrValue::Num((v - min) / (max - min))
                }
                AttrKindDoc::Categorical { domain } => {
                    let position = domain.iter().position(|d| d == raw).with_context(|| {
                        format!(
                            "row {number}: attribute {:?}: value {raw:?} outside the declared domain",
                            attr.name
                        )
                    })?;
                    AttrValue::Cat(position as u32)
                }
            };
            values.push(value);
        }

        let raw_label = field(label_column, &doc.label)?;
        let label = parse_label_value(raw_label).with_context(|| {
            format!(
                "row {number}: label {:?}: expected 0, 1, true or false, got {raw_label:?}",
                doc.label
            )
        })?;
        records.push(Record::new(values, label));
    }

    TabularDataset::new(Arc::new(doc.core_schema()), records)
        .with_context(|| format!("validating {}", path.display()))
}

// ---------------------------------------------------------------------------
// Edge lists
// ---------------------------------------------------------------------------

/// An ingested graph with its id compaction map and ingestion statistics.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// Original id of each compact vertex, ascending; compact id `v` stands
    /// for `original_ids[v]`.
    pub original_ids: Vec<u64>,
    pub self_loops_dropped: u64,
    pub duplicates_dropped: u64,
}

/// Loads a whitespace-separated edge list as an undirected simple graph.
///
/// Each non-comment line holds two nonnegative integer vertex ids. Lines
/// starting with `#` and blank lines are ignored. Self loops and duplicate
/// edges are dropped and counted; vertex ids are compacted to 0..n-1 in
/// ascending id order.
pub fn load_edge_list(path: &Path) -> Result<LoadedGraph> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;

    let mut ids = BTreeSet::new();
    let mut pairs = Vec::new();
    let mut self_loops_dropped = 0u64;
    for (index, line) in text.lines().enumerate() {
        let number = index + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => bail!("line {number}: expected two vertex ids, got {line:?}"),
        };
        let parse = |token: &str| -> Result<u64> {
            token.parse().with_context(|| {
                format!("line {number}: {token:?} is not a nonnegative integer vertex id")
            })
        };
        let a = parse(a)?;
        let b = parse(b)?;
        ids.insert(a);
        ids.insert(b);
        if a == b {
            self_loops_dropped += 1;
        } else {
            pairs.push((a, b));
        }
    }

    let original_ids: Vec<u64> = ids.into_iter().collect();
    if original_ids.len() > u32::MAX as usize {
        bail!("edge list has more than {} distinct vertex ids", u32::MAX);
    }
    let compact = |id: u64| -> u32 {
        original_ids
            .binary_search(&id)
            .expect("endpoint id was collected above") as u32
    };

    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    let mut duplicates_dropped = 0u64;
    for (a, b) in pairs {
        let (a, b) = (compact(a), compact(b));
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push(key);
        } else {
            duplicates_dropped += 1;
        }
    }

    let graph = Graph::new(original_ids.len(), &edges)
        .with_context(|| format!("building the graph from {}", path.display()))?;
    Ok(LoadedGraph {
        graph,
        original_ids,
        self_loops_dropped,
        duplicates_dropped,
    })
}
