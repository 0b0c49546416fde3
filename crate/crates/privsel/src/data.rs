//! Dataset types: labeled tabular records and undirected graphs.
//!
//! Tabular data is schema-typed. Numeric attributes are stored already
//! normalized to [0, 1] using publicly declared bounds, categorical
//! attributes as indices into a publicly declared value list, and every
//! record carries a binary label. The schema is public information; only the
//! records themselves are private.
//!
//! Graphs are simple and undirected with a fixed vertex set; privacy is with
//! respect to edges. Degree and open neighborhood edge counts are
//! precomputed at construction so utility evaluation over many candidate
//! vertices stays cheap.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Tabular data
// ---------------------------------------------------------------------------

/// Kind of a tabular attribute.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum AttrKind {
    /// Numeric attribute, normalized into [0, 1] by public bounds.
    Numeric,
    /// Categorical attribute with indices 0..arity.
    Categorical { arity: u32 },
}

/// A named, typed attribute.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
}

/// Public description of a tabular dataset: its attributes and the name of
/// the binary label column.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Schema {
    pub attributes: Vec<Attribute>,
    pub label_name: String,
}

impl Schema {
    pub fn new(attributes: Vec<Attribute>, label_name: impl Into<String>) -> Self {
        Self {
            attributes,
            label_name: label_name.into(),
        }
    }

    /// Number of non-label attributes.
    pub fn arity(&self) -> usize {
        self.attributes.len()
    }
}

/// A single attribute value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttrValue {
    /// Normalized numeric value.
    Num(f64),
    /// Categorical value index.
    Cat(u32),
}

/// One labeled record.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub values: Vec<AttrValue>,
    pub label: bool,
}

impl Record {
    pub fn new(values: Vec<AttrValue>, label: bool) -> Self {
        Self { values, label }
    }

    /// Stable byte encoding used for multiset comparisons. Numeric values are
    /// compared by their exact bit patterns.
    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.label as u8);
        for v in &self.values {
            match v {
                AttrValue::Num(x) => {
                    out.push(0);
                    out.extend_from_slice(&x.to_bits().to_be_bytes());
                }
                AttrValue::Cat(c) => {
                    out.push(1);
                    out.extend_from_slice(&c.to_be_bytes());
                }
            }
        }
    }

    /// Byte key of a single record.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + 9 * self.values.len());
        self.encode(&mut out);
        out
    }
}

/// A multiset of labeled records under a shared schema.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    pub schema: Arc<Schema>,
    pub records: Vec<Record>,
}

impl TabularDataset {
    /// Builds a dataset, checking every record against the schema.
    pub fn new(schema: Arc<Schema>, records: Vec<Record>) -> Result<Self> {
        for (i, rec) in records.iter().enumerate() {
            if rec.values.len() != schema.arity() {
                return Err(Error::InvalidArgument(format!(
                    "record {i} has {} values, schema declares {}",
                    rec.values.len(),
                    schema.arity()
                )));
            }
            for (j, (value, attr)) in rec.values.iter().zip(&schema.attributes).enumerate() {
                match (value, &attr.kind) {
                    (AttrValue::Num(x), AttrKind::Numeric) => {
                        if !x.is_finite() {
                            return Err(Error::InvalidArgument(format!(
                                "record {i} attribute {j} is not finite"
                            )));
                        }
                    }
                    (AttrValue::Cat(c), AttrKind::Categorical { arity }) => {
                        if c >= arity {
                            return Err(Error::InvalidArgument(format!(
                                "record {i} attribute {j} index {c} out of arity {arity}"
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "record {i} attribute {j} does not match its declared kind"
                        )));
                    }
                }
            }
        }
        Ok(Self { schema, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Dataset with record `index` removed.
    pub fn without_record(&self, index: usize) -> TabularDataset {
        let mut records = self.records.clone();
        records.remove(index);
        TabularDataset {
            schema: Arc::clone(&self.schema),
            records,
        }
    }

    /// Dataset with `record` appended.
    pub fn with_record(&self, record: Record) -> TabularDataset {
        let mut records = self.records.clone();
        records.push(record);
        TabularDataset {
            schema: Arc::clone(&self.schema),
            records,
        }
    }

    /// Sorted record keys; equal multisets produce equal key lists.
    pub fn sorted_keys(&self) -> Vec<Vec<u8>> {
        let mut keys: Vec<Vec<u8>> = self.records.iter().map(Record::key).collect();
        keys.sort_unstable();
        keys
    }
}

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

/// Canonical key of an undirected edge between distinct vertices.
fn edge_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

/// A simple undirected graph on vertices 0..n.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<u32>>,
    edges: BTreeSet<u64>,
    open_edge_counts: Vec<u64>,
}

impl Graph {
    /// Builds a graph from an edge list. Self loops are rejected, duplicate
    /// edges are collapsed.
    pub fn new(n: usize, edge_list: &[(u32, u32)]) -> Result<Self> {
        let mut edges = BTreeSet::new();
        for &(a, b) in edge_list {
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self loop at vertex {a}")));
            }
            edges.insert(edge_key(a, b));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &key in &edges {
            let a = (key >> 32) as u32;
            let b = (key & 0xffff_ffff) as u32;
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let open_edge_counts = count_open_neighborhood_edges(n, &adjacency);
        Ok(Self {
            n,
            adjacency,
            edges,
            open_edge_counts,
        })
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    /// Degree of `v`.
    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        a != b && self.edges.contains(&edge_key(a, b))
    }

    /// Number of edges whose both endpoints are neighbors of `v`.
    pub fn open_neighborhood_edges(&self, v: u32) -> u64 {
        self.open_edge_counts[v as usize]
    }

    /// All edges as (low, high) pairs in canonical order.
    pub fn edge_list(&self) -> Vec<(u32, u32)> {
        self.edges
            .iter()
            .map(|&key| ((key >> 32) as u32, (key & 0xffff_ffff) as u32))
            .collect()
    }

    /// Graph with the edge between `a` and `b` added if absent, removed if
    /// present.
    pub fn toggle_edge(&self, a: u32, b: u32) -> Result<Graph> {
        if a == b {
            return Err(Error::InvalidArgument(format!("self loop at vertex {a}")));
        }
        if a as usize >= self.n || b as usize >= self.n {
            return Err(Error::InvalidArgument(format!(
                "edge ({a}, {b}) out of range for {} vertices",
                self.n
            )));
        }
        let mut edge_list = self.edge_list();
        let key = edge_key(a, b);
        if self.edges.contains(&key) {
            edge_list.retain(|&(x, y)| edge_key(x, y) != key);
        } else {
            edge_list.push((a.min(b), a.max(b)));
        }
        Graph::new(self.n, &edge_list)
    }

    /// Size of the symmetric difference of edge sets. Both graphs must share
    /// the same vertex set.
    pub fn edge_distance(&self, other: &Graph) -> Result<u64> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "edge distance between graphs on {} and {} vertices is undefined",
                self.n, other.n
            )));
        }
        let only_here = self.edges.difference(&other.edges).count();
        let only_there = other.edges.difference(&self.edges).count();
        Ok((only_here + only_there) as u64)
    }

    /// Sorted canonical edge keys as bytes, for visited-set deduplication.
    pub fn byte_key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * self.edges.len());
        for key in &self.edges {
            out.extend_from_slice(&key.to_be_bytes());
        }
        out
    }
}

/// For every vertex, the number of edges with both endpoints in its open
/// neighborhood.
fn count_open_neighborhood_edges(n: usize, adjacency: &[Vec<u32>]) -> Vec<u64> {
    let mut counts = vec![0u64; n];
    let mut marked = vec![false; n];
    for v in 0..n {
        for &u in &adjacency[v] {
            marked[u as usize] = true;
        }
        let mut c = 0u64;
        for &u in &adjacency[v] {
            for &w in &adjacency[u as usize] {
                if w > u && marked[w as usize] {
                    c += 1;
                }
            }
        }
        counts[v] = c;
        for &u in &adjacency[v] {
            marked[u as usize] = false;
        }
    }
    counts
}

// ---------------------------------------------------------------------------
// Canonical keys
// ---------------------------------------------------------------------------

/// Datasets that can be reduced to a canonical byte key. Equal keys mean the
/// datasets are indistinguishable to every utility in this crate, which is
/// what the brute force sensitivity search deduplicates on.
pub trait CanonicalKey {
    fn canonical_key(&self) -> Vec<u8>;
}

impl CanonicalKey for TabularDataset {
    fn canonical_key(&self) -> Vec<u8> {
        let keys = self.sorted_keys();
        let mut out = Vec::with_capacity(keys.iter().map(|k| k.len() + 4).sum());
        for k in keys {
            out.extend_from_slice(&(k.len() as u32).to_be_bytes());
            out.extend_from_slice(&k);
        }
        out
    }
}

impl CanonicalKey for Graph {
    fn canonical_key(&self) -> Vec<u8> {
        self.byte_key()
    }
}
