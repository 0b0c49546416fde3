//! Neighboring dataset relations.
//!
//! Differential privacy is always stated relative to a neighbor relation on
//! datasets. The two relations used here are:
//!
//! * [`RecordAddRemove`]: tabular datasets are neighbors when one is the
//!   other plus a single record. Additions are drawn from a declared record
//!   universe, which keeps exhaustive searches finite.
//! * [`EdgeToggle`]: graphs on the same vertex set are neighbors when they
//!   differ in exactly one edge.
//!
//! Both relations expose full neighbor enumeration and an exact distance, so
//! brute force sensitivity searches and admissibility checks can walk the
//! dataset space directly.

use std::collections::BTreeSet;

use crate::data::{Graph, Record, TabularDataset};

/// A neighbor relation on datasets of type `X`.
pub trait NeighborRelation<X>: Sync {
    /// Every dataset at distance exactly 1 from `x`, in a deterministic
    /// order. Datasets that are equal as multisets appear once.
    fn neighbors(&self, x: &X) -> Vec<X>;

    /// Exact distance between two datasets in this relation's metric.
    fn distance(&self, x: &X, y: &X) -> u64;
}

// ---------------------------------------------------------------------------
// Tabular: add or remove one record
// ---------------------------------------------------------------------------

/// Unbounded neighbor relation on tabular datasets: one record added from
/// the universe, or one record removed.
#[derive(Debug, Clone)]
pub struct RecordAddRemove {
    universe: Vec<Record>,
}

impl RecordAddRemove {
    /// Creates the relation from a record universe. Duplicate universe
    /// entries are collapsed.
    pub fn new(universe: Vec<Record>) -> Self {
        let mut seen = BTreeSet::new();
        let mut distinct = Vec::new();
        for rec in universe {
            if seen.insert(rec.key()) {
                distinct.push(rec);
            }
        }
        Self { universe: distinct }
    }

    /// Universe consisting of the distinct records of `x` itself. Useful when
    /// no wider universe is declared.
    pub fn from_dataset(x: &TabularDataset) -> Self {
        Self::new(x.records.clone())
    }

    /// The distinct records additions are drawn from.
    pub fn universe(&self) -> &[Record] {
        &self.universe
    }
}

impl NeighborRelation<TabularDataset> for RecordAddRemove {
    fn neighbors(&self, x: &TabularDataset) -> Vec<TabularDataset> {
        let mut out = Vec::new();
        // Removals: removing either of two identical records yields the same
        // multiset, so deduplicate on the removed record.
        let mut removed = BTreeSet::new();
        for i in 0..x.records.len() {
            if removed.insert(x.records[i].key()) {
                out.push(x.without_record(i));
            }
        }
        for rec in &self.universe {
            out.push(x.with_record(rec.clone()));
        }
        out
    }

    fn distance(&self, x: &TabularDataset, y: &TabularDataset) -> u64 {
        multiset_symmetric_difference(&x.sorted_keys(), &y.sorted_keys())
    }
}

/// Size of the symmetric difference of two multisets given as sorted key
/// lists.
fn multiset_symmetric_difference(a: &[Vec<u8>], b: &[Vec<u8>]) -> u64 {
    let mut i = 0;
    let mut j = 0;
    let mut diff = 0u64;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                diff += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                diff += 1;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    diff + (a.len() - i) as u64 + (b.len() - j) as u64
}

// ---------------------------------------------------------------------------
// Graphs: toggle one edge
// ---------------------------------------------------------------------------

/// Edge level neighbor relation on graphs: flip the presence of one vertex
/// pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeToggle;

impl NeighborRelation<Graph> for EdgeToggle {
    fn neighbors(&self, g: &Graph) -> Vec<Graph> {
        let n = g.vertex_count() as u32;
        let mut out = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                out.push(g.toggle_edge(a, b).expect("in-range pair"));
            }
        }
        out
    }

    fn distance(&self, x: &Graph, y: &Graph) -> u64 {
        x.edge_distance(y)
            .expect("edge distance requires a shared vertex set")
    }
}
