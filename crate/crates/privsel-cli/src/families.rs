//! Exhaustive instance families for admissibility checks and privacy
//! audits: every small dataset from a fixed record universe, and every
//! labeled graph up to a vertex count.

use std::sync::Arc;

use anyhow::{ensure, Result};

use privsel::data::{AttrKind, AttrValue, Attribute, Graph, Record, Schema, TabularDataset};
use privsel::tree::{DecisionTree, Node, SplitTest};

/// Every dataset of at most `max_records` records drawn without repetition
/// from a fixed universe, together with a small candidate pool of decision
/// trees over the shared single-attribute schema.
pub struct TabularFamily {
    pub schema: Arc<Schema>,
    pub universe: Vec<Record>,
    pub datasets: Vec<TabularDataset>,
    pub trees: Vec<DecisionTree>,
}

/// Builds the tabular family. The universe holds `universe_size` records
/// with evenly spread values of one numeric attribute and alternating
/// labels; datasets are all sub-multisets of size at most `max_records`.
pub fn tabular_family(universe_size: usize, max_records: usize) -> Result<TabularFamily> {
    ensure!(universe_size >= 1, "universe must hold at least one record");
    ensure!(
        universe_size <= 20,
        "universe of {universe_size} records would enumerate too many subsets"
    );
    let schema = Arc::new(Schema::new(
        vec![Attribute {
            name: "value".into(),
            kind: AttrKind::Numeric,
        }],
        "label",
    ));
    let universe: Vec<Record> = (0..universe_size)
        .map(|i| {
            let value = (i as f64 + 0.5) / universe_size as f64;
            Record::new(vec![AttrValue::Num(value)], i % 2 == 0)
        })
        .collect();

    let mut datasets = Vec::new();
    for mask in 0u32..(1 << universe_size) {
        if mask.count_ones() as usize > max_records {
            continue;
        }
        let records: Vec<Record> = (0..universe_size)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| universe[i].clone())
            .collect();
        datasets.push(TabularDataset::new(Arc::clone(&schema), records)?);
    }

    let trees = vec![
        stump(0.25),
        stump(0.5),
        stump(0.75),
        DecisionTree {
            root: Node::Split {
                attribute: 0,
                test: SplitTest::Threshold(0.5),
                left: Box::new(Node::Split {
                    attribute: 0,
                    test: SplitTest::Threshold(0.25),
                    left: Box::new(Node::Leaf { label: true }),
                    right: Box::new(Node::Leaf { label: false }),
                }),
                right: Box::new(Node::Leaf { label: true }),
            },
        },
    ];

    Ok(TabularFamily {
        schema,
        universe,
        datasets,
        trees,
    })
}

/// A depth-1 tree on the single numeric attribute: predicts false below the
/// threshold and true at or above it.
pub fn stump(threshold: f64) -> DecisionTree {
    DecisionTree {
        root: Node::Split {
            attribute: 0,
            test: SplitTest::Threshold(threshold),
            left: Box::new(Node::Leaf { label: false }),
            right: Box::new(Node::Leaf { label: true }),
        },
    }
}

/// Every labeled graph on 1..=`max_vertices` vertices, grouped by vertex
/// count. `by_size[n]` holds the `2^(n choose 2)` graphs on `n` vertices.
pub struct GraphFamily {
    pub by_size: Vec<Vec<Graph>>,
}

impl GraphFamily {
    pub fn graph_count(&self) -> usize {
        self.by_size.iter().map(Vec::len).sum()
    }

    /// Total number of (graph, vertex) instances.
    pub fn instance_count(&self) -> usize {
        self.by_size
            .iter()
            .enumerate()
            .map(|(n, graphs)| n * graphs.len())
            .sum()
    }
}

/// Enumerates every labeled graph on up to `max_vertices` vertices.
pub fn graph_family(max_vertices: usize) -> Result<GraphFamily> {
    ensure!(max_vertices >= 1, "need at least one vertex");
    ensure!(
        max_vertices <= 7,
        "all graphs on {max_vertices} vertices would enumerate too many instances"
    );
    let mut by_size = vec![Vec::new()];
    for n in 1..=max_vertices {
        let pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|a| (a + 1..n as u32).map(move |b| (a, b)))
            .collect();
        let mut graphs = Vec::with_capacity(1 << pairs.len());
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(u32, u32)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            graphs.push(Graph::new(n, &edges)?);
        }
        by_size.push(graphs);
    }
    Ok(GraphFamily { by_size })
}
