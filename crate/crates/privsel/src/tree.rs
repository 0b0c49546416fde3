//! Binary decision trees over tabular records, their confusion-rate
//! objectives, and a differentially private evolutionary trainer.
//!
//! A tree routes each record through attribute tests to a leaf and predicts
//! the leaf's label. The two objectives are the true positive rate
//! `TPR = TP / P` and the true negative rate `TNR = TN / N`, both defined as
//! 0 when their denominator is 0.
//!
//! Training keeps a population of trees. Each generation selects `s` trees
//! with a differentially private mechanism, then refills the population with
//! crossover, mutation and pruning. After `k` generations a final `o` trees
//! are selected the same way. The total budget is split evenly across the
//! `k * s + o` selection calls.
//!
//! Depth is counted in nodes along a root-to-leaf path, so a single leaf has
//! depth 1. [`random_tree`] instead takes the number of tests on a path (a
//! depth-0 call yields a single leaf), matching how initial populations are
//! usually sized.

use serde::{Deserialize, Serialize};

use crate::agg::aggregate_global_bound;
use crate::budget::{BudgetLedger, PrivacyBudget};
use crate::data::{AttrKind, AttrValue, Record, Schema, TabularDataset};
use crate::error::{Error, Result};
use crate::mech::{
    local_dampening_scores, run_global_mechanism_scores, GlobalMechanism, DEFAULT_WINDOW_FACTOR,
};
use crate::pareto::{pareto_global_sensitivity, pareto_score_values, ParetoDeltaEngine};
use crate::rng::RandomSource;
use crate::sensitivity::{Sensitivity, Utility};

// ---------------------------------------------------------------------------
// Tree representation
// ---------------------------------------------------------------------------

/// Test applied at a decision node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SplitTest {
    /// Numeric attribute: values strictly below the threshold go left,
    /// values at or above it go right.
    Threshold(f64),
    /// Categorical attribute: values equal to the index go left, all other
    /// values go right.
    Category(u32),
}

/// A tree node, either a labeled leaf or a decision node with two children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        label: bool,
    },
    Split {
        attribute: usize,
        test: SplitTest,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => 1 + left.count() + right.count(),
        }
    }

    fn depth(&self) -> u32 {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Node at preorder position `index`, counting this node as 0. The
    /// counter is decremented as nodes are visited.
    fn node_mut<'a>(&'a mut self, index: &mut usize) -> Option<&'a mut Node> {
        if *index == 0 {
            return Some(self);
        }
        *index -= 1;
        match self {
            Node::Leaf { .. } => None,
            Node::Split { left, right, .. } => {
                if let Some(found) = left.node_mut(index) {
                    return Some(found);
                }
                right.node_mut(index)
            }
        }
    }

    /// Depth of the node at preorder position `index`, with this node at
    /// `depth`.
    fn depth_of(&self, index: &mut usize, depth: u32) -> Option<u32> {
        if *index == 0 {
            return Some(depth);
        }
        *index -= 1;
        match self {
            Node::Leaf { .. } => None,
            Node::Split { left, right, .. } => {
                if let Some(found) = left.depth_of(index, depth + 1) {
                    return Some(found);
                }
                right.depth_of(index, depth + 1)
            }
        }
    }

    fn route(&self, record: &Record) -> Result<bool> {
        match self {
            Node::Leaf { label } => Ok(*label),
            Node::Split {
                attribute,
                test,
                left,
                right,
            } => {
                let value = record.values.get(*attribute).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "split tests attribute {attribute} but the record has only {} values",
                        record.values.len()
                    ))
                })?;
                let go_left = match (value, test) {
                    (AttrValue::Num(v), SplitTest::Threshold(threshold)) => v < threshold,
                    (AttrValue::Cat(c), SplitTest::Category(index)) => c == index,
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "split test on attribute {attribute} does not match the value kind"
                        )))
                    }
                };
                if go_left {
                    left.route(record)
                } else {
                    right.route(record)
                }
            }
        }
    }
}

/// A binary classification tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
}

impl DecisionTree {
    /// Label predicted for one record. Fails if the tree tests an attribute
    /// the record does not have, or with a mismatched test kind.
    pub fn predict(&self, record: &Record) -> Result<bool> {
        self.root.route(record)
    }

    /// Number of nodes, leaves included.
    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    /// Longest root-to-leaf path, counted in nodes. A single leaf has
    /// depth 1.
    pub fn depth(&self) -> u32 {
        self.root.depth()
    }
}

// ---------------------------------------------------------------------------
// Confusion counts and rates
// ---------------------------------------------------------------------------

/// Confusion counts of one tree on one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub true_negatives: u64,
    /// Records with a positive label.
    pub positives: u64,
    /// Records with a negative label.
    pub negatives: u64,
}

fn rate(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

impl ConfusionCounts {
    /// True positive rate, 0 when there are no positive records.
    pub fn tpr(&self) -> f64 {
        rate(self.true_positives, self.positives)
    }

    /// True negative rate, 0 when there are no negative records.
    pub fn tnr(&self) -> f64 {
        rate(self.true_negatives, self.negatives)
    }
}

/// Confusion counts of `tree` on every record of `x`.
pub fn confusion(x: &TabularDataset, tree: &DecisionTree) -> Result<ConfusionCounts> {
    let mut c = ConfusionCounts::default();
    for record in &x.records {
        let predicted = tree.predict(record)?;
        match (record.label, predicted) {
            (true, true) => {
                c.positives += 1;
                c.true_positives += 1;
            }
            (true, false) => c.positives += 1,
            (false, false) => {
                c.negatives += 1;
                c.true_negatives += 1;
            }
            (false, true) => c.negatives += 1,
        }
    }
    Ok(c)
}

/// True positive rate of `tree` on `x`.
pub fn tpr(x: &TabularDataset, tree: &DecisionTree) -> Result<f64> {
    Ok(confusion(x, tree)?.tpr())
}

/// True negative rate of `tree` on `x`.
pub fn tnr(x: &TabularDataset, tree: &DecisionTree) -> Result<f64> {
    Ok(confusion(x, tree)?.tnr())
}

/// The objective vector `(TPR, TNR)` of each tree, in order.
pub fn tree_objectives(x: &TabularDataset, trees: &[DecisionTree]) -> Result<Vec<Vec<f64>>> {
    trees
        .iter()
        .map(|tree| {
            let c = confusion(x, tree)?;
            Ok(vec![c.tpr(), c.tnr()])
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rate sensitivities
// ---------------------------------------------------------------------------
//
// Adding or removing one record moves the pair (TP, FN) by at most one in
// one coordinate, and edits on negative records leave it unchanged. The
// true positive rate is a function of that pair alone, so a sensitivity that
// is admissible on the pair lattice is admissible on datasets.

/// Largest change of `a / (a + b)` over the single-coordinate moves
/// `a + 1`, `b + 1`, `a - 1` (if any) and `b - 1` (if any).
fn one_step_rate_change(a: u64, b: u64) -> f64 {
    let s = a + b;
    if s == 0 {
        // Adding one true positive jumps the rate from 0 to 1.
        return 1.0;
    }
    if s == 1 {
        // From (1, 0) removing the record drops the rate from 1 to 0; from
        // (0, 1) adding a true positive moves it from 0 to 1/2.
        return if a == 1 { 1.0 } else { 0.5 };
    }
    let sf = s as f64;
    // Additions change the rate by at most max(a, b) / (s (s + 1)),
    // removals by max(a, b) / (s (s - 1)) when the removed side is present.
    let mut best = a.max(b) as f64 / (sf * (sf + 1.0));
    if a >= 1 {
        best = best.max(b as f64 / (sf * (sf - 1.0)));
    }
    if b >= 1 {
        best = best.max(a as f64 / (sf * (sf - 1.0)));
    }
    best
}

/// Largest one-step rate change among all pairs within `t` coordinate moves
/// of `(tp0, p0 - tp0)`.
fn reachable_rate_change(p0: u64, tp0: u64, t: u64) -> f64 {
    let fn0 = p0 - tp0;
    let dist = |a: u64, b: u64| a.abs_diff(tp0) + b.abs_diff(fn0);
    let mut best: f64 = 0.0;
    // Near-empty pairs, where a single edit swings the rate the most.
    for (a, b) in [(0u64, 0u64), (1, 0), (0, 1), (1, 1)] {
        if dist(a, b) <= t {
            best = best.max(one_step_rate_change(a, b));
        }
    }
    // Pure pairs (a, 0) and (0, b) with a count of at least 2: the change is
    // 1 / (count + 1), so the smallest reachable count wins.
    if fn0 <= t {
        let a = tp0.saturating_sub(t - fn0).max(2);
        best = best.max(1.0 / (a + 1) as f64);
    }
    if tp0 <= t {
        let b = fn0.saturating_sub(t - tp0).max(2);
        best = best.max(1.0 / (b + 1) as f64);
    }
    // Mixed pairs, line by line over the reachable totals s <= p0 (larger
    // totals only shrink the change). Reaching the line costs p0 - s edits;
    // moving along it costs two edits per step, so with the leftover budget
    // the feasible segment is [s - fn0 - slack, tp0 + slack]. The change is
    // max(a, b) / (s (s - 1)), largest at the most lopsided feasible pair.
    let mut s = p0.saturating_sub(t).max(2);
    while s <= p0 {
        let slack = (t - (p0 - s)) / 2;
        let a_min = s.saturating_sub(fn0).saturating_sub(slack).max(1);
        let a_max = (tp0 + slack).min(s - 1);
        if a_min <= a_max {
            let big = a_max.max(s - a_min) as f64;
            best = best.max(big / (s as f64 * (s - 1) as f64));
        }
        s += 1;
    }
    best
}

/// Bound from draining the pair for `t` edits: false negatives are removed
/// first, then true positives, with both counts floored at 2. One further
/// edit then changes the rate by at most `max(TP', P' - TP') / (P' (P' - 1))`.
fn drained_rate_change(p0: u64, tp0: u64, t: u64) -> f64 {
    let shrink = t.saturating_sub(p0 - tp0);
    let tp_c = tp0.saturating_sub(shrink).max(2);
    let p_c = p0.saturating_sub(t).max(2);
    debug_assert!(tp_c <= p_c);
    let denom = p_c as f64 * (p_c - 1) as f64;
    (p_c - tp_c).max(tp_c) as f64 / denom
}

/// Element-local sensitivity of the true positive rate at distance `t`,
/// computed from the confusion counts alone.
///
/// The value is the larger of [`drained_rate_change`] and
/// [`reachable_rate_change`]. The drained bound alone underestimates the
/// worst neighbor when the counts are small or true positives are scarce;
/// the reachable bound alone is loose once draining saturates the floors.
/// Their pointwise maximum satisfies both admissibility conditions, which
/// the tests check exhaustively on the count lattice.
pub fn delta_tpr_counts(positives: u64, true_positives: u64, t: u32) -> f64 {
    assert!(
        true_positives <= positives,
        "true positives exceed positive count"
    );
    let t = u64::from(t);
    drained_rate_change(positives, true_positives, t)
        .max(reachable_rate_change(positives, true_positives, t))
}

/// Element-local sensitivity of the true negative rate at distance `t`. The
/// pair (TN, FP) moves exactly like (TP, FN), so the bound is the same
/// function of the negative-side counts.
pub fn delta_tnr_counts(negatives: u64, true_negatives: u64, t: u32) -> f64 {
    delta_tpr_counts(negatives, true_negatives, t)
}

/// `delta_TPR(x, t, tree)`.
pub fn delta_tpr(x: &TabularDataset, t: u32, tree: &DecisionTree) -> Result<f64> {
    let c = confusion(x, tree)?;
    Ok(delta_tpr_counts(c.positives, c.true_positives, t))
}

/// `delta_TNR(x, t, tree)`.
pub fn delta_tnr(x: &TabularDataset, t: u32, tree: &DecisionTree) -> Result<f64> {
    let c = confusion(x, tree)?;
    Ok(delta_tnr_counts(c.negatives, c.true_negatives, t))
}

/// Global sensitivity pair for (TPR, TNR). Both rates have range [0, 1] and
/// a single edit can move either across the whole range on a one-record
/// dataset, so 1 is the tight constant bound for each.
pub fn tpr_tnr_global_sensitivity() -> (f64, f64) {
    (1.0, 1.0)
}

/// True positive rate as a selection objective. Evaluation panics if the
/// tree does not fit the records; trees and datasets built from a shared
/// schema always do.
pub struct TprUtility;

impl Utility<TabularDataset, DecisionTree> for TprUtility {
    fn eval(&self, x: &TabularDataset, r: &DecisionTree) -> f64 {
        tpr(x, r).expect("tree does not match the dataset schema")
    }
}

/// True negative rate as a selection objective.
pub struct TnrUtility;

impl Utility<TabularDataset, DecisionTree> for TnrUtility {
    fn eval(&self, x: &TabularDataset, r: &DecisionTree) -> f64 {
        tnr(x, r).expect("tree does not match the dataset schema")
    }
}

/// Element-local sensitivity of [`TprUtility`].
pub struct TprSensitivity;

impl Sensitivity<TabularDataset, DecisionTree> for TprSensitivity {
    fn eval(&self, x: &TabularDataset, t: u32, r: &DecisionTree) -> f64 {
        delta_tpr(x, t, r).expect("tree does not match the dataset schema")
    }
}

/// Element-local sensitivity of [`TnrUtility`].
pub struct TnrSensitivity;

impl Sensitivity<TabularDataset, DecisionTree> for TnrSensitivity {
    fn eval(&self, x: &TabularDataset, t: u32, r: &DecisionTree) -> f64 {
        delta_tnr(x, t, r).expect("tree does not match the dataset schema")
    }
}

// ---------------------------------------------------------------------------
// Evolutionary operators
// ---------------------------------------------------------------------------

fn validate_split_schema(schema: &Schema) -> Result<()> {
    if schema.arity() == 0 {
        return Err(Error::InvalidArgument(
            "cannot grow decision nodes: the schema has no attributes".into(),
        ));
    }
    for attr in &schema.attributes {
        if let AttrKind::Categorical { arity: 0 } = attr.kind {
            return Err(Error::InvalidArgument(format!(
                "attribute {} has an empty categorical domain",
                attr.name
            )));
        }
    }
    Ok(())
}

fn random_node(schema: &Schema, tests_below: u32, rng: &mut RandomSource) -> Node {
    if tests_below == 0 {
        return Node::Leaf {
            label: rng.below(2) == 1,
        };
    }
    let attribute = rng.below(schema.arity());
    let test = match schema.attributes[attribute].kind {
        AttrKind::Numeric => SplitTest::Threshold(rng.uniform()),
        AttrKind::Categorical { arity } => SplitTest::Category(rng.below(arity as usize) as u32),
    };
    let left = Box::new(random_node(schema, tests_below - 1, rng));
    let right = Box::new(random_node(schema, tests_below - 1, rng));
    Node::Split {
        attribute,
        test,
        left,
        right,
    }
}

/// A full random tree with exactly `tests` decision nodes on every
/// root-to-leaf path, so `tests = 0` yields a single random-label leaf.
/// Attributes are drawn uniformly, numeric thresholds uniformly from [0, 1),
/// categorical values uniformly from the attribute's domain, and leaf labels
/// uniformly.
pub fn random_tree(schema: &Schema, tests: u32, rng: &mut RandomSource) -> Result<DecisionTree> {
    validate_split_schema(schema)?;
    Ok(DecisionTree {
        root: random_node(schema, tests, rng),
    })
}

/// Swaps a uniformly chosen subtree of `a` with a uniformly chosen subtree
/// of `b`. The inputs are not modified. Swapping both roots, the only
/// option for single-leaf parents, exchanges the trees whole.
pub fn crossover(
    a: &DecisionTree,
    b: &DecisionTree,
    rng: &mut RandomSource,
) -> (DecisionTree, DecisionTree) {
    let mut out_a = a.clone();
    let mut out_b = b.clone();
    let mut i = rng.below(out_a.node_count());
    let mut j = rng.below(out_b.node_count());
    let node_a = out_a.root.node_mut(&mut i).expect("preorder index in range");
    let node_b = out_b.root.node_mut(&mut j).expect("preorder index in range");
    std::mem::swap(node_a, node_b);
    (out_a, out_b)
}

/// Replaces a uniformly chosen node with a fresh random subtree sized to
/// reach `max_depth + 1`: a node at depth `d` gets `max_depth - d + 1` tests
/// below it. A later [`prune`] restores the depth bound. The input is not
/// modified.
pub fn mutate(
    tree: &DecisionTree,
    schema: &Schema,
    max_depth: u32,
    rng: &mut RandomSource,
) -> Result<DecisionTree> {
    validate_split_schema(schema)?;
    let mut out = tree.clone();
    let pick = rng.below(out.node_count());
    let depth = out
        .root
        .depth_of(&mut { pick }, 1)
        .expect("preorder index in range");
    let tests_below = (max_depth + 1).saturating_sub(depth);
    let replacement = random_node(schema, tests_below, rng);
    let mut index = pick;
    *out.root.node_mut(&mut index).expect("preorder index in range") = replacement;
    Ok(out)
}

fn prune_node(node: &mut Node, depth: u32, max_depth: u32, rng: &mut RandomSource) {
    if let Node::Split { left, right, .. } = node {
        if depth >= max_depth {
            *node = Node::Leaf {
                label: rng.below(2) == 1,
            };
        } else {
            prune_node(left, depth + 1, max_depth, rng);
            prune_node(right, depth + 1, max_depth, rng);
        }
    }
}

/// Replaces every decision node at depth `max_depth` with a random-label
/// leaf, truncating in preorder, so the result has depth at most
/// `max_depth`. A tree already within the bound comes back unchanged and no
/// randomness is consumed.
pub fn prune(tree: &DecisionTree, max_depth: u32, rng: &mut RandomSource) -> DecisionTree {
    let mut out = tree.clone();
    prune_node(&mut out.root, 1, max_depth, rng);
    out
}

// ---------------------------------------------------------------------------
// DP-MOET
// ---------------------------------------------------------------------------

/// Structural parameters of one evolutionary run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Offspring added per generation (p). Must be even and at least 2.
    pub population: usize,
    /// Trees kept by private selection per generation (s).
    pub selected: usize,
    /// Number of generations (k). Zero selects straight from the initial
    /// population.
    pub iterations: usize,
    /// Tests per path in the initial random trees (d).
    pub initial_depth: u32,
    /// Depth bound enforced by pruning (d_max).
    pub max_depth: u32,
    /// Trees in the final output (o).
    pub output: usize,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.population % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "population must be even and at least 2, got {}",
                self.population
            )));
        }
        if self.selected == 0 || self.selected > self.population {
            return Err(Error::InvalidArgument(format!(
                "selected must be in 1..={}, got {}",
                self.population, self.selected
            )));
        }
        let pool_at_end = if self.iterations == 0 {
            self.population
        } else {
            self.selected + self.population
        };
        if self.output == 0 || self.output > pool_at_end {
            return Err(Error::InvalidArgument(format!(
                "output must be in 1..={pool_at_end}, got {}",
                self.output
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
        }
        if self.initial_depth > self.max_depth {
            return Err(Error::InvalidArgument(format!(
                "initial depth {} exceeds max depth {}",
                self.initial_depth, self.max_depth
            )));
        }
        Ok(())
    }

    /// Number of private selection calls one run makes.
    pub fn selection_calls(&self) -> usize {
        self.iterations * self.selected + self.output
    }
}

/// Private selection rule used inside the evolutionary loop.
#[derive(Debug, Clone, PartialEq)]
pub enum MoetVariant {
    /// Pareto score with the global sensitivity `pool - 1`.
    ParetoGlobal { mechanism: GlobalMechanism },
    /// Pareto score with local dampening.
    ParetoLocal,
    /// Weighted sum `w0 * TPR + w1 * TNR` with the global bound
    /// `|w0| + |w1|`.
    AggGlobal {
        mechanism: GlobalMechanism,
        weights: [f64; 2],
    },
    /// Weighted sum with local dampening.
    AggLocal { weights: [f64; 2] },
}

impl MoetVariant {
    fn validate(&self) -> Result<()> {
        let weights = match self {
            MoetVariant::AggGlobal { weights, .. } | MoetVariant::AggLocal { weights } => weights,
            _ => return Ok(()),
        };
        validate_weight_pair(weights)
    }
}

fn validate_weight_pair(weights: &[f64; 2]) -> Result<()> {
    for (index, w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFiniteWeight {
                index,
                value: *w,
            });
        }
    }
    Ok(())
}

/// Selection rule of the exact, non-private reference run.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactSelection {
    /// Highest Pareto score, first index on ties.
    Pareto,
    /// Highest weighted sum, first index on ties.
    Aggregate([f64; 2]),
}

/// Output of one evolutionary run: the selected trees in selection order,
/// and the population size after every phase (initial, then per generation
/// after selection and after reproduction, then the output count).
#[derive(Debug, Clone)]
pub struct MoetRun {
    pub selected: Vec<DecisionTree>,
    pub population_trace: Vec<usize>,
}

/// Confusion counts of the current pool. The per-tree counts do not depend
/// on the rest of the pool, so they are computed once per selection phase
/// and shrunk as trees are taken; scores and sensitivities are derived from
/// them fresh each round.
struct PoolStats {
    positives: u64,
    negatives: u64,
    true_positives: Vec<u64>,
    true_negatives: Vec<u64>,
}

impl PoolStats {
    fn compute(x: &TabularDataset, pool: &[DecisionTree]) -> Result<Self> {
        let positives = x.records.iter().filter(|r| r.label).count() as u64;
        let negatives = x.records.len() as u64 - positives;
        let mut true_positives = Vec::with_capacity(pool.len());
        let mut true_negatives = Vec::with_capacity(pool.len());
        for tree in pool {
            let c = confusion(x, tree)?;
            true_positives.push(c.true_positives);
            true_negatives.push(c.true_negatives);
        }
        Ok(Self {
            positives,
            negatives,
            true_positives,
            true_negatives,
        })
    }

    fn len(&self) -> usize {
        self.true_positives.len()
    }

    fn remove(&mut self, index: usize) {
        self.true_positives.remove(index);
        self.true_negatives.remove(index);
    }

    /// Objective matrix with one row per objective (TPR, then TNR).
    fn objective_rows(&self) -> Vec<Vec<f64>> {
        let tpr_row = self
            .true_positives
            .iter()
            .map(|&tp| rate(tp, self.positives))
            .collect();
        let tnr_row = self
            .true_negatives
            .iter()
            .map(|&tn| rate(tn, self.negatives))
            .collect();
        vec![tpr_row, tnr_row]
    }

    fn aggregate_scores(&self, weights: &[f64; 2]) -> Vec<f64> {
        self.true_positives
            .iter()
            .zip(&self.true_negatives)
            .map(|(&tp, &tn)| {
                weights[0] * rate(tp, self.positives) + weights[1] * rate(tn, self.negatives)
            })
            .collect()
    }
}

/// Rate sensitivity read off fixed confusion counts; the dataset slot is a
/// unit because the counts already carry everything the bound needs.
struct CountRateSensitivity {
    denominator: u64,
    numerators: Vec<u64>,
}

impl Sensitivity<(), usize> for CountRateSensitivity {
    fn eval(&self, _x: &(), t: u32, r: &usize) -> f64 {
        delta_tpr_counts(self.denominator, self.numerators[*r], t)
    }
}

fn select_one(
    variant: &MoetVariant,
    stats: &PoolStats,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<usize> {
    let n = stats.len();
    match variant {
        MoetVariant::ParetoGlobal { mechanism } => {
            let scores: Vec<f64> = pareto_score_values(&stats.objective_rows())?
                .into_iter()
                .map(|s| s as f64)
                .collect();
            run_global_mechanism_scores(
                *mechanism,
                &scores,
                pareto_global_sensitivity(n)?,
                epsilon,
                rng,
            )
        }
        MoetVariant::ParetoLocal => {
            let indices: Vec<usize> = (0..n).collect();
            let tpr_sens = CountRateSensitivity {
                denominator: stats.positives,
                numerators: stats.true_positives.clone(),
            };
            let tnr_sens = CountRateSensitivity {
                denominator: stats.negatives,
                numerators: stats.true_negatives.clone(),
            };
            let sens: [&dyn Sensitivity<(), usize>; 2] = [&tpr_sens, &tnr_sens];
            let mut engine = ParetoDeltaEngine::new(&(), &indices, &sens, stats.objective_rows())?;
            let scores: Vec<f64> = engine.score_values().iter().map(|&s| s as f64).collect();
            local_dampening_scores(
                &scores,
                |r, t| engine.delta_at(r, t),
                DEFAULT_WINDOW_FACTOR * n,
                epsilon,
                rng,
            )
        }
        MoetVariant::AggGlobal { mechanism, weights } => {
            let scores = stats.aggregate_scores(weights);
            let bound = aggregate_global_bound(&[1.0, 1.0], weights)?;
            run_global_mechanism_scores(*mechanism, &scores, bound, epsilon, rng)
        }
        MoetVariant::AggLocal { weights } => {
            let scores = stats.aggregate_scores(weights);
            let delta = |r: usize, t: u32| {
                Ok(weights[0].abs() * delta_tpr_counts(stats.positives, stats.true_positives[r], t)
                    + weights[1].abs()
                        * delta_tnr_counts(stats.negatives, stats.true_negatives[r], t))
            };
            local_dampening_scores(&scores, delta, DEFAULT_WINDOW_FACTOR * n, epsilon, rng)
        }
    }
}

fn select_exact(selection: &ExactSelection, stats: &PoolStats) -> Result<usize> {
    let scores: Vec<f64> = match selection {
        ExactSelection::Pareto => pareto_score_values(&stats.objective_rows())?
            .into_iter()
            .map(|s| s as f64)
            .collect(),
        ExactSelection::Aggregate(weights) => stats.aggregate_scores(weights),
    };
    let mut best = 0;
    for (i, score) in scores.iter().enumerate() {
        if *score > scores[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Takes `count` trees out of `pool` one at a time, recomputing scores on
/// the shrinking pool between picks.
fn select_many(
    x: &TabularDataset,
    pool: &mut Vec<DecisionTree>,
    count: usize,
    pick: &mut impl FnMut(&PoolStats, &mut RandomSource) -> Result<usize>,
    rng: &mut RandomSource,
) -> Result<Vec<DecisionTree>> {
    debug_assert!(count <= pool.len());
    let mut stats = PoolStats::compute(x, pool)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let index = pick(&stats, rng)?;
        out.push(pool.remove(index));
        stats.remove(index);
    }
    Ok(out)
}

fn run_loop(
    x: &TabularDataset,
    config: &EvolutionConfig,
    mut pick: impl FnMut(&PoolStats, &mut RandomSource) -> Result<usize>,
    rng: &mut RandomSource,
) -> Result<MoetRun> {
    config.validate()?;
    // Tree construction and selection draw from separate derived streams, so
    // a run with exact selection shares the evolutionary randomness of a
    // private run seeded the same way.
    let mut evolution = rng.derive("evolution");
    let mut selection = rng.derive("selection");

    let mut population: Vec<DecisionTree> = (0..config.population)
        .map(|_| random_tree(&x.schema, config.initial_depth, &mut evolution))
        .collect::<Result<_>>()?;
    let mut trace = vec![population.len()];

    for _ in 0..config.iterations {
        population = select_many(x, &mut population, config.selected, &mut pick, &mut selection)?;
        trace.push(population.len());
        // Parents are drawn uniformly with replacement from the growing
        // pool, so offspring can immediately become parents.
        for _ in 0..config.population / 2 {
            let a = evolution.below(population.len());
            let b = evolution.below(population.len());
            let (raw_a, raw_b) = crossover(&population[a], &population[b], &mut evolution);
            for raw in [raw_a, raw_b] {
                let mutated = mutate(&raw, &x.schema, config.max_depth, &mut evolution)?;
                population.push(prune(&mutated, config.max_depth, &mut evolution));
            }
        }
        trace.push(population.len());
    }

    let selected = select_many(x, &mut population, config.output, &mut pick, &mut selection)?;
    trace.push(selected.len());
    Ok(MoetRun {
        selected,
        population_trace: trace,
    })
}

/// Differentially private multi-objective evolutionary training.
///
/// The budget is split evenly across the `iterations * selected + output`
/// selection calls; an internal ledger enforces the accounting. Local
/// variants use the default dampening window of [`DEFAULT_WINDOW_FACTOR`]
/// times the pool size.
pub fn dp_moet(
    x: &TabularDataset,
    config: &EvolutionConfig,
    variant: &MoetVariant,
    budget: PrivacyBudget,
    rng: &mut RandomSource,
) -> Result<MoetRun> {
    config.validate()?;
    variant.validate()?;
    let mut ledger = BudgetLedger::plan(budget, config.selection_calls())?;
    let run = run_loop(
        x,
        config,
        |stats, sel_rng| {
            let epsilon = ledger.next_call()?.epsilon();
            select_one(variant, stats, epsilon, sel_rng)
        },
        rng,
    )?;
    ledger.assert_exhausted()?;
    Ok(run)
}

/// Non-private reference run: the same evolutionary loop with every private
/// selection replaced by an exact argmax. Seeded identically to [`dp_moet`],
/// it consumes the same evolutionary randomness and none for selection.
pub fn nodp_moet(
    x: &TabularDataset,
    config: &EvolutionConfig,
    selection: &ExactSelection,
    rng: &mut RandomSource,
) -> Result<MoetRun> {
    if let ExactSelection::Aggregate(weights) = selection {
        validate_weight_pair(weights)?;
    }
    run_loop(x, config, |stats, _| select_exact(selection, stats), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Attribute;
    use crate::neighbor::RecordAddRemove;
    use crate::sensitivity::check_admissibility;
    use std::sync::Arc;

    fn numeric_schema() -> Arc<Schema> {
        Arc::new(Schema::new(
            vec![Attribute {
                name: "x1".into(),
                kind: AttrKind::Numeric,
            }],
            "label",
        ))
    }

    fn mixed_schema() -> Arc<Schema> {
        Arc::new(Schema::new(
            vec![
                Attribute {
                    name: "x1".into(),
                    kind: AttrKind::Numeric,
                },
                Attribute {
                    name: "x2".into(),
                    kind: AttrKind::Categorical { arity: 3 },
                },
            ],
            "label",
        ))
    }

    fn num_record(value: f64, label: bool) -> Record {
        Record::new(vec![AttrValue::Num(value)], label)
    }

    fn stump(threshold: f64) -> DecisionTree {
        DecisionTree {
            root: Node::Split {
                attribute: 0,
                test: SplitTest::Threshold(threshold),
                left: Box::new(Node::Leaf { label: false }),
                right: Box::new(Node::Leaf { label: true }),
            },
        }
    }

    fn dataset(records: Vec<Record>) -> TabularDataset {
        TabularDataset::new(numeric_schema(), records).unwrap()
    }

    // ---- prediction ----

    #[test]
    fn predict_routes_on_threshold() {
        let tree = stump(0.5);
        assert!(tree.predict(&num_record(0.7, true)).unwrap());
        assert!(!tree.predict(&num_record(0.3, true)).unwrap());
        // A value exactly at the threshold goes right.
        assert!(tree.predict(&num_record(0.5, true)).unwrap());

        let leaf = DecisionTree {
            root: Node::Leaf { label: true },
        };
        assert!(leaf.predict(&num_record(0.0, false)).unwrap());
    }

    #[test]
    fn predict_routes_on_category_equality() {
        let tree = DecisionTree {
            root: Node::Split {
                attribute: 1,
                test: SplitTest::Category(2),
                left: Box::new(Node::Leaf { label: true }),
                right: Box::new(Node::Leaf { label: false }),
            },
        };
        let matching = Record::new(vec![AttrValue::Num(0.1), AttrValue::Cat(2)], true);
        let other = Record::new(vec![AttrValue::Num(0.1), AttrValue::Cat(1)], true);
        assert!(tree.predict(&matching).unwrap());
        assert!(!tree.predict(&other).unwrap());
    }

    #[test]
    fn predict_rejects_mismatched_records() {
        let tree = stump(0.5);
        let categorical = Record::new(vec![AttrValue::Cat(0)], true);
        assert!(tree.predict(&categorical).is_err());

        let out_of_range = DecisionTree {
            root: Node::Split {
                attribute: 3,
                test: SplitTest::Threshold(0.5),
                left: Box::new(Node::Leaf { label: false }),
                right: Box::new(Node::Leaf { label: true }),
            },
        };
        assert!(out_of_range.predict(&num_record(0.2, true)).is_err());
    }

    // ---- confusion rates ----

    #[test]
    fn confusion_counts_all_four_cells() {
        let x = dataset(vec![
            num_record(0.7, true),
            num_record(0.3, true),
            num_record(0.9, false),
            num_record(0.1, false),
        ]);
        let c = confusion(&x, &stump(0.5)).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                true_positives: 1,
                true_negatives: 1,
                positives: 2,
                negatives: 2,
            }
        );
        assert_eq!(c.tpr(), 0.5);
        assert_eq!(c.tnr(), 0.5);
    }

    #[test]
    fn rates_are_zero_without_their_class() {
        let all_positive = dataset(vec![num_record(0.7, true)]);
        assert_eq!(tnr(&all_positive, &stump(0.5)).unwrap(), 0.0);
        let all_negative = dataset(vec![num_record(0.7, false)]);
        assert_eq!(tpr(&all_negative, &stump(0.5)).unwrap(), 0.0);
        let empty = dataset(vec![]);
        assert_eq!(tpr(&empty, &stump(0.5)).unwrap(), 0.0);
        assert_eq!(tnr(&empty, &stump(0.5)).unwrap(), 0.0);
    }

    #[test]
    fn one_record_swap_flips_the_rate_pair() {
        // Moving the single positive record across the threshold flips TPR
        // from 1 to 0.
        let hit = dataset(vec![num_record(0.7, true)]);
        let miss = dataset(vec![num_record(0.3, true)]);
        assert_eq!(tpr(&hit, &stump(0.5)).unwrap(), 1.0);
        assert_eq!(tpr(&miss, &stump(0.5)).unwrap(), 0.0);
    }

    #[test]
    fn tpr_plus_fnr_is_one() {
        let mut rng = RandomSource::new(11);
        let schema = mixed_schema();
        for _ in 0..60 {
            let records: Vec<Record> = (0..8)
                .map(|_| {
                    Record::new(
                        vec![
                            AttrValue::Num(rng.uniform()),
                            AttrValue::Cat(rng.below(3) as u32),
                        ],
                        rng.below(2) == 1,
                    )
                })
                .collect();
            let x = TabularDataset::new(schema.clone(), records).unwrap();
            let tree = random_tree(&schema, 2, &mut rng).unwrap();
            let c = confusion(&x, &tree).unwrap();
            if c.positives > 0 {
                let fnr = (c.positives - c.true_positives) as f64 / c.positives as f64;
                assert!((c.tpr() + fnr - 1.0).abs() < 1e-12);
            }
        }
    }

    // ---- rate sensitivity ----

    #[test]
    fn delta_tpr_worked_values() {
        assert_eq!(delta_tpr_counts(10, 7, 0), 7.0 / 90.0);
        assert_eq!(delta_tpr_counts(10, 7, 5), 0.25);
        // At t >= P - 2 the drained counts hit their floors and the bound
        // saturates at 1.
        assert_eq!(delta_tpr_counts(10, 7, 8), 1.0);
        assert_eq!(delta_tpr_counts(10, 7, 20), 1.0);
        assert_eq!(delta_tpr_counts(2, 2, 0), 1.0);
        assert_eq!(delta_tpr_counts(3, 2, 0), 2.0 / 6.0);
        // Cases where the reachable bound exceeds the drained bound: with no
        // true positives one added record moves the rate by 1/(P+1), and
        // near-empty pairs are one edit away.
        assert_eq!(delta_tpr_counts(4, 0, 0), 1.0 / 5.0);
        assert_eq!(delta_tpr_counts(5, 1, 1), 0.25);
        assert_eq!(delta_tpr_counts(1, 1, 0), 1.0);
        assert_eq!(delta_tpr_counts(0, 0, 0), 1.0);
    }

    #[test]
    fn delta_tnr_is_the_same_bound_on_negative_counts() {
        for (n, tn, t) in [(10u64, 7u64, 0u32), (6, 2, 3), (4, 0, 1)] {
            assert_eq!(delta_tnr_counts(n, tn, t), delta_tpr_counts(n, tn, t));
        }
    }

    /// Literal maximum of the one-step rate change over every pair within
    /// `t` coordinate moves, with the rate differences evaluated directly.
    fn reachable_oracle(p0: u64, tp0: u64, t: u64) -> f64 {
        let fn0 = p0 - tp0;
        let cell_rate = |a: u64, b: u64| {
            if a + b == 0 {
                0.0
            } else {
                a as f64 / (a + b) as f64
            }
        };
        let one_step = |a: u64, b: u64| {
            let here = cell_rate(a, b);
            let mut best = (cell_rate(a + 1, b) - here).abs();
            best = best.max((cell_rate(a, b + 1) - here).abs());
            if a > 0 {
                best = best.max((cell_rate(a - 1, b) - here).abs());
            }
            if b > 0 {
                best = best.max((cell_rate(a, b - 1) - here).abs());
            }
            best
        };
        let mut best: f64 = 0.0;
        for a in 0..=(tp0 + t) {
            for b in 0..=(fn0 + t) {
                if a.abs_diff(tp0) + b.abs_diff(fn0) <= t {
                    best = best.max(one_step(a, b));
                }
            }
        }
        best
    }

    #[test]
    fn reachable_bound_matches_enumeration_oracle() {
        for p0 in 0..=36u64 {
            for tp0 in 0..=p0 {
                for t in 0..=40u64 {
                    let closed = reachable_rate_change(p0, tp0, t);
                    let literal = reachable_oracle(p0, tp0, t);
                    assert!(
                        (closed - literal).abs() <= 1e-12,
                        "p0={p0} tp0={tp0} t={t}: closed {closed} vs literal {literal}"
                    );
                }
            }
        }
    }

    #[test]
    fn delta_tpr_is_admissible_on_the_count_lattice() {
        // Condition 1: the bound at t = 0 covers every one-step rate change.
        // Condition 2: the bound at t + 1 covers the bound of every count
        // neighbor at t. Neighbors of (P, TP): add a true positive, add a
        // false negative, remove either (when present), or edit a negative
        // record, which leaves the pair unchanged.
        for p0 in 0..=28u64 {
            for tp0 in 0..=p0 {
                let fn0 = p0 - tp0;
                let ls = reachable_oracle(p0, tp0, 0);
                assert!(
                    delta_tpr_counts(p0, tp0, 0) >= ls - 1e-12,
                    "condition 1 fails at P={p0} TP={tp0}"
                );
                let mut neighbors = vec![(p0 + 1, tp0 + 1), (p0 + 1, tp0), (p0, tp0)];
                if tp0 > 0 {
                    neighbors.push((p0 - 1, tp0 - 1));
                }
                if fn0 > 0 {
                    neighbors.push((p0 - 1, tp0));
                }
                for t in 0..=10u32 {
                    let here_next = delta_tpr_counts(p0, tp0, t + 1);
                    for &(p1, tp1) in &neighbors {
                        let there = delta_tpr_counts(p1, tp1, t);
                        assert!(
                            here_next >= there - 1e-12,
                            "condition 2 fails at P={p0} TP={tp0} t={t} vs P={p1} TP={tp1}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn delta_tpr_is_monotone_and_bounded() {
        for p0 in 0..=25u64 {
            for tp0 in 0..=p0 {
                let mut previous = 0.0;
                for t in 0..=30u32 {
                    let value = delta_tpr_counts(p0, tp0, t);
                    assert!(value > 0.0 && value <= 1.0);
                    assert!(value >= previous);
                    previous = value;
                }
            }
        }
    }

    #[test]
    fn dataset_level_sensitivity_is_admissible() {
        let universe: Vec<Record> = [0.1, 0.4, 0.6, 0.9]
            .iter()
            .flat_map(|&v| [num_record(v, true), num_record(v, false)])
            .collect();
        let relation = RecordAddRemove::new(universe);
        let x = dataset(vec![
            num_record(0.1, true),
            num_record(0.6, true),
            num_record(0.9, false),
        ]);
        let trees = [stump(0.5), stump(0.75)];
        let instances: Vec<(&TabularDataset, &DecisionTree)> =
            trees.iter().map(|t| (&x, t)).collect();
        let report = check_admissibility(
            &TprSensitivity,
            &TprUtility,
            &instances,
            2,
            &relation,
            50_000,
        )
        .unwrap();
        assert!(report.is_admissible(), "{:?}", report.violations);
        let report = check_admissibility(
            &TnrSensitivity,
            &TnrUtility,
            &instances,
            2,
            &relation,
            50_000,
        )
        .unwrap();
        assert!(report.is_admissible(), "{:?}", report.violations);
    }

    #[test]
    fn global_rate_sensitivity_is_one_each() {
        assert_eq!(tpr_tnr_global_sensitivity(), (1.0, 1.0));
        let (d_tpr, d_tnr) = tpr_tnr_global_sensitivity();
        assert_eq!(
            aggregate_global_bound(&[d_tpr, d_tnr], &[3.0, 2.0]).unwrap(),
            5.0
        );
    }

    #[test]
    fn sensitivity_adapters_match_count_formulas() {
        let x = dataset(vec![
            num_record(0.7, true),
            num_record(0.3, true),
            num_record(0.9, false),
            num_record(0.1, false),
        ]);
        let tree = stump(0.5);
        for t in 0..4 {
            assert_eq!(
                TprSensitivity.eval(&x, t, &tree),
                delta_tpr_counts(2, 1, t)
            );
            assert_eq!(
                TnrSensitivity.eval(&x, t, &tree),
                delta_tnr_counts(2, 1, t)
            );
        }
        assert_eq!(TprUtility.eval(&x, &tree), 0.5);
        assert_eq!(TnrUtility.eval(&x, &tree), 0.5);
    }

    // ---- evolutionary operators ----

    #[test]
    fn random_tree_is_full_and_in_domain() {
        let schema = mixed_schema();
        let mut rng = RandomSource::new(5);
        let leaf = random_tree(&schema, 0, &mut rng).unwrap();
        assert_eq!(leaf.node_count(), 1);
        assert_eq!(leaf.depth(), 1);

        fn walk(node: &Node, schema: &Schema) {
            if let Node::Split {
                attribute,
                test,
                left,
                right,
            } = node
            {
                assert!(*attribute < schema.arity());
                match (test, &schema.attributes[*attribute].kind) {
                    (SplitTest::Threshold(v), AttrKind::Numeric) => {
                        assert!((0.0..1.0).contains(v))
                    }
                    (SplitTest::Category(c), AttrKind::Categorical { arity }) => {
                        assert!(c < arity)
                    }
                    _ => panic!("test kind does not match the attribute"),
                }
                walk(left, schema);
                walk(right, schema);
            }
        }
        for tests in 1..=4u32 {
            let tree = random_tree(&schema, tests, &mut rng).unwrap();
            assert_eq!(tree.node_count(), (1 << (tests + 1)) - 1);
            assert_eq!(tree.depth(), tests + 1);
            walk(&tree.root, &schema);
        }
    }

    #[test]
    fn random_tree_is_deterministic_per_seed() {
        let schema = mixed_schema();
        let a = random_tree(&schema, 3, &mut RandomSource::new(9)).unwrap();
        let b = random_tree(&schema, 3, &mut RandomSource::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_tree_rejects_unsplittable_schemas() {
        let empty = Schema::new(vec![], "label");
        assert!(random_tree(&empty, 1, &mut RandomSource::new(0)).is_err());
        let degenerate = Schema::new(
            vec![Attribute {
                name: "x1".into(),
                kind: AttrKind::Categorical { arity: 0 },
            }],
            "label",
        );
        assert!(random_tree(&degenerate, 1, &mut RandomSource::new(0)).is_err());
    }

    #[test]
    fn crossover_swaps_leaf_trees_whole() {
        let a = DecisionTree {
            root: Node::Leaf { label: true },
        };
        let b = DecisionTree {
            root: Node::Leaf { label: false },
        };
        let (out_a, out_b) = crossover(&a, &b, &mut RandomSource::new(3));
        assert_eq!(out_a, b);
        assert_eq!(out_b, a);
    }

    #[test]
    fn crossover_conserves_nodes_and_inputs() {
        let schema = mixed_schema();
        let mut rng = RandomSource::new(17);
        for _ in 0..200 {
            let a = random_tree(&schema, 3, &mut rng).unwrap();
            let b = random_tree(&schema, 2, &mut rng).unwrap();
            let (a_before, b_before) = (a.clone(), b.clone());
            let (out_a, out_b) = crossover(&a, &b, &mut rng);
            assert_eq!(
                out_a.node_count() + out_b.node_count(),
                a.node_count() + b.node_count()
            );
            assert_eq!(a, a_before);
            assert_eq!(b, b_before);
        }
    }

    #[test]
    fn mutate_then_prune_respects_the_depth_bound() {
        let schema = mixed_schema();
        let max_depth = 4;
        let mut rng = RandomSource::new(23);
        let mut tree = random_tree(&schema, 3, &mut rng).unwrap();
        for _ in 0..10_000 {
            let mutated = mutate(&tree, &schema, max_depth, &mut rng).unwrap();
            // The fresh subtree reaches exactly one past the bound before
            // pruning trims it.
            assert!(mutated.depth() <= max_depth + 1);
            tree = prune(&mutated, max_depth, &mut rng);
            assert!(tree.depth() <= max_depth);
        }
    }

    #[test]
    fn prune_is_identity_within_the_bound() {
        let schema = mixed_schema();
        let tree = random_tree(&schema, 2, &mut RandomSource::new(31)).unwrap();
        let mut rng = RandomSource::new(77);
        let pruned = prune(&tree, 5, &mut rng);
        assert_eq!(pruned, tree);
        // No randomness was consumed.
        assert_eq!(rng.next_u64(), RandomSource::new(77).next_u64());
    }

    #[test]
    fn prune_truncates_deep_trees() {
        let schema = mixed_schema();
        let mut rng = RandomSource::new(41);
        let deep = random_tree(&schema, 5, &mut rng).unwrap();
        assert_eq!(deep.depth(), 6);
        let pruned = prune(&deep, 3, &mut rng);
        assert_eq!(pruned.depth(), 3);

        let leaf = DecisionTree {
            root: Node::Leaf { label: true },
        };
        assert_eq!(prune(&leaf, 1, &mut rng), leaf);
    }

    #[test]
    fn tree_serialization_round_trips() {
        let tree = random_tree(&mixed_schema(), 3, &mut RandomSource::new(59)).unwrap();
        let json = serde_json::to_string(&tree).unwrap();
        let back: DecisionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tree);
    }

    // ---- DP-MOET ----

    fn training_set(seed: u64, len: usize) -> TabularDataset {
        let mut rng = RandomSource::new(seed);
        let records = (0..len)
            .map(|_| {
                let v = rng.uniform();
                // Label mostly follows the attribute so trees can do better
                // than chance.
                let label = if rng.uniform() < 0.85 { v >= 0.5 } else { v < 0.5 };
                num_record(v, label)
            })
            .collect();
        dataset(records)
    }

    fn base_config() -> EvolutionConfig {
        EvolutionConfig {
            population: 4,
            selected: 2,
            iterations: 2,
            initial_depth: 1,
            max_depth: 2,
            output: 2,
        }
    }

    #[test]
    fn config_validation_rejects_bad_shapes() {
        let ok = base_config();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.selection_calls(), 6);

        let mut bad = base_config();
        bad.population = 3;
        assert!(bad.validate().is_err());

        bad = base_config();
        bad.selected = 5;
        assert!(bad.validate().is_err());

        bad = base_config();
        bad.output = 7;
        assert!(bad.validate().is_err());

        bad = base_config();
        bad.iterations = 0;
        bad.output = 5;
        assert!(bad.validate().is_err(), "k = 0 selects from p trees only");

        bad = base_config();
        bad.initial_depth = 3;
        assert!(bad.validate().is_err());

        bad = base_config();
        bad.max_depth = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn population_trace_follows_the_schedule() {
        let x = training_set(1, 12);
        let config = EvolutionConfig {
            population: 2,
            selected: 1,
            iterations: 1,
            initial_depth: 1,
            max_depth: 2,
            output: 1,
        };
        let variant = MoetVariant::ParetoGlobal {
            mechanism: GlobalMechanism::Exponential,
        };
        let run = dp_moet(
            &x,
            &config,
            &variant,
            PrivacyBudget::new(1.0).unwrap(),
            &mut RandomSource::new(2),
        )
        .unwrap();
        assert_eq!(run.population_trace, vec![2, 1, 3, 1]);
        assert_eq!(run.selected.len(), 1);
    }

    #[test]
    fn zero_iterations_selects_from_the_initial_population() {
        let x = training_set(3, 10);
        let config = EvolutionConfig {
            population: 4,
            selected: 2,
            iterations: 0,
            initial_depth: 1,
            max_depth: 2,
            output: 2,
        };
        let run = dp_moet(
            &x,
            &config,
            &MoetVariant::AggLocal { weights: [3.0, 2.0] },
            PrivacyBudget::new(2.0).unwrap(),
            &mut RandomSource::new(4),
        )
        .unwrap();
        assert_eq!(run.population_trace, vec![4, 2]);
        assert_eq!(run.selected.len(), 2);
        for tree in &run.selected {
            assert!(tree.depth() <= config.initial_depth + 1);
        }
    }

    #[test]
    fn all_variants_produce_output_within_depth() {
        let x = training_set(5, 16);
        let config = base_config();
        let variants = [
            MoetVariant::ParetoGlobal {
                mechanism: GlobalMechanism::Exponential,
            },
            MoetVariant::ParetoLocal,
            MoetVariant::AggGlobal {
                mechanism: GlobalMechanism::PermuteAndFlip,
                weights: [3.0, 2.0],
            },
            MoetVariant::AggLocal {
                weights: [1.0, 100.0],
            },
        ];
        for (i, variant) in variants.iter().enumerate() {
            let run = dp_moet(
                &x,
                &config,
                variant,
                PrivacyBudget::new(1.0).unwrap(),
                &mut RandomSource::new(100 + i as u64),
            )
            .unwrap();
            assert_eq!(run.selected.len(), config.output);
            assert_eq!(run.population_trace, vec![4, 2, 6, 2, 6, 2]);
            for tree in &run.selected {
                assert!(tree.depth() <= config.max_depth);
            }
        }
    }

    #[test]
    fn invalid_weights_are_rejected() {
        let x = training_set(6, 8);
        let config = base_config();
        let result = dp_moet(
            &x,
            &config,
            &MoetVariant::AggLocal {
                weights: [f64::NAN, 1.0],
            },
            PrivacyBudget::new(1.0).unwrap(),
            &mut RandomSource::new(7),
        );
        assert!(matches!(result, Err(Error::NonFiniteWeight { .. })));
        assert!(nodp_moet(
            &x,
            &config,
            &ExactSelection::Aggregate([f64::INFINITY, 0.0]),
            &mut RandomSource::new(7),
        )
        .is_err());
    }

    #[test]
    fn nodp_reference_is_deterministic() {
        let x = training_set(8, 14);
        let config = base_config();
        let a = nodp_moet(
            &x,
            &config,
            &ExactSelection::Aggregate([3.0, 2.0]),
            &mut RandomSource::new(21),
        )
        .unwrap();
        let b = nodp_moet(
            &x,
            &config,
            &ExactSelection::Aggregate([3.0, 2.0]),
            &mut RandomSource::new(21),
        )
        .unwrap();
        assert_eq!(a.selected, b.selected);
        let pareto = nodp_moet(&x, &config, &ExactSelection::Pareto, &mut RandomSource::new(21))
            .unwrap();
        assert_eq!(pareto.selected.len(), config.output);
    }

    #[test]
    fn huge_epsilon_matches_the_exact_reference() {
        // Fixture seed chosen so every selection round has a unique argmax;
        // with epsilon = 1e9 the private pick then lands on it with
        // certainty and only the shared evolutionary stream matters.
        let x = training_set(9, 20);
        let config = base_config();
        let seed = 1;
        let private = dp_moet(
            &x,
            &config,
            &MoetVariant::AggGlobal {
                mechanism: GlobalMechanism::Exponential,
                weights: [3.0, 2.0],
            },
            PrivacyBudget::new(1e9).unwrap(),
            &mut RandomSource::new(seed),
        )
        .unwrap();
        let exact = nodp_moet(
            &x,
            &config,
            &ExactSelection::Aggregate([3.0, 2.0]),
            &mut RandomSource::new(seed),
        )
        .unwrap();
        assert_eq!(private.selected, exact.selected);
        assert_eq!(private.population_trace, exact.population_trace);
    }

    #[test]
    fn objectives_feed_the_coverage_metric() {
        let x = training_set(10, 12);
        let config = base_config();
        let run = nodp_moet(&x, &config, &ExactSelection::Pareto, &mut RandomSource::new(33))
            .unwrap();
        let objectives = tree_objectives(&x, &run.selected).unwrap();
        assert_eq!(objectives.len(), config.output);
        for pair in &objectives {
            assert_eq!(pair.len(), 2);
            assert!(pair.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        // A set always covers itself.
        assert_eq!(crate::pareto::metric_c(&objectives, &objectives).unwrap(), 1.0);
    }
}
