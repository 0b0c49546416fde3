//! Private top-k node selection in undirected graphs, scored by degree and
//! egocentric density.
//!
//! The two objectives of a vertex `v` are its degree and its egocentric
//! density, the edge density among its neighbors:
//!
//! ```text
//! egodensity(v) = 2 * |edges inside N(v)| / (deg(v) * (deg(v) - 1))
//! ```
//!
//! with the value 0 when `v` has fewer than two neighbors. Neighboring
//! graphs differ by one toggled edge, which moves any fixed vertex's degree
//! by at most 1 and its egocentric density by at most 1.
//!
//! [`dp_motkin`] selects `k` distinct vertices with `k` sequential private
//! selections, each on the remaining pool with budget `epsilon / k`. The
//! objectives are always evaluated on the full graph; only the candidate
//! pool shrinks. Pareto scores and their sensitivities are recomputed on
//! the pool before every pick.

use crate::agg::aggregate_global_bound;
use crate::budget::{BudgetLedger, PrivacyBudget};
use crate::data::Graph;
use crate::error::{Error, Result};
use crate::mech::{
    local_dampening_scores, run_global_mechanism_scores, GlobalMechanism, DEFAULT_WINDOW_FACTOR,
};
use crate::pareto::{pareto_global_sensitivity, pareto_score_values, ParetoDeltaEngine};
use crate::rng::RandomSource;
use crate::sensitivity::{Sensitivity, Utility};

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

/// Egocentric density of `v`: the edge density among its neighbors, 0 for
/// fewer than two neighbors.
pub fn egodensity(g: &Graph, v: u32) -> f64 {
    let d = g.degree(v) as u64;
    if d < 2 {
        return 0.0;
    }
    2.0 * g.open_neighborhood_edges(v) as f64 / (d as f64 * (d - 1) as f64)
}

/// Degree as a selection objective.
pub struct DegreeUtility;

impl Utility<Graph, u32> for DegreeUtility {
    fn eval(&self, g: &Graph, r: &u32) -> f64 {
        g.degree(*r) as f64
    }
}

/// Egocentric density as a selection objective.
pub struct EgodensityUtility;

impl Utility<Graph, u32> for EgodensityUtility {
    fn eval(&self, g: &Graph, r: &u32) -> f64 {
        egodensity(g, *r)
    }
}

// ---------------------------------------------------------------------------
// Sensitivities
// ---------------------------------------------------------------------------

/// Element-local sensitivity of the degree. A toggled edge moves a fixed
/// vertex's degree by at most 1 at every distance, and a toggle on an
/// incident pair attains it, so the constant 1 is tight.
pub fn delta_degree(_g: &Graph, _t: u32, _v: u32) -> f64 {
    1.0
}

/// Element-local sensitivity of the egocentric density for a vertex of the
/// given degree.
///
/// One toggle changes the density by at most `2 / (deg - 2)` when
/// `deg > 2`. Within distance `t` the degree may have dropped to `deg - t`,
/// which gives the bound below; it is capped at 1, the width of the
/// density's range, which keeps it admissible where the raw expression
/// would exceed 1 (at `deg - t = 3` it reaches 2).
pub fn delta_egodensity_from_degree(degree: u64, t: u32) -> f64 {
    let m = degree.saturating_sub(u64::from(t));
    if m > 2 {
        (2.0 / (m - 2) as f64).min(1.0)
    } else {
        1.0
    }
}

/// `delta_egodensity(x, t, v)`.
pub fn delta_egodensity(g: &Graph, t: u32, v: u32) -> f64 {
    delta_egodensity_from_degree(g.degree(v) as u64, t)
}

/// Global sensitivity pair for (degree, egodensity); both move by at most 1
/// under one edge toggle.
pub fn degree_egodensity_global_sensitivity() -> (f64, f64) {
    (1.0, 1.0)
}

/// Element-local sensitivity of [`DegreeUtility`].
pub struct DegreeSensitivity;

impl Sensitivity<Graph, u32> for DegreeSensitivity {
    fn eval(&self, g: &Graph, t: u32, r: &u32) -> f64 {
        delta_degree(g, t, *r)
    }

    fn global_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Element-local sensitivity of [`EgodensityUtility`].
pub struct EgodensitySensitivity;

impl Sensitivity<Graph, u32> for EgodensitySensitivity {
    fn eval(&self, g: &Graph, t: u32, r: &u32) -> f64 {
        delta_egodensity(g, t, *r)
    }
}

// ---------------------------------------------------------------------------
// DP-MOTkIN
// ---------------------------------------------------------------------------

/// Private selection rule used for each of the `k` picks.
#[derive(Debug, Clone, PartialEq)]
pub enum MotkinVariant {
    /// Pareto score with the global sensitivity `pool - 1`.
    ParetoGlobal { mechanism: GlobalMechanism },
    /// Pareto score with local dampening.
    ParetoLocal,
    /// Weighted sum `w0 * degree + w1 * egodensity` with the global bound
    /// `|w0| + |w1|`.
    AggGlobal {
        mechanism: GlobalMechanism,
        weights: [f64; 2],
    },
    /// Weighted sum with local dampening.
    AggLocal { weights: [f64; 2] },
}

impl MotkinVariant {
    fn validate(&self) -> Result<()> {
        let weights = match self {
            MotkinVariant::AggGlobal { weights, .. } | MotkinVariant::AggLocal { weights } => {
                weights
            }
            _ => return Ok(()),
        };
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
}

/// Candidate pool with objectives frozen from the full graph. Selection
/// only removes rows; the remaining values never change.
struct VertexPool {
    ids: Vec<u32>,
    degrees: Vec<u64>,
    ego: Vec<f64>,
}

impl VertexPool {
    fn compute(g: &Graph) -> Self {
        let n = g.vertex_count() as u32;
        let ids: Vec<u32> = (0..n).collect();
        let degrees = ids.iter().map(|&v| g.degree(v) as u64).collect();
        let ego = ids.iter().map(|&v| egodensity(g, v)).collect();
        Self { ids, degrees, ego }
    }

    fn len(&self) -> usize {
        self.ids.len()
    }

    fn remove(&mut self, index: usize) -> u32 {
        self.degrees.remove(index);
        self.ego.remove(index);
        self.ids.remove(index)
    }

    /// Objective matrix with one row per objective (degree, then
    /// egodensity).
    fn objective_rows(&self) -> Vec<Vec<f64>> {
        vec![
            self.degrees.iter().map(|&d| d as f64).collect(),
            self.ego.clone(),
        ]
    }

    fn aggregate_scores(&self, weights: &[f64; 2]) -> Vec<f64> {
        self.degrees
            .iter()
            .zip(&self.ego)
            .map(|(&d, &e)| weights[0] * d as f64 + weights[1] * e)
            .collect()
    }
}

/// Degree-derived egodensity sensitivity over pool indices.
struct PoolEgoSensitivity {
    degrees: Vec<u64>,
}

impl Sensitivity<(), usize> for PoolEgoSensitivity {
    fn eval(&self, _x: &(), t: u32, r: &usize) -> f64 {
        delta_egodensity_from_degree(self.degrees[*r], t)
    }
}

/// Constant 1 sensitivity over pool indices.
struct PoolDegreeSensitivity;

impl Sensitivity<(), usize> for PoolDegreeSensitivity {
    fn eval(&self, _x: &(), _t: u32, _r: &usize) -> f64 {
        1.0
    }
}

fn select_vertex(
    variant: &MotkinVariant,
    pool: &VertexPool,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<usize> {
    let n = pool.len();
    match variant {
        MotkinVariant::ParetoGlobal { mechanism } => {
            let scores: Vec<f64> = pareto_score_values(&pool.objective_rows())?
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
        MotkinVariant::ParetoLocal => {
            let indices: Vec<usize> = (0..n).collect();
            let degree_sens = PoolDegreeSensitivity;
            let ego_sens = PoolEgoSensitivity {
                degrees: pool.degrees.clone(),
            };
            let sens: [&dyn Sensitivity<(), usize>; 2] = [&degree_sens, &ego_sens];
            let mut engine = ParetoDeltaEngine::new(&(), &indices, &sens, pool.objective_rows())?;
            let scores: Vec<f64> = engine.score_values().iter().map(|&s| s as f64).collect();
            local_dampening_scores(
                &scores,
                |r, t| engine.delta_at(r, t),
                DEFAULT_WINDOW_FACTOR * n,
                epsilon,
                rng,
            )
        }
        MotkinVariant::AggGlobal { mechanism, weights } => {
            let scores = pool.aggregate_scores(weights);
            let bound = aggregate_global_bound(&[1.0, 1.0], weights)?;
            run_global_mechanism_scores(*mechanism, &scores, bound, epsilon, rng)
        }
        MotkinVariant::AggLocal { weights } => {
            let scores = pool.aggregate_scores(weights);
            let delta = |r: usize, t: u32| {
                Ok(weights[0].abs()
                    + weights[1].abs() * delta_egodensity_from_degree(pool.degrees[r], t))
            };
            local_dampening_scores(&scores, delta, DEFAULT_WINDOW_FACTOR * n, epsilon, rng)
        }
    }
}

fn validate_k(g: &Graph, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "cannot select k = {k} distinct vertices from {}",
            g.vertex_count()
        )));
    }
    Ok(())
}

/// Differentially private selection of `k` distinct vertices, in selection
/// order. The budget is split evenly across the `k` sequential picks; an
/// internal ledger enforces the accounting. Local variants use the default
/// dampening window of [`DEFAULT_WINDOW_FACTOR`] times the pool size.
pub fn dp_motkin(
    g: &Graph,
    k: usize,
    variant: &MotkinVariant,
    budget: PrivacyBudget,
    rng: &mut RandomSource,
) -> Result<Vec<u32>> {
    variant.validate()?;
    validate_k(g, k)?;
    let mut ledger = BudgetLedger::plan(budget, k)?;
    let mut pool = VertexPool::compute(g);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let epsilon = ledger.next_call()?.epsilon();
        let index = select_vertex(variant, &pool, epsilon, rng)?;
        out.push(pool.remove(index));
    }
    ledger.assert_exhausted()?;
    Ok(out)
}

/// First index holding the maximum. Pools keep ids in ascending order, so
/// this breaks ties toward the smallest vertex id.
fn exact_pick(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, score) in scores.iter().enumerate() {
        if *score > scores[best] {
            best = i;
        }
    }
    best
}

fn true_topk(
    g: &Graph,
    k: usize,
    mut scores_of: impl FnMut(&VertexPool) -> Result<Vec<f64>>,
) -> Result<Vec<u32>> {
    validate_k(g, k)?;
    let mut pool = VertexPool::compute(g);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let index = exact_pick(&scores_of(&pool)?);
        out.push(pool.remove(index));
    }
    Ok(out)
}

/// Exact reference: `k` sequential picks of a highest Pareto score vertex,
/// ties toward the smallest id, recomputed on the shrinking pool.
pub fn true_topk_pareto(g: &Graph, k: usize) -> Result<Vec<u32>> {
    true_topk(g, k, |pool| {
        Ok(pareto_score_values(&pool.objective_rows())?
            .into_iter()
            .map(|s| s as f64)
            .collect())
    })
}

/// Exact reference: `k` sequential picks of a highest weighted sum vertex,
/// ties toward the smallest id.
pub fn true_topk_agg(g: &Graph, k: usize, weights: &[f64; 2]) -> Result<Vec<u32>> {
    true_topk(g, k, |pool| Ok(pool.aggregate_scores(weights)))
}

/// Fraction of the reference selection that was recovered:
/// `|selected ∩ reference| / k`. Both lists must have the same length `k`
/// and hold distinct vertices.
pub fn recall_at_k(selected: &[u32], reference: &[u32]) -> Result<f64> {
    if selected.is_empty() || selected.len() != reference.len() {
        return Err(Error::InvalidArgument(format!(
            "recall needs two non-empty selections of equal size, got {} and {}",
            selected.len(),
            reference.len()
        )));
    }
    let truth: std::collections::BTreeSet<u32> = reference.iter().copied().collect();
    let hits = selected.iter().filter(|v| truth.contains(v)).count();
    Ok(hits as f64 / selected.len() as f64)
}

/// The objective vector `(degree, egodensity)` of each vertex, in order.
/// Feeds the coverage metric comparisons between selections.
pub fn vertex_objectives(g: &Graph, vertices: &[u32]) -> Vec<Vec<f64>> {
    vertices
        .iter()
        .map(|&v| vec![g.degree(v) as f64, egodensity(g, v)])
        .collect()
}
