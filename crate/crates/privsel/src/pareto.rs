//! Pareto scores, their admissible sensitivity, and the PrivPareto
//! mechanisms.
//!
//! Given utilities `u_1..u_m` over a candidate pool `R`, candidate `a`
//! weakly dominates `b` when `u_i(x,a) >= u_i(x,b)` for every `i`. The
//! Pareto score of `r` is
//!
//! ```text
//!     PS(x,r) = -|{r' in R, r' != r : r' dominates r}|
//! ```
//!
//! so scores live in `[-(|R|-1), 0]` and the non-dominated front is exactly
//! the score-0 set. Selecting a high-score candidate privately can use the
//! global sensitivity `|R|-1`, or the much tighter element local sensitivity
//!
//! ```text
//!     delta_PS(x,t,r) = |dom^-(x,t,r)| + |ndom^+(x,t,r)|
//! ```
//!
//! where, writing `lo_i(r) = u_i(x,r) - sum_{j<=t} delta_i(x,j,r)` and
//! `hi_i(r) = u_i(x,r) + sum_{j<=t} delta_i(x,j,r)` for admissible
//! per-utility sensitivities `delta_i`:
//!
//! * `dom^-` is the set of current dominators of `r` that could stop
//!   dominating within distance `t`: those with `lo_i(r') <= hi_i(r)` for
//!   some `i`;
//! * `ndom^+` is the set of current non-dominators that could start: those
//!   with `hi_i(r') >= lo_i(r)` for every `i`.
//!
//! Both sets are computed here through an equivalent pair of interval
//! counts, see [`ParetoDeltaEngine`].

use rayon::prelude::*;

use crate::budget::PrivacyBudget;
use crate::error::{Error, Result};
use crate::mech::{
    self, GlobalMechanism, DEFAULT_WINDOW_FACTOR,
};
use crate::rng::RandomSource;
use crate::sensitivity::{Sensitivity, Utility};

/// Candidate count below which the quadratic pairwise count is used instead
/// of the sweep; the sweep's sort overhead dominates on small pools.
const SWEEP_MIN_CANDIDATES: usize = 64;

// ---------------------------------------------------------------------------
// Multi-objective selection problems
// ---------------------------------------------------------------------------

/// A selection instance with several utilities, their aligned element local
/// sensitivities, and a privacy budget.
pub struct MultiObjectiveProblem<'a, X, R> {
    pub dataset: &'a X,
    pub candidates: &'a [R],
    pub utilities: Vec<&'a dyn Utility<X, R>>,
    pub sensitivities: Vec<&'a dyn Sensitivity<X, R>>,
    pub budget: PrivacyBudget,
}

impl<'a, X, R> MultiObjectiveProblem<'a, X, R> {
    /// Checks the structural invariants: at least one utility, sensitivities
    /// aligned with utilities, and a non-empty candidate pool.
    pub fn validate(&self) -> Result<()> {
        if self.candidates.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        if self.utilities.is_empty() {
            return Err(Error::InvalidArgument(
                "multi-objective problem needs at least one utility".into(),
            ));
        }
        if self.utilities.len() != self.sensitivities.len() {
            return Err(Error::InvalidArgument(format!(
                "{} utilities but {} sensitivities",
                self.utilities.len(),
                self.sensitivities.len()
            )));
        }
        Ok(())
    }

    /// Evaluates every utility on every candidate, validating finiteness.
    /// Row `i` holds `u_i` over the candidate pool.
    pub fn utility_matrix(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let mut matrix = Vec::with_capacity(self.utilities.len());
        for u in &self.utilities {
            let mut row = Vec::with_capacity(self.candidates.len());
            for (idx, r) in self.candidates.iter().enumerate() {
                let value = u.eval(self.dataset, r);
                if !value.is_finite() {
                    return Err(Error::NonFiniteUtility {
                        candidate: idx,
                        value,
                    });
                }
                row.push(value);
            }
            matrix.push(row);
        }
        Ok(matrix)
    }

    /// The element local sensitivity engine for this problem's Pareto score.
    pub fn delta_engine(&self) -> Result<ParetoDeltaEngine<'_, X, R>> {
        ParetoDeltaEngine::new(
            self.dataset,
            self.candidates,
            &self.sensitivities,
            self.utility_matrix()?,
        )
    }
}

// ---------------------------------------------------------------------------
// Dominance and Pareto scores
// ---------------------------------------------------------------------------

/// Weak dominance on objective vectors: `a` is at least `b` coordinatewise.
pub fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Weak dominance of candidate `a` over candidate `b` under `utilities`.
pub fn dominates<X, R>(x: &X, a: &R, b: &R, utilities: &[&dyn Utility<X, R>]) -> bool {
    utilities.iter().all(|u| u.eval(x, a) >= u.eval(x, b))
}

/// Pareto scores plus the dominator set behind each score.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoScoreTable {
    scores: Vec<i64>,
    dominators: Vec<Vec<u32>>,
}

impl ParetoScoreTable {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `PS(x,r)` for every candidate, in candidate order.
    pub fn scores(&self) -> &[i64] {
        &self.scores
    }

    pub fn score(&self, r: usize) -> i64 {
        self.scores[r]
    }

    /// Indices of the candidates that weakly dominate `r` (excluding `r`).
    pub fn dominators(&self, r: usize) -> &[u32] {
        &self.dominators[r]
    }

    /// Indices of the candidates other than `r` that do not dominate it;
    /// together with [`Self::dominators`] this partitions the rest of the
    /// pool.
    pub fn non_dominators(&self, r: usize) -> Vec<u32> {
        let dom = &self.dominators[r];
        (0..self.scores.len() as u32)
            .filter(|q| *q != r as u32 && !dom.contains(q))
            .collect()
    }
}

fn validate_matrix(utils: &[Vec<f64>]) -> Result<usize> {
    if utils.is_empty() {
        return Err(Error::InvalidArgument(
            "utility matrix needs at least one objective row".into(),
        ));
    }
    let n = utils[0].len();
    if n == 0 {
        return Err(Error::EmptyCandidates);
    }
    if utils.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(
            "utility matrix rows have unequal lengths".into(),
        ));
    }
    Ok(n)
}

/// Exact pairwise Pareto score table over an `m x n` utility matrix.
///
/// Quadratic in the pool size; the dominator sets are materialized, so this
/// is meant for pools where `n^2` index storage is acceptable. Use
/// [`pareto_score_values`] when only the scores are needed.
pub fn pareto_scores(utils: &[Vec<f64>]) -> Result<ParetoScoreTable> {
    let n = validate_matrix(utils)?;
    let dominators: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|r| {
            (0..n as u32)
                .filter(|&q| {
                    q as usize != r && utils.iter().all(|row| row[q as usize] >= row[r])
                })
                .collect::<Vec<u32>>()
        })
        .collect();
    let scores = dominators.iter().map(|d| -(d.len() as i64)).collect();
    Ok(ParetoScoreTable { scores, dominators })
}

/// Pareto scores without dominator sets.
///
/// For two objectives and a large pool the dominator counts come from an
/// `O(n log n)` sweep; otherwise a pairwise count is used. Both paths apply
/// identical weak-dominance tie semantics.
pub fn pareto_score_values(utils: &[Vec<f64>]) -> Result<Vec<i64>> {
    let n = validate_matrix(utils)?;
    if utils.len() == 2 && n >= SWEEP_MIN_CANDIDATES {
        // Dominators of r including r itself are the pairs with
        // u(q) >= u(r) in both coordinates, which is the same count the
        // interval sweep performs with degenerate intervals.
        let counts = count_cover_sweep(&utils[0], &utils[1], &utils[0], &utils[1]);
        return Ok(counts.iter().map(|&c| -(c as i64 - 1)).collect());
    }
    Ok((0..n)
        .into_par_iter()
        .map(|r| {
            let dominated_by = (0..n)
                .filter(|&q| q != r && utils.iter().all(|row| row[q] >= row[r]))
                .count();
            -(dominated_by as i64)
        })
        .collect())
}

/// The data-independent bound on how much one record can move any Pareto
/// score: every other candidate can start or stop dominating.
pub fn pareto_global_sensitivity(pool: usize) -> Result<f64> {
    if pool == 0 {
        return Err(Error::EmptyCandidates);
    }
    Ok((pool - 1) as f64)
}

// ---------------------------------------------------------------------------
// Coverage metric between candidate sets
// ---------------------------------------------------------------------------

/// Coverage of `evaluated` by `reference`: the fraction of objective vectors
/// in `evaluated` weakly dominated by at least one vector in `reference`.
///
/// `metric_c(x, x) = 1` for any non-empty `x` since weak dominance is
/// reflexive, and the value is monotone in `reference` under inclusion.
pub fn metric_c(reference: &[Vec<f64>], evaluated: &[Vec<f64>]) -> Result<f64> {
    if evaluated.is_empty() {
        return Err(Error::InvalidArgument(
            "coverage metric needs a non-empty evaluated set".into(),
        ));
    }
    let m = evaluated[0].len();
    if evaluated.iter().chain(reference).any(|v| v.len() != m) {
        return Err(Error::InvalidArgument(
            "coverage metric needs equal-length objective vectors".into(),
        ));
    }
    let covered = evaluated
        .iter()
        .filter(|v| reference.iter().any(|w| weakly_dominates(w, v)))
        .count();
    Ok(covered as f64 / evaluated.len() as f64)
}

// ---------------------------------------------------------------------------
// Element local sensitivity of the Pareto score
// ---------------------------------------------------------------------------

/// Incremental evaluator of `delta_PS(x,t,r)` for all candidates, one
/// distance layer at a time.
///
/// Layer `t` widens each candidate's utility box to
/// `[u_i - c_i(t), u_i + c_i(t)]` with `c_i(t) = sum_{j<=t} delta_i(x,j,r)`,
/// accumulated in increasing `j` order so results are reproducible bit for
/// bit. The two definition sets are then counted through the identity
///
/// ```text
///     |dom^-| + |ndom^+| = W - S - 1
/// ```
///
/// where `W` counts candidates `q` (including `r`) whose box top exceeds
/// `r`'s box bottom in every coordinate (`hi_i(q) >= lo_i(r)`), and `S`
/// counts candidates strictly above in every coordinate
/// (`lo_i(q) > hi_i(r)`). The identity holds because current dominators all
/// land in `W`, the members of `S` are exactly the dominators that cannot
/// stop dominating, and the qualifying non-dominators are exactly the
/// remaining members of `W` besides `r` itself. Counting `W` and `S` avoids
/// materializing the dominator partition and admits an `O(n log n)` sweep
/// for two objectives.
pub struct ParetoDeltaEngine<'a, X, R> {
    dataset: &'a X,
    candidates: &'a [R],
    sensitivities: &'a [&'a dyn Sensitivity<X, R>],
    utils: Vec<Vec<f64>>,
    /// Running per-objective prefix sums of `delta_i(x,j,r)` over `j`.
    cum: Vec<Vec<f64>>,
    /// `delta_PS(x,t,.)` rows computed so far, indexed by `t`.
    rows: Vec<Vec<f64>>,
}

impl<'a, X, R> ParetoDeltaEngine<'a, X, R> {
    pub fn new(
        dataset: &'a X,
        candidates: &'a [R],
        sensitivities: &'a [&'a dyn Sensitivity<X, R>],
        utils: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = validate_matrix(&utils)?;
        if n != candidates.len() {
            return Err(Error::InvalidArgument(format!(
                "utility matrix covers {} candidates, pool has {}",
                n,
                candidates.len()
            )));
        }
        if utils.len() != sensitivities.len() {
            return Err(Error::InvalidArgument(format!(
                "{} utility rows but {} sensitivities",
                utils.len(),
                sensitivities.len()
            )));
        }
        let cum = vec![vec![0.0; n]; utils.len()];
        Ok(Self {
            dataset,
            candidates,
            sensitivities,
            utils,
            cum,
            rows: Vec::new(),
        })
    }

    pub fn pool_len(&self) -> usize {
        self.candidates.len()
    }

    /// Pareto scores of the pool this engine was built over.
    pub fn score_values(&self) -> Vec<i64> {
        pareto_score_values(&self.utils).expect("matrix validated at construction")
    }

    /// `delta_PS(x,t,r)`; layers are computed on demand and cached, so any
    /// access order is fine.
    pub fn delta_at(&mut self, r: usize, t: u32) -> Result<f64> {
        self.ensure_layer(t)?;
        Ok(self.rows[t as usize][r])
    }

    /// The full `delta_PS(x,t,.)` row.
    pub fn delta_row(&mut self, t: u32) -> Result<&[f64]> {
        self.ensure_layer(t)?;
        Ok(&self.rows[t as usize])
    }

    fn ensure_layer(&mut self, t: u32) -> Result<()> {
        while self.rows.len() <= t as usize {
            let layer = self.rows.len() as u32;
            self.push_layer(layer)?;
        }
        Ok(())
    }

    fn push_layer(&mut self, t: u32) -> Result<()> {
        let n = self.candidates.len();
        let m = self.utils.len();
        for i in 0..m {
            for (r, candidate) in self.candidates.iter().enumerate() {
                let d = self.sensitivities[i].eval(self.dataset, t, candidate);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidSensitivity { t, value: d });
                }
                self.cum[i][r] += d;
            }
        }
        let lo: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..n).map(|r| self.utils[i][r] - self.cum[i][r]).collect())
            .collect();
        let hi: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..n).map(|r| self.utils[i][r] + self.cum[i][r]).collect())
            .collect();
        let (w, s) = if m == 2 && n >= SWEEP_MIN_CANDIDATES {
            (
                count_cover_sweep(&hi[0], &hi[1], &lo[0], &lo[1]),
                count_above_sweep(&lo[0], &lo[1], &hi[0], &hi[1]),
            )
        } else {
            count_pairs_naive(&lo, &hi)
        };
        let row = w
            .iter()
            .zip(&s)
            .map(|(&wr, &sr)| {
                debug_assert!(wr > sr, "cover count always includes r and excludes S");
                (wr - sr - 1) as f64
            })
            .collect();
        self.rows.push(row);
        Ok(())
    }
}

/// One-shot `delta_PS(x,t,r)` for a problem; the result is a nonnegative
/// integer-valued count bounded by the pool size minus one.
pub fn delta_pareto_score<X, R>(
    problem: &MultiObjectiveProblem<'_, X, R>,
    t: u32,
    r: usize,
) -> Result<f64> {
    let mut engine = problem.delta_engine()?;
    engine.delta_at(r, t)
}

/// Both counts for every candidate by direct pair enumeration: `W` (box top
/// of `q` at least box bottom of `r` in every coordinate, including `q = r`)
/// and `S` (box bottom of `q` strictly above box top of `r` everywhere).
fn count_pairs_naive(lo: &[Vec<f64>], hi: &[Vec<f64>]) -> (Vec<u32>, Vec<u32>) {
    let m = lo.len();
    let n = lo[0].len();
    let mut w = vec![0u32; n];
    let mut s = vec![0u32; n];
    for r in 0..n {
        for q in 0..n {
            let mut cover = true;
            let mut above = true;
            for i in 0..m {
                if hi[i][q] < lo[i][r] {
                    cover = false;
                }
                if lo[i][q] <= hi[i][r] {
                    above = false;
                }
                if !cover && !above {
                    break;
                }
            }
            if cover {
                w[r] += 1;
            }
            if above {
                s[r] += 1;
            }
        }
    }
    (w, s)
}

/// Collapses the two IEEE zeros so rank lookups agree with numeric
/// comparison.
fn norm_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Counting Fenwick tree over value ranks.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![0; n + 1],
        }
    }

    fn add(&mut self, rank: usize) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks strictly below `rank`.
    fn below(&self, rank: usize) -> u32 {
        let mut i = rank;
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }
}

/// For every query `r`: the number of points `q` with `p1[q] >= q1[r]` and
/// `p2[q] >= q2[r]`. Point and query arrays have equal length; with
/// `p = hi` and `q = lo` this is the cover count `W`.
fn count_cover_sweep(p1: &[f64], p2: &[f64], q1: &[f64], q2: &[f64]) -> Vec<u32> {
    let n = p1.len();
    let mut seconds: Vec<f64> = p2.iter().map(|&v| norm_zero(v)).collect();
    seconds.sort_by(f64::total_cmp);
    // Tag 0 inserts points before tag-1 queries on key ties, matching the
    // inclusive comparison on the first coordinate.
    let mut events: Vec<(f64, u8, u32)> = Vec::with_capacity(2 * n);
    for i in 0..n {
        events.push((norm_zero(p1[i]), 0, i as u32));
        events.push((norm_zero(q1[i]), 1, i as u32));
    }
    events.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut bit = Fenwick::new(n);
    let mut inserted = 0u32;
    let mut out = vec![0u32; n];
    for (_, tag, idx) in events {
        let idx = idx as usize;
        if tag == 0 {
            let rank = seconds.partition_point(|&v| v < norm_zero(p2[idx]));
            bit.add(rank);
            inserted += 1;
        } else {
            let strictly_below = seconds.partition_point(|&v| v < norm_zero(q2[idx]));
            out[idx] = inserted - bit.below(strictly_below);
        }
    }
    out
}

/// For every query `r`: the number of points `q` with `p1[q] > q1[r]` and
/// `p2[q] > q2[r]`. With `p = lo` and `q = hi` this is the strictly-above
/// count `S`.
fn count_above_sweep(p1: &[f64], p2: &[f64], q1: &[f64], q2: &[f64]) -> Vec<u32> {
    let n = p1.len();
    let mut seconds: Vec<f64> = p2.iter().map(|&v| norm_zero(v)).collect();
    seconds.sort_by(f64::total_cmp);
    // Tag 0 answers queries before tag-1 points are inserted on key ties,
    // matching the strict comparison on the first coordinate.
    let mut events: Vec<(f64, u8, u32)> = Vec::with_capacity(2 * n);
    for i in 0..n {
        events.push((norm_zero(q1[i]), 0, i as u32));
        events.push((norm_zero(p1[i]), 1, i as u32));
    }
    events.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut bit = Fenwick::new(n);
    let mut inserted = 0u32;
    let mut out = vec![0u32; n];
    for (_, tag, idx) in events {
        let idx = idx as usize;
        if tag == 1 {
            let rank = seconds.partition_point(|&v| v < norm_zero(p2[idx]));
            bit.add(rank);
            inserted += 1;
        } else {
            let at_most = seconds.partition_point(|&v| v <= norm_zero(q2[idx]));
            out[idx] = inserted - bit.below(at_most);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Pareto score as a utility with its sensitivity
// ---------------------------------------------------------------------------

/// The Pareto score of a candidate within a fixed pool, as a utility
/// function over datasets. Used by admissibility checks where the score must
/// be re-derived on perturbed datasets.
pub struct ParetoScoreUtility<'a, X, R> {
    pub candidates: &'a [R],
    pub utilities: &'a [&'a dyn Utility<X, R>],
}

impl<X, R> ParetoScoreUtility<'_, X, R>
where
    R: PartialEq,
{
    fn index_of(&self, r: &R) -> usize {
        self.candidates
            .iter()
            .position(|c| c == r)
            .expect("candidate outside the pool this score was built over")
    }
}

impl<X, R> Utility<X, R> for ParetoScoreUtility<'_, X, R>
where
    X: Sync,
    R: PartialEq + Sync,
{
    fn eval(&self, x: &X, r: &R) -> f64 {
        let utils: Vec<Vec<f64>> = self
            .utilities
            .iter()
            .map(|u| self.candidates.iter().map(|c| u.eval(x, c)).collect())
            .collect();
        let scores = pareto_score_values(&utils).expect("non-empty pool");
        scores[self.index_of(r)] as f64
    }
}

/// `delta_PS` as a sensitivity function over datasets, for the same checks.
pub struct ParetoScoreSensitivity<'a, X, R> {
    pub candidates: &'a [R],
    pub utilities: &'a [&'a dyn Utility<X, R>],
    pub sensitivities: &'a [&'a dyn Sensitivity<X, R>],
}

impl<X, R> Sensitivity<X, R> for ParetoScoreSensitivity<'_, X, R>
where
    X: Sync,
    R: PartialEq + Sync,
{
    fn eval(&self, x: &X, t: u32, r: &R) -> f64 {
        let utils: Vec<Vec<f64>> = self
            .utilities
            .iter()
            .map(|u| self.candidates.iter().map(|c| u.eval(x, c)).collect())
            .collect();
        let mut engine =
            ParetoDeltaEngine::new(x, self.candidates, self.sensitivities, utils)
                .expect("pool validated by caller");
        let idx = self
            .candidates
            .iter()
            .position(|c| c == r)
            .expect("candidate outside the pool this sensitivity was built over");
        engine.delta_at(idx, t).expect("layer computation")
    }
}

// ---------------------------------------------------------------------------
// PrivPareto mechanisms
// ---------------------------------------------------------------------------

/// Global-sensitivity private Pareto selection: runs the chosen global
/// mechanism on the Pareto scores with sensitivity `|R| - 1`. Returns the
/// selected candidate's index.
pub fn privpareto_global<X, R>(
    problem: &MultiObjectiveProblem<'_, X, R>,
    mechanism: GlobalMechanism,
    rng: &mut RandomSource,
) -> Result<usize> {
    let utils = problem.utility_matrix()?;
    let scores: Vec<f64> = pareto_score_values(&utils)?
        .into_iter()
        .map(|s| s as f64)
        .collect();
    let bound = pareto_global_sensitivity(problem.candidates.len())?;
    mech::run_global_mechanism_scores(
        mechanism,
        &scores,
        bound,
        problem.budget.epsilon(),
        rng,
    )
}

/// Local-dampening private Pareto selection: dampens each Pareto score
/// through its own `delta_PS` knot sequence and samples with weight
/// `exp(epsilon * D / 2)`. Returns the selected candidate's index.
///
/// `window` caps how many knot layers may be materialized per candidate and
/// defaults to [`DEFAULT_WINDOW_FACTOR`] times the pool size, which always
/// suffices here because scores are integers in `[-(|R|-1), 0]` and
/// `delta_PS` layers are integer-valued.
pub fn privpareto_local<X, R>(
    problem: &MultiObjectiveProblem<'_, X, R>,
    window: Option<usize>,
    rng: &mut RandomSource,
) -> Result<usize> {
    let mut engine = problem.delta_engine()?;
    let scores: Vec<f64> = engine.score_values().into_iter().map(|s| s as f64).collect();
    let window = window.unwrap_or(DEFAULT_WINDOW_FACTOR * problem.candidates.len());
    mech::local_dampening_scores(
        &scores,
        |i, t| engine.delta_at(i, t),
        window,
        problem.budget.epsilon(),
        rng,
    )
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
