//! Private selection mechanisms.
//!
//! All mechanisms select one index from a finite candidate list scored by a
//! utility. With global sensitivity `delta_u` and budget `epsilon`, each of
//! the following satisfies epsilon differential privacy:
//!
//! * exponential mechanism: sample candidate `r` with probability
//!   proportional to `exp(epsilon * u(x, r) / (2 delta_u))`;
//! * permute-and-flip: walk a uniformly random permutation and accept
//!   candidate `r` with probability
//!   `exp(epsilon * (u(x, r) - u_max) / (2 delta_u))`, never rejecting a
//!   maximal candidate;
//! * report noisy max: add independent noise of scale `2 delta_u / epsilon`
//!   to every utility and report the argmax. Gumbel noise reproduces the
//!   exponential mechanism exactly, exponential noise reproduces
//!   permute-and-flip exactly, Laplace noise is its own mechanism.
//!
//! The noise scale is `2 delta_u / epsilon` across the board, including the
//! one sided variants, trading a constant factor for uniformity.
//!
//! The local dampening mechanism replaces the global constant with an
//! admissible distance indexed sensitivity `delta(x, t, r)`: the utility is
//! passed through the piecewise linear dampening function
//! [`dampen`], which rescales it by how many sensitivity-sized steps away
//! from the actual dataset a value of that size is, and the mechanism then
//! samples proportional to `exp(epsilon * D / 2)`. Admissibility of `delta`
//! makes this epsilon differentially private while adapting the effective
//! noise to the instance.

use crate::budget::PrivacyBudget;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::sensitivity::{Sensitivity, Utility};

/// Default dampening window, in knots per candidate, as a multiple of the
/// candidate count.
pub const DEFAULT_WINDOW_FACTOR: usize = 10;

// ---------------------------------------------------------------------------
// Mechanism identifiers
// ---------------------------------------------------------------------------

/// Noise family for report noisy max.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Laplace,
    Exponential,
    Gumbel,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseKind::Laplace => write!(f, "laplace"),
            NoiseKind::Exponential => write!(f, "exponential"),
            NoiseKind::Gumbel => write!(f, "gumbel"),
        }
    }
}

/// The mechanisms that work from a single global sensitivity constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalMechanism {
    Exponential,
    PermuteAndFlip,
    NoisyMax(NoiseKind),
}

impl std::fmt::Display for GlobalMechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GlobalMechanism::Exponential => write!(f, "exponential"),
            GlobalMechanism::PermuteAndFlip => write!(f, "permute_flip"),
            GlobalMechanism::NoisyMax(kind) => write!(f, "noisy_max_{kind}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Selection problems
// ---------------------------------------------------------------------------

/// A single objective selection instance: dataset, candidates, utility, its
/// sensitivity and the privacy budget of this one call.
pub struct SelectionProblem<'a, X, R> {
    pub dataset: &'a X,
    pub candidates: &'a [R],
    pub utility: &'a dyn Utility<X, R>,
    pub sensitivity: &'a dyn Sensitivity<X, R>,
    pub budget: PrivacyBudget,
}

impl<'a, X, R> SelectionProblem<'a, X, R> {
    /// Utility of every candidate, validated to be finite.
    pub fn scores(&self) -> Result<Vec<f64>> {
        if self.candidates.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let mut scores = Vec::with_capacity(self.candidates.len());
        for (i, r) in self.candidates.iter().enumerate() {
            let value = self.utility.eval(self.dataset, r);
            if !value.is_finite() {
                return Err(Error::NonFiniteUtility {
                    candidate: i,
                    value,
                });
            }
            scores.push(value);
        }
        Ok(scores)
    }

    /// The global sensitivity constant, or an error for purely local
    /// sensitivities.
    pub fn global_bound(&self) -> Result<f64> {
        let bound = self
            .sensitivity
            .global_bound()
            .ok_or(Error::MissingGlobalBound)?;
        if !bound.is_finite() || bound < 0.0 {
            return Err(Error::InvalidSensitivity {
                t: 0,
                value: bound,
            });
        }
        Ok(bound)
    }
}

// ---------------------------------------------------------------------------
// Shared sampling helpers
// ---------------------------------------------------------------------------

fn all_equal(scores: &[f64]) -> bool {
    scores.windows(2).all(|w| w[0] == w[1])
}

/// Handles the degenerate zero sensitivity case shared by all global
/// mechanisms: a zero bound is only coherent when no candidate can ever be
/// distinguished, in which case selection is uniform.
fn degenerate_uniform(
    scores: &[f64],
    delta_u: f64,
    rng: &mut RandomSource,
) -> Result<Option<usize>> {
    if delta_u > 0.0 {
        return Ok(None);
    }
    if all_equal(scores) {
        Ok(Some(rng.below(scores.len())))
    } else {
        Err(Error::ZeroSensitivityWithSpread)
    }
}

/// Samples an index proportional to `exp(logw)`, in log domain.
///
/// `f64::INFINITY` entries dominate everything: if any are present the draw
/// is uniform among them. `f64::NEG_INFINITY` entries have weight zero. An
/// all zero weight vector is an error.
fn sample_from_log_weights(logw: &[f64], rng: &mut RandomSource) -> Result<usize> {
    let infinite: Vec<usize> = (0..logw.len())
        .filter(|&i| logw[i] == f64::INFINITY)
        .collect();
    if !infinite.is_empty() {
        return Ok(infinite[rng.below(infinite.len())]);
    }
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights);
    }
    let weights: Vec<f64> = logw.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = rng.uniform() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = Some(i);
        }
        acc += w;
        if acc > target {
            return Ok(i);
        }
    }
    // Rounding can leave acc marginally below target; the max weight entry
    // is always positive, so last_positive is Some.
    last_positive.ok_or(Error::DegenerateWeights)
}

fn validated_scores(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    for (i, &s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFiniteUtility {
                candidate: i,
                value: s,
            });
        }
    }
    Ok(())
}

fn validated_global(delta_u: f64, epsilon: f64) -> Result<()> {
    if !delta_u.is_finite() || delta_u < 0.0 {
        return Err(Error::InvalidSensitivity {
            t: 0,
            value: delta_u,
        });
    }
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Exponential mechanism
// ---------------------------------------------------------------------------

/// Exact selection probabilities of the exponential mechanism.
pub fn exponential_probs(scores: &[f64], delta_u: f64, epsilon: f64) -> Result<Vec<f64>> {
    validated_scores(scores)?;
    validated_global(delta_u, epsilon)?;
    if delta_u == 0.0 {
        if all_equal(scores) {
            return Ok(vec![1.0 / scores.len() as f64; scores.len()]);
        }
        return Err(Error::ZeroSensitivityWithSpread);
    }
    let scale = epsilon / (2.0 * delta_u);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|&s| (scale * (s - max)).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Exponential mechanism over raw scores.
pub fn exponential_mechanism_scores(
    scores: &[f64],
    delta_u: f64,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<usize> {
    validated_scores(scores)?;
    validated_global(delta_u, epsilon)?;
    if let Some(i) = degenerate_uniform(scores, delta_u, rng)? {
        return Ok(i);
    }
    let scale = epsilon / (2.0 * delta_u);
    let logw: Vec<f64> = scores.iter().map(|&s| scale * s).collect();
    sample_from_log_weights(&logw, rng)
}

/// Exponential mechanism over a selection problem.
pub fn exponential_mechanism<X, R>(
    problem: &SelectionProblem<'_, X, R>,
    rng: &mut RandomSource,
) -> Result<usize> {
    let scores = problem.scores()?;
    exponential_mechanism_scores(&scores, problem.global_bound()?, problem.budget.epsilon(), rng)
}

// ---------------------------------------------------------------------------
// Permute-and-flip
// ---------------------------------------------------------------------------

/// Permute-and-flip over raw scores.
pub fn permute_and_flip_scores(
    scores: &[f64],
    delta_u: f64,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<usize> {
    validated_scores(scores)?;
    validated_global(delta_u, epsilon)?;
    if let Some(i) = degenerate_uniform(scores, delta_u, rng)? {
        return Ok(i);
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = epsilon / (2.0 * delta_u);
    for i in rng.permutation(scores.len()) {
        let accept = (scale * (scores[i] - max)).exp();
        if rng.uniform() < accept {
            return Ok(i);
        }
    }
    // A maximal candidate has acceptance probability exp(0) = 1 and uniform()
    // is strictly below 1, so the walk cannot fall through.
    unreachable!("permute-and-flip always accepts a maximal candidate")
}

/// Permute-and-flip over a selection problem.
pub fn permute_and_flip<X, R>(
    problem: &SelectionProblem<'_, X, R>,
    rng: &mut RandomSource,
) -> Result<usize> {
    let scores = problem.scores()?;
    permute_and_flip_scores(&scores, problem.global_bound()?, problem.budget.epsilon(), rng)
}

// ---------------------------------------------------------------------------
// Report noisy max
// ---------------------------------------------------------------------------

/// Report noisy max over raw scores with the given noise family.
pub fn report_noisy_max_scores(
    scores: &[f64],
    delta_u: f64,
    epsilon: f64,
    noise: NoiseKind,
    rng: &mut RandomSource,
) -> Result<usize> {
    validated_scores(scores)?;
    validated_global(delta_u, epsilon)?;
    if let Some(i) = degenerate_uniform(scores, delta_u, rng)? {
        return Ok(i);
    }
    let scale = 2.0 * delta_u / epsilon;
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for (i, &s) in scores.iter().enumerate() {
        let z = match noise {
            NoiseKind::Laplace => rng.laplace(scale),
            NoiseKind::Exponential => rng.exponential(scale),
            NoiseKind::Gumbel => rng.gumbel(scale),
        };
        let value = s + z;
        if value > best_value {
            best = i;
            best_value = value;
        }
    }
    Ok(best)
}

/// Report noisy max over a selection problem.
pub fn report_noisy_max<X, R>(
    problem: &SelectionProblem<'_, X, R>,
    noise: NoiseKind,
    rng: &mut RandomSource,
) -> Result<usize> {
    let scores = problem.scores()?;
    report_noisy_max_scores(
        &scores,
        problem.global_bound()?,
        problem.budget.epsilon(),
        noise,
        rng,
    )
}

/// Runs whichever global mechanism `mech` names on raw scores.
pub fn run_global_mechanism_scores(
    mech: GlobalMechanism,
    scores: &[f64],
    delta_u: f64,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<usize> {
    match mech {
        GlobalMechanism::Exponential => exponential_mechanism_scores(scores, delta_u, epsilon, rng),
        GlobalMechanism::PermuteAndFlip => permute_and_flip_scores(scores, delta_u, epsilon, rng),
        GlobalMechanism::NoisyMax(kind) => {
            report_noisy_max_scores(scores, delta_u, epsilon, kind, rng)
        }
    }
}

/// Runs whichever global mechanism `mech` names on a selection problem.
pub fn run_global_mechanism<X, R>(
    mech: GlobalMechanism,
    problem: &SelectionProblem<'_, X, R>,
    rng: &mut RandomSource,
) -> Result<usize> {
    let scores = problem.scores()?;
    run_global_mechanism_scores(
        mech,
        &scores,
        problem.global_bound()?,
        problem.budget.epsilon(),
        rng,
    )
}

// ---------------------------------------------------------------------------
// Dampening
// ---------------------------------------------------------------------------

/// Evaluates the dampening function for one candidate.
///
/// Let `delta_at(t)` be the candidate's admissible sensitivity at distance
/// `t` and define knots `b_0 = 0`, `b_i = delta_at(0) + ... + delta_at(i-1)`
/// for `i > 0`, and `b_{-i} = -b_i`. The dampening value of a utility `u` is
/// the piecewise linear interpolation of the knot index: for the smallest
/// `i` with `b_i <= u < b_{i+1}`,
///
/// ```text
/// D(u) = (u - b_i) / (b_{i+1} - b_i) + i
/// ```
///
/// so `D(b_i) = i` exactly, `D` is odd around 0, and it is nondecreasing in
/// `u`. Intuitively `D(u)` counts how many dataset steps of movement the
/// sensitivity bound permits between utility 0 and utility `u`; the local
/// dampening mechanism exponentiates it in place of `u / delta_u`.
///
/// Conventions for degenerate sequences:
///
/// * `u == 0` is always 0, even when every knot is 0;
/// * zero width intervals have no preimage; repeated knots take the
///   smallest index `i` as required above, so a run of equal knots maps to
///   its boundary away from zero;
/// * if every knot within the window is 0 and `u != 0` the magnitude of `u`
///   lies beyond any amount of permitted movement, and `D` is plus or minus
///   infinity (an infinitely favored or infinitely dampened candidate);
/// * if the knots are growing but `|u|` is still beyond the window, the
///   window was too small and that is an error.
///
/// `window` bounds how many knots are materialized.
pub fn dampen(
    u: f64,
    mut delta_at: impl FnMut(u32) -> Result<f64>,
    window: usize,
) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::NonFiniteUtility {
            candidate: 0,
            value: u,
        });
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let positive = u > 0.0;
    let v = u.abs();
    let mut s_prev = 0.0f64; // knot b_j for the current j
    let mut exact_run_end: Option<usize> = None;
    for j in 0..window {
        let d = delta_at(j as u32)?;
        if !d.is_finite() || d < 0.0 {
            return Err(Error::InvalidSensitivity {
                t: j as u32,
                value: d,
            });
        }
        let s_next = s_prev + d;
        if positive {
            if s_next == v {
                // First hit is the smallest index with this knot value.
                return Ok((j + 1) as f64);
            }
            if s_prev < v && v < s_next {
                return Ok((v - s_prev) / (s_next - s_prev) + j as f64);
            }
        } else if s_next == v {
            // Mirrored side: the smallest signed index means the largest
            // magnitude, so the run of equal knots must be followed to its
            // end before answering.
            exact_run_end = Some(j + 1);
        } else if s_next > v {
            if let Some(end) = exact_run_end {
                return Ok(-(end as f64));
            }
            // s_prev < v here: an earlier equal knot would have set the run
            // marker and the sums are nondecreasing.
            return Ok((s_next - v) / (s_next - s_prev) - (j + 1) as f64);
        }
        s_prev = s_next;
    }
    if let Some(end) = exact_run_end {
        return Ok(-(end as f64));
    }
    if s_prev == 0.0 {
        return Ok(if positive {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        });
    }
    Err(Error::WindowExhausted {
        candidate: 0,
        target: v,
        reached: s_prev,
        window,
    })
}

// ---------------------------------------------------------------------------
// Local dampening mechanism
// ---------------------------------------------------------------------------

/// Local dampening over raw scores.
///
/// `delta_at(i, t)` must return the admissible sensitivity of candidate `i`
/// at distance `t`. Samples proportional to `exp(epsilon * D_i / 2)` where
/// `D_i` is the dampened utility of candidate `i`.
pub fn local_dampening_scores(
    scores: &[f64],
    mut delta_at: impl FnMut(usize, u32) -> Result<f64>,
    window: usize,
    epsilon: f64,
    rng: &mut RandomSource,
) -> Result<usize> {
    validated_scores(scores)?;
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let mut logw = Vec::with_capacity(scores.len());
    for (i, &s) in scores.iter().enumerate() {
        let d = dampen(s, |t| delta_at(i, t), window).map_err(|e| match e {
            Error::WindowExhausted {
                target,
                reached,
                window,
                ..
            } => Error::WindowExhausted {
                candidate: i,
                target,
                reached,
                window,
            },
            other => other,
        })?;
        logw.push(if d.is_finite() {
            epsilon * d / 2.0
        } else {
            // Signed infinities survive the scaling untouched.
            d
        });
    }
    sample_from_log_weights(&logw, rng)
}

/// Local dampening over a selection problem. `window` defaults to
/// [`DEFAULT_WINDOW_FACTOR`] times the candidate count; callers whose
/// sensitivities grow slowly toward the utility range should pass a larger
/// window explicitly.
pub fn local_dampening<X, R>(
    problem: &SelectionProblem<'_, X, R>,
    window: Option<usize>,
    rng: &mut RandomSource,
) -> Result<usize> {
    let scores = problem.scores()?;
    let window = window.unwrap_or(DEFAULT_WINDOW_FACTOR * problem.candidates.len());
    local_dampening_scores(
        &scores,
        |i, t| {
            let d = problem
                .sensitivity
                .eval(problem.dataset, t, &problem.candidates[i]);
            Ok(d)
        },
        window,
        problem.budget.epsilon(),
        rng,
    )
}

// ---------------------------------------------------------------------------
// Empirical privacy audit
// ---------------------------------------------------------------------------

/// Estimates the worst case outcome probability log ratio between two
/// samplers, the quantity bounded by epsilon under differential privacy.
///
/// Draws `samples` outcomes from each sampler, add-one smooths both outcome
/// histograms, and returns `max_o |ln(p_x(o) / p_y(o))|`. The samplers
/// receive the shared `rng` and must return outcome indices below
/// `outcomes`.
pub fn empirical_dp_check(
    mut sample_x: impl FnMut(&mut RandomSource) -> Result<usize>,
    mut sample_y: impl FnMut(&mut RandomSource) -> Result<usize>,
    outcomes: usize,
    samples: u64,
    rng: &mut RandomSource,
) -> Result<f64> {
    if outcomes == 0 {
        return Err(Error::InvalidArgument("no outcomes to compare".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut counts_x = vec![0u64; outcomes];
    let mut counts_y = vec![0u64; outcomes];
    for _ in 0..samples {
        let o = sample_x(rng)?;
        *counts_x.get_mut(o).ok_or_else(|| {
            Error::InvalidArgument(format!("sampler returned outcome {o} of {outcomes}"))
        })? += 1;
        let o = sample_y(rng)?;
        *counts_y.get_mut(o).ok_or_else(|| {
            Error::InvalidArgument(format!("sampler returned outcome {o} of {outcomes}"))
        })? += 1;
    }
    let denom = (samples + outcomes as u64) as f64;
    let mut worst = 0.0f64;
    for o in 0..outcomes {
        let px = (counts_x[o] + 1) as f64 / denom;
        let py = (counts_y[o] + 1) as f64 / denom;
        worst = worst.max((px / py).ln().abs());
    }
    Ok(worst)
}
