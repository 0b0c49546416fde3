//! Weighted-sum aggregation of utilities and the PrivAgg mechanisms.
//!
//! A weight vector `w` turns utilities `u_1..u_m` into the scalar
//! `u_agg(x,r) = sum_i w_i * u_i(x,r)`. Admissible sensitivities compose
//! along the same lines:
//!
//! * scaling by `c` multiplies a sensitivity by `|c|`;
//! * a sum of utilities admits the sum of their sensitivities;
//! * hence `delta_agg(x,t,r) = sum_i |w_i| * delta_i(x,t,r)`, and the global
//!   sensitivity of `u_agg` is at most `sum_i |w_i| * Delta_i`.
//!
//! All sums accumulate in increasing index order so evaluations are
//! reproducible bit for bit.

use crate::error::{Error, Result};
use crate::mech::{self, GlobalMechanism, DEFAULT_WINDOW_FACTOR};
use crate::pareto::MultiObjectiveProblem;
use crate::rng::RandomSource;
use crate::sensitivity::{Sensitivity, Utility};

fn validate_weights(weights: &[f64], objectives: usize) -> Result<()> {
    if weights.len() != objectives {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} utilities",
            weights.len(),
            objectives
        )));
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteWeight { index, value });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Aggregate utility
// ---------------------------------------------------------------------------

/// The weighted sum `sum_i w_i * u_i(x,r)`, evaluated in index order.
pub struct AggregateUtility<'a, X, R> {
    utilities: Vec<&'a dyn Utility<X, R>>,
    weights: Vec<f64>,
}

impl<'a, X, R> AggregateUtility<'a, X, R> {
    pub fn new(utilities: Vec<&'a dyn Utility<X, R>>, weights: &[f64]) -> Result<Self> {
        if utilities.is_empty() {
            return Err(Error::InvalidArgument(
                "aggregate utility needs at least one component".into(),
            ));
        }
        validate_weights(weights, utilities.len())?;
        Ok(Self {
            utilities,
            weights: weights.to_vec(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl<X, R> Utility<X, R> for AggregateUtility<'_, X, R> {
    fn eval(&self, x: &X, r: &R) -> f64 {
        let mut sum = 0.0;
        for (u, w) in self.utilities.iter().zip(&self.weights) {
            sum += w * u.eval(x, r);
        }
        sum
    }
}

// ---------------------------------------------------------------------------
// Sensitivity algebra
// ---------------------------------------------------------------------------

/// `|c| * delta`, admissible for `c * u` whenever `delta` is admissible for
/// `u`: both admissibility conditions scale through the absolute value.
pub struct ScaledSensitivity<'a, X, R> {
    inner: &'a dyn Sensitivity<X, R>,
    magnitude: f64,
}

/// See [`ScaledSensitivity`].
pub fn scale_sensitivity<'a, X, R>(
    delta: &'a dyn Sensitivity<X, R>,
    c: f64,
) -> Result<ScaledSensitivity<'a, X, R>> {
    if !c.is_finite() {
        return Err(Error::NonFiniteWeight { index: 0, value: c });
    }
    Ok(ScaledSensitivity {
        inner: delta,
        magnitude: c.abs(),
    })
}

impl<X, R> Sensitivity<X, R> for ScaledSensitivity<'_, X, R> {
    fn eval(&self, x: &X, t: u32, r: &R) -> f64 {
        self.magnitude * self.inner.eval(x, t, r)
    }

    fn global_bound(&self) -> Option<f64> {
        self.inner.global_bound().map(|b| self.magnitude * b)
    }
}

/// The pointwise sum of sensitivities, admissible for the summed utility:
/// condition 1 follows from the triangle inequality on utility differences
/// and condition 2 holds termwise.
pub struct SumSensitivity<'a, X, R> {
    parts: Vec<&'a dyn Sensitivity<X, R>>,
}

/// See [`SumSensitivity`].
pub fn sum_sensitivities<'a, X, R>(
    deltas: Vec<&'a dyn Sensitivity<X, R>>,
) -> Result<SumSensitivity<'a, X, R>> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument(
            "sensitivity sum needs at least one term".into(),
        ));
    }
    Ok(SumSensitivity { parts: deltas })
}

impl<X, R> Sensitivity<X, R> for SumSensitivity<'_, X, R> {
    fn eval(&self, x: &X, t: u32, r: &R) -> f64 {
        let mut sum = 0.0;
        for part in &self.parts {
            sum += part.eval(x, t, r);
        }
        sum
    }

    fn global_bound(&self) -> Option<f64> {
        let mut sum = 0.0;
        for part in &self.parts {
            sum += part.global_bound()?;
        }
        Some(sum)
    }
}

/// `sum_i |w_i| * delta_i(x,t,r)`: the scale rule applied per term followed
/// by the sum rule, fused into one fixed-order accumulation.
pub struct AggregateSensitivity<'a, X, R> {
    deltas: Vec<&'a dyn Sensitivity<X, R>>,
    weights: Vec<f64>,
}

/// See [`AggregateSensitivity`].
pub fn aggregate_sensitivity<'a, X, R>(
    deltas: Vec<&'a dyn Sensitivity<X, R>>,
    weights: &[f64],
) -> Result<AggregateSensitivity<'a, X, R>> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument(
            "aggregate sensitivity needs at least one term".into(),
        ));
    }
    validate_weights(weights, deltas.len())?;
    Ok(AggregateSensitivity {
        deltas,
        weights: weights.to_vec(),
    })
}

impl<X, R> Sensitivity<X, R> for AggregateSensitivity<'_, X, R> {
    fn eval(&self, x: &X, t: u32, r: &R) -> f64 {
        let mut sum = 0.0;
        for (delta, w) in self.deltas.iter().zip(&self.weights) {
            sum += w.abs() * delta.eval(x, t, r);
        }
        sum
    }

    fn global_bound(&self) -> Option<f64> {
        let mut sum = 0.0;
        for (delta, w) in self.deltas.iter().zip(&self.weights) {
            sum += w.abs() * delta.global_bound()?;
        }
        Some(sum)
    }
}

/// Upper bound `sum_i |w_i| * Delta_i` on the global sensitivity of the
/// weighted sum.
pub fn aggregate_global_bound(bounds: &[f64], weights: &[f64]) -> Result<f64> {
    validate_weights(weights, bounds.len())?;
    for &b in bounds {
        if !b.is_finite() || b < 0.0 {
            return Err(Error::InvalidSensitivity { t: 0, value: b });
        }
    }
    let mut sum = 0.0;
    for (b, w) in bounds.iter().zip(weights) {
        sum += w.abs() * b;
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// PrivAgg mechanisms
// ---------------------------------------------------------------------------

fn aggregate_scores<X, R>(
    problem: &MultiObjectiveProblem<'_, X, R>,
    weights: &[f64],
) -> Result<Vec<f64>> {
    let matrix = problem.utility_matrix()?;
    validate_weights(weights, matrix.len())?;
    let n = problem.candidates.len();
    let mut scores = vec![0.0; n];
    for (row, w) in matrix.iter().zip(weights) {
        for (score, value) in scores.iter_mut().zip(row) {
            *score += w * value;
        }
    }
    Ok(scores)
}

/// Global-sensitivity private selection on the weighted sum: runs the chosen
/// global mechanism on `u_agg` with sensitivity `sum_i |w_i| * Delta_i`.
/// Every component sensitivity must carry a global bound. Returns the
/// selected candidate's index.
pub fn privagg_global<X, R>(
    problem: &MultiObjectiveProblem<'_, X, R>,
    weights: &[f64],
    mechanism: GlobalMechanism,
    rng: &mut RandomSource,
) -> Result<usize> {
    let scores = aggregate_scores(problem, weights)?;
    let mut bounds = Vec::with_capacity(problem.sensitivities.len());
    for delta in &problem.sensitivities {
        bounds.push(delta.global_bound().ok_or(Error::MissingGlobalBound)?);
    }
    let bound = aggregate_global_bound(&bounds, weights)?;
    mech::run_global_mechanism_scores(
        mechanism,
        &scores,
        bound,
        problem.budget.epsilon(),
        rng,
    )
}

/// Local-dampening private selection on the weighted sum, with knot widths
/// `sum_i |w_i| * delta_i(x,t,r)`. `window` defaults to
/// [`DEFAULT_WINDOW_FACTOR`] times the pool size; aggregates whose
/// sensitivities are small relative to the utility range need a larger
/// window. Returns the selected candidate's index.
pub fn privagg_local<X, R>(
    problem: &MultiObjectiveProblem<'_, X, R>,
    weights: &[f64],
    window: Option<usize>,
    rng: &mut RandomSource,
) -> Result<usize> {
    let scores = aggregate_scores(problem, weights)?;
    let delta = aggregate_sensitivity(problem.sensitivities.clone(), weights)?;
    let window = window.unwrap_or(DEFAULT_WINDOW_FACTOR * problem.candidates.len());
    mech::local_dampening_scores(
        &scores,
        |i, t| Ok(delta.eval(problem.dataset, t, &problem.candidates[i])),
        window,
        problem.budget.epsilon(),
        rng,
    )
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
