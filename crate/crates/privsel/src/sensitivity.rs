//! Utility functions and admissible sensitivity bounds.
//!
//! A selection mechanism scores each candidate `r` with a utility `u(x, r)`
//! over the private dataset `x`. How much noise that score needs depends on
//! how fast `u` can change between neighboring datasets:
//!
//! * The global sensitivity is `max |u(x, r) - u(y, r)|` over all neighbor
//!   pairs x, y and all candidates. It is a single worst case constant.
//! * The element local sensitivity at distance `t` is
//!   `LS(x, t, r) = max |u(y, r) - u(z, r)|` over datasets `y` within
//!   distance `t` of the actual input `x` and neighbors `z` of `y`. It is
//!   data dependent and usually far smaller than the global constant.
//!
//! Local sensitivity itself cannot be used directly, because it can differ
//! sharply between neighbors and thereby leak. The usable objects are
//! admissible bounds `delta(x, t, r)` satisfying two conditions:
//!
//! 1. `delta(x, 0, r) >= LS(x, 0, r)` for every dataset `x`, and
//! 2. `delta(x, t + 1, r) >= delta(y, t, r)` for every neighbor `y` of `x`
//!    and every `t >= 0`.
//!
//! Together these make `delta` a smooth, neighbor-stable upper bound on how
//! the utility moves, which is exactly what the dampening mechanism needs.
//! [`check_admissibility`] verifies both conditions empirically on a finite
//! family of instances: condition 1 against the brute force local
//! sensitivity oracle and condition 2 by chaining over all neighbors up to a
//! distance horizon.

use rayon::prelude::*;

use crate::data::CanonicalKey;
use crate::error::Result;
use crate::neighbor::NeighborRelation;
use crate::oracle::brute_force_element_local_sensitivity;

// ---------------------------------------------------------------------------
// Traits
// ---------------------------------------------------------------------------

/// A utility function scoring candidate `r` on dataset `x`.
pub trait Utility<X, R>: Sync {
    fn eval(&self, x: &X, r: &R) -> f64;
}

/// A distance indexed sensitivity bound `delta(x, t, r)`.
pub trait Sensitivity<X, R>: Sync {
    fn eval(&self, x: &X, t: u32, r: &R) -> f64;

    /// A global constant bound, if this sensitivity is one. Mechanisms that
    /// need a global sensitivity (exponential, permute-and-flip, report
    /// noisy max) require `Some`.
    fn global_bound(&self) -> Option<f64> {
        None
    }
}

/// Wraps a closure as a [`Utility`].
pub struct FnUtility<F>(pub F);

impl<X, R, F> Utility<X, R> for FnUtility<F>
where
    F: Fn(&X, &R) -> f64 + Sync,
{
    fn eval(&self, x: &X, r: &R) -> f64 {
        (self.0)(x, r)
    }
}

/// Wraps a closure as a [`Sensitivity`].
pub struct FnSensitivity<F>(pub F);

impl<X, R, F> Sensitivity<X, R> for FnSensitivity<F>
where
    F: Fn(&X, u32, &R) -> f64 + Sync,
{
    fn eval(&self, x: &X, t: u32, r: &R) -> f64 {
        (self.0)(x, t, r)
    }
}

/// A constant global sensitivity bound. Constants are trivially admissible
/// as long as they dominate the true local sensitivity at distance 0, since
/// condition 2 holds with equality.
#[derive(Debug, Clone, Copy)]
pub struct ConstSensitivity(pub f64);

impl<X, R> Sensitivity<X, R> for ConstSensitivity {
    fn eval(&self, _x: &X, _t: u32, _r: &R) -> f64 {
        self.0
    }

    fn global_bound(&self) -> Option<f64> {
        Some(self.0)
    }
}

// ---------------------------------------------------------------------------
// Admissibility checking
// ---------------------------------------------------------------------------

/// Which admissibility condition a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityCondition {
    /// `delta(x, 0, r)` fell below the brute force local sensitivity.
    DominatesLocalSensitivity,
    /// `delta(x, t + 1, r)` fell below `delta(y, t, r)` for a neighbor `y`.
    NeighborMonotone,
}

/// One observed violation of an admissibility condition.
#[derive(Debug, Clone)]
pub struct AdmissibilityViolation {
    pub instance: usize,
    pub condition: AdmissibilityCondition,
    /// Distance parameter at which the violation occurred. For condition 2
    /// this is the `t` of the right hand side `delta(y, t, r)`.
    pub t: u32,
    /// Index of the offending neighbor for condition 2.
    pub neighbor: Option<usize>,
    /// Value that should have dominated.
    pub bound: f64,
    /// Value it had to dominate.
    pub required: f64,
}

/// Result of checking a sensitivity over a family of instances.
#[derive(Debug, Clone, Default)]
pub struct AdmissibilityReport {
    /// Number of (dataset, candidate) instances checked.
    pub instances: usize,
    /// Total number of individual inequalities tested.
    pub inequalities: u64,
    pub violations: Vec<AdmissibilityViolation>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative tolerance for the admissibility inequalities. Both sides are
/// computed from the same floating point primitives, so anything below this
/// is rounding noise, not a real violation.
const ADMISSIBILITY_TOLERANCE: f64 = 1e-9;

fn dominates(bound: f64, required: f64) -> bool {
    bound + ADMISSIBILITY_TOLERANCE * required.abs().max(1.0) >= required
}

/// Checks the two admissibility conditions for `delta` with respect to
/// utility `u` on the given `(dataset, candidate)` instances.
///
/// Condition 1 is tested at distance 0 against the brute force oracle with
/// the given enumeration `budget`. Condition 2 is tested for every
/// `t < t_max` by comparing `delta(x, t + 1, r)` against `delta(y, t, r)`
/// for every neighbor `y` of `x`. Instances are processed in parallel; the
/// report lists violations in instance order.
pub fn check_admissibility<X, R>(
    delta: &dyn Sensitivity<X, R>,
    u: &dyn Utility<X, R>,
    instances: &[(&X, &R)],
    t_max: u32,
    relation: &dyn NeighborRelation<X>,
    budget: usize,
) -> Result<AdmissibilityReport>
where
    X: CanonicalKey + Sync,
    R: Sync,
{
    let per_instance: Vec<Result<(u64, Vec<AdmissibilityViolation>)>> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, &(x, r))| {
            let mut violations = Vec::new();
            let mut inequalities = 0u64;

            let ls = brute_force_element_local_sensitivity(u, x, 0, r, relation, budget)?;
            let bound = delta.eval(x, 0, r);
            inequalities += 1;
            if !dominates(bound, ls) {
                violations.push(AdmissibilityViolation {
                    instance: idx,
                    condition: AdmissibilityCondition::DominatesLocalSensitivity,
                    t: 0,
                    neighbor: None,
                    bound,
                    required: ls,
                });
            }

            let neighbors = relation.neighbors(x);
            for t in 0..t_max {
                let lhs = delta.eval(x, t + 1, r);
                for (n_idx, y) in neighbors.iter().enumerate() {
                    let rhs = delta.eval(y, t, r);
                    inequalities += 1;
                    if !dominates(lhs, rhs) {
                        violations.push(AdmissibilityViolation {
                            instance: idx,
                            condition: AdmissibilityCondition::NeighborMonotone,
                            t,
                            neighbor: Some(n_idx),
                            bound: lhs,
                            required: rhs,
                        });
                    }
                }
            }
            Ok((inequalities, violations))
        })
        .collect();

    let mut report = AdmissibilityReport {
        instances: instances.len(),
        ..Default::default()
    };
    for item in per_instance {
        let (inequalities, violations) = item?;
        report.inequalities += inequalities;
        report.violations.extend(violations);
    }
    Ok(report)
}
