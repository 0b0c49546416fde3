//! Brute force reference for element local sensitivity.
//!
//! The oracle enumerates the dataset ball of radius `t` around the input by
//! breadth first search over the neighbor relation, deduplicating datasets
//! by canonical key, and takes the exact maximum of
//! `|u(y, r) - u(z, r)|` over every `y` in the ball and every neighbor `z`
//! of `y`. It knows nothing about any closed form sensitivity bound, which
//! is what makes it a usable independent check for them.
//!
//! The search is exponential in `t`, so it carries an explicit enumeration
//! budget and fails hard when the budget runs out rather than returning a
//! partial maximum.

use std::collections::BTreeSet;

use crate::data::CanonicalKey;
use crate::error::{Error, Result};
use crate::neighbor::NeighborRelation;
use crate::sensitivity::Utility;

/// Default cap on how many datasets a single brute force search may visit.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 100_000;

/// Exact `max |u(y, r) - u(z, r)|` over datasets `y` with
/// `distance(x, y) <= t` and neighbors `z` of `y`.
///
/// `budget` bounds the total number of datasets materialized (ball members
/// plus their neighbors). Exceeding it returns
/// [`Error::EnumerationBudgetExhausted`].
pub fn brute_force_element_local_sensitivity<X, R>(
    u: &dyn Utility<X, R>,
    x: &X,
    t: u32,
    r: &R,
    relation: &dyn NeighborRelation<X>,
    budget: usize,
) -> Result<f64>
where
    X: CanonicalKey,
{
    let mut visited: BTreeSet<Vec<u8>> = BTreeSet::new();
    visited.insert(x.canonical_key());

    let mut explored: usize = 1;
    let mut max_diff = 0.0f64;

    // Depth 0: neighbors of x itself, collected as the depth 1 layer when
    // the ball extends further.
    let mut layer: Vec<X> = Vec::new();
    let ux = u.eval(x, r);
    for z in relation.neighbors(x) {
        explored += 1;
        if explored > budget {
            return Err(Error::EnumerationBudgetExhausted { budget });
        }
        let diff = (ux - u.eval(&z, r)).abs();
        if diff > max_diff {
            max_diff = diff;
        }
        if t > 0 && visited.insert(z.canonical_key()) {
            layer.push(z);
        }
    }

    for depth in 1..=t {
        let mut next: Vec<X> = Vec::new();
        for y in &layer {
            let uy = u.eval(y, r);
            for z in relation.neighbors(y) {
                explored += 1;
                if explored > budget {
                    return Err(Error::EnumerationBudgetExhausted { budget });
                }
                let diff = (uy - u.eval(&z, r)).abs();
                if diff > max_diff {
                    max_diff = diff;
                }
                if depth < t && visited.insert(z.canonical_key()) {
                    next.push(z);
                }
            }
        }
        layer = next;
    }

    Ok(max_diff)
}
