//! Privacy budget bookkeeping.
//!
//! A budget is the epsilon of pure differential privacy: a mechanism M
//! satisfies epsilon-DP when Pr[M(x) = o] <= exp(epsilon) * Pr[M(y) = o] for
//! every output o and every pair of neighboring datasets x, y. Budgets compose
//! sequentially, so a pipeline that makes k selection calls on the same data
//! can give each call an even share of the total and report the schedule it
//! actually executed.

use crate::error::{Error, Result};

/// A pure epsilon differential privacy budget. Always finite and positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PrivacyBudget {
    epsilon: f64,
}

impl PrivacyBudget {
    /// Creates a budget from a raw epsilon. Rejects NaN, infinities, zero and
    /// negative values.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self { epsilon })
    }

    /// The epsilon this budget stands for.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Splits the budget evenly across `calls` sequential invocations.
    ///
    /// By sequential composition, running `calls` mechanisms that each satisfy
    /// (epsilon / calls)-DP on the same dataset satisfies epsilon-DP overall.
    pub fn split(&self, calls: usize) -> Result<PrivacyBudget> {
        split_budget(*self, calls)
    }
}

impl std::fmt::Display for PrivacyBudget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "epsilon = {}", self.epsilon)
    }
}

/// Returns the per-call budget for an even split of `total` across `calls`
/// sequential mechanism invocations. `calls` must be at least 1.
pub fn split_budget(total: PrivacyBudget, calls: usize) -> Result<PrivacyBudget> {
    if calls == 0 {
        return Err(Error::InvalidCallCount(calls));
    }
    PrivacyBudget::new(total.epsilon() / calls as f64)
}

/// Records the privacy schedule of a multi-call run.
///
/// The ledger fixes the number of planned calls up front and hands out the
/// same per-call epsilon for each of them, so the spent total is exactly
/// `planned * (total / planned)` by construction. Runs assert at the end that
/// every planned call was made.
#[derive(Debug, Clone)]
pub struct BudgetLedger {
    total: PrivacyBudget,
    per_call: PrivacyBudget,
    planned: usize,
    made: usize,
}

impl BudgetLedger {
    /// Plans `calls` sequential invocations of `total / calls` each.
    pub fn plan(total: PrivacyBudget, calls: usize) -> Result<Self> {
        Ok(Self {
            total,
            per_call: split_budget(total, calls)?,
            planned: calls,
            made: 0,
        })
    }

    /// Hands out the budget for the next call and records it as made.
    pub fn next_call(&mut self) -> Result<PrivacyBudget> {
        if self.made == self.planned {
            return Err(Error::InvalidArgument(format!(
                "budget ledger exhausted: all {} planned calls already made",
                self.planned
            )));
        }
        self.made += 1;
        Ok(self.per_call)
    }

    /// Total budget the ledger was planned with.
    pub fn total(&self) -> PrivacyBudget {
        self.total
    }

    /// Epsilon of each individual call.
    pub fn per_call(&self) -> PrivacyBudget {
        self.per_call
    }

    /// Number of planned calls.
    pub fn planned_calls(&self) -> usize {
        self.planned
    }

    /// Number of calls made so far.
    pub fn calls_made(&self) -> usize {
        self.made
    }

    /// Errors unless every planned call has been made. Run reports call this
    /// before declaring their schedule, so a run can never silently spend
    /// less or more than it claims.
    pub fn assert_exhausted(&self) -> Result<()> {
        if self.made != self.planned {
            return Err(Error::InvalidArgument(format!(
                "budget ledger not exhausted: {} of {} planned calls made",
                self.made, self.planned
            )));
        }
        Ok(())
    }
}
