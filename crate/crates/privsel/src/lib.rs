//! Differentially private selection from finite candidate sets, with one or
//! several utility objectives.
//!
//! The crate provides, bottom up:
//!
//! * a sensitivity core: utility and sensitivity traits, admissible
//!   distance-indexed sensitivity bounds, neighbor relations for tabular
//!   (add/remove one record) and graph (toggle one edge) data, a brute force
//!   local sensitivity oracle, and an empirical admissibility checker;
//! * four selection mechanisms: the exponential mechanism,
//!   permute-and-flip, report noisy max with Laplace, exponential or Gumbel
//!   noise, and the local dampening mechanism, which replaces the global
//!   sensitivity in the exponential weights by a dampened, data dependent
//!   rescaling of the utility;
//! * multi objective selection: Pareto score utilities with their admissible
//!   sensitivity, and weighted aggregation with sensitivity composition
//!   rules, each runnable through a global mechanism or through local
//!   dampening;
//! * two applications: evolutionary training of private decision trees that
//!   are selected by true positive and true negative rate, and private top-k
//!   node selection in graphs scored by degree and egocentric density.
//!
//! Everything randomized draws from a seeded [`rng::RandomSource`], so runs
//! are reproducible bit for bit.

pub mod agg;
pub mod budget;
pub mod data;
pub mod error;
pub mod graph;
pub mod mech;
pub mod neighbor;
pub mod oracle;
pub mod pareto;
pub mod rng;
pub mod sensitivity;
pub mod tree;

pub use budget::{split_budget, BudgetLedger, PrivacyBudget};
pub use error::{Error, Result};
pub use rng::{derive_seed, RandomSource};
