//! Support library for the `privsel` command line tool: dataset loaders,
//! enumerated instance families for admissibility and privacy audits, and
//! the seeded experiment runner.

pub mod audit;
pub mod families;
pub mod io;
pub mod runner;
