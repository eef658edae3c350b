//! Command-line front end for `randsld`: analytic reports, chain
//! simulations and the two generator benchmarks.

pub mod analyze;
pub mod bench;
pub mod config;
pub mod expr;
pub mod simulate;
