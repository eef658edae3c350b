//! Randomized SLD resolution for test-case generation.
//!
//! * [`term`], [`parser`], [`subst`]: the logic-program subset.
//! * [`engine`]: resolution with pluggable clause selection.
//! * [`strategy`]: standard, guard and drop-and-shuffle selection.
//! * [`analytics`]: closed forms for the expected number of test cases and hitting times.
//! * [`chain`]: Markov-chain simulators and an exact truncated-chain solver.

pub mod analytics;
pub mod chain;
pub mod engine;
pub mod parser;
pub mod programs;
pub mod rng;
pub mod strategy;
pub mod subst;
pub mod term;

pub use engine::{count_run, solve, solve_loop, EngineError, Limits, RunStats, Solution, Target};
pub use parser::{parse_program, parse_query, parse_term, ParseError};
pub use rng::{CountingStream, RandomStream, SplitMix64};
pub use strategy::{DropShuffleParams, GuardParams, Strategy};
pub use subst::{apply, rename_apart, unify, Substitution};
pub use term::{Clause, PredIndicator, Probability, Program, Term, Var};
