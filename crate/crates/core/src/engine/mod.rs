//! SLD resolution with a pluggable clause-selection strategy.
//!
//! Goals are selected leftmost-first. At every goal reduction the strategy
//! is asked afresh which clauses to try and in what order; untried ones
//! stay on the choice-point stack.

pub(crate) mod compile;
mod machine;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;
use crate::strategy::Strategy;
use crate::subst::Substitution;
use crate::term::{Program, Term};

pub use machine::Footprint;
use machine::Machine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    Depth,
    Steps,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::Depth => "max_depth",
            LimitKind::Steps => "max_steps",
        })
    }
}

/// Counters of one engine run or loop.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Query restarts, including the one that found the target.
    pub iterations: u64,
    /// Solutions emitted.
    pub results: u64,
    /// Goal reductions, including those where no clause was selected.
    pub steps: u64,
    pub backtracks: u64,
    pub seed: u64,
}

impl RunStats {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EngineError {
    #[error("{kind} exceeded after {} steps", stats.steps)]
    LimitExceeded { kind: LimitKind, stats: RunStats },
    #[error("solution `{0}` is not ground")]
    NonGroundSolution(Term),
    #[error("target variable `{0}` does not occur in the query")]
    UnknownTargetVariable(String),
    #[error("{0} must be positive")]
    ZeroLimit(LimitKind),
}

/// Safety valves. Both are unlimited by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    max_depth: u64,
    max_steps: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits::unlimited()
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits { max_depth: u64::MAX, max_steps: u64::MAX }
    }

    pub fn new(max_depth: Option<u64>, max_steps: Option<u64>) -> Result<Self, EngineError> {
        if max_depth == Some(0) {
            return Err(EngineError::ZeroLimit(LimitKind::Depth));
        }
        if max_steps == Some(0) {
            return Err(EngineError::ZeroLimit(LimitKind::Steps));
        }
        Ok(Limits { max_depth: max_depth.unwrap_or(u64::MAX), max_steps: max_steps.unwrap_or(u64::MAX) })
    }

    pub fn max_depth(&self) -> Option<u64> {
        (self.max_depth != u64::MAX).then_some(self.max_depth)
    }

    pub fn max_steps(&self) -> Option<u64> {
        (self.max_steps != u64::MAX).then_some(self.max_steps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Bindings of the query variables, fully dereferenced.
    pub bindings: Substitution,
    pub stats: RunStats,
}

/// Lazy stream of solutions.
pub struct Solutions<'p, R> {
    machine: Machine<'p>,
    rng: R,
    failed: bool,
}

impl<'p, R: RandomStream> Solutions<'p, R> {
    pub fn stats(&self) -> &RunStats {
        &self.machine.stats
    }

    pub fn is_exhausted(&self) -> bool {
        self.machine.is_exhausted()
    }

    pub fn footprint(&self) -> Footprint {
        self.machine.footprint()
    }

    pub fn into_rng(self) -> R {
        self.rng
    }

    fn bindings(&self) -> Substitution {
        let m = &self.machine;
        let pairs = m.query_vars.iter().filter_map(|(v, addr)| {
            let t = m.materialize(compile::Cell::Ref(*addr));
            (t != Term::Var(v.clone())).then(|| (v.clone(), t))
        });
        Substitution::from_pairs(pairs).expect("heap terms are acyclic")
    }
}

impl<'p, R: RandomStream> Iterator for Solutions<'p, R> {
    type Item = Result<Solution, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.machine.next_solution(&mut self.rng) {
            Ok(true) => Some(Ok(Solution { bindings: self.bindings(), stats: self.machine.stats.clone() })),
            Ok(false) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Solves the conjunction `query`.
pub fn solve<'p, R: RandomStream>(
    program: &'p Program,
    query: &[Term],
    strategy: Strategy,
    rng: R,
    limits: Limits,
) -> Solutions<'p, R> {
    let mut machine = Machine::new(&program.compiled, strategy, limits);
    machine.load_query(query);
    machine.restart();
    machine.stats.iterations = 1;
    Solutions { machine, rng, failed: false }
}

/// Runs `query` once to exhaustion and reports the counters.
pub fn count_run<R: RandomStream>(
    program: &Program,
    query: &[Term],
    strategy: Strategy,
    mut rng: R,
    limits: Limits,
) -> Result<RunStats, EngineError> {
    let mut machine = Machine::new(&program.compiled, strategy, limits);
    machine.load_query(query);
    machine.restart();
    machine.stats.iterations = 1;
    while machine.next_solution(&mut rng)? {}
    Ok(machine.stats)
}

/// Which solution ends a [`solve_loop`].
pub enum Target<'a> {
    /// The query variable equals a literal term.
    Equals { var: String, value: Term },
    /// A test on the ground value of the query variable.
    Matches { var: String, test: Box<dyn Fn(&Term) -> bool + 'a> },
}

impl<'a> Target<'a> {
    pub fn equals(var: &str, value: Term) -> Self {
        Target::Equals { var: var.to_string(), value }
    }

    pub fn matches(var: &str, test: impl Fn(&Term) -> bool + 'a) -> Self {
        Target::Matches { var: var.to_string(), test: Box::new(test) }
    }

    fn var(&self) -> &str {
        match self {
            Target::Equals { var, .. } | Target::Matches { var, .. } => var,
        }
    }
}

/// Re-runs `query` until a solution satisfies `target`.
///
/// `max_steps` bounds the total over all iterations; `max_depth` applies
/// to each derivation.
pub fn solve_loop<R: RandomStream>(
    program: &Program,
    query: &[Term],
    target: &Target<'_>,
    strategy: Strategy,
    mut rng: R,
    limits: Limits,
) -> Result<RunStats, EngineError> {
    let mut machine = Machine::new(&program.compiled, strategy, limits);
    machine.load_query(query);
    let var = machine
        .query_var_cell(target.var())
        .ok_or_else(|| EngineError::UnknownTargetVariable(target.var().to_string()))?;
    let literal = match target {
        Target::Equals { value, .. } => Some(machine.load_term(value)),
        Target::Matches { .. } => None,
    };
    loop {
        machine.restart();
        machine.stats.iterations += 1;
        while machine.next_solution(&mut rng)? {
            let hit = match (target, literal) {
                (Target::Matches { test, .. }, _) => {
                    if !machine.is_ground(var) {
                        return Err(EngineError::NonGroundSolution(machine.materialize(var)));
                    }
                    test(&machine.materialize(var))
                }
                (_, Some(lit)) => machine.equal(var, lit),
                (Target::Equals { .. }, None) => unreachable!(),
            };
            if hit {
                return Ok(machine.stats);
            }
        }
    }
}
