//! Clause-selection strategies and their parameters.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{shuffle, RandomStream};
use crate::term::Probability;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParamError {
    #[error("r must be at least 1")]
    EmptyAlternatives,
    #[error("expected {expected} clause probabilities, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error(transparent)]
    Probability(#[from] crate::term::ProbabilityError),
}

/// Guard probabilities of the generator program: `p_c` on the recursive
/// clause and `p_1..p_r` on the `r` alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardParams {
    pub p_cont: Probability,
    pub p: Vec<Probability>,
}

impl GuardParams {
    pub fn new(p_cont: f64, p: &[f64]) -> Result<Self, ParamError> {
        if p.is_empty() {
            return Err(ParamError::EmptyAlternatives);
        }
        Ok(GuardParams {
            p_cont: Probability::new(p_cont)?,
            p: p.iter().map(|&x| Probability::new(x)).collect::<Result<_, _>>()?,
        })
    }

    /// `r` alternatives, all with probability `p`.
    pub fn uniform(r: usize, p: f64, p_cont: f64) -> Result<Self, ParamError> {
        GuardParams::new(p_cont, &vec![p; r])
    }

    pub fn r(&self) -> usize {
        self.p.len()
    }

    pub fn p_c(&self) -> f64 {
        self.p_cont.get()
    }

    /// Probability of alternative `i`, 1-based.
    pub fn p_i(&self, i: usize) -> f64 {
        self.p[i - 1].get()
    }

    pub fn sum_p(&self) -> f64 {
        self.p.iter().map(|p| p.get()).sum()
    }

    pub fn p_max(&self) -> f64 {
        self.p.iter().map(|p| p.get()).fold(0.0, f64::max)
    }

    /// `η = r · p_max · p_c`.
    pub fn eta(&self) -> f64 {
        self.r() as f64 * self.p_max() * self.p_c()
    }

    /// The common value of `p_1..p_r`, if they are all equal.
    pub fn uniform_p(&self) -> Option<f64> {
        let first = self.p[0].get();
        self.p.iter().all(|p| p.get() == first).then_some(first)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropShuffleParams {
    pub p_drop: Probability,
    pub r: usize,
}

impl DropShuffleParams {
    pub fn new(p_drop: f64, r: usize) -> Result<Self, ParamError> {
        if r == 0 {
            return Err(ParamError::EmptyAlternatives);
        }
        Ok(DropShuffleParams { p_drop: Probability::new(p_drop)?, r })
    }

    pub fn p_d(&self) -> f64 {
        self.p_drop.get()
    }
}

/// The clause-selection function consulted at every goal reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Source order, as in ordinary SLD resolution.
    Standard,
    /// Each clause is tried only if its guard draw succeeds.
    Guard,
    /// Each matching clause is dropped with probability `p_drop`, the rest are shuffled.
    DropShuffle { p_drop: Probability },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Standard => "standard",
            Strategy::Guard => "guard",
            Strategy::DropShuffle { .. } => "drop_shuffle",
        }
    }

    /// Whether the strategy needs the list narrowed to head-unifiable clauses first.
    pub fn filters_matches(&self) -> bool {
        matches!(self, Strategy::DropShuffle { .. })
    }

    /// Appends the selected items to `out`, in the order they should be tried.
    pub fn select_into<T: Copy, R: RandomStream + ?Sized>(
        &self,
        items: &[T],
        guard: impl FnMut(&T) -> f64,
        rng: &mut R,
        out: &mut Vec<T>,
    ) {
        match *self {
            Strategy::Standard => out.extend_from_slice(items),
            Strategy::Guard => select_guard_into(items, guard, rng, out),
            Strategy::DropShuffle { p_drop } => select_drop_shuffle_into(items, p_drop.get(), rng, out),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::DropShuffle { p_drop } => write!(f, "drop_shuffle(p_drop={p_drop})"),
            other => f.write_str(other.name()),
        }
    }
}

pub fn select_standard<T: Clone>(matches: &[T]) -> Vec<T> {
    matches.to_vec()
}

/// Keeps item `i` iff a fresh draw falls below its guard probability.
pub fn select_guard_into<T: Copy, R: RandomStream + ?Sized>(
    matches: &[T],
    mut guard: impl FnMut(&T) -> f64,
    rng: &mut R,
    out: &mut Vec<T>,
) {
    for m in matches {
        if rng.bernoulli(guard(m)) {
            out.push(*m);
        }
    }
}

pub fn select_guard<T: Clone, R: RandomStream + ?Sized>(
    matches: &[T],
    mut guard: impl FnMut(&T) -> f64,
    rng: &mut R,
) -> Vec<T> {
    matches.iter().filter(|m| rng.bernoulli(guard(m))).cloned().collect()
}

/// Drops every item with probability `p_drop`, then shuffles the survivors.
pub fn select_drop_shuffle_into<T: Copy, R: RandomStream + ?Sized>(
    matches: &[T],
    p_drop: f64,
    rng: &mut R,
    out: &mut Vec<T>,
) {
    let start = out.len();
    for m in matches {
        if !rng.bernoulli(p_drop) {
            out.push(*m);
        }
    }
    shuffle(&mut out[start..], rng);
}

pub fn select_drop_shuffle<T: Clone, R: RandomStream + ?Sized>(matches: &[T], p_drop: f64, rng: &mut R) -> Vec<T> {
    let mut kept: Vec<T> = matches.iter().filter(|_| !rng.bernoulli(p_drop)).cloned().collect();
    shuffle(&mut kept, rng);
    kept
}

/// Probability that drop-and-shuffle returns one particular tuple of size `k` out of `n`.
pub fn drop_shuffle_tuple_probability(n: usize, k: usize, p_drop: f64) -> f64 {
    assert!(k <= n);
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    p_drop.powi((n - k) as i32) * (1.0 - p_drop).powi(k as i32) / fact
}
