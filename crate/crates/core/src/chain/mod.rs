//! The Markov chains behind both strategies, sampled lazily.
//!
//! [`guard::GuardChain`] and [`ds::DsChain`] generate states and their
//! successors on demand from compact encodings. [`mc`] estimates means by
//! simulation and [`exact`] solves depth-truncated finite versions directly.

pub mod ds;
pub mod exact;
pub mod guard;
pub mod mc;

use std::fmt::Debug;
use std::hash::Hash;

use crate::rng::RandomStream;

pub use ds::{DsChain, DsChainState, Frame, Sel};
pub use exact::{exact_truncated, ExactError, ExactResult, FiniteChain, Truncation};
pub use guard::{GuardChain, GuardChainState, NodeKind};
pub use mc::{mc_counts_guard, mc_estimate, mc_hitting, McConfig, McError, McEstimate};

/// A Markov chain over a countable state space.
pub trait ChainModel {
    type State: Clone + Eq + Hash + Debug;

    fn initial(&self) -> Self::State;

    /// Successors with positive probability; probabilities sum to 1.
    fn transitions(&self, state: &Self::State) -> Vec<(Self::State, f64)>;

    /// Sample one move in place.
    fn step<R: RandomStream + ?Sized>(&self, state: &mut Self::State, rng: &mut R);

    /// Nesting depth used for truncation.
    fn depth(&self, state: &Self::State) -> usize;

    fn is_output(&self, state: &Self::State) -> bool;
}
