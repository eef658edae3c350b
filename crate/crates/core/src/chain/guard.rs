//! The guard-strategy chain.
//!
//! A block `α` is a word over `1..=r`, one letter per recursion level. Each
//! block holds choice-point states `s_1..s_r` and command states `c_1..c_r`:
//!
//! ```text
//! ♯      -> s_1^ε        p_c   (1 with a forced start)
//! ♯      -> ⊥            1 - p_c
//! s_i^α  -> c_i^α        p_i
//! s_i^α  -> next(i, α)   1 - p_i
//! c_i^α  -> s_1^{α·i}    p_c
//! c_i^α  -> next(i, α)   1 - p_c
//! ```
//!
//! `next(i, α)` is `s_{i+1}^α` for `i < r`. For `i = r` the block is left
//! upward: trailing `r`s are stripped from `α`, and then either nothing is
//! left (`⊥`) or the last letter `j` is removed and the chain resumes at
//! `s_{j+1}` of the remaining block. The looped chain sends every arc into
//! `⊥` to `♯` instead.

use std::fmt;

use smallvec::SmallVec;

use super::ChainModel;
use crate::rng::RandomStream;
use crate::strategy::GuardParams;

pub type Block = SmallVec<[u32; 6]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    /// Choice point before trying alternative `i`.
    S,
    /// Alternative `i` taken; an output state.
    C,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GuardChainState {
    Root,
    Dead,
    Node { kind: NodeKind, index: u32, block: Block },
}

impl GuardChainState {
    pub fn s(index: u32, block: &[u32]) -> Self {
        GuardChainState::Node { kind: NodeKind::S, index, block: block.into() }
    }

    pub fn c(index: u32, block: &[u32]) -> Self {
        GuardChainState::Node { kind: NodeKind::C, index, block: block.into() }
    }

    pub fn block(&self) -> Option<&[u32]> {
        match self {
            GuardChainState::Node { block, .. } => Some(block),
            _ => None,
        }
    }
}

impl fmt::Display for GuardChainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardChainState::Root => f.write_str("#"),
            GuardChainState::Dead => f.write_str("_|_"),
            GuardChainState::Node { kind, index, block } => {
                let k = match kind {
                    NodeKind::S => 's',
                    NodeKind::C => 'c',
                };
                write!(f, "{k}{index}^(")?;
                for (n, l) in block.iter().enumerate() {
                    if n > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{l}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardChain {
    pub params: GuardParams,
    /// Redirect arcs into `⊥` to `♯`.
    pub looped: bool,
    /// `p(♯, s_1^ε) = 1`; `♯` then stops being an output.
    pub forced_start: bool,
}

impl GuardChain {
    pub fn new(params: GuardParams) -> Self {
        GuardChain { params, looped: false, forced_start: false }
    }

    /// Looped chain with a forced start, the setting of the hitting-time formula.
    pub fn looped(params: GuardParams) -> Self {
        GuardChain { params, looped: true, forced_start: true }
    }

    pub fn r(&self) -> u32 {
        self.params.r() as u32
    }

    fn dead(&self) -> GuardChainState {
        if self.looped {
            GuardChainState::Root
        } else {
            GuardChainState::Dead
        }
    }

    fn p(&self, i: u32) -> f64 {
        self.params.p_i(i as usize)
    }

    /// Where a failed alternative `i` of `block` continues.
    fn next_state(&self, i: u32, block: &[u32]) -> GuardChainState {
        if i < self.r() {
            return GuardChainState::s(i + 1, block);
        }
        let r = self.r();
        let keep = block.iter().rposition(|&l| l != r);
        match keep {
            None => self.dead(),
            Some(pos) => GuardChainState::s(block[pos] + 1, &block[..pos]),
        }
    }

    fn next_in_place(&self, state: &mut GuardChainState) {
        let r = self.r();
        let GuardChainState::Node { kind, index, block } = state else { unreachable!() };
        if *index < r {
            *kind = NodeKind::S;
            *index += 1;
            return;
        }
        while block.last() == Some(&r) {
            block.pop();
        }
        match block.pop() {
            None => *state = self.dead(),
            Some(j) => {
                *kind = NodeKind::S;
                *index = j + 1;
            }
        }
    }
}

impl ChainModel for GuardChain {
    type State = GuardChainState;

    fn initial(&self) -> GuardChainState {
        GuardChainState::Root
    }

    fn transitions(&self, state: &GuardChainState) -> Vec<(GuardChainState, f64)> {
        let pc = self.params.p_c();
        let mut out: Vec<(GuardChainState, f64)> = match state {
            GuardChainState::Dead => vec![(GuardChainState::Dead, 1.0)],
            GuardChainState::Root if self.forced_start => vec![(GuardChainState::s(1, &[]), 1.0)],
            GuardChainState::Root => vec![(GuardChainState::s(1, &[]), pc), (self.dead(), 1.0 - pc)],
            GuardChainState::Node { kind: NodeKind::S, index, block } => {
                let p = self.p(*index);
                vec![(GuardChainState::c(*index, block), p), (self.next_state(*index, block), 1.0 - p)]
            }
            GuardChainState::Node { kind: NodeKind::C, index, block } => {
                let mut deeper = block.clone();
                deeper.push(*index);
                vec![
                    (GuardChainState::Node { kind: NodeKind::S, index: 1, block: deeper }, pc),
                    (self.next_state(*index, block), 1.0 - pc),
                ]
            }
        };
        out.retain(|(_, p)| *p > 0.0);
        out
    }

    fn step<R: RandomStream + ?Sized>(&self, state: &mut GuardChainState, rng: &mut R) {
        match state {
            GuardChainState::Dead => {}
            GuardChainState::Root => {
                if self.forced_start || rng.bernoulli(self.params.p_c()) {
                    *state = GuardChainState::s(1, &[]);
                } else {
                    *state = self.dead();
                }
            }
            GuardChainState::Node { kind: kind @ NodeKind::S, index, .. } => {
                if rng.bernoulli(self.params.p_i(*index as usize)) {
                    *kind = NodeKind::C;
                } else {
                    self.next_in_place(state);
                }
            }
            GuardChainState::Node { kind: kind @ NodeKind::C, index, block } => {
                if rng.bernoulli(self.params.p_c()) {
                    block.push(*index);
                    *kind = NodeKind::S;
                    *index = 1;
                } else {
                    self.next_in_place(state);
                }
            }
        }
    }

    fn depth(&self, state: &GuardChainState) -> usize {
        state.block().map_or(0, |b| b.len())
    }

    fn is_output(&self, state: &GuardChainState) -> bool {
        match state {
            GuardChainState::Root => !self.forced_start,
            GuardChainState::Node { kind, .. } => *kind == NodeKind::C,
            GuardChainState::Dead => false,
        }
    }
}
