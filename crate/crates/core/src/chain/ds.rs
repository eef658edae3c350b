//! The drop-and-shuffle chain.
//!
//! A state is a stack of frames. Each finished selection for the recursive
//! predicate is paired with the ordered commands still to try at that
//! level; the top may hold a bare selection. With `a = 1 - p_d`:
//!
//! ```text
//! w          -> w·[H|T][], w·[][H|T]    a²/2 each      (w = ε or a pair on top)
//! w          -> w·[], w·[H|T]           a·p_d each
//! w          -> Pop(w)                  p_d²
//! w·x        -> w·⟨x, (y1..yl)⟩         p_d^(r-l)·a^l / l!   (x = [H|T] or [H|T][])
//! w·x        -> Pop(w·x)                p_d^r
//! w·x        -> Pop(w·x)                1                    (x = [] or [][H|T])
//! ```
//!
//! `Pop` backtracks to the next unexplored alternative; `Pop(ε) = ⊥`.

use std::fmt;

use smallvec::SmallVec;

use super::ChainModel;
use crate::rng::{shuffle, RandomStream};
use crate::strategy::DropShuffleParams;

/// Ordered clause selection for the recursive predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sel {
    /// `[]` only.
    Nil,
    /// `[H|T]` only.
    Cons,
    /// `[]`, then `[H|T]`.
    NilCons,
    /// `[H|T]`, then `[]`.
    ConsNil,
}

impl Sel {
    fn as_str(self) -> &'static str {
        match self {
            Sel::Nil => "[]",
            Sel::Cons => "[H|T]",
            Sel::NilCons => "[][H|T]",
            Sel::ConsNil => "[H|T][]",
        }
    }

    /// Whether the selection is currently running the `[H|T]` clause.
    pub fn descends(self) -> bool {
        matches!(self, Sel::Cons | Sel::ConsNil)
    }
}

pub type Commands = SmallVec<[u32; 4]>;

/// A finished selection together with the commands left at its level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub sel: Sel,
    pub com: Commands,
}

impl Frame {
    pub fn new(sel: Sel, com: &[u32]) -> Self {
        assert!(sel.descends() && !com.is_empty());
        Frame { sel, com: com.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DsChainState {
    Dead,
    Stack { frames: Vec<Frame>, top: Option<Sel> },
}

impl DsChainState {
    pub fn empty() -> Self {
        DsChainState::Stack { frames: Vec::new(), top: None }
    }

    pub fn new(frames: Vec<Frame>, top: Option<Sel>) -> Self {
        DsChainState::Stack { frames, top }
    }

    /// The first command of every frame: the test case built so far.
    pub fn prefix(&self) -> Vec<u32> {
        match self {
            DsChainState::Dead => Vec::new(),
            DsChainState::Stack { frames, .. } => frames.iter().map(|f| f.com[0]).collect(),
        }
    }

    /// Whether `self` is a pair-topped state or `ε`, i.e. the root of a recursive sub-tree.
    pub fn is_subtree_root(&self) -> bool {
        matches!(self, DsChainState::Stack { top: None, .. })
    }

    /// Whether `self` lies in the sub-tree rooted at `root`.
    pub fn is_below(&self, root: &DsChainState) -> bool {
        match (self, root) {
            (DsChainState::Stack { frames, .. }, DsChainState::Stack { frames: rf, top: None }) => {
                frames.starts_with(rf)
            }
            _ => false,
        }
    }

    /// Output state whose test case equals `word`.
    pub fn emits(&self, word: &[u32]) -> bool {
        match self {
            DsChainState::Stack { frames, top: Some(Sel::Nil | Sel::NilCons) } => {
                frames.len() == word.len() && frames.iter().zip(word).all(|(f, &w)| f.com[0] == w)
            }
            _ => false,
        }
    }

    /// Backtrack to the next unexplored alternative.
    pub fn pop(&self) -> DsChainState {
        let mut s = self.clone();
        s.pop_in_place();
        s
    }

    pub fn pop_in_place(&mut self) {
        let DsChainState::Stack { frames, top } = self else { return };
        loop {
            match top.take() {
                Some(Sel::NilCons) => {
                    *top = Some(Sel::Cons);
                    return;
                }
                Some(Sel::ConsNil) => {
                    *top = Some(Sel::Nil);
                    return;
                }
                Some(Sel::Nil | Sel::Cons) | None => {}
            }
            let Some(frame) = frames.last_mut() else {
                *self = DsChainState::Dead;
                return;
            };
            if frame.com.len() > 1 {
                frame.com.remove(0);
                return;
            }
            *top = Some(frame.sel);
            frames.pop();
        }
    }
}

impl fmt::Display for DsChainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DsChainState::Dead => f.write_str("⊥"),
            DsChainState::Stack { frames, top } => {
                if frames.is_empty() && top.is_none() {
                    return f.write_str("ε");
                }
                for fr in frames {
                    write!(f, "<{},(", fr.sel.as_str())?;
                    for (n, c) in fr.com.iter().enumerate() {
                        if n > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{c}")?;
                    }
                    f.write_str(")>")?;
                }
                if let Some(t) = top {
                    f.write_str(t.as_str())?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsChain {
    pub params: DropShuffleParams,
    /// Add the edge `⊥ -> ε`.
    pub looped: bool,
}

impl DsChain {
    pub fn new(params: DropShuffleParams) -> Self {
        DsChain { params, looped: false }
    }

    pub fn looped(params: DropShuffleParams) -> Self {
        DsChain { params, looped: true }
    }

    fn with_top(&self, state: &DsChainState, sel: Sel) -> DsChainState {
        let DsChainState::Stack { frames, .. } = state else { unreachable!() };
        DsChainState::Stack { frames: frames.clone(), top: Some(sel) }
    }
}

/// Ordered duplicate-free tuples of `1..=r` of length `l`.
fn tuples(r: u32, l: usize, cur: &mut Vec<u32>, out: &mut Vec<Commands>) {
    if cur.len() == l {
        out.push(cur.as_slice().into());
        return;
    }
    for c in 1..=r {
        if !cur.contains(&c) {
            cur.push(c);
            tuples(r, l, cur, out);
            cur.pop();
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl ChainModel for DsChain {
    type State = DsChainState;

    fn initial(&self) -> DsChainState {
        DsChainState::empty()
    }

    fn transitions(&self, state: &DsChainState) -> Vec<(DsChainState, f64)> {
        let pd = self.params.p_d();
        let a = 1.0 - pd;
        let r = self.params.r;
        let mut out = match state {
            DsChainState::Dead if self.looped => vec![(DsChainState::empty(), 1.0)],
            DsChainState::Dead => vec![(DsChainState::Dead, 1.0)],
            DsChainState::Stack { top: None, .. } => vec![
                (self.with_top(state, Sel::ConsNil), a * a / 2.0),
                (self.with_top(state, Sel::NilCons), a * a / 2.0),
                (self.with_top(state, Sel::Nil), a * pd),
                (self.with_top(state, Sel::Cons), a * pd),
                (state.pop(), pd * pd),
            ],
            DsChainState::Stack { frames, top: Some(x) } if x.descends() => {
                let mut out = Vec::new();
                for l in 1..=r {
                    let p = pd.powi((r - l) as i32) * a.powi(l as i32) / factorial(l);
                    let mut ts = Vec::new();
                    tuples(r as u32, l, &mut Vec::new(), &mut ts);
                    for t in ts {
                        let mut f = frames.clone();
                        f.push(Frame { sel: *x, com: t });
                        out.push((DsChainState::Stack { frames: f, top: None }, p));
                    }
                }
                out.push((state.pop(), pd.powi(r as i32)));
                out
            }
            DsChainState::Stack { .. } => vec![(state.pop(), 1.0)],
        };
        out.retain(|(_, p)| *p > 0.0);
        out
    }

    fn step<R: RandomStream + ?Sized>(&self, state: &mut DsChainState, rng: &mut R) {
        let pd = self.params.p_d();
        match state {
            DsChainState::Dead => {
                if self.looped {
                    *state = DsChainState::empty();
                }
            }
            DsChainState::Stack { top: top @ None, .. } => {
                let nil = !rng.bernoulli(pd);
                let cons = !rng.bernoulli(pd);
                *top = match (nil, cons) {
                    (true, true) => {
                        if rng.next_below(2) == 0 {
                            Some(Sel::ConsNil)
                        } else {
                            Some(Sel::NilCons)
                        }
                    }
                    (true, false) => Some(Sel::Nil),
                    (false, true) => Some(Sel::Cons),
                    (false, false) => {
                        state.pop_in_place();
                        return;
                    }
                };
            }
            DsChainState::Stack { frames, top } if top.is_some_and(Sel::descends) => {
                let mut com = Commands::new();
                for c in 1..=self.params.r as u32 {
                    if !rng.bernoulli(pd) {
                        com.push(c);
                    }
                }
                if com.is_empty() {
                    state.pop_in_place();
                    return;
                }
                shuffle(&mut com, rng);
                frames.push(Frame { sel: top.take().unwrap(), com });
            }
            DsChainState::Stack { .. } => state.pop_in_place(),
        }
    }

    fn depth(&self, state: &DsChainState) -> usize {
        match state {
            DsChainState::Dead => 0,
            DsChainState::Stack { frames, .. } => frames.len(),
        }
    }

    fn is_output(&self, state: &DsChainState) -> bool {
        matches!(state, DsChainState::Stack { top: Some(Sel::Nil | Sel::NilCons), .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn half() -> DsChain {
        DsChain::new(DropShuffleParams::new(0.5, 3).unwrap())
    }

    #[test]
    fn pop_examples() {
        let s = DsChainState::new(
            vec![Frame::new(Sel::ConsNil, &[1, 3]), Frame::new(Sel::ConsNil, &[3]), Frame::new(Sel::Cons, &[1])],
            None,
        );
        let expect = DsChainState::new(vec![Frame::new(Sel::ConsNil, &[1, 3])], Some(Sel::Nil));
        assert_eq!(s.pop(), expect);
        assert_eq!(s.to_string(), "<[H|T][],(1,3)><[H|T][],(3)><[H|T],(1)>");
        let w = vec![Frame::new(Sel::Cons, &[2, 1])];
        assert_eq!(
            DsChainState::new(w.clone(), Some(Sel::NilCons)).pop(),
            DsChainState::new(w.clone(), Some(Sel::Cons))
        );
        assert_eq!(
            DsChainState::new(w.clone(), Some(Sel::Nil)).pop(),
            DsChainState::new(vec![Frame::new(Sel::Cons, &[1])], None)
        );
        assert_eq!(DsChainState::empty().pop(), DsChainState::Dead);
        assert_eq!(DsChainState::new(vec![], Some(Sel::Cons)).pop(), DsChainState::Dead);
    }

    #[test]
    fn tuple_law() {
        let c = half();
        let t = c.transitions(&DsChainState::new(vec![], Some(Sel::Cons)));
        assert_eq!(t.len(), 3 + 6 + 6 + 1);
        let single = t.iter().find(|(s, _)| s.prefix() == [2] && c.depth(s) == 1).unwrap();
        assert!((single.1 - 0.25 * 0.5).abs() < 1e-15);
        let back = t.last().unwrap();
        assert_eq!(back, &(DsChainState::Dead, 0.125));
    }

    #[test]
    fn step_follows_transitions() {
        let c = half();
        let mut rng = SplitMix64::new(4);
        let starts = [
            DsChainState::empty(),
            DsChainState::new(vec![Frame::new(Sel::ConsNil, &[3, 1])], None),
            DsChainState::new(vec![Frame::new(Sel::ConsNil, &[3, 1])], Some(Sel::ConsNil)),
            DsChainState::new(vec![], Some(Sel::NilCons)),
        ];
        for start in starts {
            let table = c.transitions(&start);
            let n = 40_000;
            let mut counts = vec![0usize; table.len()];
            for _ in 0..n {
                let mut s = start.clone();
                c.step(&mut s, &mut rng);
                counts[table.iter().position(|(t, _)| *t == s).expect("successor listed")] += 1;
            }
            for ((_, p), k) in table.iter().zip(counts) {
                let sd = (p * (1.0 - p) / n as f64).sqrt();
                assert!((k as f64 / n as f64 - p).abs() < 4.5 * sd + 1e-12);
            }
        }
    }

    #[test]
    fn outputs_and_prefix() {
        let s =
            DsChainState::new(vec![Frame::new(Sel::Cons, &[2, 1]), Frame::new(Sel::ConsNil, &[3])], Some(Sel::NilCons));
        assert!(half().is_output(&s));
        assert!(s.emits(&[2, 3]));
        assert!(!s.emits(&[2]));
        assert!(DsChainState::new(vec![], Some(Sel::Nil)).emits(&[]));
    }
}
