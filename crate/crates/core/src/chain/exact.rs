//! Exact hitting probabilities and times on depth-truncated chains.
//!
//! States up to a depth cap are enumerated breadth-first from a start
//! state. Moves past the cap either fall into an absorbing sink
//! ([`Truncation::Absorb`]) or jump back to the start
//! ([`Truncation::Restart`]), which keeps a recurrent chain recurrent.
//! The linear systems are solved by dense LU decomposition.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use super::ChainModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Absorb,
    Restart,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("more than {0} states below the depth cap")]
    BudgetExceeded(usize),
    #[error("start state is deeper than the cap")]
    StartTooDeep,
    #[error("hitting-time system is singular")]
    Singular,
}

pub const DEFAULT_BUDGET: usize = 4000;

/// A finite chain. Index 0 is the start state; with [`Truncation::Absorb`]
/// the last index is the sink.
#[derive(Debug, Clone)]
pub struct FiniteChain<S> {
    pub states: Vec<S>,
    index: HashMap<S, usize>,
    rows: Vec<Vec<(usize, f64)>>,
    sink: Option<usize>,
}

impl<S: Clone + Eq + std::hash::Hash> FiniteChain<S> {
    pub fn build<M>(model: &M, start: &S, depth_cap: usize, budget: usize, mode: Truncation) -> Result<Self, ExactError>
    where
        M: ChainModel<State = S>,
    {
        if model.depth(start) > depth_cap {
            return Err(ExactError::StartTooDeep);
        }
        let mut states = vec![start.clone()];
        let mut index = HashMap::from([(start.clone(), 0)]);
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        let mut cut = false;
        // Sink index is fixed after enumeration; mark with usize::MAX meanwhile.
        while let Some(i) = queue.pop_front() {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (t, p) in model.transitions(&states[i]) {
                let j = if model.depth(&t) > depth_cap {
                    cut = true;
                    match mode {
                        Truncation::Absorb => usize::MAX,
                        Truncation::Restart => 0,
                    }
                } else if let Some(&j) = index.get(&t) {
                    j
                } else {
                    if states.len() >= budget {
                        return Err(ExactError::BudgetExceeded(budget));
                    }
                    let j = states.len();
                    index.insert(t.clone(), j);
                    states.push(t);
                    queue.push_back(j);
                    j
                };
                match row.iter_mut().find(|(k, _)| *k == j) {
                    Some(e) => e.1 += p,
                    None => row.push((j, p)),
                }
            }
            if rows.len() <= i {
                rows.resize(i + 1, Vec::new());
            }
            rows[i] = row;
        }
        let sink = (cut && mode == Truncation::Absorb).then_some(states.len());
        if let Some(s) = sink {
            for row in &mut rows {
                for e in row.iter_mut().filter(|e| e.0 == usize::MAX) {
                    e.0 = s;
                }
            }
            rows.push(vec![(s, 1.0)]);
        }
        Ok(FiniteChain { states, index, rows, sink })
    }

    /// Number of indices, including the sink.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn index_of(&self, s: &S) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Indicator over all indices of the states satisfying `pred`; the sink is never included.
    pub fn mask(&self, pred: impl Fn(&S) -> bool) -> Vec<bool> {
        let mut m: Vec<bool> = self.states.iter().map(pred).collect();
        m.resize(self.len(), false);
        m
    }

    /// For first passage into `stop`: the probability that the state entered
    /// lies in `goal`, and `E[H · 1{entered state in goal}]`.
    pub fn first_passage(&self, stop: &[bool], goal: &[bool]) -> Result<(Vec<f64>, Vec<f64>), ExactError> {
        let n = self.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            if !stop[i] {
                for &(j, _) in row {
                    preds[j].push(i);
                }
            }
        }
        let mut live = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| stop[i] && goal[i]).collect();
        while let Some(j) = queue.pop_front() {
            for &i in &preds[j] {
                if !live[i] {
                    live[i] = true;
                    queue.push_back(i);
                }
            }
        }
        let vars: Vec<usize> = (0..n).filter(|&i| live[i] && !stop[i]).collect();
        let mut slot = vec![usize::MAX; n];
        for (k, &i) in vars.iter().enumerate() {
            slot[i] = k;
        }
        let m = vars.len();
        let mut prob: Vec<f64> = (0..n).map(|i| if stop[i] && goal[i] { 1.0 } else { 0.0 }).collect();
        let mut time = vec![0.0; n];
        if m == 0 {
            return Ok((prob, time));
        }
        let mut a = DMatrix::<f64>::identity(m, m);
        let mut b = DVector::<f64>::zeros(m);
        for (k, &i) in vars.iter().enumerate() {
            for &(j, p) in &self.rows[i] {
                if slot[j] != usize::MAX {
                    a[(k, slot[j])] -= p;
                } else if stop[j] && goal[j] {
                    b[k] += p;
                }
            }
        }
        let lu = a.lu();
        let h = lu.solve(&b).ok_or(ExactError::Singular)?;
        let g = lu.solve(&h).ok_or(ExactError::Singular)?;
        for (k, &i) in vars.iter().enumerate() {
            prob[i] = h[k];
            time[i] = g[k];
        }
        Ok((prob, time))
    }

    /// Probability of ever entering `target`.
    pub fn hit_probabilities(&self, target: &[bool]) -> Result<Vec<f64>, ExactError> {
        Ok(self.first_passage(target, target)?.0)
    }

    /// Mean hitting times of `target`; infinite where the target may be missed.
    pub fn mean_hitting_times(&self, target: &[bool]) -> Result<Vec<f64>, ExactError> {
        let (h, g) = self.first_passage(target, target)?;
        Ok(h.iter().zip(g).map(|(&h, g)| if h > 1.0 - 1e-9 { g / h } else { f64::INFINITY }).collect())
    }

    /// Mean hitting times conditioned on hitting.
    pub fn conditional_hitting_times(&self, target: &[bool]) -> Result<Vec<f64>, ExactError> {
        let (h, g) = self.first_passage(target, target)?;
        Ok(h.iter().zip(g).map(|(&h, g)| if h > 0.0 { g / h } else { f64::NAN }).collect())
    }

    /// Probability of entering `y` before `target`.
    pub fn hit_before(&self, y: usize, target: &[bool]) -> Result<Vec<f64>, ExactError> {
        let mut stop = target.to_vec();
        stop[y] = true;
        let mut goal = vec![false; self.len()];
        goal[y] = true;
        Ok(self.first_passage(&stop, &goal)?.0)
    }

    /// Probability of falling into the sink before `target`.
    pub fn truncation_mass(&self, target: &[bool]) -> Result<Vec<f64>, ExactError> {
        let Some(s) = self.sink else { return Ok(vec![0.0; self.len()]) };
        self.hit_before(s, target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactResult {
    pub hit_probability: f64,
    /// Mean hitting time given that the target is hit.
    pub conditional_mht: f64,
    /// Probability of crossing the depth cap before the target.
    pub truncation_mass: f64,
    pub states: usize,
}

/// Hitting probability and conditional mean hitting time of `target` from
/// `start`, with moves past `depth_cap` absorbed.
pub fn exact_truncated<M: ChainModel>(
    model: &M,
    start: &M::State,
    target: impl Fn(&M::State) -> bool,
    depth_cap: usize,
) -> Result<ExactResult, ExactError> {
    let fc = FiniteChain::build(model, start, depth_cap, DEFAULT_BUDGET, Truncation::Absorb)?;
    let mask = fc.mask(target);
    let (h, g) = fc.first_passage(&mask, &mask)?;
    let mass = fc.truncation_mass(&mask)?;
    Ok(ExactResult {
        hit_probability: h[0],
        conditional_mht: if h[0] > 0.0 { g[0] / h[0] } else { f64::NAN },
        truncation_mass: mass[0],
        states: fc.states.len(),
    })
}
