//! Monte Carlo estimators over independent, individually seeded trials.
//!
//! Trials are split into fixed chunks; every chunk keeps a Welford
//! accumulator and chunks are merged in index order, so results do not
//! depend on the number of threads.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::guard::{GuardChain, GuardChainState};
use super::ChainModel;
use crate::rng::SplitMix64;
use crate::strategy::GuardParams;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: f64,
    /// Trials that finished within the step cap.
    pub trials: u64,
    /// Trials stopped by the step cap; not part of `mean`.
    pub truncated_trials: u64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }

    pub fn relative_error(&self, value: f64) -> f64 {
        (self.mean - value).abs() / value.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub step_cap: u64,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig { trials, seed, step_cap: 10_000_000 }
    }

    pub fn with_step_cap(self, step_cap: u64) -> Self {
        McConfig { step_cap, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("all {0} trials hit the step cap")]
    AllTruncated(u64),
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
    truncated: u64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        if self.n == 0 {
            return Welford { truncated: self.truncated + o.truncated, ..o };
        }
        if o.n == 0 {
            return Welford { truncated: self.truncated + o.truncated, ..self };
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
            truncated: self.truncated + o.truncated,
        }
    }

    fn finish(self) -> Result<McEstimate, McError> {
        if self.n == 0 {
            return Err(McError::AllTruncated(self.truncated));
        }
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Ok(McEstimate {
            mean: self.mean,
            stderr: (var / self.n as f64).sqrt(),
            trials: self.n,
            truncated_trials: self.truncated,
        })
    }
}

/// Runs `trial` once per index with its own stream and returns the estimates
/// of its `K` outputs. A trial returning `None` counts as truncated.
pub fn mc_estimate<const K: usize, F>(cfg: &McConfig, trial: F) -> Result<[McEstimate; K], McError>
where
    F: Fn(&mut SplitMix64) -> Option<[f64; K]> + Sync,
{
    if cfg.trials == 0 {
        return Err(McError::NoTrials);
    }
    let chunks = cfg.trials.div_ceil(CHUNK);
    let parts: Vec<[Welford; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [Welford::default(); K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                let mut rng = SplitMix64::for_trial(cfg.seed, i);
                match trial(&mut rng) {
                    Some(xs) => acc.iter_mut().zip(xs).for_each(|(w, x)| w.push(x)),
                    None => acc.iter_mut().for_each(|w| w.truncated += 1),
                }
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold([Welford::default(); K], |a, b| std::array::from_fn(|k| a[k].merge(b[k])));
    let mut out = [McEstimate { mean: 0.0, stderr: 0.0, trials: 0, truncated_trials: 0 }; K];
    for k in 0..K {
        out[k] = total[k].finish()?;
    }
    Ok(out)
}

/// Steps from `start` until the first state satisfying `target`, or `None` past `cap`.
pub fn hitting_time<M: ChainModel>(
    chain: &M,
    start: &M::State,
    target: impl Fn(&M::State) -> bool,
    rng: &mut SplitMix64,
    cap: u64,
) -> Option<u64> {
    let mut s = start.clone();
    let mut t = 0;
    while !target(&s) {
        if t >= cap {
            return None;
        }
        chain.step(&mut s, rng);
        t += 1;
    }
    Some(t)
}

/// Mean hitting time of `target` from `start`.
pub fn mc_hitting<M, F>(chain: &M, start: &M::State, target: F, cfg: &McConfig) -> Result<McEstimate, McError>
where
    M: ChainModel + Sync,
    M::State: Sync,
    F: Fn(&M::State) -> bool + Sync,
{
    let [e] = mc_estimate(cfg, |rng| hitting_time(chain, start, &target, rng, cfg.step_cap).map(|t| [t as f64]))?;
    Ok(e)
}

/// Output states and all states visited from `s_1^ε` until the block is
/// left upward, on the non-looped guard chain. `None` past `cap` steps.
pub fn guard_counts(chain: &GuardChain, rng: &mut SplitMix64, cap: u64) -> Option<(u64, u64)> {
    let mut s = GuardChainState::s(1, &[]);
    let (mut outputs, mut visits) = (0, 0);
    while s != GuardChainState::Dead && s != GuardChainState::Root {
        if visits >= cap {
            return None;
        }
        visits += 1;
        if chain.is_output(&s) {
            outputs += 1;
        }
        chain.step(&mut s, rng);
    }
    Some((outputs, visits))
}

/// Mean number of output states and of visited states below the root block.
pub fn mc_counts_guard(params: &GuardParams, cfg: &McConfig) -> Result<(McEstimate, McEstimate), McError> {
    let chain = GuardChain::new(params.clone());
    let [o, n] = mc_estimate(cfg, |rng| guard_counts(&chain, rng, cfg.step_cap).map(|(o, n)| [o as f64, n as f64]))?;
    Ok((o, n))
}
