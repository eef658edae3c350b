//! Chain simulations reported next to the analytic values.

use randsld::analytics::{ds, guard};
use randsld::chain::{
    exact_truncated, mc_counts_guard, mc_hitting, DsChain, DsChainState, ExactError, GuardChain, GuardChainState,
    McConfig, McError, McEstimate,
};
use randsld::{DropShuffleParams, GuardParams};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    Guard,
    Ds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Guard: outputs and visited states below the root block.
    Counts,
    /// Guard: mean time from `♯` to `s_i^α` on the looped chain.
    /// Drop-and-shuffle: mean time from `ε` to the test case `1^l` on the looped chain.
    Hitting,
    /// Guard: exact probability of entering block `α` from `♯`.
    Reach,
    /// Drop-and-shuffle: mean time from `ε` to `⊥`.
    Constant,
    /// Drop-and-shuffle: probability of leaving the root sub-tree before producing `1^l`.
    Exit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimParams {
    pub chain: ChainKind,
    pub quantity: Quantity,
    pub r: usize,
    pub p_steady: f64,
    pub p_cont: f64,
    pub p_drop: f64,
    pub alpha: Vec<usize>,
    pub i: usize,
    pub l: usize,
    pub trials: u64,
    pub seed: u64,
    pub step_cap: u64,
    pub depth_cap: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            chain: ChainKind::Guard,
            quantity: Quantity::Counts,
            r: 3,
            p_steady: 1.0 / 3.0,
            p_cont: 0.5,
            p_drop: 0.5,
            alpha: Vec::new(),
            i: 1,
            l: 0,
            trials: 100_000,
            seed: 0,
            step_cap: 10_000_000,
            depth_cap: 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("quantity {0:?} is not defined for this chain")]
    Unsupported(Quantity),
    #[error("letter {0} is outside 1..=r")]
    Letter(usize),
    #[error(transparent)]
    Param(#[from] randsld::strategy::ParamError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

fn record(name: &str, e: &McEstimate, analytic: Value) -> Value {
    let (delta, rel) = match analytic.as_f64() {
        Some(a) => (json!(e.mean - a), json!((e.mean - a) / a)),
        None => (Value::Null, Value::Null),
    };
    json!({
        "name": name,
        "estimate": e.mean,
        "stderr": e.stderr,
        "trials": e.trials,
        "truncated_trials": e.truncated_trials,
        "analytic": analytic,
        "delta": delta,
        "relative_delta": rel,
    })
}

fn analytic<T: Serialize, E: ToString>(v: Result<T, E>) -> Value {
    match v {
        Ok(x) => json!(x),
        Err(e) => Value::String(e.to_string()),
    }
}

pub fn simulate_chain(p: &SimParams) -> Result<Value, SimError> {
    let cfg = McConfig { trials: p.trials, seed: p.seed, step_cap: p.step_cap };
    let records = match p.chain {
        ChainKind::Guard => {
            let g = GuardParams::uniform(p.r, p.p_steady, p.p_cont)?;
            let block: Vec<u32> = p.alpha.iter().map(|&a| a as u32).collect();
            if let Some(&bad) = p.alpha.iter().find(|&&a| a == 0 || a > p.r) {
                return Err(SimError::Letter(bad));
            }
            match p.quantity {
                Quantity::Counts => {
                    let (o, n) = mc_counts_guard(&g, &cfg)?;
                    let an = guard::guard_expectations(&g);
                    vec![
                        record("outputs", &o, analytic(an.clone().map(|x| x.0))),
                        record("visits", &n, analytic(an.map(|x| x.1))),
                    ]
                }
                Quantity::Hitting => {
                    let chain = GuardChain::looped(g.clone());
                    let target = GuardChainState::s(p.i as u32, &block);
                    let e = mc_hitting(&chain, &GuardChainState::Root, |s| *s == target, &cfg)?;
                    vec![record("hitting_time", &e, analytic(guard::guard_hitting_time(&p.alpha, p.i, &g)))]
                }
                Quantity::Reach => {
                    let chain = GuardChain::new(g.clone());
                    let x = exact_truncated(
                        &chain,
                        &GuardChainState::Root,
                        |s| s.block() == Some(&block[..]),
                        p.depth_cap,
                    )?;
                    let an = guard::block_reach_prob(&p.alpha, &g, true);
                    return Ok(json!({
                        "chain": p.chain,
                        "quantity": p.quantity,
                        "params": p,
                        "exact": x,
                        "analytic": analytic(an),
                    }));
                }
                q => return Err(SimError::Unsupported(q)),
            }
        }
        ChainKind::Ds => {
            let d = DropShuffleParams::new(p.p_drop, p.r)?;
            let word = vec![1u32; p.l];
            match p.quantity {
                Quantity::Constant => {
                    let chain = DsChain::new(d.clone());
                    let e = mc_hitting(&chain, &DsChainState::empty(), |s| *s == DsChainState::Dead, &cfg)?;
                    vec![record("constant", &e, analytic(ds::ds_constant(&d)))]
                }
                Quantity::Exit => {
                    let chain = DsChain::new(d.clone());
                    let [e] = randsld::chain::mc_estimate(&cfg, |rng| {
                        exit_before_hit(&chain, &DsChainState::empty(), &word, rng, cfg.step_cap)
                            .map(|x| [x as u8 as f64])
                    })?;
                    vec![record("exit_probability", &e, json!(ds::ds_q(p.l, p.p_drop)))]
                }
                Quantity::Hitting => {
                    let chain = DsChain::looped(d.clone());
                    let e = mc_hitting(&chain, &DsChainState::empty(), |s| s.emits(&word), &cfg)?;
                    vec![record("hitting_time", &e, analytic(ds::ds_hitting_time(p.l, &d)))]
                }
                q => return Err(SimError::Unsupported(q)),
            }
        }
    };
    Ok(json!({
        "chain": p.chain,
        "quantity": p.quantity,
        "params": p,
        "seed": p.seed,
        "records": records,
    }))
}

/// Whether a run from sub-tree root `root` reaches `Pop(root)` before producing
/// the test case `prefix(root)·word`. `None` past `cap` steps.
pub fn exit_before_hit<R: randsld::RandomStream>(
    chain: &DsChain,
    root: &DsChainState,
    word: &[u32],
    rng: &mut R,
    cap: u64,
) -> Option<bool> {
    use randsld::chain::ChainModel;
    let exit = root.pop();
    let mut full = root.prefix();
    full.extend_from_slice(word);
    let mut s = root.clone();
    for _ in 0..cap {
        chain.step(&mut s, rng);
        if s == exit {
            return Some(true);
        }
        if s.emits(&full) {
            return Some(false);
        }
    }
    None
}
