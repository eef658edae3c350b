//! Guard strategy: expected outputs and visits, block reach probabilities,
//! leave-upward times and hitting times on the looped chain.

use serde::Serialize;

use super::{Analytic, Invalid};
use crate::strategy::GuardParams;

/// Quantities derived from one guard parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuardDerived {
    pub r: usize,
    pub sum_p: f64,
    pub eta: f64,
    /// Expected outputs below a block root.
    pub expected_outputs: f64,
    /// Expected visits below a block root, the constant `C`.
    pub expected_visits: f64,
    /// `ν = p·p_c`, uniform `p` only.
    pub nu: Option<f64>,
    /// Expected steps from `s_i` to `s_{i+1}`, uniform `p` only.
    pub delta: Option<f64>,
}

impl GuardDerived {
    pub fn new(params: &GuardParams) -> Analytic<Self> {
        let (eo, en) = guard_expectations(params)?;
        let nu = params.uniform_p().map(|p| p * params.p_c());
        Ok(GuardDerived {
            r: params.r(),
            sum_p: params.sum_p(),
            eta: params.eta(),
            expected_outputs: eo,
            expected_visits: en,
            nu,
            delta: delta(params).ok(),
        })
    }
}

fn check_finite(params: &GuardParams) -> Analytic<()> {
    if params.p_c() >= 1.0 {
        return Err(Invalid::ContinuationIsOne);
    }
    let eta = params.eta();
    if eta >= 1.0 {
        return Err(Invalid::EtaTooLarge { eta });
    }
    Ok(())
}

/// `(E[O], E[N])`: outputs and states visited from `s_1` of a block until it is left upward.
pub fn guard_expectations(params: &GuardParams) -> Analytic<(f64, f64)> {
    check_finite(params)?;
    let s = params.sum_p();
    let denom = 1.0 - params.p_c() * s;
    Ok((s / denom, (params.r() as f64 + s) / denom))
}

fn check_letters(alpha: &[usize], r: usize) -> Analytic<()> {
    match alpha.iter().find(|&&a| a == 0 || a > r) {
        Some(&letter) => Err(Invalid::LetterOutOfRange { letter, r }),
        None => Ok(()),
    }
}

/// Probability that block `alpha` is ever entered, from `s_1^ε` or from `♯`.
pub fn block_reach_prob(alpha: &[usize], params: &GuardParams, from_root: bool) -> Analytic<f64> {
    check_letters(alpha, params.r())?;
    let pc = params.p_c();
    let prod: f64 = alpha.iter().map(|&a| params.p_i(a) * pc).product();
    Ok(if from_root { prod * pc } else { prod })
}

fn uniform_nu(params: &GuardParams) -> Analytic<(f64, f64)> {
    let p = params.uniform_p().ok_or(Invalid::NonUniform)?;
    let nu = p * params.p_c();
    let nu_r = nu * params.r() as f64;
    if nu_r >= 1.0 {
        return Err(Invalid::NuTooLarge { nu_r });
    }
    Ok((p, nu))
}

/// `Δ = 1 + p(1 + p_c·C)`.
pub fn delta(params: &GuardParams) -> Analytic<f64> {
    let (p, _) = uniform_nu(params)?;
    let (_, c) = guard_expectations(params)?;
    Ok(1.0 + p * (1.0 + params.p_c() * c))
}

/// `U_i = (r - i + 1)·Δ`, with `U_{r+1} = 0`.
pub fn guard_u(i: usize, params: &GuardParams) -> Analytic<f64> {
    let r = params.r();
    if i == 0 || i > r + 1 {
        return Err(Invalid::IndexOutOfRange { i, max: r + 1 });
    }
    Ok((r + 1 - i) as f64 * delta(params)?)
}

/// Mean hitting time of `s_i^α` from `♯` on the looped chain with `p(♯, s_1^ε) = 1`.
pub fn guard_hitting_time(alpha: &[usize], i: usize, params: &GuardParams) -> Analytic<f64> {
    let r = params.r();
    check_letters(alpha, r)?;
    if i == 0 || i > r {
        return Err(Invalid::IndexOutOfRange { i, max: r });
    }
    let (p, nu) = uniform_nu(params)?;
    let d = delta(params)?;
    let t = alpha.len();
    let rf = r as f64;
    let mut total = nu.powi(-(t as i32)) + (i as f64 - 1.0) * d;
    let mut climb = 0.0;
    for (k0, &a) in alpha.iter().enumerate() {
        let k = k0 + 1;
        climb += (rf - a as f64) * d;
        let numer = 1.0 + p + (a as f64 - 1.0) * d + (1.0 - nu) * climb;
        total += numer / nu.powi((t + 1 - k) as i32);
    }
    Ok(total)
}
