//! Drop-and-shuffle strategy: the visit constant `C`, exit probabilities
//! `q^(l)` and hitting times of test cases of length `l`.
//!
//! Hitting times come from `h_i`, the mean time from `ε` until either `⊥`
//! or an output of the first `i` letters, through
//! `MHT(l) = (h_l + q^(l)) / (1 - q^(l))`. With `a = 1 - p_d`:
//!
//! ```text
//! h_0     = 1 + (1 - p_d²)(1 + r·a·C)/2
//! h_{i+1} = α·h_i + β·α^i + γ
//! α = a²,  β = -(1 + C(r-1))/2 · a⁴
//! γ = (r-1)a²C + 1 + a(1 + p_d) + a²(1 + p_d)/2 + a³/2
//! ```
//!
//! The `*_printed` functions evaluate the older textbook variants
//! (`h_0 = 1 + (1 - p_d²)(1 + C)/2` and a smaller `γ`); they are kept as
//! cross-checks only and disagree with the chain.

use serde::Serialize;

use super::{Analytic, Invalid};
use crate::strategy::DropShuffleParams;

fn a(params: &DropShuffleParams) -> f64 {
    1.0 - params.p_d()
}

fn bound(r: usize) -> f64 {
    1.0 - 1.0 / (r as f64).sqrt()
}

/// `C = (1 + 2(1 - p_d)) / (1 - r(1 - p_d)²)`, the mean time from `ε` to `⊥`.
pub fn ds_constant(params: &DropShuffleParams) -> Analytic<f64> {
    let p_d = params.p_d();
    let b = bound(params.r);
    if p_d <= b {
        return Err(Invalid::DropTooSmall { p_d, bound: b });
    }
    let a = a(params);
    Ok((1.0 + 2.0 * a) / (1.0 - params.r as f64 * a * a))
}

/// `q^(l) = 1 - (1 - p_d)^(2l+1)`.
pub fn ds_q(l: usize, p_d: f64) -> f64 {
    1.0 - ds_one_minus_q(l, p_d)
}

/// `1 - q^(l)`, computed directly so that it does not round to zero.
pub fn ds_one_minus_q(l: usize, p_d: f64) -> f64 {
    (1.0 - p_d).powi(2 * l as i32 + 1)
}

fn check_hitting(params: &DropShuffleParams) -> Analytic<f64> {
    if params.p_d() >= 1.0 {
        return Err(Invalid::DropIsOne);
    }
    ds_constant(params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DsDerived {
    pub r: usize,
    pub p_d: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub h0: f64,
}

impl DsDerived {
    pub fn new(params: &DropShuffleParams) -> Analytic<Self> {
        let c = check_hitting(params)?;
        let p_d = params.p_d();
        let a = a(params);
        let r = params.r as f64;
        Ok(DsDerived {
            r: params.r,
            p_d,
            c,
            alpha: a * a,
            beta: -(1.0 + c * (r - 1.0)) / 2.0 * a.powi(4),
            gamma: (r - 1.0) * a * a * c + 1.0 + a * (1.0 + p_d) + a * a * (1.0 + p_d) / 2.0 + a.powi(3) / 2.0,
            h0: 1.0 + 0.5 * (1.0 - p_d * p_d) * (1.0 + r * a * c),
        })
    }

    /// `h_i` in closed form.
    pub fn h(&self, i: usize) -> f64 {
        let al = self.alpha;
        let ai = al.powi(i as i32);
        let lin = if i == 0 { 0.0 } else { i as f64 * self.beta * al.powi(i as i32 - 1) };
        ai * self.h0 + lin + self.gamma * (1.0 - ai) / (1.0 - al)
    }

    /// `h_i` by iterating the recursion from `h_0`.
    pub fn h_recursive(&self, i: usize) -> f64 {
        let mut h = self.h0;
        let mut ai = 1.0;
        for _ in 0..i {
            h = self.alpha * h + self.beta * ai + self.gamma;
            ai *= self.alpha;
        }
        h
    }

    pub fn h_limit(&self) -> f64 {
        self.gamma / (1.0 - self.alpha)
    }

    pub fn hitting_time(&self, l: usize) -> f64 {
        let one_minus_q = ds_one_minus_q(l, self.p_d);
        (self.h(l) + 1.0 - one_minus_q) / one_minus_q
    }

    /// The hitting time multiplied out:
    /// `(1 + K)/a^(2l+1) + (h_0 - K)/a - l·a·(1 + C(r-1))/2 - 1` with `K = γ/(1 - α)`.
    pub fn hitting_time_expanded(&self, l: usize) -> f64 {
        let a = 1.0 - self.p_d;
        let k = self.h_limit();
        let y = (1.0 + self.c * (self.r as f64 - 1.0)) / 2.0;
        (1.0 + k) / a.powi(2 * l as i32 + 1) + (self.h0 - k) / a - l as f64 * a * y - 1.0
    }
}

/// Mean time from `ε` to `⊥` or an output of the first `i` letters of a test case.
pub fn ds_h(i: usize, params: &DropShuffleParams) -> Analytic<f64> {
    Ok(DsDerived::new(params)?.h(i))
}

/// Mean hitting time of a test case of length `l` on the looped chain.
pub fn ds_hitting_time(l: usize, params: &DropShuffleParams) -> Analytic<f64> {
    Ok(DsDerived::new(params)?.hitting_time(l))
}

/// Textbook constants `(h_0, α, β, γ)` with `h_0 = 1 + (1 - p_d²)(1 + C)/2`.
fn printed_constants(params: &DropShuffleParams) -> Analytic<(f64, f64, f64, f64)> {
    let c = check_hitting(params)?;
    let p_d = params.p_d();
    let a = a(params);
    let r = params.r as f64;
    let h0 = 1.0 + 0.5 * (1.0 - p_d * p_d) * (1.0 + c);
    let alpha = a * a;
    let beta = -(1.0 + c * (r - 1.0)) / 2.0 * a.powi(4);
    let gamma = c * a * a * (r - 1.0) + (a * (1.0 + p_d) + a.powi(3)) / 2.0;
    Ok((h0, alpha, beta, gamma))
}

/// Textbook `h_i` by the recursion `h_{i+1} = α h_i + β α^i + γ`.
pub fn ds_h_printed(i: usize, params: &DropShuffleParams) -> Analytic<f64> {
    let (mut h, alpha, beta, gamma) = printed_constants(params)?;
    let mut ai = 1.0;
    for _ in 0..i {
        h = alpha * h + beta * ai + gamma;
        ai *= alpha;
    }
    Ok(h)
}

/// Textbook `h_i` in its multiplied-out closed form.
pub fn ds_h_printed_closed(i: usize, params: &DropShuffleParams) -> Analytic<f64> {
    let c = check_hitting(params)?;
    let p_d = params.p_d();
    let a = a(params);
    let r = r_of(params);
    let d = p_d * (2.0 - p_d);
    let k = c * a * a * (r - 1.0) / d + (a * (1.0 + p_d) + a.powi(3)) / (2.0 * d);
    let inner = 1.0 + (1.0 - p_d * p_d) * (1.0 + c) / 2.0 - k - i as f64 * a * a * (1.0 + c * (r - 1.0)) / 2.0;
    Ok(a.powi(2 * i as i32) * inner + k)
}

/// Textbook expanded hitting time, including its `-(1 - p_d)` term.
pub fn ds_hitting_time_printed(l: usize, params: &DropShuffleParams) -> Analytic<f64> {
    let c = check_hitting(params)?;
    let p_d = params.p_d();
    let a = a(params);
    let r = r_of(params);
    let d = p_d * (2.0 - p_d);
    let k = c * a * a * (r - 1.0) / d + (a * (1.0 + p_d) + a.powi(3)) / (2.0 * d);
    Ok((1.0 + k) / a.powi(2 * l as i32 + 1) + (1.0 + p_d) * (1.0 + c) / 2.0
        - c * a * (r - 1.0) / d
        - ((1.0 + p_d) + a * a) / (2.0 * d)
        - l as f64 * a * (1.0 + c * (r - 1.0)) / 2.0
        - a
        + 1.0 / a)
}

/// `(h_l + q)/(1 - q)` with the textbook `h_l`.
pub fn ds_hitting_time_printed_via_h(l: usize, params: &DropShuffleParams) -> Analytic<f64> {
    let h = ds_h_printed(l, params)?;
    let one_minus_q = ds_one_minus_q(l, params.p_d());
    Ok((h + 1.0 - one_minus_q) / one_minus_q)
}

fn r_of(params: &DropShuffleParams) -> f64 {
    params.r as f64
}
