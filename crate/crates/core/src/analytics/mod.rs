//! Closed-form expectations and hitting times for both strategies.
//!
//! Every function checks the parameter region in which its formula is
//! finite and returns [`Invalid`] outside it instead of an infinite number.

pub mod ds;
pub mod guard;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Invalid {
    #[error("diverges: p_c = 1 never stops recursing")]
    ContinuationIsOne,
    #[error("diverges: eta = r*p_max*p_c = {eta} is not below 1")]
    EtaTooLarge { eta: f64 },
    #[error("diverges: nu*r = {nu_r} is not below 1")]
    NuTooLarge { nu_r: f64 },
    #[error("hitting times need p_1 = ... = p_r")]
    NonUniform,
    #[error("diverges: p_d = {p_d} <= 1 - 1/sqrt(r) = {bound}")]
    DropTooSmall { p_d: f64, bound: f64 },
    #[error("diverges: p_d = 1 never reaches a non-empty test case")]
    DropIsOne,
    #[error("block letter {letter} is outside 1..={r}")]
    LetterOutOfRange { letter: usize, r: usize },
    #[error("index {i} is outside 1..={max}")]
    IndexOutOfRange { i: usize, max: usize },
}

pub type Analytic<T> = Result<T, Invalid>;
