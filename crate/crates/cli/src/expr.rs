//! Arithmetic expressions produced by the expression generator.

use std::fmt;

use randsld::term::LIST_CONS;
use randsld::Term;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprTerm {
    Leaf(i64),
    Plus(Box<ExprTerm>, Box<ExprTerm>),
    Times(Box<ExprTerm>, Box<ExprTerm>),
    Minus(Box<ExprTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("not an expression: {0}")]
    Malformed(String),
    #[error("leaf {0} is outside 1..=3")]
    LeafOutOfRange(i64),
    #[error("integer overflow")]
    Overflow,
}

use ExprTerm::*;

impl ExprTerm {
    pub fn plus(a: ExprTerm, b: ExprTerm) -> Self {
        Plus(Box::new(a), Box::new(b))
    }

    pub fn times(a: ExprTerm, b: ExprTerm) -> Self {
        Times(Box::new(a), Box::new(b))
    }

    pub fn minus(a: ExprTerm) -> Self {
        Minus(Box::new(a))
    }

    /// Reads the list form `[plus, [A, B]]` or the compound form `plus(A, B)`.
    pub fn from_term(t: &Term) -> Result<Self, ExprError> {
        let malformed = || ExprError::Malformed(t.to_string());
        match t {
            Term::Int(v) if (1..=3).contains(v) => Ok(Leaf(*v)),
            Term::Int(v) => Err(ExprError::LeafOutOfRange(*v)),
            Term::Compound(f, args) if f.as_ref() != LIST_CONS => {
                Self::build(f, &args.iter().collect::<Vec<_>>()).ok_or_else(malformed)
            }
            _ => {
                let items = t.as_list().ok_or_else(malformed)?;
                let [Term::Atom(op), operands] = items.as_slice() else { return Err(malformed()) };
                let operands = operands.as_list().ok_or_else(malformed)?;
                Self::build(op, &operands).ok_or_else(malformed)
            }
        }
    }

    fn build(op: &str, args: &[&Term]) -> Option<Self> {
        let sub = |t: &Term| ExprTerm::from_term(t).ok();
        Some(match (op, args) {
            ("plus", [a, b]) => Self::plus(sub(a)?, sub(b)?),
            ("times", [a, b]) => Self::times(sub(a)?, sub(b)?),
            ("minus", [a]) => Self::minus(sub(a)?),
            _ => return None,
        })
    }

    /// The list form used by the generator program.
    pub fn to_term(&self) -> Term {
        let op = |name: &str, args: Vec<Term>| Term::list(vec![Term::atom(name), Term::list(args)]);
        match self {
            Leaf(v) => Term::int(*v),
            Plus(a, b) => op("plus", vec![a.to_term(), b.to_term()]),
            Times(a, b) => op("times", vec![a.to_term(), b.to_term()]),
            Minus(a) => op("minus", vec![a.to_term()]),
        }
    }

    pub fn eval(&self) -> Result<i64, ExprError> {
        match self {
            Leaf(v) => Ok(*v),
            Plus(a, b) => a.eval()?.checked_add(b.eval()?).ok_or(ExprError::Overflow),
            Times(a, b) => a.eval()?.checked_mul(b.eval()?).ok_or(ExprError::Overflow),
            Minus(a) => a.eval()?.checked_neg().ok_or(ExprError::Overflow),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Leaf(_) => 1,
            Plus(a, b) | Times(a, b) => 1 + a.size() + b.size(),
            Minus(a) => 1 + a.size(),
        }
    }
}

/// Polish notation, e.g. `-(+(1,3))`.
impl fmt::Display for ExprTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Leaf(v) => write!(f, "{v}"),
            Plus(a, b) => write!(f, "+({a},{b})"),
            Times(a, b) => write!(f, "×({a},{b})"),
            Minus(a) => write!(f, "-({a})"),
        }
    }
}

/// Evaluates a generated solution term.
pub fn eval_expr(t: &Term) -> Result<i64, ExprError> {
    ExprTerm::from_term(t)?.eval()
}

/// All expressions with exactly `size` nodes, indexed by size.
pub fn enumerate(max_size: usize) -> Vec<Vec<ExprTerm>> {
    let mut by_size: Vec<Vec<ExprTerm>> = vec![Vec::new(); max_size + 1];
    if max_size >= 1 {
        by_size[1] = (1..=3).map(Leaf).collect();
    }
    for n in 2..=max_size {
        let mut out: Vec<ExprTerm> = by_size[n - 1].iter().cloned().map(ExprTerm::minus).collect();
        for left in 1..n - 1 {
            let right = n - 1 - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    out.push(ExprTerm::plus(a.clone(), b.clone()));
                    out.push(ExprTerm::times(a.clone(), b.clone()));
                }
            }
        }
        by_size[n] = out;
    }
    by_size
}

/// A smallest expression evaluating to `target`, searching up to `max_size` nodes.
pub fn shortest_witness(target: i64, max_size: usize) -> Option<ExprTerm> {
    enumerate(max_size).into_iter().flatten().find(|e| e.eval() == Ok(target))
}
