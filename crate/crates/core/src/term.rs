//! Terms, clauses and programs of the supported Prolog subset.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A logic variable. Two variables are the same iff name and scope agree.
///
/// `scope` is the rename generation: source clauses live at scope 0 and
/// every resolution step renames the selected clause into a fresh scope.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub scope: u32,
}

impl Var {
    pub fn new(name: impl Into<Arc<str>>) -> Self {
        Var { name: name.into(), scope: 0 }
    }

    pub fn scoped(name: impl Into<Arc<str>>, scope: u32) -> Self {
        Var { name: name.into(), scope }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scope == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}_{}", self.name, self.scope)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Atom(Arc<str>),
    Int(i64),
    /// Functor and arguments; the argument list is never empty.
    Compound(Arc<str>, Arc<[Term]>),
}

/// Functor name of list cells.
pub const LIST_CONS: &str = ".";
/// The empty list atom.
pub const LIST_NIL: &str = "[]";

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn atom(name: &str) -> Term {
        Term::Atom(name.into())
    }

    pub fn int(value: i64) -> Term {
        Term::Int(value)
    }

    /// Builds a compound term. Zero arguments collapse to an atom so that
    /// the arity invariant always holds.
    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(functor.into())
        } else {
            Term::Compound(functor.into(), args.into())
        }
    }

    pub fn nil() -> Term {
        Term::Atom(LIST_NIL.into())
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::Compound(LIST_CONS.into(), vec![head, tail].into())
    }

    /// Proper list of the given items, or a partial list ending in `tail`.
    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, item| Term::cons(item, acc))
    }

    pub fn list(items: Vec<Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    /// Predicate indicator `(name, arity)` for atoms and compounds.
    pub fn indicator(&self) -> Option<PredIndicator> {
        match self {
            Term::Atom(name) => Some(PredIndicator::new(name, 0)),
            Term::Compound(name, args) => Some(PredIndicator::new(name, args.len())),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) | Term::Int(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Elements of a proper list, `None` for anything else.
    pub fn as_list(&self) -> Option<Vec<&Term>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Atom(a) if &**a == LIST_NIL => return Some(items),
                Term::Compound(f, args) if &**f == LIST_CONS && args.len() == 2 => {
                    items.push(&args[0]);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    /// Calls `f` on every variable occurrence, left to right.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
            _ => {}
        }
    }

    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        self.visit_vars(&mut |v| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(name, args) => {
                Term::Compound(name.clone(), args.iter().map(|a| a.map_vars(f)).collect::<Vec<_>>().into())
            }
            other => other.clone(),
        }
    }
}

fn is_plain_atom(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => name == LIST_NIL,
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_atom(name) {
        f.write_str(name)
    } else {
        f.write_str("'")?;
        for c in name.chars() {
            match c {
                '\'' => f.write_str("''")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                c => write!(f, "{c}")?,
            }
        }
        f.write_str("'")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Atom(a) => write_atom(f, a),
            Term::Int(i) => write!(f, "{i}"),
            Term::Compound(name, args) if &**name == LIST_CONS && args.len() == 2 => {
                write!(f, "[{}", args[0])?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::Compound(n, a) if &**n == LIST_CONS && a.len() == 2 => {
                            write!(f, ",{}", a[0])?;
                            tail = &a[1];
                        }
                        Term::Atom(a) if &**a == LIST_NIL => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                f.write_str("]")
            }
            Term::Compound(name, args) => {
                write_atom(f, name)?;
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `name/arity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredIndicator {
    pub name: Arc<str>,
    pub arity: usize,
}

impl PredIndicator {
    pub fn new(name: &str, arity: usize) -> Self {
        PredIndicator { name: name.into(), arity }
    }
}

impl fmt::Display for PredIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

#[derive(Debug, Clone, Copy, Error, PartialEq)]
#[error("probability {0} is outside [0, 1]")]
pub struct ProbabilityError(pub f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(p: f64) -> Result<Self, ProbabilityError> {
        if (0.0..=1.0).contains(&p) {
            Ok(Probability(p))
        } else {
            Err(ProbabilityError(p))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = ProbabilityError;
    fn try_from(p: f64) -> Result<Self, Self::Error> {
        Probability::new(p)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ClauseError {
    #[error("clause head must be an atom or compound term, found `{0}`")]
    BadHead(Term),
    #[error("clause body goal must be an atom or compound term, found `{0}`")]
    BadGoal(Term),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
    /// Independent Bernoulli guard consulted by the guard strategy.
    pub guard: Option<Probability>,
}

impl Clause {
    pub fn new(head: Term, body: Vec<Term>, guard: Option<Probability>) -> Result<Self, ClauseError> {
        if head.indicator().is_none() {
            return Err(ClauseError::BadHead(head));
        }
        if let Some(bad) = body.iter().find(|g| g.indicator().is_none()) {
            return Err(ClauseError::BadGoal(bad.clone()));
        }
        Ok(Clause { head, body, guard })
    }

    pub fn fact(head: Term) -> Result<Self, ClauseError> {
        Clause::new(head, Vec::new(), None)
    }

    pub fn indicator(&self) -> PredIndicator {
        self.head.indicator().expect("validated head")
    }

    /// Probability that the guard lets the clause through (1 when absent).
    pub fn guard_probability(&self) -> f64 {
        self.guard.map_or(1.0, Probability::get)
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Clause {
        Clause {
            head: self.head.map_vars(f),
            body: self.body.iter().map(|g| g.map_vars(f)).collect(),
            guard: self.guard,
        }
    }

    /// Distinct variables of head then body, in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        let mut push = |v: &Var| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        };
        self.head.visit_vars(&mut push);
        for g in &self.body {
            g.visit_vars(&mut push);
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if self.guard.is_none() && self.body.is_empty() {
            return f.write_str(".");
        }
        f.write_str(" :- ")?;
        let mut first = true;
        if let Some(g) = self.guard {
            write!(f, "guard({})", g.get())?;
            first = false;
        }
        for goal in &self.body {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "{goal}")?;
            first = false;
        }
        f.write_str(".")
    }
}

/// An ordered clause list with a per-predicate index.
#[derive(Clone, Debug)]
pub struct Program {
    clauses: Vec<Clause>,
    index: BTreeMap<PredIndicator, Vec<usize>>,
    pub(crate) compiled: crate::engine::compile::CompiledProgram,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Self {
        let mut index: BTreeMap<PredIndicator, Vec<usize>> = BTreeMap::new();
        for (i, c) in clauses.iter().enumerate() {
            index.entry(c.indicator()).or_default().push(i);
        }
        let compiled = crate::engine::compile::CompiledProgram::new(&clauses);
        Program { clauses, index, compiled }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn index(&self) -> &BTreeMap<PredIndicator, Vec<usize>> {
        &self.index
    }

    /// Clauses for one predicate, in source order.
    pub fn clauses_for(&self, indicator: &PredIndicator) -> Vec<&Clause> {
        self.index.get(indicator).map(|ids| ids.iter().map(|&i| &self.clauses[i]).collect()).unwrap_or_default()
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.clauses == other.clauses
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
