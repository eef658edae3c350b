//! Substitutions and syntactic unification with occurs check.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::term::{Clause, Term, Var};

#[derive(Debug, Clone, Error, PartialEq)]
#[error("binding {var} to {term} would create a cycle")]
pub struct CyclicBinding {
    pub var: Var,
    pub term: Term,
}

/// A finite map from variables to terms with no binding cycles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Substitution {
    bindings: HashMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    /// Looks a source-level variable up by name.
    pub fn lookup(&self, name: &str) -> Option<&Term> {
        self.bindings.get(&Var::new(name))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    /// Adds `v ↦ t`, rejecting anything that would make `apply` diverge.
    pub fn bind(&mut self, v: Var, t: Term) -> Result<(), CyclicBinding> {
        if self.bindings.contains_key(&v) {
            let existing = self.bindings[&v].clone();
            let mut trial = self.clone();
            if trial.unify_in_place(&existing, &t) {
                *self = trial;
                return Ok(());
            }
            return Err(CyclicBinding { var: v, term: t });
        }
        let walked = self.walk(&t).clone();
        if walked == Term::Var(v.clone()) {
            return Ok(());
        }
        if self.occurs(&v, &walked) {
            return Err(CyclicBinding { var: v, term: t });
        }
        self.bindings.insert(v, t);
        Ok(())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Result<Self, CyclicBinding> {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(v, t)?;
        }
        Ok(s)
    }

    /// Follows variable bindings at the top level only.
    pub fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.bindings.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: &Var, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => w == v,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(v, a)),
            _ => false,
        }
    }

    fn unify_in_place(&mut self, a: &Term, b: &Term) -> bool {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((a, b)) = stack.pop() {
            let a = self.walk(&a).clone();
            let b = self.walk(&b).clone();
            match (&a, &b) {
                (Term::Var(x), Term::Var(y)) if x == y => {}
                (Term::Var(x), other) | (other, Term::Var(x)) => {
                    if self.occurs(x, other) {
                        return false;
                    }
                    self.bindings.insert(x.clone(), other.clone());
                }
                (Term::Atom(x), Term::Atom(y)) if x == y => {}
                (Term::Int(x), Term::Int(y)) if x == y => {}
                (Term::Compound(f, xs), Term::Compound(g, ys)) if f == g && xs.len() == ys.len() => {
                    stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                }
                _ => return false,
            }
        }
        true
    }

    /// Replaces bound variables transitively.
    pub fn apply(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
            other => other.clone(),
        }
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause { head: self.apply(&c.head), body: c.body.iter().map(|g| self.apply(g)).collect(), guard: c.guard }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pairs: Vec<_> = self.bindings.iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        f.write_str("{")?;
        for (i, (v, t)) in pairs.into_iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} = {t}")?;
        }
        f.write_str("}")
    }
}

/// Most general unifier of `a` and `b` extending `s`, or `None`.
pub fn unify(a: &Term, b: &Term, s: &Substitution) -> Option<Substitution> {
    let mut out = s.clone();
    out.unify_in_place(a, b).then_some(out)
}

pub fn apply(s: &Substitution, t: &Term) -> Term {
    s.apply(t)
}

/// Moves every variable of `c` into scope `generation`.
pub fn rename_apart(c: &Clause, generation: u32) -> Clause {
    c.map_vars(&mut |v| Term::Var(Var::scoped(v.name.clone(), generation)))
}
