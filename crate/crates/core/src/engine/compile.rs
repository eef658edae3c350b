//! Flat heap representation of clauses.
//!
//! A clause is stored as a template: a cell vector whose first `nvars` cells
//! are the clause variables, followed by the structure cells. Instantiating
//! a clause copies the template onto the heap and relocates its addresses.

use std::collections::HashMap;
use std::sync::Arc;

use crate::term::{Clause, Term, Var, LIST_CONS, LIST_NIL};

pub(crate) type Sym = u32;
pub(crate) const NO_PRED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cell {
    /// Variable; unbound when it points at itself.
    Ref(u32),
    /// Atom.
    Con(Sym),
    Int(i64),
    /// Compound term whose functor cell lives at the address.
    Str(u32),
    /// Functor cell, followed by the argument cells.
    Fun(Sym, u32),
}

impl Cell {
    /// Shifts addresses by `base`.
    #[inline]
    pub(crate) fn relocate(self, base: u32) -> Cell {
        match self {
            Cell::Ref(a) => Cell::Ref(a + base),
            Cell::Str(a) => Cell::Str(a + base),
            other => other,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Symbols {
    names: Vec<Arc<str>>,
    ids: HashMap<Arc<str>, Sym>,
}

impl Symbols {
    pub(crate) fn intern(&mut self, name: &Arc<str>) -> Sym {
        if let Some(&s) = self.ids.get(name) {
            return s;
        }
        let s = self.names.len() as Sym;
        self.names.push(name.clone());
        self.ids.insert(name.clone(), s);
        s
    }

    pub(crate) fn get(&self, name: &str) -> Option<Sym> {
        self.ids.get(name).copied()
    }

    pub(crate) fn name(&self, s: Sym) -> &Arc<str> {
        &self.names[s as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }
}

/// Symbols of a program plus any new ones a query or target introduces.
pub(crate) struct LocalSymbols<'p> {
    base: &'p Symbols,
    extra: Symbols,
}

impl<'p> LocalSymbols<'p> {
    pub(crate) fn new(base: &'p Symbols) -> Self {
        LocalSymbols { base, extra: Symbols::default() }
    }

    pub(crate) fn intern(&mut self, name: &Arc<str>) -> Sym {
        match self.base.get(name) {
            Some(s) => s,
            None => self.base.len() as Sym + self.extra.intern(name),
        }
    }

    pub(crate) fn name(&self, s: Sym) -> &Arc<str> {
        let n = self.base.len() as Sym;
        if s < n {
            self.base.name(s)
        } else {
            self.extra.name(s - n)
        }
    }
}

/// Cells of one or more terms sharing a variable numbering.
pub(crate) struct Template {
    pub(crate) cells: Vec<Cell>,
    pub(crate) roots: Vec<Cell>,
    pub(crate) vars: Vec<Var>,
}

impl Template {
    pub(crate) fn build(terms: &[&Term], intern: &mut impl FnMut(&Arc<str>) -> Sym) -> Template {
        let mut vars: Vec<Var> = Vec::new();
        for t in terms {
            t.visit_vars(&mut |v| {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
            });
        }
        let mut cells: Vec<Cell> = (0..vars.len() as u32).map(Cell::Ref).collect();
        let roots = terms.iter().map(|t| emit(t, &vars, &mut cells, intern)).collect();
        Template { cells, roots, vars }
    }
}

fn emit(t: &Term, vars: &[Var], cells: &mut Vec<Cell>, intern: &mut impl FnMut(&Arc<str>) -> Sym) -> Cell {
    match t {
        Term::Var(v) => Cell::Ref(vars.iter().position(|w| w == v).expect("collected") as u32),
        Term::Atom(a) => Cell::Con(intern(a)),
        Term::Int(i) => Cell::Int(*i),
        Term::Compound(f, args) => {
            let arg_cells: Vec<Cell> = args.iter().map(|a| emit(a, vars, cells, intern)).collect();
            let addr = cells.len() as u32;
            cells.push(Cell::Fun(intern(f), args.len() as u32));
            cells.extend(arg_cells);
            Cell::Str(addr)
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ClauseCode {
    pub(crate) cells: Vec<Cell>,
    pub(crate) head: Cell,
    /// Goal cell and predicate id, in body order.
    pub(crate) body: Vec<(Cell, u32)>,
    pub(crate) guard: f64,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct CompiledProgram {
    pub(crate) syms: Symbols,
    pub(crate) pred_ids: HashMap<(Sym, u32), u32>,
    /// Clause ids per predicate id, in source order.
    pub(crate) preds: Vec<Vec<u32>>,
    pub(crate) clauses: Vec<ClauseCode>,
    pub(crate) nil: Sym,
    pub(crate) cons: Sym,
}

impl CompiledProgram {
    pub(crate) fn new(clauses: &[Clause]) -> Self {
        let mut cp = CompiledProgram::default();
        cp.nil = cp.syms.intern(&Arc::from(LIST_NIL));
        cp.cons = cp.syms.intern(&Arc::from(LIST_CONS));
        for c in clauses {
            cp.pred_id(&c.head);
        }
        for c in clauses {
            let mut terms = vec![&c.head];
            terms.extend(c.body.iter());
            let syms = &mut cp.syms;
            let tpl = Template::build(&terms, &mut |a| syms.intern(a));
            let pred = cp.pred_id(&c.head);
            let body = tpl.roots[1..].iter().zip(&c.body).map(|(&cell, goal)| (cell, cp.pred_id(goal))).collect();
            cp.preds[pred as usize].push(cp.clauses.len() as u32);
            cp.clauses.push(ClauseCode { cells: tpl.cells, head: tpl.roots[0], body, guard: c.guard_probability() });
        }
        cp
    }

    fn pred_id(&mut self, goal: &Term) -> u32 {
        let ind = goal.indicator().expect("callable goal");
        let key = (self.syms.intern(&ind.name), ind.arity as u32);
        let next = self.preds.len() as u32;
        let id = *self.pred_ids.entry(key).or_insert(next);
        if id == next {
            self.preds.push(Vec::new());
        }
        id
    }

    /// Predicate id of a goal term, or `NO_PRED` when nothing defines it.
    pub(crate) fn lookup_pred(&self, goal: &Term) -> u32 {
        goal.indicator()
            .and_then(|ind| {
                let s = self.syms.get(&ind.name)?;
                self.pred_ids.get(&(s, ind.arity as u32)).copied()
            })
            .unwrap_or(NO_PRED)
    }
}
