//! Heap, trail and choice-point stack.

use crate::rng::RandomStream;
use crate::strategy::{select_drop_shuffle_into, select_guard_into, Strategy};
use crate::term::{Term, Var};

use super::compile::{Cell, CompiledProgram, LocalSymbols, Template, NO_PRED};
use super::{EngineError, LimitKind, Limits, RunStats};

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct GoalNode {
    cell: Cell,
    pred: u32,
    next: u32,
}

#[derive(Clone, Copy, Debug)]
struct ChoicePoint {
    goal: Cell,
    cont: u32,
    /// Remaining alternatives are `alts[next..end]`; the range starts at `base`.
    base: u32,
    next: u32,
    end: u32,
    heap: u32,
    trail: u32,
    goals: u32,
    depth: u32,
}

/// Sizes of the machine stacks, for checking that backtracking restores them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Footprint {
    pub heap: usize,
    pub trail: usize,
    pub choice_points: usize,
    pub pending_alternatives: usize,
}

pub(crate) struct Machine<'p> {
    pub(crate) code: &'p CompiledProgram,
    pub(crate) syms: LocalSymbols<'p>,
    pub(crate) strategy: Strategy,
    pub(crate) limits: Limits,
    pub(crate) heap: Vec<Cell>,
    trail: Vec<u32>,
    goals: Vec<GoalNode>,
    alts: Vec<u32>,
    scratch: Vec<u32>,
    cps: Vec<ChoicePoint>,
    pdl: Vec<(Cell, Cell)>,
    ostack: Vec<Cell>,
    /// Heap size below which bindings must be trailed.
    hb: u32,
    /// Heap size right after the query (and target) were loaded.
    base_heap: u32,
    query_goals: Vec<(Cell, u32)>,
    pub(crate) query_vars: Vec<(Var, u32)>,
    cur: u32,
    depth: u32,
    pub(crate) stats: RunStats,
    started: bool,
    exhausted: bool,
}

impl<'p> Machine<'p> {
    pub(crate) fn new(code: &'p CompiledProgram, strategy: Strategy, limits: Limits) -> Self {
        Machine {
            code,
            syms: LocalSymbols::new(&code.syms),
            strategy,
            limits,
            heap: Vec::with_capacity(1024),
            trail: Vec::with_capacity(256),
            goals: Vec::with_capacity(256),
            alts: Vec::with_capacity(256),
            scratch: Vec::new(),
            cps: Vec::with_capacity(64),
            pdl: Vec::new(),
            ostack: Vec::new(),
            hb: 0,
            base_heap: 0,
            query_goals: Vec::new(),
            query_vars: Vec::new(),
            cur: NIL,
            depth: 0,
            stats: RunStats::default(),
            started: false,
            exhausted: false,
        }
    }

    /// Writes the query terms to the bottom of the heap.
    pub(crate) fn load_query(&mut self, goals: &[Term]) {
        let refs: Vec<&Term> = goals.iter().collect();
        let syms = &mut self.syms;
        let tpl = Template::build(&refs, &mut |a| syms.intern(a));
        let base = self.heap.len() as u32;
        self.heap.extend(tpl.cells.iter().map(|c| c.relocate(base)));
        self.query_goals =
            tpl.roots.iter().zip(goals).map(|(c, g)| (c.relocate(base), self.code.lookup_pred(g))).collect();
        self.query_vars = tpl.vars.into_iter().enumerate().map(|(i, v)| (v, base + i as u32)).collect();
        self.base_heap = self.heap.len() as u32;
    }

    /// Writes a ground term above the query, for later comparison.
    pub(crate) fn load_term(&mut self, t: &Term) -> Cell {
        let syms = &mut self.syms;
        let tpl = Template::build(&[t], &mut |a| syms.intern(a));
        let base = self.heap.len() as u32;
        self.heap.extend(tpl.cells.iter().map(|c| c.relocate(base)));
        self.base_heap = self.heap.len() as u32;
        tpl.roots[0].relocate(base)
    }

    /// Resets the stacks for a fresh run of the loaded query.
    pub(crate) fn restart(&mut self) {
        self.heap.truncate(self.base_heap as usize);
        for i in 0..self.trail.len() {
            let a = self.trail[i];
            self.heap[a as usize] = Cell::Ref(a);
        }
        self.trail.clear();
        self.goals.clear();
        self.alts.clear();
        self.cps.clear();
        self.hb = self.base_heap;
        let mut next = NIL;
        for &(cell, pred) in self.query_goals.iter().rev() {
            self.goals.push(GoalNode { cell, pred, next });
            next = self.goals.len() as u32 - 1;
        }
        self.cur = next;
        self.depth = 0;
        self.started = false;
        self.exhausted = false;
    }

    pub(crate) fn footprint(&self) -> Footprint {
        Footprint {
            heap: self.heap.len() - self.base_heap as usize,
            trail: self.trail.len(),
            choice_points: self.cps.len(),
            pending_alternatives: self.alts.len(),
        }
    }

    pub(crate) fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    #[inline]
    pub(crate) fn deref(&self, mut c: Cell) -> Cell {
        while let Cell::Ref(a) = c {
            let n = self.heap[a as usize];
            if n == c {
                return c;
            }
            c = n;
        }
        c
    }

    #[inline]
    fn bind(&mut self, a: u32, value: Cell) {
        self.heap[a as usize] = value;
        if a < self.hb {
            self.trail.push(a);
        }
    }

    fn occurs(&mut self, a: u32, c: Cell) -> bool {
        let mut stack = std::mem::take(&mut self.ostack);
        stack.clear();
        stack.push(c);
        let mut found = false;
        while let Some(c) = stack.pop() {
            match self.deref(c) {
                Cell::Ref(b) => {
                    if a == b {
                        found = true;
                        break;
                    }
                }
                Cell::Str(s) => {
                    let Cell::Fun(_, n) = self.heap[s as usize] else { unreachable!() };
                    for i in 1..=n {
                        stack.push(self.heap[(s + i) as usize]);
                    }
                }
                _ => {}
            }
        }
        self.ostack = stack;
        found
    }

    fn unify(&mut self, a: Cell, b: Cell) -> bool {
        self.pdl.clear();
        self.pdl.push((a, b));
        while let Some((a, b)) = self.pdl.pop() {
            let a = self.deref(a);
            let b = self.deref(b);
            if a == b {
                continue;
            }
            match (a, b) {
                (Cell::Ref(x), Cell::Ref(y)) => {
                    // bind the younger variable to the older one
                    if x < y {
                        self.bind(y, a);
                    } else {
                        self.bind(x, b);
                    }
                }
                (Cell::Ref(x), other) | (other, Cell::Ref(x)) => {
                    if matches!(other, Cell::Str(_)) && self.occurs(x, other) {
                        return false;
                    }
                    self.bind(x, other);
                }
                (Cell::Str(x), Cell::Str(y)) => {
                    let fx = self.heap[x as usize];
                    if fx != self.heap[y as usize] {
                        return false;
                    }
                    let Cell::Fun(_, n) = fx else { unreachable!() };
                    for i in 1..=n {
                        self.pdl.push((self.heap[(x + i) as usize], self.heap[(y + i) as usize]));
                    }
                }
                _ => return false,
            }
        }
        true
    }

    /// Structural equality of two dereferenced terms without binding anything.
    pub(crate) fn equal(&self, a: Cell, b: Cell) -> bool {
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            let a = self.deref(a);
            let b = self.deref(b);
            if a == b {
                continue;
            }
            match (a, b) {
                (Cell::Str(x), Cell::Str(y)) => {
                    let fx = self.heap[x as usize];
                    if fx != self.heap[y as usize] {
                        return false;
                    }
                    let Cell::Fun(_, n) = fx else { unreachable!() };
                    for i in 1..=n {
                        stack.push((self.heap[(x + i) as usize], self.heap[(y + i) as usize]));
                    }
                }
                _ => return false,
            }
        }
        true
    }

    /// Copies clause `id` onto the heap and unifies its head with `goal`.
    #[inline]
    fn try_clause(&mut self, id: u32, goal: Cell) -> bool {
        let clause = &self.code.clauses[id as usize];
        let base = self.heap.len() as u32;
        self.heap.extend(clause.cells.iter().map(|c| c.relocate(base)));
        let head = clause.head.relocate(base);
        self.unify(head, goal)
    }

    #[inline]
    fn undo_to(&mut self, heap: u32, trail: u32) {
        while self.trail.len() > trail as usize {
            let a = self.trail.pop().unwrap();
            self.heap[a as usize] = Cell::Ref(a);
        }
        self.heap.truncate(heap as usize);
    }

    fn push_body(&mut self, id: u32, base: u32, cont: u32) -> u32 {
        let body = &self.code.clauses[id as usize].body;
        let mut next = cont;
        for &(cell, pred) in body.iter().rev() {
            self.goals.push(GoalNode { cell: cell.relocate(base), pred, next });
            next = self.goals.len() as u32 - 1;
        }
        next
    }

    /// Tries `alts[next..end]` in order. On success the machine continues
    /// with the chosen clause's body; a choice point is kept (or refreshed)
    /// while alternatives remain.
    #[allow(clippy::too_many_arguments)]
    fn resume(
        &mut self,
        goal: Cell,
        cont: u32,
        base_alt: u32,
        mut next: u32,
        end: u32,
        depth: u32,
        reuse_cp: bool,
    ) -> bool {
        let heap_mark = self.heap.len() as u32;
        let trail_mark = self.trail.len() as u32;
        let goals_mark = self.goals.len() as u32;
        if !reuse_cp && end - next > 1 {
            self.cps.push(ChoicePoint {
                goal,
                cont,
                base: base_alt,
                next,
                end,
                heap: heap_mark,
                trail: trail_mark,
                goals: goals_mark,
                depth,
            });
        }
        let mut have_cp = reuse_cp || end - next > 1;
        if have_cp {
            self.hb = heap_mark;
        }
        while next < end {
            let id = self.alts[next as usize];
            next += 1;
            if have_cp && next == end {
                // last alternative: drop the choice point before trying it
                self.cps.pop();
                self.hb = self.cps.last().map_or(self.base_heap, |cp| cp.heap);
                have_cp = false;
            }
            if self.try_clause(id, goal) {
                if have_cp {
                    self.cps.last_mut().unwrap().next = next;
                } else {
                    self.alts.truncate(base_alt as usize);
                }
                self.cur = self.push_body(id, heap_mark, cont);
                self.depth = depth;
                return true;
            }
            self.undo_to(heap_mark, trail_mark);
        }
        self.alts.truncate(base_alt as usize);
        false
    }

    /// Selects the next alternative from the newest choice point.
    fn backtrack(&mut self) -> bool {
        self.stats.backtracks += 1;
        while let Some(cp) = self.cps.last().copied() {
            self.undo_to(cp.heap, cp.trail);
            self.goals.truncate(cp.goals as usize);
            self.alts.truncate(cp.end as usize);
            if self.resume(cp.goal, cp.cont, cp.base, cp.next, cp.end, cp.depth, true) {
                return true;
            }
        }
        self.undo_to(self.base_heap, 0);
        self.goals.clear();
        self.alts.clear();
        self.hb = self.base_heap;
        self.exhausted = true;
        false
    }

    fn select<R: RandomStream + ?Sized>(&mut self, pred: u32, goal: Cell, rng: &mut R) {
        if pred == NO_PRED {
            return;
        }
        let code = self.code;
        let matches = &code.preds[pred as usize];
        match self.strategy {
            Strategy::Standard => self.alts.extend_from_slice(matches),
            Strategy::Guard => select_guard_into(matches, |&id| code.clauses[id as usize].guard, rng, &mut self.alts),
            Strategy::DropShuffle { p_drop } => {
                let mut scratch = std::mem::take(&mut self.scratch);
                scratch.clear();
                let heap_mark = self.heap.len() as u32;
                let trail_mark = self.trail.len() as u32;
                let saved_hb = self.hb;
                self.hb = heap_mark;
                for &id in matches {
                    if self.try_clause(id, goal) {
                        scratch.push(id);
                    }
                    self.undo_to(heap_mark, trail_mark);
                }
                self.hb = saved_hb;
                select_drop_shuffle_into(&scratch, p_drop.get(), rng, &mut self.alts);
                self.scratch = scratch;
            }
        }
    }

    /// Runs until the next solution. `Ok(false)` means the search space is exhausted.
    pub(crate) fn next_solution<R: RandomStream + ?Sized>(&mut self, rng: &mut R) -> Result<bool, EngineError> {
        if self.exhausted {
            return Ok(false);
        }
        if self.started && !self.backtrack() {
            return Ok(false);
        }
        self.started = true;
        loop {
            if self.cur == NIL {
                self.stats.results += 1;
                return Ok(true);
            }
            let node = self.goals[self.cur as usize];
            self.stats.steps += 1;
            if self.stats.steps > self.limits.max_steps {
                return Err(self.limit(LimitKind::Steps));
            }
            let depth = self.depth + 1;
            if depth as u64 > self.limits.max_depth {
                return Err(self.limit(LimitKind::Depth));
            }
            let goal = node.cell;
            let base_alt = self.alts.len() as u32;
            self.select(node.pred, goal, rng);
            let end = self.alts.len() as u32;
            if !self.resume(goal, node.next, base_alt, base_alt, end, depth, false) && !self.backtrack() {
                return Ok(false);
            }
        }
    }

    fn limit(&mut self, kind: LimitKind) -> EngineError {
        self.exhausted = true;
        EngineError::LimitExceeded { kind, stats: self.stats.clone() }
    }

    /// Reads a heap term back. Unbound query variables keep their names.
    pub(crate) fn materialize(&self, c: Cell) -> Term {
        match self.deref(c) {
            Cell::Ref(a) => match self.query_vars.iter().find(|(_, addr)| *addr == a) {
                Some((v, _)) => Term::Var(v.clone()),
                None => Term::Var(Var::scoped("_G", a)),
            },
            Cell::Con(s) => Term::Atom(self.syms.name(s).clone()),
            Cell::Int(i) => Term::Int(i),
            Cell::Str(s) => {
                let Cell::Fun(f, n) = self.heap[s as usize] else { unreachable!() };
                let args: Vec<Term> = (1..=n).map(|i| self.materialize(self.heap[(s + i) as usize])).collect();
                Term::Compound(self.syms.name(f).clone(), args.into())
            }
            Cell::Fun(..) => unreachable!("functor cell outside a structure"),
        }
    }

    pub(crate) fn is_ground(&self, c: Cell) -> bool {
        let mut stack = vec![c];
        while let Some(c) = stack.pop() {
            match self.deref(c) {
                Cell::Ref(_) => return false,
                Cell::Str(s) => {
                    let Cell::Fun(_, n) = self.heap[s as usize] else { unreachable!() };
                    stack.extend((1..=n).map(|i| self.heap[(s + i) as usize]));
                }
                _ => {}
            }
        }
        true
    }

    pub(crate) fn query_var_cell(&self, name: &str) -> Option<Cell> {
        self.query_vars.iter().find(|(v, _)| &*v.name == name && v.scope == 0).map(|&(_, a)| Cell::Ref(a))
    }
}
