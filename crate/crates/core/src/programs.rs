//! The generator programs used by the benchmarks.

use std::fmt::Write;

use crate::parser::parse_program;
use crate::strategy::GuardParams;
use crate::term::{Program, Term};

const NAMES: [&str; 10] =
    ["first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"];

/// Name of command constant `i` (1-based).
pub fn command_name(i: usize) -> String {
    assert!(i >= 1);
    NAMES.get(i - 1).map_or_else(|| format!("cmd{i}"), |n| n.to_string())
}

/// Generator of command sequences in the form the engine analyses directly:
///
/// ```text
/// t([]).
/// t([H|T]) :- guard(p_c), command(H), t(T).
/// command(first) :- guard(p_1).
/// ...
/// ```
///
/// Without guard parameters the guards are omitted.
pub fn commands_source(r: usize, guards: Option<&GuardParams>) -> String {
    assert!(r >= 1);
    if let Some(g) = guards {
        assert_eq!(g.r(), r, "guard parameters must have r entries");
    }
    let mut s = String::from("t([]).\n");
    match guards {
        Some(g) => writeln!(s, "t([H|T]) :- guard({}), command(H), t(T).", g.p_c()).unwrap(),
        None => s.push_str("t([H|T]) :- command(H), t(T).\n"),
    }
    for i in 1..=r {
        match guards {
            Some(g) => writeln!(s, "command({}) :- guard({}).", command_name(i), g.p_i(i)).unwrap(),
            None => writeln!(s, "command({}).", command_name(i)).unwrap(),
        }
    }
    s
}

pub fn commands_program(r: usize, guards: Option<&GuardParams>) -> Program {
    parse_program(&commands_source(r, guards)).expect("generated source parses")
}

/// The same generator written with a disjunctive `command/1` and one
/// auxiliary predicate per constant.
pub fn commands_source_disjunctive(r: usize) -> String {
    assert!(r >= 1);
    let mut s = String::from("t([]).\nt([H|T]) :- command(H), t(T).\ncommand(X) :- ");
    let alts: Vec<String> = (1..=r).map(|i| format!("command{i}(X)")).collect();
    s.push_str(&alts.join("; "));
    s.push_str(".\n");
    for i in 1..=r {
        writeln!(s, "command{i}({}).", command_name(i)).unwrap();
    }
    s
}

/// List of command constants by 1-based index, e.g. `[2, 2]` gives `[second,second]`.
pub fn command_sequence(items: &[usize]) -> Term {
    Term::list(items.iter().map(|&i| Term::atom(&command_name(i))).collect())
}

/// Guard settings for the expression generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExprGuards {
    /// Guard on the recursive `expr` clause.
    pub p_cont: f64,
    /// Guard on every other clause.
    pub p_other: f64,
}

impl Default for ExprGuards {
    fn default() -> Self {
        ExprGuards { p_cont: 0.4, p_other: 0.33 }
    }
}

/// Generator of arithmetic expressions in list form, e.g. `[minus,[[plus,[1,3]]]]`.
pub fn expr_source(guards: Option<ExprGuards>) -> String {
    let g = |p: f64| guards.map_or(String::new(), |_| format!("guard({p}), "));
    let fact = |head: &str, p: f64| match guards {
        Some(_) => format!("{head} :- guard({p}).\n"),
        None => format!("{head}.\n"),
    };
    let (pc, po) = guards.map_or((1.0, 1.0), |g| (g.p_cont, g.p_other));
    let mut s = String::new();
    match guards {
        Some(_) => writeln!(s, "expr(X) :- guard({po}), const(X).").unwrap(),
        None => s.push_str("expr(X) :- const(X).\n"),
    }
    writeln!(s, "expr([Operator, Operands]) :- {}unpack(Operator, Operands).", g(pc)).unwrap();
    for c in 1..=3 {
        s.push_str(&fact(&format!("const({c})"), po));
    }
    writeln!(s, "unpack(plus, [A, B]) :- {}expr(A), expr(B).", g(po)).unwrap();
    writeln!(s, "unpack(times, [A, B]) :- {}expr(A), expr(B).", g(po)).unwrap();
    writeln!(s, "unpack(minus, [A]) :- {}expr(A).", g(po)).unwrap();
    s
}

pub fn expr_program(guards: Option<ExprGuards>) -> Program {
    parse_program(&expr_source(guards)).expect("generated source parses")
}
