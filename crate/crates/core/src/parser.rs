//! Reader for the program text format.
//!
//! ```text
//! clause := head ( ":-" body )? "."
//! body   := goal ("," goal)* (";" body)?
//! goal   := atom | compound
//! ```
//!
//! `guard(P)` with a numeric `P` as the first goal of a disjunct becomes the
//! clause guard. Disjunctions are split into one clause per disjunct, in
//! left-to-right order. Comments run from `%` to end of line, or between
//! `/*` and `*/`.

use std::collections::HashSet;

use thiserror::Error;

use crate::term::{Clause, Probability, Program, Term, Var};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: guard probability {value} is outside [0, 1]")]
    GuardOutOfRange { line: usize, column: usize, value: f64 },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. } | ParseError::GuardOutOfRange { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bar,
    Comma,
    Semicolon,
    Neck,
    End,
    Eof,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: pos.line, column: pos.column, message: message.into() }
    }

    fn skip_layout(&mut self) -> Result<(), ParseError> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') => {
                    let start = self.pos();
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    if ahead.peek() != Some(&'*') {
                        return Ok(());
                    }
                    self.bump();
                    self.bump();
                    let mut prev = '\0';
                    loop {
                        match self.bump() {
                            Some('/') if prev == '*' => break,
                            Some(c) => prev = c,
                            None => return Err(self.err(start, "unterminated block comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn number(&mut self, pos: Pos, negative: bool) -> Result<Tok, ParseError> {
        let mut text = String::new();
        if negative {
            text.push('-');
        }
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let mut is_float = false;
        // A '.' is a decimal point only when a digit follows; otherwise it ends the clause.
        if self.chars.peek() == Some(&'.') {
            let mut ahead = self.chars.clone();
            ahead.next();
            if ahead.peek().is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                text.push('.');
                self.bump();
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
        }
        if matches!(self.chars.peek(), Some('e') | Some('E')) {
            let mut ahead = self.chars.clone();
            ahead.next();
            let next = ahead.peek().copied();
            let signed = matches!(next, Some('+') | Some('-'));
            if signed {
                ahead.next();
            }
            if ahead.peek().is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                text.push('e');
                self.bump();
                if signed {
                    text.push(self.bump().unwrap());
                }
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
        }
        if is_float {
            text.parse::<f64>().map(Tok::Float).map_err(|_| self.err(pos, format!("malformed number `{text}`")))
        } else {
            text.parse::<i64>().map(Tok::Int).map_err(|_| self.err(pos, format!("integer `{text}` out of range")))
        }
    }

    fn quoted(&mut self, pos: Pos) -> Result<Tok, ParseError> {
        self.bump();
        let mut name = String::new();
        loop {
            match self.bump() {
                Some('\'') => {
                    if self.chars.peek() == Some(&'\'') {
                        self.bump();
                        name.push('\'');
                    } else {
                        return Ok(Tok::Atom(name));
                    }
                }
                Some('\\') => match self.bump() {
                    Some('n') => name.push('\n'),
                    Some('\\') => name.push('\\'),
                    Some('\'') => name.push('\''),
                    _ => return Err(self.err(pos, "bad escape in quoted atom")),
                },
                Some(c) => name.push(c),
                None => return Err(self.err(pos, "unterminated quoted atom")),
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, Pos), ParseError> {
        self.skip_layout()?;
        let pos = self.pos();
        let Some(&c) = self.chars.peek() else {
            return Ok((Tok::Eof, pos));
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            '[' => {
                self.bump();
                Tok::LBracket
            }
            ']' => {
                self.bump();
                Tok::RBracket
            }
            '|' => {
                self.bump();
                Tok::Bar
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            ';' => {
                self.bump();
                Tok::Semicolon
            }
            '.' => {
                self.bump();
                Tok::End
            }
            ':' => {
                self.bump();
                if self.chars.peek() == Some(&'-') {
                    self.bump();
                    Tok::Neck
                } else {
                    return Err(self.err(pos, "expected `:-`"));
                }
            }
            '-' => {
                self.bump();
                if self.chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.number(pos, true)?
                } else {
                    return Err(self.err(pos, "unexpected `-`"));
                }
            }
            '\'' => self.quoted(pos)?,
            c if c.is_ascii_digit() => self.number(pos, false)?,
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if c.is_uppercase() || c == '_' {
                    Tok::Var(name)
                } else {
                    Tok::Atom(name)
                }
            }
            other => return Err(self.err(pos, format!("unexpected character `{other}`"))),
        };
        Ok((tok, pos))
    }
}

const ANON_MARK: &str = "_\u{0}";

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: Pos,
    anon: usize,
}

enum Goal {
    Term(Term),
    Guard(f64, Pos),
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(text);
        let (tok, pos) = lexer.next()?;
        Ok(Parser { lexer, tok, pos, anon: 0 })
    }

    fn advance(&mut self) -> Result<Tok, ParseError> {
        let (tok, pos) = self.lexer.next()?;
        self.pos = pos;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        self.lexer.err(self.pos, message)
    }

    fn describe(&self) -> String {
        match &self.tok {
            Tok::Atom(a) => format!("atom `{a}`"),
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Float(x) => format!("number `{x}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semicolon => "`;`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::End => "`.`".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.tok == want {
            self.advance()?;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {}", self.describe())))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.tok.clone() {
            Tok::Var(name) => {
                self.advance()?;
                if name == "_" {
                    self.anon += 1;
                    Ok(Term::Var(Var::new(format!("{ANON_MARK}{}", self.anon))))
                } else {
                    Ok(Term::Var(Var::new(name)))
                }
            }
            Tok::Int(i) => {
                self.advance()?;
                Ok(Term::Int(i))
            }
            Tok::Float(_) => Err(self.err("floating-point numbers are only allowed in guard annotations")),
            Tok::Atom(name) => {
                self.advance()?;
                if self.tok == Tok::LParen {
                    self.advance()?;
                    let args = self.args()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Term::Compound(name.into(), args.into()))
                } else {
                    Ok(Term::Atom(name.into()))
                }
            }
            Tok::LBracket => {
                self.advance()?;
                if self.tok == Tok::RBracket {
                    self.advance()?;
                    return Ok(Term::nil());
                }
                let items = self.args()?;
                let tail = if self.tok == Tok::Bar {
                    self.advance()?;
                    self.term()?
                } else {
                    Term::nil()
                };
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Term::list_with_tail(items, tail))
            }
            _ => Err(self.err(format!("expected a term, found {}", self.describe()))),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = vec![self.term()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            args.push(self.term()?);
        }
        Ok(args)
    }

    fn goal(&mut self) -> Result<Goal, ParseError> {
        let start = self.pos;
        if let Tok::Atom(name) = &self.tok {
            if name == "guard" {
                // Look for `guard(<number>)` without consuming anything else.
                let mut probe =
                    Lexer { chars: self.lexer.chars.clone(), line: self.lexer.line, column: self.lexer.column };
                let next = probe.next()?.0;
                let value = probe.next()?.0;
                let close = probe.next()?.0;
                let number = match value {
                    Tok::Float(x) => Some(x),
                    Tok::Int(i) => Some(i as f64),
                    _ => None,
                };
                if let (Tok::LParen, Some(x), Tok::RParen) = (next, number, close) {
                    for _ in 0..4 {
                        self.advance()?;
                    }
                    return Ok(Goal::Guard(x, start));
                }
            }
        }
        let t = self.term()?;
        match t {
            Term::Atom(_) | Term::Compound(..) => Ok(Goal::Term(t)),
            other => Err(ParseError::Syntax {
                line: start.line,
                column: start.column,
                message: format!("`{other}` is not a callable goal"),
            }),
        }
    }

    /// One disjunct: an optional leading guard then a conjunction of goals.
    fn disjunct(&mut self) -> Result<(Option<Probability>, Vec<Term>), ParseError> {
        let mut guard = None;
        let mut goals = Vec::new();
        loop {
            match self.goal()? {
                Goal::Guard(x, pos) => {
                    if !goals.is_empty() || guard.is_some() {
                        return Err(ParseError::Syntax {
                            line: pos.line,
                            column: pos.column,
                            message: "guard annotation must be the first goal of a clause body".into(),
                        });
                    }
                    guard = Some(Probability::new(x).map_err(|_| ParseError::GuardOutOfRange {
                        line: pos.line,
                        column: pos.column,
                        value: x,
                    })?);
                }
                Goal::Term(t) => goals.push(t),
            }
            if self.tok == Tok::Comma {
                self.advance()?;
            } else {
                return Ok((guard, goals));
            }
        }
    }

    fn clauses(&mut self) -> Result<Vec<Clause>, ParseError> {
        let start = self.pos;
        self.anon = 0;
        let head = self.term()?;
        if !matches!(head, Term::Atom(_) | Term::Compound(..)) {
            return Err(ParseError::Syntax {
                line: start.line,
                column: start.column,
                message: format!("clause head `{head}` must be an atom or compound term"),
            });
        }
        let mut bodies = Vec::new();
        if self.tok == Tok::Neck {
            self.advance()?;
            bodies.push(self.disjunct()?);
            while self.tok == Tok::Semicolon {
                self.advance()?;
                bodies.push(self.disjunct()?);
            }
        } else {
            bodies.push((None, Vec::new()));
        }
        self.expect(Tok::End, "`.` at end of clause")?;
        let clauses = bodies
            .into_iter()
            .map(|(guard, body)| {
                let c = Clause { head: head.clone(), body, guard };
                name_anonymous(c)
            })
            .collect();
        Ok(clauses)
    }
}

/// Gives `_` placeholders names that do not clash with the clause's own variables.
fn name_anonymous(clause: Clause) -> Clause {
    let taken: HashSet<String> = clause.vars().iter().map(|v| v.name.to_string()).collect();
    if !taken.iter().any(|n| n.starts_with(ANON_MARK)) {
        return clause;
    }
    let mut next = 0usize;
    let mut assigned: std::collections::HashMap<String, Term> = Default::default();
    clause.map_vars(&mut |v| {
        if !v.name.starts_with(ANON_MARK) {
            return Term::Var(v.clone());
        }
        assigned
            .entry(v.name.to_string())
            .or_insert_with(|| loop {
                next += 1;
                let candidate = format!("_G{next}");
                if !taken.contains(&candidate) {
                    break Term::var(&candidate);
                }
            })
            .clone()
    })
}

/// Parses a whole program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut parser = Parser::new(text)?;
    let mut clauses = Vec::new();
    while parser.tok != Tok::Eof {
        clauses.extend(parser.clauses()?);
    }
    Ok(Program::new(clauses))
}

/// Parses a single term, e.g. a target literal.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut parser = Parser::new(text)?;
    let t = parser.term()?;
    if parser.tok == Tok::End {
        parser.advance()?;
    }
    if parser.tok != Tok::Eof {
        return Err(parser.err(format!("unexpected {} after term", parser.describe())));
    }
    Ok(t)
}

/// Parses a conjunctive query such as `command(H), t(T)`; a final `.` is optional.
pub fn parse_query(text: &str) -> Result<Vec<Term>, ParseError> {
    let mut parser = Parser::new(text)?;
    let (guard, goals) = parser.disjunct()?;
    if guard.is_some() {
        return Err(ParseError::Syntax {
            line: 1,
            column: 1,
            message: "guard annotations are not allowed in queries".into(),
        });
    }
    if parser.tok == Tok::End {
        parser.advance()?;
    }
    if parser.tok != Tok::Eof {
        return Err(parser.err(format!("unexpected {} after query", parser.describe())));
    }
    let clause = name_anonymous(Clause { head: Term::atom("query"), body: goals, guard: None });
    Ok(clause.body)
}
