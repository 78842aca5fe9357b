//! Problem files: parser and printer.
//!
//! ```text
//! THEORY ints
//! SIGNATURE
//!   pow : Int * Int -> Int
//! RULES
//!   pow(x, y) -> 1 [y < 1]
//!   pow(x, y) -> x * pow(x, y - 1) [y >= 1]
//! GOALS
//!   exists m [m >= 0] . pow(x, n) = n + m [x = 2 /\ n >= 0]
//! ```
//!
//! Items are one per line and `--` starts a comment. Identifiers that are
//! not declared symbols are variables; their sorts are inferred per item.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::constrained::{Ceq, CeqError, Inequality, Relation};
use crate::lctrs::{Lctrs, Origin, Rule};
use crate::signature::Signature;
use crate::solver::Solver;
use crate::term::{Func, Sort, Term, TheoryOp, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

type Loc = (usize, usize);

fn err<T>(loc: Loc, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line: loc.0,
        col: loc.1,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Colon,
    Arrow,
    Star,
    Plus,
    Minus,
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
    And,
    Or,
    Implies,
    Iff,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "'{}'", s),
            Tok::Int(i) => return write!(f, "'{}'", i),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Arrow => "->",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::Implies => "=>",
            Tok::Iff => "<=>",
            Tok::End => return f.write_str("end of line"),
        };
        write!(f, "'{}'", s)
    }
}

fn lex(line_no: usize, line: &str) -> Result<Vec<(Tok, Loc)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let loc = (line_no, i + 1);
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if i < chars.len() && chars[i] == '\'' {
                while i < chars.len() && chars[i] == '\'' {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), loc));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), loc));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("<=>") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("=>") {
            (Tok::Implies, 2)
        } else if rest.starts_with("!=") {
            (Tok::Ne, 2)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else if rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if rest.starts_with("/\\") {
            (Tok::And, 2)
        } else if rest.starts_with("\\/") {
            (Tok::Or, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                '*' | '×' => Tok::Star,
                '+' => Tok::Plus,
                '-' | '−' => Tok::Minus,
                '=' | '≈' => Tok::Eq,
                '≠' => Tok::Ne,
                '≥' => Tok::Ge,
                '>' => Tok::Gt,
                '≤' => Tok::Le,
                '<' => Tok::Lt,
                '∧' => Tok::And,
                '∨' => Tok::Or,
                '¬' => Tok::Ident("not".into()),
                '∃' => Tok::Ident("exists".into()),
                '→' => Tok::Arrow,
                '⇒' => Tok::Implies,
                '⇔' => Tok::Iff,
                _ => return err(loc, format!("unexpected character '{}'", c)),
            };
            (t, 1)
        };
        out.push((tok, loc));
        i += len;
    }
    out.push((Tok::End, (line_no, chars.len() + 1)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Debug, Clone)]
enum Ast {
    Name(String, Loc),
    Int(BigInt, Loc),
    Call(String, Vec<Ast>, Loc),
    Bin(BinOp, Box<Ast>, Box<Ast>, Loc),
    Not(Box<Ast>, Loc),
    Neg(Box<Ast>, Loc),
}

impl Ast {
    fn loc(&self) -> Loc {
        match self {
            Ast::Name(_, l)
            | Ast::Int(_, l)
            | Ast::Call(_, _, l)
            | Ast::Bin(_, _, _, l)
            | Ast::Not(_, l)
            | Ast::Neg(_, l) => *l,
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Loc)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn loc(&self) -> Loc {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Loc) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<Loc, ParseError> {
        if self.peek() == t {
            Ok(self.bump().1)
        } else {
            err(
                self.loc(),
                format!("expected {} but found {}", what, self.peek()),
            )
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Loc), ParseError> {
        match self.bump() {
            (Tok::Ident(s), l) => Ok((s, l)),
            (t, l) => err(l, format!("expected {} but found {}", what, t)),
        }
    }

    fn end(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::End => Ok(()),
            t => err(self.loc(), format!("unexpected {}", t)),
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let l = self.implies()?;
        if self.peek() == &Tok::Iff {
            let loc = self.bump().1;
            let r = self.implies()?;
            return Ok(Ast::Bin(BinOp::Iff, Box::new(l), Box::new(r), loc));
        }
        Ok(l)
    }

    fn implies(&mut self) -> Result<Ast, ParseError> {
        let l = self.or()?;
        if self.peek() == &Tok::Implies {
            let loc = self.bump().1;
            let r = self.implies()?;
            return Ok(Ast::Bin(BinOp::Implies, Box::new(l), Box::new(r), loc));
        }
        Ok(l)
    }

    fn left_assoc(
        &mut self,
        next: fn(&mut Parser) -> Result<Ast, ParseError>,
        ops: &[(Tok, BinOp)],
    ) -> Result<Ast, ParseError> {
        let mut l = next(self)?;
        while let Some((_, op)) = ops.iter().find(|(t, _)| t == self.peek()) {
            let op = *op;
            let loc = self.bump().1;
            let r = next(self)?;
            l = Ast::Bin(op, Box::new(l), Box::new(r), loc);
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Ast, ParseError> {
        self.left_assoc(Parser::and, &[(Tok::Or, BinOp::Or)])
    }

    fn and(&mut self) -> Result<Ast, ParseError> {
        self.left_assoc(Parser::not, &[(Tok::And, BinOp::And)])
    }

    fn not(&mut self) -> Result<Ast, ParseError> {
        if self.is_keyword("not") {
            let loc = self.bump().1;
            let a = self.not()?;
            return Ok(Ast::Not(Box::new(a), loc));
        }
        self.rel()
    }

    fn rel(&mut self) -> Result<Ast, ParseError> {
        let l = self.add()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Ge => BinOp::Ge,
            Tok::Gt => BinOp::Gt,
            Tok::Le => BinOp::Le,
            Tok::Lt => BinOp::Lt,
            _ => return Ok(l),
        };
        let loc = self.bump().1;
        let r = self.add()?;
        Ok(Ast::Bin(op, Box::new(l), Box::new(r), loc))
    }

    fn add(&mut self) -> Result<Ast, ParseError> {
        self.left_assoc(
            Parser::mul,
            &[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)],
        )
    }

    fn mul(&mut self) -> Result<Ast, ParseError> {
        self.left_assoc(Parser::unary, &[(Tok::Star, BinOp::Mul)])
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        if self.peek() == &Tok::Minus {
            let loc = self.bump().1;
            let a = self.unary()?;
            return Ok(Ast::Neg(Box::new(a), loc));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        let loc = self.loc();
        match self.bump().0 {
            Tok::Int(i) => Ok(Ast::Int(i, loc)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if matches!(name.as_str(), "exists" | "not") {
                    return err(loc, format!("unexpected keyword '{}'", name));
                }
                if !self.eat(&Tok::LParen) {
                    return Ok(Ast::Name(name, loc));
                }
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        args.push(self.expr()?);
                        match self.peek() {
                            Tok::Comma => {
                                self.bump();
                            }
                            Tok::RParen => {
                                self.bump();
                                break;
                            }
                            t => {
                                return err(
                                    self.loc(),
                                    format!("expected ',' or ')' but found {}", t),
                                )
                            }
                        }
                    }
                }
                Ok(Ast::Call(name, args, loc))
            }
            t => err(loc, format!("expected a term but found {}", t)),
        }
    }
}

/// Sort inference and term construction for one item.
struct Elab<'a> {
    sig: &'a Signature,
    env: BTreeMap<String, Sort>,
}

fn theory_call(name: &str) -> Option<TheoryOp> {
    match name {
        "exp" => Some(TheoryOp::Exp),
        "div" => Some(TheoryOp::Div),
        "mod" => Some(TheoryOp::Mod),
        _ => None,
    }
}

impl Elab<'_> {
    fn infer(&mut self, a: &Ast, expected: Option<&Sort>) -> Option<Sort> {
        match a {
            Ast::Int(..) | Ast::Neg(..) => {
                if let Ast::Neg(x, _) = a {
                    self.infer(x, Some(&Sort::Int));
                }
                Some(Sort::Int)
            }
            Ast::Name(n, _) if n == "true" || n == "false" => Some(Sort::Bool),
            Ast::Name(n, _) => {
                if let Some(d) = self.sig.lookup(n) {
                    return Some(d.result.clone());
                }
                if let Some(s) = expected {
                    self.env.entry(n.clone()).or_insert_with(|| s.clone());
                }
                self.env.get(n).cloned()
            }
            Ast::Call(f, args, _) => {
                if let Some(op) = theory_call(f) {
                    for x in args {
                        self.infer(x, Some(&Sort::Int));
                    }
                    return Some(op.result_sort());
                }
                let d = self.sig.lookup(f)?.clone();
                for (x, s) in args.iter().zip(&d.args) {
                    self.infer(x, Some(s));
                }
                Some(d.result.clone())
            }
            Ast::Not(x, _) => {
                self.infer(x, Some(&Sort::Bool));
                Some(Sort::Bool)
            }
            Ast::Bin(op, l, r, _) => {
                use BinOp::*;
                match op {
                    Add | Sub | Mul => {
                        self.infer(l, Some(&Sort::Int));
                        self.infer(r, Some(&Sort::Int));
                        Some(Sort::Int)
                    }
                    Ge | Gt | Le | Lt => {
                        self.infer(l, Some(&Sort::Int));
                        self.infer(r, Some(&Sort::Int));
                        Some(Sort::Bool)
                    }
                    And | Or | Implies | Iff => {
                        self.infer(l, Some(&Sort::Bool));
                        self.infer(r, Some(&Sort::Bool));
                        Some(Sort::Bool)
                    }
                    Eq | Ne => {
                        let s = self.infer(l, None);
                        let t = self.infer(r, s.as_ref());
                        if s.is_none() {
                            self.infer(l, t.as_ref());
                        }
                        Some(Sort::Bool)
                    }
                }
            }
        }
    }

    fn var(&self, n: &str, loc: Loc) -> Result<Var, ParseError> {
        let sort = self.env.get(n).cloned().unwrap_or(Sort::Int);
        match Var::parse_display(n, sort) {
            Some(v) => Ok(v),
            None => err(loc, format!("invalid variable name '{}'", n)),
        }
    }

    fn app(&self, f: Func, args: Vec<Term>, loc: Loc) -> Result<Term, ParseError> {
        Term::app(f, args).or_else(|e| err(loc, e.to_string()))
    }

    fn build(&self, a: &Ast) -> Result<Term, ParseError> {
        match a {
            Ast::Int(i, _) => Ok(Term::big(i.clone())),
            Ast::Neg(x, loc) => match &**x {
                Ast::Int(i, _) => Ok(Term::big(-i.clone())),
                other => {
                    let t = self.build(other)?;
                    self.app(Func::Theory(TheoryOp::Sub), vec![Term::int(0), t], *loc)
                }
            },
            Ast::Name(n, _) if n == "true" => Ok(Term::tt()),
            Ast::Name(n, _) if n == "false" => Ok(Term::ff()),
            Ast::Name(n, loc) => match self.sig.lookup(n) {
                Some(d) if d.args.is_empty() => Ok(Term::App(Func::User(d.clone()), vec![])),
                Some(d) => err(*loc, format!("{} expects {} arguments", n, d.args.len())),
                None => Ok(Term::Var(self.var(n, *loc)?)),
            },
            Ast::Call(f, args, loc) => {
                let func = match theory_call(f) {
                    Some(op) => Func::Theory(op),
                    None => match self.sig.lookup(f) {
                        Some(d) => Func::User(d.clone()),
                        None => return err(*loc, format!("unknown function symbol '{}'", f)),
                    },
                };
                let args = args
                    .iter()
                    .map(|x| self.build(x))
                    .collect::<Result<Vec<_>, _>>()?;
                self.app(func, args, *loc)
            }
            Ast::Not(x, loc) => {
                let t = self.build(x)?;
                self.app(Func::Theory(TheoryOp::Not), vec![t], *loc)
            }
            Ast::Bin(op, l, r, loc) => {
                let (l, r) = (self.build(l)?, self.build(r)?);
                use BinOp::*;
                let top = match op {
                    Add => TheoryOp::Add,
                    Sub => TheoryOp::Sub,
                    Mul => TheoryOp::Mul,
                    Ge => TheoryOp::Ge,
                    Gt => TheoryOp::Gt,
                    Le => TheoryOp::Le,
                    Lt => TheoryOp::Lt,
                    And => TheoryOp::And,
                    Or => TheoryOp::Or,
                    Implies => TheoryOp::Implies,
                    Iff => TheoryOp::Iff,
                    Eq | Ne => {
                        let s = l.sort();
                        let found = if *op == Eq {
                            TheoryOp::eq_for(&s)
                        } else {
                            TheoryOp::ne_for(&s)
                        };
                        match found {
                            Some(t) => t,
                            None => {
                                return err(
                                    *loc,
                                    format!("equality on sort {} is not a theory symbol", s),
                                )
                            }
                        }
                    }
                };
                self.app(Func::Theory(top), vec![l, r], *loc)
            }
        }
    }

    fn run(&mut self, parts: &[&Ast]) -> Result<Vec<Term>, ParseError> {
        for _ in 0..3 {
            for p in parts {
                self.infer(p, None);
            }
        }
        parts.iter().map(|p| self.build(p)).collect()
    }
}

/// A goal as written: an (∃-)equation or an inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    Equation(Ceq),
    Inequality(Inequality),
}

impl Goal {
    pub fn to_ceq(&self) -> Result<Ceq, CeqError> {
        match self {
            Goal::Equation(e) => Ok(e.clone()),
            Goal::Inequality(i) => i.to_ceq(),
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Inequality(i) => write!(f, "{}", i),
            Goal::Equation(e) => {
                if !e.binder.is_empty() {
                    let names: Vec<String> = e.binder.iter().map(Var::to_string).collect();
                    write!(f, "exists {} [{}] . ", names.join(", "), e.eta)?;
                }
                write!(f, "{} = {}", e.lhs, e.rhs)?;
                if !e.guard.is_true() {
                    write!(f, " [{}]", e.guard)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Problem {
    pub signature: Signature,
    pub rules: Vec<Rule>,
    pub goals: Vec<Goal>,
}

impl Problem {
    pub fn system(&self) -> Lctrs {
        Lctrs::new(self.signature.clone(), self.rules.clone())
    }

    pub fn goal_equations(&self) -> Result<Vec<Ceq>, CeqError> {
        self.goals.iter().map(Goal::to_ceq).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Signature,
    Rules,
    Goals,
}

fn sort_name(sig: &mut Signature, name: &str, loc: Loc) -> Result<Sort, ParseError> {
    match name {
        "Int" => Ok(Sort::Int),
        "Bool" => Ok(Sort::Bool),
        _ => sig.declare_sort(name).or_else(|e| err(loc, e.to_string())),
    }
}

fn signature_line(sig: &mut Signature, p: &mut Parser) -> Result<(), ParseError> {
    let (name, loc) = p.ident("a symbol name")?;
    p.expect(&Tok::Colon, "':'")?;
    let mut sorts = Vec::new();
    loop {
        let (s, l) = p.ident("a sort")?;
        sorts.push(sort_name(sig, &s, l)?);
        if !p.eat(&Tok::Star) {
            break;
        }
    }
    let result = if p.eat(&Tok::Arrow) {
        let (s, l) = p.ident("a sort")?;
        sort_name(sig, &s, l)?
    } else if sorts.len() == 1 {
        sorts.pop().expect("one sort")
    } else {
        return err(p.loc(), "expected '->'");
    };
    p.end()?;
    sig.declare(&name, sorts, result)
        .map(|_| ())
        .or_else(|e| err(loc, e.to_string()))
}

fn optional_guard(p: &mut Parser) -> Result<Option<Ast>, ParseError> {
    if p.eat(&Tok::LBrack) {
        let g = p.expr()?;
        p.expect(&Tok::RBrack, "']'")?;
        Ok(Some(g))
    } else {
        Ok(None)
    }
}

fn truth() -> Ast {
    Ast::Name("true".into(), (0, 0))
}

fn rule_line(sig: &Signature, id: &str, p: &mut Parser) -> Result<Rule, ParseError> {
    let start = p.loc();
    let lhs = p.expr()?;
    p.expect(&Tok::Arrow, "'->'")?;
    let rhs = p.expr()?;
    let guard = optional_guard(p)?.unwrap_or_else(truth);
    p.end()?;
    let mut e = Elab {
        sig,
        env: BTreeMap::new(),
    };
    let t = e.run(&[&lhs, &rhs, &guard])?;
    let [l, r, g]: [Term; 3] = t.try_into().expect("three parts");
    Rule::new(id, l, r, g, Origin::User).or_else(|e| err(start, e.to_string()))
}

fn goal_line(sig: &Signature, p: &mut Parser, solver: &Solver) -> Result<Goal, ParseError> {
    let start = p.loc();
    let parens = p.peek() == &Tok::LParen && matches!(p.peek_at(1), Tok::Ident(k) if k == "exists");
    if parens {
        p.bump();
    }
    let mut binder = Vec::new();
    let mut eta = truth();
    if p.is_keyword("exists") {
        p.bump();
        loop {
            binder.push(p.ident("a variable")?);
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
        if let Some(g) = optional_guard(p)? {
            eta = g;
        }
        p.expect(&Tok::Dot, "'.'")?;
    }
    let body = p.expr()?;
    if parens {
        p.expect(&Tok::RParen, "')'")?;
    }
    let guard = optional_guard(p)?.unwrap_or_else(truth);
    p.end()?;
    let Ast::Bin(op, l, r, oploc) = &body else {
        return err(body.loc(), "a goal is an equation or an inequality");
    };
    let mut e = Elab {
        sig,
        env: BTreeMap::new(),
    };
    let terms = e.run(&[l, r, &eta, &guard])?;
    let [lhs, rhs, eta, guard]: [Term; 4] = terms.try_into().expect("four parts");
    let rel = match op {
        BinOp::Eq => None,
        BinOp::Ge => Some(Relation::Ge),
        BinOp::Gt => Some(Relation::Gt),
        BinOp::Le => Some(Relation::Le),
        BinOp::Lt => Some(Relation::Lt),
        _ => return err(*oploc, "a goal is an equation or an inequality"),
    };
    if let Some(rel) = rel {
        if !binder.is_empty() {
            return err(*oploc, "an existential goal must be an equation");
        }
        let iq = Inequality {
            lhs,
            rel,
            rhs,
            guard,
        };
        iq.to_ceq().or_else(|e| err(start, e.to_string()))?;
        return Ok(Goal::Inequality(iq));
    }
    let binder = binder
        .iter()
        .map(|(n, l)| e.var(n, *l))
        .collect::<Result<Vec<_>, _>>()?;
    Ceq::new(binder, eta, lhs, rhs, guard, solver)
        .map(Goal::Equation)
        .or_else(|e| err(start, e.to_string()))
}

/// Parses a problem file. Goals are checked for well-formedness with the
/// built-in solver.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let solver = Solver::builtin();
    let mut problem = Problem::default();
    let mut section = Section::None;
    let mut seen_theory = false;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split("--").next().unwrap_or("");
        let toks = lex(k + 1, line)?;
        if toks.len() == 1 {
            continue;
        }
        let mut p = Parser { toks, at: 0 };
        if let Tok::Ident(head) = p.peek().clone() {
            let next = section_of(&head);
            if let Some(next) = next {
                let loc = p.bump().1;
                if head == "THEORY" {
                    let (name, l) = p.ident("a theory name")?;
                    if name != "ints" {
                        return err(l, format!("unknown theory '{}'", name));
                    }
                    if seen_theory {
                        return err(loc, "repeated THEORY section");
                    }
                    seen_theory = true;
                }
                p.end()?;
                section = next;
                continue;
            }
        }
        match section {
            Section::None => return err(p.loc(), "expected a section header"),
            Section::Signature => signature_line(&mut problem.signature, &mut p)?,
            Section::Rules => {
                let id = format!("R{}", problem.rules.len() + 1);
                let r = rule_line(&problem.signature, &id, &mut p)?;
                problem.rules.push(r);
            }
            Section::Goals => {
                let g = goal_line(&problem.signature, &mut p, &solver)?;
                problem.goals.push(g);
            }
        }
    }
    Ok(problem)
}

fn section_of(head: &str) -> Option<Section> {
    match head {
        "THEORY" => Some(Section::None),
        "SIGNATURE" => Some(Section::Signature),
        "RULES" => Some(Section::Rules),
        "GOALS" => Some(Section::Goals),
        _ => None,
    }
}

/// Parses a single goal line against a signature.
pub fn parse_goal(sig: &Signature, text: &str) -> Result<Goal, ParseError> {
    let mut p = Parser {
        toks: lex(1, text)?,
        at: 0,
    };
    goal_line(sig, &mut p, &Solver::builtin())
}

/// Parses a constraint or term in the variables' inferred sorts.
pub fn parse_term(sig: &Signature, text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(1, text)?,
        at: 0,
    };
    let a = p.expr()?;
    p.end()?;
    let mut e = Elab {
        sig,
        env: BTreeMap::new(),
    };
    Ok(e.run(&[&a])?.remove(0))
}

pub fn print_problem(p: &Problem) -> String {
    let mut out = String::from("THEORY ints\nSIGNATURE\n");
    for d in p.signature.symbols() {
        out.push_str("  ");
        out.push_str(&d.name);
        out.push_str(" : ");
        if !d.args.is_empty() {
            let args: Vec<String> = d.args.iter().map(Sort::to_string).collect();
            out.push_str(&args.join(" * "));
            out.push_str(" -> ");
        }
        out.push_str(&d.result.to_string());
        out.push('\n');
    }
    out.push_str("RULES\n");
    for r in &p.rules {
        out.push_str(&format!("  {}\n", r));
    }
    out.push_str("GOALS\n");
    for g in &p.goals {
        out.push_str(&format!("  {}\n", g));
    }
    out
}

pub fn print_equation(eq: &Ceq) -> String {
    eq.to_string()
}
