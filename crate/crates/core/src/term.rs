//! Sorted first-order terms, positions, substitutions, matching and
//! unification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid position {pos} in term {term}")]
    InvalidPosition { pos: Position, term: String },
    #[error("sort mismatch: expected {expected}, found {found}")]
    SortMismatch { expected: Sort, found: Sort },
    #[error("symbol {symbol} expects {expected} arguments, got {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
}

/// A sort. `Int` and `Bool` are the theory sorts; every named sort is a
/// term sort.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    Named(Arc<str>),
}

impl Sort {
    pub fn named(name: &str) -> Sort {
        match name {
            "Int" => Sort::Int,
            "Bool" => Sort::Bool,
            _ => Sort::Named(name.into()),
        }
    }

    pub fn is_theory(&self) -> bool {
        matches!(self, Sort::Int | Sort::Bool)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("Bool"),
            Sort::Int => f.write_str("Int"),
            Sort::Named(n) => f.write_str(n),
        }
    }
}

/// A sorted variable. Identity is name, numeric suffix and sort; the suffix
/// is how fresh copies of a variable are told apart (`n`, `n'`, `n''`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    name: Arc<str>,
    index: u32,
    sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var {
            name: name.into(),
            index: 0,
            sort,
        }
    }

    pub fn with_index(name: &str, index: u32, sort: Sort) -> Var {
        Var {
            name: name.into(),
            index,
            sort,
        }
    }

    pub fn int(name: &str) -> Var {
        Var::new(name, Sort::Int)
    }

    pub fn boolean(name: &str) -> Var {
        Var::new(name, Sort::Bool)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn sort(&self) -> &Sort {
        &self.sort
    }

    /// Inverse of the display form: `n`, `n'`, `n''`, `n'3`.
    pub fn parse_display(s: &str, sort: Sort) -> Option<Var> {
        let (base, suffix) = match s.find('\'') {
            Some(i) => (&s[..i], &s[i..]),
            None => (s, ""),
        };
        let mut chars = base.chars();
        let head_ok = chars
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if !head_ok || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return None;
        }
        let index = match suffix {
            "" => 0,
            "'" => 1,
            "''" => 2,
            _ => {
                let k: u32 = suffix[1..].parse().ok()?;
                if k < 3 {
                    return None;
                }
                k
            }
        };
        Some(Var::with_index(base, index, sort))
    }

    /// Internal variables introduced by the solver carry a `%` prefix that
    /// the concrete syntax cannot produce.
    pub fn is_internal(&self) -> bool {
        self.name.starts_with('%')
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            0 => write!(f, "{}", self.name),
            1 => write!(f, "{}'", self.name),
            2 => write!(f, "{}''", self.name),
            k => write!(f, "{}'{}", self.name, k),
        }
    }
}

/// A theory value: a boolean or an exact integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
}

impl Value {
    pub fn int(i: i64) -> Value {
        Value::Int(BigInt::from(i))
    }

    pub fn sort(&self) -> Sort {
        match self {
            Value::Bool(_) => Sort::Bool,
            Value::Int(_) => Sort::Int,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(i) => Some(i),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", b),
            Value::Int(i) => write!(f, "{}", i),
        }
    }
}

/// Calculation symbols of the integer theory with the boolean core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoryOp {
    Add,
    Sub,
    Mul,
    Exp,
    Div,
    Mod,
    Ge,
    Gt,
    Le,
    Lt,
    EqInt,
    NeInt,
    EqBool,
    NeBool,
    And,
    Or,
    Not,
    Implies,
    Iff,
}

impl TheoryOp {
    pub const ALL: [TheoryOp; 19] = [
        TheoryOp::Add,
        TheoryOp::Sub,
        TheoryOp::Mul,
        TheoryOp::Exp,
        TheoryOp::Div,
        TheoryOp::Mod,
        TheoryOp::Ge,
        TheoryOp::Gt,
        TheoryOp::Le,
        TheoryOp::Lt,
        TheoryOp::EqInt,
        TheoryOp::NeInt,
        TheoryOp::EqBool,
        TheoryOp::NeBool,
        TheoryOp::And,
        TheoryOp::Or,
        TheoryOp::Not,
        TheoryOp::Implies,
        TheoryOp::Iff,
    ];

    pub fn arg_sorts(self) -> &'static [Sort] {
        use TheoryOp::*;
        const II: &[Sort] = &[Sort::Int, Sort::Int];
        const BB: &[Sort] = &[Sort::Bool, Sort::Bool];
        const B: &[Sort] = &[Sort::Bool];
        match self {
            Add | Sub | Mul | Exp | Div | Mod | Ge | Gt | Le | Lt | EqInt | NeInt => II,
            EqBool | NeBool | And | Or | Implies | Iff => BB,
            Not => B,
        }
    }

    pub fn arity(self) -> usize {
        self.arg_sorts().len()
    }

    pub fn result_sort(self) -> Sort {
        use TheoryOp::*;
        match self {
            Add | Sub | Mul | Exp | Div | Mod => Sort::Int,
            _ => Sort::Bool,
        }
    }

    /// Stable ASCII name, used in rule identifiers such as `calc:sub`.
    pub fn name(self) -> &'static str {
        use TheoryOp::*;
        match self {
            Add => "add",
            Sub => "sub",
            Mul => "mul",
            Exp => "exp",
            Div => "div",
            Mod => "mod",
            Ge => "ge",
            Gt => "gt",
            Le => "le",
            Lt => "lt",
            EqInt => "eq_int",
            NeInt => "ne_int",
            EqBool => "eq_bool",
            NeBool => "ne_bool",
            And => "and",
            Or => "or",
            Not => "not",
            Implies => "implies",
            Iff => "iff",
        }
    }

    pub fn from_name(name: &str) -> Option<TheoryOp> {
        TheoryOp::ALL.iter().copied().find(|op| op.name() == name)
    }

    /// Concrete syntax of the symbol.
    pub fn symbol(self) -> &'static str {
        use TheoryOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Exp => "exp",
            Div => "div",
            Mod => "mod",
            Ge => ">=",
            Gt => ">",
            Le => "<=",
            Lt => "<",
            EqInt | EqBool => "=",
            NeInt | NeBool => "!=",
            And => "/\\",
            Or => "\\/",
            Not => "not",
            Implies => "=>",
            Iff => "<=>",
        }
    }

    pub fn eq_for(sort: &Sort) -> Option<TheoryOp> {
        match sort {
            Sort::Int => Some(TheoryOp::EqInt),
            Sort::Bool => Some(TheoryOp::EqBool),
            Sort::Named(_) => None,
        }
    }

    pub fn ne_for(sort: &Sort) -> Option<TheoryOp> {
        match sort {
            Sort::Int => Some(TheoryOp::NeInt),
            Sort::Bool => Some(TheoryOp::NeBool),
            Sort::Named(_) => None,
        }
    }
}

/// Declaration of a term-signature symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncDecl {
    pub name: Arc<str>,
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl FuncDecl {
    pub fn new(name: &str, args: Vec<Sort>, result: Sort) -> Arc<FuncDecl> {
        Arc::new(FuncDecl {
            name: name.into(),
            args,
            result,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Theory(TheoryOp),
    User(Arc<FuncDecl>),
}

impl Func {
    pub fn arg_sorts(&self) -> &[Sort] {
        match self {
            Func::Theory(op) => op.arg_sorts(),
            Func::User(d) => &d.args,
        }
    }

    pub fn result_sort(&self) -> Sort {
        match self {
            Func::Theory(op) => op.result_sort(),
            Func::User(d) => d.result.clone(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Func::Theory(op) => op.symbol(),
            Func::User(d) => &d.name,
        }
    }

    pub fn is_theory(&self) -> bool {
        matches!(self, Func::Theory(_))
    }
}

/// A position: a path of 1-based argument indices, empty at the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn parent(&self) -> Option<Position> {
        if self.0.is_empty() {
            None
        } else {
            Some(Position(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Parses the dot-separated form; `ε`, `root` and the empty string
    /// denote the root.
    pub fn parse(s: &str) -> Option<Position> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "root" {
            return Some(Position::root());
        }
        s.split('.')
            .map(|p| p.parse::<usize>().ok().filter(|&i| i > 0))
            .collect::<Option<Vec<_>>>()
            .map(Position)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Val(Value),
    App(Func, Vec<Term>),
}

// Smart constructors named after the operators they build.
#[allow(clippy::should_implement_trait)]
impl Term {
    /// Checked application: arity and argument sorts must match.
    pub fn app(func: Func, args: Vec<Term>) -> Result<Term, TermError> {
        let expected = func.arg_sorts();
        if expected.len() != args.len() {
            return Err(TermError::Arity {
                symbol: func.name().to_string(),
                expected: expected.len(),
                found: args.len(),
            });
        }
        for (s, a) in expected.iter().zip(&args) {
            let found = a.sort();
            if *s != found {
                return Err(TermError::SortMismatch {
                    expected: s.clone(),
                    found,
                });
            }
        }
        Ok(Term::App(func, args))
    }

    /// Theory application built from parts whose sorts are known to be
    /// right. Sorts are still checked in debug builds.
    pub fn op(op: TheoryOp, args: Vec<Term>) -> Term {
        debug_assert!(
            Term::app(Func::Theory(op), args.clone()).is_ok(),
            "ill-sorted {:?} application",
            op
        );
        Term::App(Func::Theory(op), args)
    }

    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn int(i: i64) -> Term {
        Term::Val(Value::int(i))
    }

    pub fn big(i: BigInt) -> Term {
        Term::Val(Value::Int(i))
    }

    pub fn bool(b: bool) -> Term {
        Term::Val(Value::Bool(b))
    }

    pub fn tt() -> Term {
        Term::bool(true)
    }

    pub fn ff() -> Term {
        Term::bool(false)
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort.clone(),
            Term::Val(v) => v.sort(),
            Term::App(f, _) => f.result_sort(),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    pub fn root(&self) -> Option<&Func> {
        match self {
            Term::App(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Term::Val(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Val(_))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Term::Val(Value::Bool(true)))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Term::Val(Value::Bool(false)))
    }

    /// A theory term uses only theory symbols, values and theory-sorted
    /// variables.
    pub fn is_theory(&self) -> bool {
        match self {
            Term::Var(v) => v.sort.is_theory(),
            Term::Val(_) => true,
            Term::App(Func::Theory(_), args) => args.iter().all(Term::is_theory),
            Term::App(Func::User(_), _) => false,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Val(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Val(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Variables in order of first occurrence (left to right).
    pub fn vars_ordered(&self) -> Vec<Var> {
        fn go(t: &Term, out: &mut Vec<Var>) {
            match t {
                Term::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone())
                    }
                }
                Term::Val(_) => {}
                Term::App(_, args) => args.iter().for_each(|a| go(a, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Val(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn var_occurrences(&self, v: &Var) -> usize {
        match self {
            Term::Var(w) => usize::from(w == v),
            Term::Val(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.var_occurrences(v)).sum(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in &p.0 {
            match cur {
                Term::App(_, args) if i >= 1 && i <= args.len() => cur = &args[i - 1],
                _ => {
                    return Err(TermError::InvalidPosition {
                        pos: p.clone(),
                        term: self.to_string(),
                    })
                }
            }
        }
        Ok(cur)
    }

    pub fn replace_at(&self, p: &Position, u: Term) -> Result<Term, TermError> {
        let old = self.subterm_at(p)?;
        let (expected, found) = (old.sort(), u.sort());
        if expected != found {
            return Err(TermError::SortMismatch { expected, found });
        }
        Ok(self.replace_unchecked(&p.0, u))
    }

    fn replace_unchecked(&self, path: &[usize], u: Term) -> Term {
        match path.split_first() {
            None => u,
            Some((&i, rest)) => match self {
                Term::App(f, args) => {
                    let mut args = args.clone();
                    args[i - 1] = args[i - 1].replace_unchecked(rest, u);
                    Term::App(f.clone(), args)
                }
                _ => unreachable!("position validated by subterm_at"),
            },
        }
    }

    /// All positions, pre-order (leftmost-outermost first).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        self.positions_pre(&mut Vec::new(), &mut out);
        out
    }

    fn positions_pre(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        if let Term::App(_, args) = self {
            for (i, a) in args.iter().enumerate() {
                path.push(i + 1);
                a.positions_pre(path, out);
                path.pop();
            }
        }
    }

    /// All positions, post-order (leftmost-innermost first).
    pub fn positions_innermost(&self) -> Vec<Position> {
        fn go(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Position>) {
            if let Term::App(_, args) = t {
                for (i, a) in args.iter().enumerate() {
                    path.push(i + 1);
                    go(a, path, out);
                    path.pop();
                }
            }
            out.push(Position(path.clone()));
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn apply(&self, s: &Subst) -> Term {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Val(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(s)).collect()),
        }
    }

    /// Values occurring in the term, with their positions.
    pub fn value_positions(&self) -> Vec<Position> {
        self.positions()
            .into_iter()
            .filter(|p| self.subterm_at(p).map(Term::is_value).unwrap_or(false))
            .collect()
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::And, vec![a, b])
    }

    /// Conjunction that drops `true` operands.
    pub fn and_simple(a: Term, b: Term) -> Term {
        if a.is_true() {
            b
        } else if b.is_true() {
            a
        } else {
            Term::and(a, b)
        }
    }

    pub fn conj<I: IntoIterator<Item = Term>>(items: I) -> Term {
        items.into_iter().fold(Term::tt(), Term::and_simple)
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Or, vec![a, b])
    }

    pub fn disj<I: IntoIterator<Item = Term>>(items: I) -> Term {
        let mut acc: Option<Term> = None;
        for t in items {
            acc = Some(match acc {
                None => t,
                Some(a) => Term::or(a, t),
            });
        }
        acc.unwrap_or_else(Term::ff)
    }

    pub fn not(a: Term) -> Term {
        Term::op(TheoryOp::Not, vec![a])
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Implies, vec![a, b])
    }

    pub fn iff(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Iff, vec![a, b])
    }

    /// Equality at the (theory) sort of the operands.
    pub fn eq(a: Term, b: Term) -> Term {
        let op = TheoryOp::eq_for(&a.sort()).expect("equality on a theory sort");
        Term::op(op, vec![a, b])
    }

    pub fn ne(a: Term, b: Term) -> Term {
        let op = TheoryOp::ne_for(&a.sort()).expect("disequality on a theory sort");
        Term::op(op, vec![a, b])
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Add, vec![a, b])
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Sub, vec![a, b])
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Mul, vec![a, b])
    }

    pub fn ge(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Ge, vec![a, b])
    }

    pub fn gt(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Gt, vec![a, b])
    }

    pub fn le(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Le, vec![a, b])
    }

    pub fn lt(a: Term, b: Term) -> Term {
        Term::op(TheoryOp::Lt, vec![a, b])
    }

    /// Top-level conjuncts of a constraint.
    pub fn conjuncts(&self) -> Vec<Term> {
        let mut out = Vec::new();
        fn go(t: &Term, out: &mut Vec<Term>) {
            match t {
                Term::App(Func::Theory(TheoryOp::And), args) => {
                    go(&args[0], out);
                    go(&args[1], out);
                }
                _ => out.push(t.clone()),
            }
        }
        go(self, &mut out);
        out
    }
}

impl Term {
    fn prec(&self) -> u8 {
        use TheoryOp::*;
        match self {
            Term::App(Func::Theory(op), _) => match op {
                Iff => 1,
                Implies => 2,
                Or => 3,
                And => 4,
                Not => 5,
                Ge | Gt | Le | Lt | EqInt | NeInt | EqBool | NeBool => 6,
                Add | Sub => 7,
                Mul => 8,
                Exp | Div | Mod => 10,
            },
            Term::Val(Value::Int(i)) if i.sign() == num_bigint::Sign::Minus => 9,
            _ => 10,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.prec();
        if p < min {
            f.write_str("(")?;
            self.fmt_prec(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Val(v) => write!(f, "{}", v),
            Term::App(Func::Theory(op), args) => match op {
                TheoryOp::Not => {
                    f.write_str("not ")?;
                    args[0].fmt_prec(f, 5)
                }
                TheoryOp::Exp | TheoryOp::Div | TheoryOp::Mod => {
                    write!(f, "{}(", op.symbol())?;
                    args[0].fmt_prec(f, 0)?;
                    f.write_str(", ")?;
                    args[1].fmt_prec(f, 0)?;
                    f.write_str(")")
                }
                _ => {
                    let (l, r) = match p {
                        2 => (p + 1, p),
                        1 | 6 => (p + 1, p + 1),
                        _ => (p, p + 1),
                    };
                    args[0].fmt_prec(f, l)?;
                    write!(f, " {} ", op.symbol())?;
                    args[1].fmt_prec(f, r)
                }
            },
            Term::App(Func::User(d), args) => {
                f.write_str(&d.name)?;
                if args.is_empty() {
                    return Ok(());
                }
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Term {
        Term::Var(v)
    }
}

/// A finite, sort-preserving map from variables to terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Subst(BTreeMap<Var, Term>);

impl Subst {
    pub fn new() -> Subst {
        Subst(BTreeMap::new())
    }

    pub fn insert(&mut self, v: Var, t: Term) -> Result<(), TermError> {
        if *v.sort() != t.sort() {
            return Err(TermError::SortMismatch {
                expected: v.sort().clone(),
                found: t.sort(),
            });
        }
        self.0.insert(v, t);
        Ok(())
    }

    pub fn bind(mut self, v: Var, t: Term) -> Subst {
        self.insert(v, t).expect("sort-preserving binding");
        self
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn remove(&mut self, v: &Var) -> Option<Term> {
        self.0.remove(v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.0.contains_key(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.0.keys().cloned().collect()
    }

    /// `self` followed by `other`: `t.apply(&a.then(&b)) == t.apply(&a).apply(&b)`.
    pub fn then(&self, other: &Subst) -> Subst {
        let mut out: BTreeMap<Var, Term> = self
            .0
            .iter()
            .map(|(v, t)| (v.clone(), t.apply(other)))
            .collect();
        for (v, t) in &other.0 {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        out.retain(|v, t| t.as_var() != Some(v));
        Subst(out)
    }

    pub fn is_idempotent(&self) -> bool {
        self.0
            .values()
            .all(|t| self.0.keys().all(|v| !t.contains_var(v)))
    }

    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Subst {
        Subst(
            self.0
                .iter()
                .filter(|(v, _)| vars.contains(*v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        )
    }

    /// True when every binding maps to a value.
    pub fn is_value_assignment(&self) -> bool {
        self.0.values().all(Term::is_value)
    }
}

impl FromIterator<(Var, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Subst {
        let mut s = Subst::new();
        for (v, t) in iter {
            s.insert(v, t).expect("sort-preserving binding");
        }
        s
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} -> {}", v, t)?;
        }
        f.write_str("}")
    }
}

impl Serialize for Subst {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = ser.serialize_map(Some(self.0.len()))?;
        for (v, t) in &self.0 {
            m.serialize_entry(&v.to_string(), &t.to_string())?;
        }
        m.end()
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

/// Syntactic matching: the minimal `γ` with `pattern·γ = subject`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Subst> {
    let mut s = Subst::new();
    match_into(pattern, subject, &mut s).then_some(s)
}

/// Extends `s` so that `pattern·s = subject`.
pub fn match_into(pattern: &Term, subject: &Term, s: &mut Subst) -> bool {
    match (pattern, subject) {
        (Term::Var(v), _) => {
            if *v.sort() != subject.sort() {
                return false;
            }
            match s.get(v) {
                Some(t) => t == subject,
                None => {
                    s.0.insert(v.clone(), subject.clone());
                    true
                }
            }
        }
        (Term::Val(a), Term::Val(b)) => a == b,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_into(x, y, s))
        }
        _ => false,
    }
}

/// Most general unifier with occurs check. The result is idempotent. When
/// two variables meet, the one from `t` is bound, so unifying a goal
/// subterm with a freshly renamed rule lhs keeps the goal's variables.
pub fn unify(s: &Term, t: &Term) -> Option<Subst> {
    let mut sub = Subst::new();
    let mut stack = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = stack.pop() {
        let a = a.apply(&sub);
        let b = b.apply(&sub);
        if a == b {
            continue;
        }
        match (&a, &b) {
            (_, Term::Var(v)) => {
                if a.contains_var(v) || *v.sort() != a.sort() {
                    return None;
                }
                sub = sub.then(&Subst::new().bind(v.clone(), a.clone()));
            }
            (Term::Var(v), _) => {
                if b.contains_var(v) || *v.sort() != b.sort() {
                    return None;
                }
                sub = sub.then(&Subst::new().bind(v.clone(), b.clone()));
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
            _ => return None,
        }
    }
    Some(sub)
}

/// Fresh-variable supply. A name's suffix counter only grows, so renamings
/// are deterministic given the sequence of requests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarGen {
    used: BTreeMap<Arc<str>, BTreeSet<u32>>,
}

impl VarGen {
    pub fn new() -> VarGen {
        VarGen::default()
    }

    pub fn observe(&mut self, v: &Var) {
        self.used.entry(v.name.clone()).or_default().insert(v.index);
    }

    pub fn observe_all<'a, I: IntoIterator<Item = &'a Var>>(&mut self, vars: I) {
        for v in vars {
            self.observe(v);
        }
    }

    pub fn is_used(&self, v: &Var) -> bool {
        self.used.get(&v.name).is_some_and(|s| s.contains(&v.index))
    }

    /// A variable of the given name and sort not handed out or observed
    /// before: the unsuffixed name if free, otherwise the next suffix.
    pub fn fresh(&mut self, name: &str, sort: Sort) -> Var {
        let used = self.used.entry(name.into()).or_default();
        let index = if used.contains(&0) {
            used.iter().next_back().copied().unwrap_or(0) + 1
        } else {
            0
        };
        used.insert(index);
        Var::with_index(name, index, sort)
    }

    pub fn fresh_like(&mut self, v: &Var) -> Var {
        self.fresh(&v.name.clone(), v.sort.clone())
    }

    /// Renaming of `vars` onto fresh variables.
    pub fn renaming<'a, I: IntoIterator<Item = &'a Var>>(&mut self, vars: I) -> Subst {
        vars.into_iter()
            .map(|v| (v.clone(), Term::Var(self.fresh_like(v))))
            .collect()
    }
}

/// Renames `t` apart from `avoid`, returning the renamed term and the
/// renaming used.
pub fn rename_fresh(t: &Term, avoid: &BTreeSet<Var>) -> (Term, Subst) {
    let mut gen = VarGen::new();
    gen.observe_all(avoid);
    let vars = t.vars();
    gen.observe_all(&vars);
    let ren = gen.renaming(&vars);
    (t.apply(&ren), ren)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow_decl() -> Arc<FuncDecl> {
        FuncDecl::new("pow", vec![Sort::Int, Sort::Int], Sort::Int)
    }

    fn pow(a: Term, b: Term) -> Term {
        Term::app(Func::User(pow_decl()), vec![a, b]).unwrap()
    }

    fn v(n: &str) -> Term {
        Term::Var(Var::int(n))
    }

    #[test]
    fn subterm_and_replace() {
        let n = v("n");
        let t = Term::mul(
            Term::int(2),
            pow(Term::int(2), Term::sub(n.clone(), Term::int(1))),
        );
        assert_eq!(
            t.subterm_at(&Position(vec![2])).unwrap(),
            &pow(Term::int(2), Term::sub(n, Term::int(1)))
        );
        assert_eq!(v("x").subterm_at(&Position::root()).unwrap(), &v("x"));
        let f = Term::app(
            Func::User(FuncDecl::new("f", vec![Sort::Int], Sort::Int)),
            vec![v("x")],
        )
        .unwrap();
        assert!(matches!(
            f.subterm_at(&Position(vec![2])),
            Err(TermError::InvalidPosition { .. })
        ));
        let sum = Term::add(Term::int(1), Term::int(2));
        assert_eq!(
            sum.replace_at(&Position(vec![1]), Term::int(0)).unwrap(),
            Term::add(Term::int(0), Term::int(2))
        );
        assert_eq!(sum.replace_at(&Position::root(), v("u")).unwrap(), v("u"));
        assert!(matches!(
            sum.replace_at(&Position(vec![1]), Term::tt()),
            Err(TermError::SortMismatch { .. })
        ));
    }

    #[test]
    fn checked_application_rejects_bad_sorts() {
        assert!(Term::app(Func::User(pow_decl()), vec![Term::tt(), Term::int(1)]).is_err());
        assert!(Term::app(Func::User(pow_decl()), vec![Term::int(1)]).is_err());
    }

    #[test]
    fn matching() {
        let m = match_term(
            &Term::sub(v("x1"), v("x2")),
            &Term::sub(Term::int(3), Term::int(1)),
        )
        .unwrap();
        assert_eq!(m.get(&Var::int("x1")), Some(&Term::int(3)));
        assert_eq!(m.get(&Var::int("x2")), Some(&Term::int(1)));
        let m = match_term(&pow(v("x"), v("y")), &pow(Term::int(2), Term::int(3))).unwrap();
        assert_eq!(m.len(), 2);
        assert!(match_term(&pow(v("x"), v("x")), &pow(Term::int(2), Term::int(3))).is_none());
    }

    #[test]
    fn unification() {
        let th = unify(&pow(v("x"), v("n")), &pow(v("x1"), v("y1"))).unwrap();
        assert_eq!(th.get(&Var::int("x1")), Some(&v("x")));
        assert_eq!(th.get(&Var::int("y1")), Some(&v("n")));
        let th = unify(&pow(v("x"), Term::int(0)), &pow(v("x1"), v("y1"))).unwrap();
        assert_eq!(th.get(&Var::int("y1")), Some(&Term::int(0)));
        let fd = FuncDecl::new("f", vec![Sort::Int], Sort::Int);
        let fx = Term::app(Func::User(fd), vec![v("x")]).unwrap();
        assert!(unify(&v("x"), &fx).is_none());
    }

    #[test]
    fn fresh_renaming() {
        let avoid: BTreeSet<Var> = [Var::int("x"), Var::int("n")].into_iter().collect();
        let (t, ren) = rename_fresh(&pow(v("x"), v("y")), &avoid);
        assert!(t.vars().is_disjoint(&avoid));
        assert_eq!(ren.len(), 2);
        let (g, ren) = rename_fresh(&pow(Term::int(1), Term::int(2)), &BTreeSet::new());
        assert_eq!(g, pow(Term::int(1), Term::int(2)));
        assert!(ren.is_empty());
    }

    #[test]
    fn var_display_uses_primes() {
        assert_eq!(Var::with_index("n", 1, Sort::Int).to_string(), "n'");
        assert_eq!(Var::with_index("n", 2, Sort::Int).to_string(), "n''");
        assert_eq!(Var::with_index("n", 7, Sort::Int).to_string(), "n'7");
        for k in [0, 1, 2, 3, 12] {
            let v = Var::with_index("n", k, Sort::Int);
            assert_eq!(Var::parse_display(&v.to_string(), Sort::Int), Some(v));
        }
        assert_eq!(Var::parse_display("n'1", Sort::Int), None);
        assert_eq!(Var::parse_display("1n", Sort::Int), None);
    }

    #[test]
    fn position_parsing() {
        assert_eq!(Position::parse("ε"), Some(Position::root()));
        assert_eq!(Position::parse("1.2"), Some(Position(vec![1, 2])));
        assert_eq!(Position::parse("0"), None);
        assert_eq!(Position(vec![2, 1]).to_string(), "2.1");
    }
}
