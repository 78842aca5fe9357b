//! Term signatures on top of the fixed integer/boolean theory signature.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{Func, FuncDecl, Sort, TheoryOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("symbol {0} is declared twice")]
    DuplicateSymbol(String),
    #[error("symbol {0} clashes with a theory symbol")]
    ReservedSymbol(String),
    #[error("sort {0} is reserved")]
    ReservedSort(String),
}

/// Role of a symbol in the signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolClass {
    Value,
    Calculation,
    TermSymbol,
}

/// The term signature together with the standard integer theory
/// signature (`+ - * exp div mod >= > <= < = !=` and the boolean core).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<Sort>,
    funcs: BTreeMap<Arc<str>, Arc<FuncDecl>>,
    order: Vec<Arc<str>>,
}

const RESERVED: &[&str] = &[
    "exp",
    "div",
    "mod",
    "not",
    "true",
    "false",
    "exists",
    "THEORY",
    "SIGNATURE",
    "RULES",
    "GOALS",
];

impl Signature {
    /// The standard integer signature with no term symbols.
    pub fn standard() -> Signature {
        Signature::default()
    }

    pub fn declare_sort(&mut self, name: &str) -> Result<Sort, SignatureError> {
        let s = Sort::named(name);
        if s.is_theory() {
            return Err(SignatureError::ReservedSort(name.to_string()));
        }
        if !self.sorts.contains(&s) {
            self.sorts.push(s.clone());
        }
        Ok(s)
    }

    pub fn declare(
        &mut self,
        name: &str,
        args: Vec<Sort>,
        result: Sort,
    ) -> Result<Arc<FuncDecl>, SignatureError> {
        if RESERVED.contains(&name) {
            return Err(SignatureError::ReservedSymbol(name.to_string()));
        }
        if self.funcs.contains_key(name) {
            return Err(SignatureError::DuplicateSymbol(name.to_string()));
        }
        for s in args.iter().chain(std::iter::once(&result)) {
            if let Sort::Named(n) = s {
                self.declare_sort(n)?;
            }
        }
        let d = FuncDecl::new(name, args, result);
        self.funcs.insert(d.name.clone(), d.clone());
        self.order.push(d.name.clone());
        Ok(d)
    }

    pub fn lookup(&self, name: &str) -> Option<&Arc<FuncDecl>> {
        self.funcs.get(name)
    }

    pub fn func(&self, name: &str) -> Option<Func> {
        self.lookup(name).map(|d| Func::User(d.clone()))
    }

    /// Term symbols in declaration order.
    pub fn symbols(&self) -> impl Iterator<Item = &Arc<FuncDecl>> {
        self.order.iter().map(move |n| &self.funcs[n])
    }

    pub fn term_sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn theory_ops(&self) -> &'static [TheoryOp] {
        &TheoryOp::ALL
    }

    pub fn classify(func: &Func) -> SymbolClass {
        match func {
            Func::Theory(_) => SymbolClass::Calculation,
            Func::User(_) => SymbolClass::TermSymbol,
        }
    }

    /// Term symbols whose result sort is `sort`.
    pub fn symbols_of_sort<'a>(
        &'a self,
        sort: &'a Sort,
    ) -> impl Iterator<Item = &'a Arc<FuncDecl>> + 'a {
        self.symbols().filter(move |d| &d.result == sort)
    }
}
