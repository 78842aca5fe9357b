//! Translation of constraints into linear formulas.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::formula::{Atom, Formula, Lin};
use super::SolverError;
use crate::term::{Func, Sort, Term, TheoryOp, Value, Var};
use crate::theory::evaluate;

/// Translation state. Integer division and remainder by a constant
/// introduce internal quotient/remainder variables whose defining
/// constraints must be conjoined and existentially closed by the caller.
#[derive(Debug, Default)]
pub struct Linearizer {
    counter: usize,
    pub extras: Vec<Var>,
    pub defs: Vec<Formula>,
}

impl Linearizer {
    pub fn new() -> Linearizer {
        Linearizer::default()
    }

    /// Takes the pending definitions, leaving the variable counter intact.
    pub fn take(&mut self) -> (Vec<Var>, Vec<Formula>) {
        (
            std::mem::take(&mut self.extras),
            std::mem::take(&mut self.defs),
        )
    }

    pub fn formula(&mut self, t: &Term) -> Result<Formula, SolverError> {
        self.nnf(t, true)
    }

    fn nnf(&mut self, t: &Term, pos: bool) -> Result<Formula, SolverError> {
        use TheoryOp::*;
        match t {
            Term::Val(Value::Bool(b)) => Ok(Formula::constant(*b == pos)),
            Term::Val(Value::Int(_)) => Err(SolverError::IllSorted(t.to_string())),
            Term::Var(v) => match v.sort() {
                Sort::Bool => Ok(Formula::Atom(Atom::BVar(v.clone(), pos))),
                _ => Err(SolverError::IllSorted(t.to_string())),
            },
            Term::App(Func::User(d), _) => Err(SolverError::NonTheory(d.name.to_string())),
            Term::App(Func::Theory(op), args) => {
                let a = &args[0];
                match op {
                    Not => self.nnf(a, !pos),
                    And | Or => {
                        let l = self.nnf(a, pos)?;
                        let r = self.nnf(&args[1], pos)?;
                        if (*op == And) == pos {
                            Ok(Formula::and(vec![l, r]))
                        } else {
                            Ok(Formula::or(vec![l, r]))
                        }
                    }
                    Implies => {
                        let l = self.nnf(a, !pos)?;
                        let r = self.nnf(&args[1], pos)?;
                        if pos {
                            Ok(Formula::or(vec![l, r]))
                        } else {
                            Ok(Formula::and(vec![l, r]))
                        }
                    }
                    Iff | EqBool | NeBool => {
                        let same = (*op != NeBool) == pos;
                        let (ap, an) = (self.nnf(a, true)?, self.nnf(a, false)?);
                        let (bp, bn) = (self.nnf(&args[1], true)?, self.nnf(&args[1], false)?);
                        if same {
                            Ok(Formula::or(vec![
                                Formula::and(vec![ap, bp]),
                                Formula::and(vec![an, bn]),
                            ]))
                        } else {
                            Ok(Formula::or(vec![
                                Formula::and(vec![ap, bn]),
                                Formula::and(vec![an, bp]),
                            ]))
                        }
                    }
                    Ge | Gt | Le | Lt | EqInt | NeInt => {
                        let l = self.lin(a)?;
                        let r = self.lin(&args[1])?;
                        let one = BigInt::from(1);
                        let f = match op {
                            Lt => Formula::atom(Atom::Lt(l.sub(&r))),
                            Gt => Formula::atom(Atom::Lt(r.sub(&l))),
                            Le => Formula::atom(Atom::Lt(l.sub(&r).add_const(&-&one))),
                            Ge => Formula::atom(Atom::Lt(r.sub(&l).add_const(&-&one))),
                            EqInt => Formula::atom(Atom::Eq(l.sub(&r))),
                            NeInt => Formula::atom(Atom::Eq(l.sub(&r))).negate(),
                            _ => unreachable!(),
                        };
                        Ok(if pos { f } else { f.negate() })
                    }
                    Add | Sub | Mul | Exp | Div | Mod => Err(SolverError::IllSorted(t.to_string())),
                }
            }
        }
    }

    /// Linear form of an integer theory term.
    pub fn lin(&mut self, t: &Term) -> Result<Lin, SolverError> {
        use TheoryOp::*;
        match t {
            Term::Val(Value::Int(i)) => Ok(Lin::constant(i.clone())),
            Term::Var(v) if *v.sort() == Sort::Int => Ok(Lin::var(v.clone())),
            Term::App(Func::Theory(op), args) => match op {
                Add => Ok(self.lin(&args[0])?.add(&self.lin(&args[1])?)),
                Sub => Ok(self.lin(&args[0])?.sub(&self.lin(&args[1])?)),
                Mul => {
                    let l = self.lin(&args[0])?;
                    let r = self.lin(&args[1])?;
                    if l.is_constant() {
                        Ok(r.scale(&l.konst))
                    } else if r.is_constant() {
                        Ok(l.scale(&r.konst))
                    } else {
                        Err(SolverError::NonLinear(t.to_string()))
                    }
                }
                Exp => {
                    if t.is_ground() {
                        match evaluate(t) {
                            Ok(Value::Int(i)) => Ok(Lin::constant(i)),
                            Ok(_) => Err(SolverError::IllSorted(t.to_string())),
                            Err(e) => Err(SolverError::Partial(e.to_string())),
                        }
                    } else {
                        let base = self.lin(&args[0])?;
                        let e = self.lin(&args[1])?;
                        // x^1 and x^0 stay linear.
                        if e.is_constant() && e.konst == BigInt::from(1) {
                            Ok(base)
                        } else if e.is_constant() && e.konst.is_zero() {
                            Ok(Lin::constant(BigInt::from(1)))
                        } else {
                            Err(SolverError::NonLinear(t.to_string()))
                        }
                    }
                }
                Div | Mod => {
                    let num = self.lin(&args[0])?;
                    let den = self.lin(&args[1])?;
                    if !den.is_constant() {
                        return Err(SolverError::NonLinear(t.to_string()));
                    }
                    let d = den.konst;
                    if d.is_zero() {
                        return Err(SolverError::Partial(format!("division by zero in {}", t)));
                    }
                    let (q, r) = self.divmod(num, &d);
                    Ok(if *op == Div { q } else { r })
                }
                _ => Err(SolverError::IllSorted(t.to_string())),
            },
            Term::App(Func::User(d), _) => Err(SolverError::NonTheory(d.name.to_string())),
            _ => Err(SolverError::IllSorted(t.to_string())),
        }
    }

    /// Truncating quotient and remainder of `num` by the constant `d`.
    fn divmod(&mut self, num: Lin, d: &BigInt) -> (Lin, Lin) {
        if num.is_constant() {
            return (Lin::constant(&num.konst / d), Lin::constant(&num.konst % d));
        }
        let q = Var::new(&format!("%q{}", self.counter), Sort::Int);
        let r = Var::new(&format!("%r{}", self.counter), Sort::Int);
        self.counter += 1;
        let (ql, rl) = (Lin::var(q.clone()), Lin::var(r.clone()));
        let ad = d.abs();
        let one = BigInt::from(1);
        // num = d*q + r
        let def = Formula::atom(Atom::Eq(num.sub(&ql.scale(d)).sub(&rl)));
        // num ≥ 0 ∧ 0 ≤ r < |d|   or   num < 0 ∧ -|d| < r ≤ 0
        let nonneg = Formula::and(vec![
            Formula::atom(Atom::Lt(num.neg().add_const(&-&one))),
            Formula::atom(Atom::Lt(rl.neg().add_const(&-&one))),
            Formula::atom(Atom::Lt(rl.add_const(&-&ad))),
        ]);
        let neg = Formula::and(vec![
            Formula::atom(Atom::Lt(num.clone())),
            Formula::atom(Atom::Lt(rl.neg().add_const(&-&ad))),
            Formula::atom(Atom::Lt(rl.add_const(&-&one))),
        ]);
        self.defs
            .push(Formula::and(vec![def, Formula::or(vec![nonneg, neg])]));
        self.extras.push(q);
        self.extras.push(r);
        (ql, rl)
    }
}
