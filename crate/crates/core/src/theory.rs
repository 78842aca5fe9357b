//! Interpretation of ground theory terms over booleans and integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::term::{Func, Sort, Subst, Term, TheoryOp, Value, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("term is not ground: {0}")]
    NonGround(String),
    #[error("non-theory symbol {0} in theory term")]
    NonTheory(String),
    #[error("division by zero in {0}")]
    DivisionByZero(String),
    #[error("negative exponent in {0}")]
    NegativeExponent(String),
    #[error("exponent too large in {0}")]
    ExponentTooLarge(String),
}

impl EvalError {
    /// Partiality errors mark points where a theory symbol is undefined.
    pub fn is_partiality(&self) -> bool {
        matches!(
            self,
            EvalError::DivisionByZero(_)
                | EvalError::NegativeExponent(_)
                | EvalError::ExponentTooLarge(_)
        )
    }
}

/// Exponents above this are refused rather than materialised.
pub const MAX_EXPONENT: u32 = 4096;

/// Truncating division (rounds toward zero).
pub fn div_trunc(a: &BigInt, b: &BigInt) -> Option<BigInt> {
    if b.is_zero() {
        None
    } else {
        Some(a / b)
    }
}

/// Remainder matching [`div_trunc`]; takes the sign of the dividend.
pub fn mod_trunc(a: &BigInt, b: &BigInt) -> Option<BigInt> {
    if b.is_zero() {
        None
    } else {
        Some(a % b)
    }
}

/// Applies the semantic function of `op` to values.
pub fn apply_op(op: TheoryOp, args: &[Value]) -> Result<Value, EvalError> {
    use TheoryOp::*;
    let int = |i: usize| args[i].as_int().expect("well-sorted integer argument");
    let bool_ = |i: usize| args[i].as_bool().expect("well-sorted boolean argument");
    let show = || {
        format!(
            "{}({})",
            op.name(),
            args.iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )
    };
    Ok(match op {
        Add => Value::Int(int(0) + int(1)),
        Sub => Value::Int(int(0) - int(1)),
        Mul => Value::Int(int(0) * int(1)),
        Exp => {
            let e = int(1);
            if e.is_negative() {
                return Err(EvalError::NegativeExponent(show()));
            }
            match e.to_u32().filter(|&e| e <= MAX_EXPONENT) {
                Some(e) => Value::Int(num_traits::pow(int(0).clone(), e as usize)),
                None => {
                    // 0, 1 and -1 have bounded powers.
                    let b = int(0);
                    if b.is_zero() || b.abs() == BigInt::from(1) {
                        let odd = e.is_odd();
                        Value::Int(if b.is_negative() && odd {
                            b.clone()
                        } else {
                            b.abs()
                        })
                    } else {
                        return Err(EvalError::ExponentTooLarge(show()));
                    }
                }
            }
        }
        Div => {
            Value::Int(div_trunc(int(0), int(1)).ok_or_else(|| EvalError::DivisionByZero(show()))?)
        }
        Mod => {
            Value::Int(mod_trunc(int(0), int(1)).ok_or_else(|| EvalError::DivisionByZero(show()))?)
        }
        Ge => Value::Bool(int(0) >= int(1)),
        Gt => Value::Bool(int(0) > int(1)),
        Le => Value::Bool(int(0) <= int(1)),
        Lt => Value::Bool(int(0) < int(1)),
        EqInt => Value::Bool(int(0) == int(1)),
        NeInt => Value::Bool(int(0) != int(1)),
        EqBool => Value::Bool(bool_(0) == bool_(1)),
        NeBool => Value::Bool(bool_(0) != bool_(1)),
        And => Value::Bool(bool_(0) && bool_(1)),
        Or => Value::Bool(bool_(0) || bool_(1)),
        Not => Value::Bool(!bool_(0)),
        Implies => Value::Bool(!bool_(0) || bool_(1)),
        Iff => Value::Bool(bool_(0) == bool_(1)),
    })
}

/// Evaluates a ground theory term bottom-up.
pub fn evaluate(t: &Term) -> Result<Value, EvalError> {
    match t {
        Term::Val(v) => Ok(v.clone()),
        Term::Var(_) => Err(EvalError::NonGround(t.to_string())),
        Term::App(Func::User(d), _) => Err(EvalError::NonTheory(d.name.to_string())),
        Term::App(Func::Theory(op), args) => {
            // Report non-groundness ahead of partiality.
            if !t.is_ground() {
                return Err(EvalError::NonGround(t.to_string()));
            }
            let vals = args.iter().map(evaluate).collect::<Result<Vec<_>, _>>()?;
            apply_op(*op, &vals)
        }
    }
}

/// Evaluates a constraint under an assignment; non-value bindings or
/// unbound variables are errors.
pub fn evaluate_under(t: &Term, s: &Subst) -> Result<Value, EvalError> {
    evaluate(&t.apply(s))
}

/// `γ` respects `φ`: every variable of `φ` maps to a value and `φγ`
/// evaluates to true.
pub fn respects(gamma: &Subst, phi: &Term) -> bool {
    phi.vars()
        .iter()
        .all(|v| gamma.get(v).is_some_and(Term::is_value))
        && matches!(evaluate_under(phi, gamma), Ok(Value::Bool(true)))
}

/// The calculation rule `f(x1,..,xn) -> z [z = f(x1,..,xn)]` for `op`, as
/// (lhs, result variable, guard).
pub fn calc_rule_parts(op: TheoryOp) -> (Term, Var, Term) {
    let args: Vec<Term> = op
        .arg_sorts()
        .iter()
        .enumerate()
        .map(|(i, s)| Term::Var(Var::new(&format!("x{}", i + 1), s.clone())))
        .collect();
    let lhs = Term::op(op, args);
    let z = Var::new("z", op.result_sort());
    let guard = Term::eq(Term::Var(z.clone()), lhs.clone());
    (lhs, z, guard)
}

/// Integer values `lo..=hi` as terms.
pub fn int_values(lo: i64, hi: i64) -> impl Iterator<Item = Term> {
    (lo..=hi).map(Term::int)
}

/// All values of a theory sort within the integer range `[-b, b]`.
pub fn values_of(sort: &Sort, b: i64) -> Vec<Value> {
    match sort {
        Sort::Int => (-b..=b).map(Value::int).collect(),
        Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Sort::Named(_) => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let t = Term::sub(Term::int(3), Term::int(1));
        assert_eq!(evaluate(&t).unwrap(), Value::int(2));
        let t = Term::mul(
            Term::int(3),
            Term::mul(Term::int(2), Term::mul(Term::int(1), Term::int(1))),
        );
        assert_eq!(evaluate(&t).unwrap(), Value::int(6));
        assert_eq!(
            evaluate(&Term::add(Term::int(5), Term::int(9))).unwrap(),
            Value::int(14)
        );
        let t = Term::and(Term::tt(), Term::not(Term::tt()));
        assert_eq!(evaluate(&t).unwrap(), Value::Bool(false));
        let t = Term::eq(Term::int(0), Term::add(Term::int(0), Term::int(-1)));
        assert_eq!(evaluate(&t).unwrap(), Value::Bool(false));
    }

    #[test]
    fn rejects_non_ground_and_partial_points() {
        let x = Term::Var(Var::int("x"));
        let t = Term::ge(Term::add(x, Term::int(3)), Term::Var(Var::int("y")));
        assert!(matches!(evaluate(&t), Err(EvalError::NonGround(_))));
        let d = Term::op(TheoryOp::Div, vec![Term::int(1), Term::int(0)]);
        assert!(evaluate(&d).unwrap_err().is_partiality());
        let e = Term::op(TheoryOp::Exp, vec![Term::int(2), Term::int(-1)]);
        assert!(evaluate(&e).unwrap_err().is_partiality());
    }

    #[test]
    fn truncating_division() {
        let ev = |op, a, b| evaluate(&Term::op(op, vec![Term::int(a), Term::int(b)])).unwrap();
        assert_eq!(ev(TheoryOp::Div, -7, 2), Value::int(-3));
        assert_eq!(ev(TheoryOp::Mod, -7, 2), Value::int(-1));
        assert_eq!(ev(TheoryOp::Div, 7, -2), Value::int(-3));
        assert_eq!(ev(TheoryOp::Mod, 7, -2), Value::int(1));
        assert_eq!(ev(TheoryOp::Exp, 2, 10), Value::int(1024));
    }

    #[test]
    fn respects_requires_values() {
        let x = Var::int("x");
        let z = Var::int("z");
        let phi = Term::and(
            Term::ge(Term::Var(x.clone()), Term::int(1)),
            Term::ge(Term::Var(z.clone()), Term::Var(x.clone())),
        );
        let g = Subst::new()
            .bind(x.clone(), Term::int(1))
            .bind(z, Term::int(2));
        assert!(respects(&g, &phi));
        let fd = crate::term::FuncDecl::new("f", vec![Sort::Int], Sort::Int);
        let fx = Term::app(Func::User(fd), vec![Term::int(1)]).unwrap();
        let bad = Subst::new().bind(x.clone(), fx);
        assert!(!respects(&bad, &Term::ge(Term::Var(x), Term::int(1))));
        assert!(respects(&Subst::new(), &Term::tt()));
    }

    #[test]
    fn calculation_rule_schema() {
        let (lhs, z, guard) = calc_rule_parts(TheoryOp::Sub);
        assert_eq!(lhs.to_string(), "x1 - x2");
        assert_eq!(guard, Term::eq(Term::Var(z), lhs));
    }
}
