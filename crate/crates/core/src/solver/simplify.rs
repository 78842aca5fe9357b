//! Constraint simplification and rendering of linear formulas as terms.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::formula::{Atom, Formula, Lin};
use crate::term::{Func, Term, TheoryOp, Value, Var};
use crate::theory::evaluate;

/// Renders a linear formula in the constraint language. Coefficients are
/// kept positive on both sides of each relation.
pub fn formula_to_term(f: &Formula) -> Term {
    match f {
        Formula::True => Term::tt(),
        Formula::False => Term::ff(),
        Formula::Atom(a) => atom_to_term(a),
        Formula::And(fs) => Term::conj(fs.iter().map(formula_to_term)),
        Formula::Or(fs) => Term::disj(fs.iter().map(formula_to_term)),
    }
}

fn sum(parts: &BTreeMap<Var, BigInt>, k: &BigInt) -> Term {
    let mut acc: Option<Term> = None;
    for (v, c) in parts {
        let t = if c.is_one() {
            Term::Var(v.clone())
        } else {
            Term::mul(Term::big(c.clone()), Term::Var(v.clone()))
        };
        acc = Some(match acc {
            None => t,
            Some(a) => Term::add(a, t),
        });
    }
    match acc {
        None => Term::big(k.clone()),
        Some(a) if k.is_zero() => a,
        Some(a) if k.is_negative() => Term::sub(a, Term::big(-k)),
        Some(a) => Term::add(a, Term::big(k.clone())),
    }
}

fn split(l: &Lin) -> (BTreeMap<Var, BigInt>, BTreeMap<Var, BigInt>) {
    let mut p = BTreeMap::new();
    let mut n = BTreeMap::new();
    for (v, c) in &l.coeffs {
        if c.is_negative() {
            n.insert(v.clone(), -c);
        } else {
            p.insert(v.clone(), c.clone());
        }
    }
    (p, n)
}

fn lin_to_term(l: &Lin) -> Term {
    let (p, n) = split(l);
    let zero = BigInt::zero();
    if n.is_empty() {
        return sum(&p, &l.konst);
    }
    let neg = sum(&n, &zero);
    if p.is_empty() {
        if l.konst.is_zero() {
            return Term::sub(Term::int(0), neg);
        }
        return Term::sub(Term::big(l.konst.clone()), neg);
    }
    Term::sub(sum(&p, &l.konst), neg)
}

fn first_is_negative(l: &Lin) -> bool {
    l.coeffs.values().next().is_some_and(|c| c.is_negative())
}

fn atom_to_term(a: &Atom) -> Term {
    let zero = BigInt::zero();
    match a {
        Atom::BVar(v, true) => Term::Var(v.clone()),
        Atom::BVar(v, false) => Term::not(Term::Var(v.clone())),
        Atom::Dvd(d, l) => Term::eq(
            Term::op(TheoryOp::Mod, vec![lin_to_term(l), Term::big(d.clone())]),
            Term::int(0),
        ),
        Atom::NDvd(d, l) => Term::ne(
            Term::op(TheoryOp::Mod, vec![lin_to_term(l), Term::big(d.clone())]),
            Term::int(0),
        ),
        Atom::Eq(l) => {
            // P - N + k = 0
            let (p, n) = split(l);
            let (lk, rk) = if l.konst.is_negative() {
                (zero.clone(), -&l.konst)
            } else {
                (l.konst.clone(), zero.clone())
            };
            let (lhs, rhs) = (sum(&p, &lk), sum(&n, &rk));
            if first_is_negative(l) {
                Term::eq(rhs, lhs)
            } else {
                Term::eq(lhs, rhs)
            }
        }
        Atom::Lt(l) => {
            // P - N + k < 0
            let (p, n) = split(l);
            let k = &l.konst;
            let mirror = first_is_negative(l);
            let rel = |lhs: Term, rhs: Term, strict: bool| match (mirror, strict) {
                (false, true) => Term::lt(lhs, rhs),
                (false, false) => Term::le(lhs, rhs),
                (true, true) => Term::gt(rhs, lhs),
                (true, false) => Term::ge(rhs, lhs),
            };
            if k.is_zero() {
                rel(sum(&p, &zero), sum(&n, &zero), true)
            } else if *k == -BigInt::one() {
                rel(sum(&p, &zero), sum(&n, &zero), false)
            } else {
                // P ≤ N + c with c = -k - 1
                let c: BigInt = -k - BigInt::one();
                if c.is_negative() {
                    rel(sum(&p, &-c), sum(&n, &zero), false)
                } else {
                    rel(sum(&p, &zero), sum(&n, &c), false)
                }
            }
        }
    }
}

/// Folds ground theory subterms and boolean units.
fn fold(t: &Term) -> Term {
    match t {
        Term::App(Func::Theory(op), args) => {
            let args: Vec<Term> = args.iter().map(fold).collect();
            let folded = Term::App(Func::Theory(*op), args.clone());
            if folded.is_ground() {
                if let Ok(v) = evaluate(&folded) {
                    return Term::Val(v);
                }
                return folded;
            }
            use TheoryOp::*;
            match op {
                And => match (&args[0], &args[1]) {
                    (a, b) if a.is_true() => b.clone(),
                    (a, b) if b.is_true() => a.clone(),
                    (a, _) | (_, a) if a.is_false() => Term::ff(),
                    _ => folded,
                },
                Or => match (&args[0], &args[1]) {
                    (a, b) if a.is_false() => b.clone(),
                    (a, b) if b.is_false() => a.clone(),
                    (a, _) | (_, a) if a.is_true() => Term::tt(),
                    _ => folded,
                },
                Not => match &args[0] {
                    Term::App(Func::Theory(Not), inner) => inner[0].clone(),
                    _ => folded,
                },
                Implies if args[0].is_true() => args[1].clone(),
                Implies if args[0].is_false() || args[1].is_true() => Term::tt(),
                _ => folded,
            }
        }
        _ => t.clone(),
    }
}

/// Bound `v ≥ lo` or `v ≤ hi` read off a comparison with a constant.
fn as_bound(t: &Term) -> Option<(Var, bool, BigInt)> {
    use TheoryOp::*;
    let Term::App(Func::Theory(op), args) = t else {
        return None;
    };
    let (v, c, flipped) = match (&args.first()?, &args.get(1)?) {
        (Term::Var(v), Term::Val(Value::Int(c))) => (v.clone(), c.clone(), false),
        (Term::Val(Value::Int(c)), Term::Var(v)) => (v.clone(), c.clone(), true),
        _ => return None,
    };
    let one = BigInt::one();
    // (is_lower, bound)
    let (lower, b) = match (op, flipped) {
        (Ge, false) | (Le, true) => (true, c),
        (Gt, false) | (Lt, true) => (true, c + one),
        (Le, false) | (Ge, true) => (false, c),
        (Lt, false) | (Gt, true) => (false, c - one),
        _ => return None,
    };
    Some((v, lower, b))
}

/// Equivalent constraint with flattened, folded and de-duplicated
/// conjuncts, and with constant bounds on the same variable merged. Every
/// variable of the input still occurs in the output; a variable that would
/// vanish is kept through a trivial `v = v` conjunct.
pub fn simplify_constraint(phi: &Term) -> Term {
    let original = phi.vars();
    let folded = fold(phi);
    let mut seen = BTreeSet::new();
    let mut conj: Vec<Term> = Vec::new();
    let mut is_false = false;
    for c in folded.conjuncts() {
        if c.is_true() {
            continue;
        }
        if c.is_false() {
            is_false = true;
            break;
        }
        if is_trivial_binding(&c) && conj.iter().any(|d: &Term| d.vars().is_superset(&c.vars())) {
            continue;
        }
        if seen.insert(c.clone()) {
            conj.push(c);
        }
    }

    if !is_false {
        // Tightest lower and upper constant bound per variable.
        let mut lows: BTreeMap<Var, (BigInt, usize)> = BTreeMap::new();
        let mut highs: BTreeMap<Var, (BigInt, usize)> = BTreeMap::new();
        for (i, c) in conj.iter().enumerate() {
            if let Some((v, lower, b)) = as_bound(c) {
                let table = if lower { &mut lows } else { &mut highs };
                let better = match table.get(&v) {
                    None => true,
                    Some((old, _)) => (lower && b > *old) || (!lower && b < *old),
                };
                if better {
                    table.insert(v, (b, i));
                }
            }
        }
        for (v, (lo, _)) in &lows {
            if let Some((hi, _)) = highs.get(v) {
                if lo > hi {
                    is_false = true;
                }
            }
        }
        if !is_false {
            conj = conj
                .into_iter()
                .enumerate()
                .filter(|(i, c)| match as_bound(c) {
                    Some((v, lower, _)) => {
                        let table = if lower { &lows } else { &highs };
                        table.get(&v).map(|(_, j)| j == i).unwrap_or(true)
                    }
                    None => true,
                })
                .map(|(_, c)| c)
                .collect();
        }
    }

    let mut out = if is_false { vec![Term::ff()] } else { conj };
    let mut present = BTreeSet::new();
    for c in &out {
        c.collect_vars(&mut present);
    }
    for v in original.difference(&present) {
        out.push(Term::eq(Term::Var(v.clone()), Term::Var(v.clone())));
    }
    Term::conj(out)
}

pub fn is_trivial_binding(t: &Term) -> bool {
    matches!(t, Term::App(Func::Theory(TheoryOp::EqInt | TheoryOp::EqBool), a) if a[0] == a[1] && a[0].is_var())
}

/// Propagates top-level `v = value` conjuncts through the constraint.
/// Returns the instantiated constraint and the bindings used.
pub fn propagate_values(phi: &Term) -> (Term, BTreeMap<Var, Value>) {
    let mut binds = BTreeMap::new();
    for c in phi.conjuncts() {
        if let Term::App(Func::Theory(TheoryOp::EqInt | TheoryOp::EqBool), a) = &c {
            match (&a[0], &a[1]) {
                (Term::Var(v), Term::Val(x)) | (Term::Val(x), Term::Var(v)) => {
                    binds.entry(v.clone()).or_insert_with(|| x.clone());
                }
                _ => {}
            }
        }
    }
    let s = binds
        .iter()
        .map(|(v, x)| (v.clone(), Term::Val(x.clone())))
        .collect();
    (phi.apply(&s), binds)
}
