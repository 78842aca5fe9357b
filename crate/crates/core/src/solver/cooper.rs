//! Cooper-style quantifier elimination and model construction.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::formula::{Atom, Formula, Lin};
use super::SolverError;
use crate::term::{Sort, Var};

/// Formulas above this many nodes abort elimination.
pub const MAX_FORMULA_SIZE: usize = 60_000;

fn check_size(f: Formula) -> Result<Formula, SolverError> {
    if f.size() > MAX_FORMULA_SIZE {
        Err(SolverError::TooLarge)
    } else {
        Ok(f)
    }
}

/// `∃v. f` as a quantifier-free formula.
pub fn qe_exists(v: &Var, f: &Formula) -> Result<Formula, SolverError> {
    if !f.mentions(v) {
        return Ok(f.clone());
    }
    if *v.sort() == Sort::Bool {
        return check_size(Formula::or(vec![
            f.subst_bool(v, true),
            f.subst_bool(v, false),
        ]));
    }
    match f {
        Formula::Or(fs) => {
            let parts = fs
                .iter()
                .map(|g| qe_exists(v, g))
                .collect::<Result<Vec<_>, _>>()?;
            check_size(Formula::or(parts))
        }
        Formula::And(fs) => {
            let (with, without): (Vec<_>, Vec<_>) = fs.iter().cloned().partition(|g| g.mentions(v));
            if !without.is_empty() {
                let inner = qe_exists(v, &Formula::and(with))?;
                let mut parts = without;
                parts.push(inner);
                return check_size(Formula::and(parts));
            }
            if let Some(r) = eliminate_by_equality(v, fs) {
                return check_size(r);
            }
            cooper(v, f)
        }
        _ => {
            if let Some(r) = eliminate_by_equality(v, std::slice::from_ref(f)) {
                return check_size(r);
            }
            cooper(v, f)
        }
    }
}

/// `∃vs. f`, eliminating variables in a heuristic order.
pub fn qe_exists_all(vs: &[Var], f: &Formula) -> Result<Formula, SolverError> {
    let mut pending: Vec<Var> = vs.to_vec();
    let mut cur = f.clone();
    while !pending.is_empty() {
        let i = pick_var(&pending, &cur);
        let v = pending.swap_remove(i);
        cur = qe_exists(&v, &cur)?;
    }
    Ok(cur)
}

/// Prefers booleans, then variables solvable by a unit equality, then the
/// fewest occurrences.
fn pick_var(vs: &[Var], f: &Formula) -> usize {
    let atoms = f.atoms();
    let top: Vec<&Formula> = match f {
        Formula::And(fs) => fs.iter().collect(),
        other => vec![other],
    };
    let score = |v: &Var| -> (u8, usize) {
        if !f.mentions(v) {
            return (0, 0);
        }
        if *v.sort() == Sort::Bool {
            return (1, 0);
        }
        let unit_eq = top
            .iter()
            .any(|g| matches!(g, Formula::Atom(Atom::Eq(l)) if l.coeff(v).abs().is_one()));
        let occ = atoms.iter().filter(|a| a.mentions(v)).count();
        (if unit_eq { 2 } else { 3 }, occ)
    };
    (0..vs.len()).min_by_key(|&i| score(&vs[i])).unwrap()
}

/// Uses a top-level equality `c·v + r = 0` to substitute `v` away.
fn eliminate_by_equality(v: &Var, conj: &[Formula]) -> Option<Formula> {
    let mut best: Option<Lin> = None;
    for g in conj {
        if let Formula::Atom(Atom::Eq(l)) = g {
            let c = l.coeff(v);
            if !c.is_zero() && best.as_ref().is_none_or(|b| c.abs() < b.coeff(v).abs()) {
                best = Some(l.clone());
            }
        }
    }
    let l = best?;
    let c = l.coeff(v);
    let r = l.without(v);
    let f = Formula::and(conj.to_vec());
    if c.abs().is_one() {
        // v = -c·r
        return Some(f.subst_int(v, &r.scale(&-&c)));
    }
    // Scale each atom by |c| and replace |c|·v by -sign(c)·r.
    let ac = c.abs();
    let sign = if c.is_negative() {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let by = r.scale(&sign);
    let g = f.map_atoms(&|a| {
        let Some(lin) = a.lin() else {
            return Formula::Atom(a.clone());
        };
        let k = lin.coeff(v);
        if k.is_zero() {
            return Formula::Atom(a.clone());
        }
        let rest = lin.without(v).scale(&ac).add(&by.scale(&k));
        Formula::atom(match a {
            Atom::Lt(_) => Atom::Lt(rest),
            Atom::Eq(_) => Atom::Eq(rest),
            Atom::Dvd(d, _) => Atom::Dvd(d * &ac, rest),
            Atom::NDvd(d, _) => Atom::NDvd(d * &ac, rest),
            Atom::BVar(..) => unreachable!(),
        })
    });
    Some(Formula::and(vec![Formula::atom(Atom::Dvd(ac, r)), g]))
}

fn cooper(v: &Var, f: &Formula) -> Result<Formula, SolverError> {
    // Make every coefficient of v equal to ±δ, then read δ·v as v.
    let delta = f
        .atoms()
        .iter()
        .filter_map(|a| a.lin().filter(|l| l.mentions(v)).map(|l| l.coeff(v).abs()))
        .fold(BigInt::one(), |acc, c| acc.lcm(&c));
    let f = if delta.is_one() {
        f.clone()
    } else {
        let scaled = f.scale_coeff(v, &delta);
        let unit = scaled.map_atoms(&|a| {
            let Some(l) = a.lin().filter(|l| l.mentions(v)) else {
                return Formula::Atom(a.clone());
            };
            let mut m = l.clone();
            let s = if l.coeff(v).is_negative() {
                -BigInt::one()
            } else {
                BigInt::one()
            };
            m.coeffs.insert(v.clone(), s);
            Formula::atom(match a {
                Atom::Lt(_) => Atom::Lt(m),
                Atom::Eq(_) => Atom::Eq(m),
                Atom::Dvd(d, _) => Atom::Dvd(d.clone(), m),
                Atom::NDvd(d, _) => Atom::NDvd(d.clone(), m),
                Atom::BVar(..) => unreachable!(),
            })
        });
        Formula::and(vec![
            unit,
            Formula::atom(Atom::Dvd(delta.clone(), Lin::var(v.clone()))),
        ])
    };

    let mut lower: BTreeSet<Lin> = BTreeSet::new();
    let mut upper: BTreeSet<Lin> = BTreeSet::new();
    let mut period = BigInt::one();
    for a in f.atoms() {
        match a {
            Atom::Lt(l) if l.mentions(v) => {
                let c = l.coeff(v);
                let r = l.without(v);
                if c.is_negative() {
                    // -v + r < 0  ⇔  v > r
                    lower.insert(r);
                } else {
                    // v + r < 0  ⇔  v < -r
                    upper.insert(r.neg());
                }
            }
            Atom::Eq(l) if l.mentions(v) => {
                let c = l.coeff(v);
                let e = l.without(v).scale(&-c);
                lower.insert(e.add_const(&-BigInt::one()));
                upper.insert(e.add_const(&BigInt::one()));
            }
            Atom::Dvd(d, l) | Atom::NDvd(d, l) if l.mentions(v) => period = period.lcm(d),
            _ => {}
        }
    }
    let d = period.to_i64().ok_or(SolverError::TooLarge)?;
    let use_lower = lower.len() <= upper.len();
    if (d as usize).saturating_mul(lower.len().min(upper.len()) + 1) > MAX_FORMULA_SIZE / 8 {
        return Err(SolverError::TooLarge);
    }
    let inf = f.map_atoms(&|a| match a {
        Atom::Lt(l) if l.mentions(v) => {
            let is_upper = !l.coeff(v).is_negative();
            Formula::constant(is_upper == use_lower)
        }
        Atom::Eq(l) if l.mentions(v) => Formula::False,
        _ => Formula::Atom(a.clone()),
    });
    let mut parts = Vec::new();
    for j in 1..=d {
        let jj = BigInt::from(j);
        let at = if use_lower { jj.clone() } else { -jj.clone() };
        parts.push(inf.subst_int(v, &Lin::constant(at)));
        let bounds = if use_lower { &lower } else { &upper };
        for b in bounds {
            let t = if use_lower {
                b.add_const(&jj)
            } else {
                b.add_const(&-&jj)
            };
            parts.push(f.subst_int(v, &t));
        }
        if parts.contains(&Formula::True) {
            return Ok(Formula::True);
        }
    }
    check_size(Formula::or(parts))
}

pub type Model = (BTreeMap<Var, BigInt>, BTreeMap<Var, bool>);

/// A satisfying assignment of all variables of `f`, or `None` if `f` is
/// unsatisfiable.
pub fn find_model(f: &Formula) -> Result<Option<Model>, SolverError> {
    let mut pending: Vec<Var> = f.vars().into_iter().collect();
    let mut chain: Vec<(Var, Formula)> = Vec::new();
    let mut cur = f.clone();
    while !pending.is_empty() {
        let i = pick_var(&pending, &cur);
        let v = pending.swap_remove(i);
        let next = qe_exists(&v, &cur)?;
        chain.push((v, cur));
        cur = next;
    }
    match cur {
        Formula::True => {}
        Formula::False => return Ok(None),
        other => {
            return Err(SolverError::Internal(format!(
                "residual ground formula {}",
                other
            )))
        }
    }
    let mut ints = BTreeMap::new();
    let mut bools = BTreeMap::new();
    for (v, g) in chain.into_iter().rev() {
        let g = g.instantiate(&ints, &bools);
        if *v.sort() == Sort::Bool {
            let val = [false, true]
                .into_iter()
                .find(|b| g.subst_bool(&v, *b) == Formula::True)
                .ok_or_else(|| SolverError::Internal(format!("no boolean witness for {}", v)))?;
            bools.insert(v, val);
        } else {
            let val = univariate_witness(&v, &g)
                .ok_or_else(|| SolverError::Internal(format!("no witness for {} in {}", v, g)))?;
            ints.insert(v, val);
        }
    }
    Ok(Some((ints, bools)))
}

/// Smallest-magnitude `x` with `g(x)`, where `v` is the only variable.
/// Truth can only change at atom boundaries and is periodic with the lcm
/// of the divisors in between, so a bounded candidate set is complete.
pub fn univariate_witness(v: &Var, g: &Formula) -> Option<BigInt> {
    let mut period = BigInt::one();
    let mut points: Vec<BigInt> = vec![BigInt::zero()];
    for a in g.atoms() {
        match a {
            Atom::Lt(l) | Atom::Eq(l) => {
                let c = l.coeff(v);
                if c.is_zero() {
                    continue;
                }
                let num = -&l.konst;
                points.push(num.div_floor(&c));
                points.push(num.div_ceil(&c));
            }
            Atom::Dvd(d, _) | Atom::NDvd(d, _) => period = period.lcm(d),
            Atom::BVar(..) => {}
        }
    }
    let mut cands: BTreeSet<(BigInt, bool, BigInt)> = BTreeSet::new();
    let p = period.to_i64()?;
    for b in &points {
        for j in -p..=p {
            let x = b + j;
            cands.insert((x.abs(), x.is_negative(), x));
        }
    }
    let env_b = BTreeMap::new();
    cands.into_iter().map(|(_, _, x)| x).find(|x| {
        let env: BTreeMap<Var, BigInt> = [(v.clone(), x.clone())].into_iter().collect();
        g.eval(&env, &env_b) == Some(true)
    })
}
