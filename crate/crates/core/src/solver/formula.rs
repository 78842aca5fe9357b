//! Quantifier-free linear integer formulas in negation normal form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::term::Var;

/// `Σ cᵢ·xᵢ + k` with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Lin {
    pub coeffs: BTreeMap<Var, BigInt>,
    pub konst: BigInt,
}

impl Lin {
    pub fn constant(k: BigInt) -> Lin {
        Lin {
            coeffs: BTreeMap::new(),
            konst: k,
        }
    }

    pub fn var(v: Var) -> Lin {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, BigInt::one());
        Lin {
            coeffs,
            konst: BigInt::zero(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, v: &Var) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn add(&self, other: &Lin) -> Lin {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(v.clone()).or_default();
            *e += c;
            if e.is_zero() {
                out.coeffs.remove(v);
            }
        }
        out.konst += &other.konst;
        out
    }

    pub fn scale(&self, k: &BigInt) -> Lin {
        if k.is_zero() {
            return Lin::default();
        }
        Lin {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * k))
                .collect(),
            konst: &self.konst * k,
        }
    }

    pub fn neg(&self) -> Lin {
        self.scale(&-BigInt::one())
    }

    pub fn sub(&self, other: &Lin) -> Lin {
        self.add(&other.neg())
    }

    pub fn add_const(&self, k: &BigInt) -> Lin {
        let mut out = self.clone();
        out.konst += k;
        out
    }

    /// Replaces `v` by `by`.
    pub fn subst(&self, v: &Var, by: &Lin) -> Lin {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.coeffs.remove(v);
                rest.add(&by.scale(c))
            }
        }
    }

    /// The part without `v`.
    pub fn without(&self, v: &Var) -> Lin {
        let mut out = self.clone();
        out.coeffs.remove(v);
        out
    }

    /// Gcd of the variable coefficients (zero if constant).
    pub fn coeff_gcd(&self) -> BigInt {
        self.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn eval(&self, env: &BTreeMap<Var, BigInt>) -> Option<BigInt> {
        let mut acc = self.konst.clone();
        for (v, c) in &self.coeffs {
            acc += c * env.get(v)?;
        }
        Some(acc)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "{}", v)?;
            } else {
                write!(f, "{}*{}", c, v)?;
            }
        }
        if first {
            write!(f, "{}", self.konst)
        } else if !self.konst.is_zero() {
            write!(f, " + {}", self.konst)
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `lin < 0`
    Lt(Lin),
    /// `lin = 0`
    Eq(Lin),
    /// `d | lin`, `d > 1`
    Dvd(BigInt, Lin),
    /// `¬(d | lin)`, `d > 1`
    NDvd(BigInt, Lin),
    /// Boolean variable with polarity.
    BVar(Var, bool),
}

impl Atom {
    pub fn lin(&self) -> Option<&Lin> {
        match self {
            Atom::Lt(l) | Atom::Eq(l) | Atom::Dvd(_, l) | Atom::NDvd(_, l) => Some(l),
            Atom::BVar(..) => None,
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Atom::BVar(b, _) => b == v,
            _ => self.lin().is_some_and(|l| l.mentions(v)),
        }
    }

    pub fn negate(&self) -> Formula {
        match self {
            // ¬(l < 0) ⇔ -l - 1 < 0
            Atom::Lt(l) => Formula::atom(Atom::Lt(l.neg().add_const(&-BigInt::one()))),
            Atom::Eq(l) => Formula::or(vec![
                Formula::atom(Atom::Lt(l.clone())),
                Formula::atom(Atom::Lt(l.neg())),
            ]),
            Atom::Dvd(d, l) => Formula::atom(Atom::NDvd(d.clone(), l.clone())),
            Atom::NDvd(d, l) => Formula::atom(Atom::Dvd(d.clone(), l.clone())),
            Atom::BVar(v, p) => Formula::atom(Atom::BVar(v.clone(), !p)),
        }
    }

    fn map_lin(&self, f: impl Fn(&Lin) -> Lin) -> Atom {
        match self {
            Atom::Lt(l) => Atom::Lt(f(l)),
            Atom::Eq(l) => Atom::Eq(f(l)),
            Atom::Dvd(d, l) => Atom::Dvd(d.clone(), f(l)),
            Atom::NDvd(d, l) => Atom::NDvd(d.clone(), f(l)),
            Atom::BVar(..) => self.clone(),
        }
    }

    /// Normalises the atom; constant atoms fold to `True`/`False`.
    pub fn normalize(&self) -> Formula {
        match self {
            Atom::BVar(..) => Formula::Atom(self.clone()),
            Atom::Lt(l) => {
                if l.is_constant() {
                    return Formula::constant(l.konst.is_negative());
                }
                // Σcx + k < 0  ⇔  Σ(c/g)x ≤ floor((-k-1)/g)
                let g = l.coeff_gcd();
                if g.is_one() {
                    return Formula::Atom(self.clone());
                }
                let bound = (-&l.konst - BigInt::one()).div_floor(&g);
                let mut m = Lin {
                    coeffs: l.coeffs.iter().map(|(v, c)| (v.clone(), c / &g)).collect(),
                    konst: BigInt::zero(),
                };
                m.konst = -bound - 1;
                Formula::Atom(Atom::Lt(m))
            }
            Atom::Eq(l) => {
                if l.is_constant() {
                    return Formula::constant(l.konst.is_zero());
                }
                let g = l.coeff_gcd();
                if !(&l.konst % &g).is_zero() {
                    return Formula::False;
                }
                let mut m = Lin {
                    coeffs: l.coeffs.iter().map(|(v, c)| (v.clone(), c / &g)).collect(),
                    konst: &l.konst / &g,
                };
                // Canonical sign: first coefficient positive.
                if m.coeffs.values().next().is_some_and(|c| c.is_negative()) {
                    m = m.neg();
                }
                Formula::Atom(Atom::Eq(m))
            }
            Atom::Dvd(d, l) | Atom::NDvd(d, l) => {
                let pos = matches!(self, Atom::Dvd(..));
                let d = d.abs();
                if d.is_one() {
                    return Formula::constant(pos);
                }
                let mut m = Lin {
                    coeffs: l
                        .coeffs
                        .iter()
                        .map(|(v, c)| (v.clone(), c.mod_floor(&d)))
                        .filter(|(_, c)| !c.is_zero())
                        .collect(),
                    konst: l.konst.mod_floor(&d),
                };
                if m.is_constant() {
                    return Formula::constant(m.konst.is_zero() == pos);
                }
                let g = m.coeff_gcd().gcd(&m.konst).gcd(&d);
                let d = if g.is_one() {
                    d
                } else {
                    m = Lin {
                        coeffs: m.coeffs.iter().map(|(v, c)| (v.clone(), c / &g)).collect(),
                        konst: &m.konst / &g,
                    };
                    &d / &g
                };
                if d.is_one() {
                    return Formula::constant(pos);
                }
                Formula::Atom(if pos {
                    Atom::Dvd(d, m)
                } else {
                    Atom::NDvd(d, m)
                })
            }
        }
    }

    pub fn eval(&self, ints: &BTreeMap<Var, BigInt>, bools: &BTreeMap<Var, bool>) -> Option<bool> {
        Some(match self {
            Atom::Lt(l) => l.eval(ints)?.is_negative(),
            Atom::Eq(l) => l.eval(ints)?.is_zero(),
            Atom::Dvd(d, l) => l.eval(ints)?.mod_floor(d).is_zero(),
            Atom::NDvd(d, l) => !l.eval(ints)?.mod_floor(d).is_zero(),
            Atom::BVar(v, p) => *bools.get(v)? == *p,
        })
    }
}

type Coeffs = BTreeMap<Var, BigInt>;

fn negated(c: &Coeffs) -> Coeffs {
    c.iter().map(|(v, k)| (v.clone(), -k)).collect()
}

/// Cheap simplification of a conjunction by comparing atoms over the same
/// linear form: only the tightest of parallel bounds is kept, opposite
/// bounds, equalities and divisibilities are checked for consistency, and
/// atoms decided by an equality are dropped. `None` if it is unsatisfiable.
fn prune_conjunction(set: BTreeSet<Formula>) -> Option<BTreeSet<Formula>> {
    let mut lts: BTreeMap<Coeffs, BigInt> = BTreeMap::new();
    let mut eqs: BTreeMap<Coeffs, BigInt> = BTreeMap::new();
    let mut dvds: BTreeMap<(BigInt, Coeffs), BigInt> = BTreeMap::new();
    let mut ndvds: BTreeSet<(BigInt, Coeffs, BigInt)> = BTreeSet::new();
    let mut rest = BTreeSet::new();
    for f in set {
        match f {
            Formula::Atom(Atom::Lt(l)) => {
                let k = lts.entry(l.coeffs).or_insert_with(|| l.konst.clone());
                if l.konst > *k {
                    *k = l.konst;
                }
            }
            Formula::Atom(Atom::Eq(l)) => match eqs.get(&l.coeffs) {
                Some(k) if *k != l.konst => return None,
                _ => {
                    eqs.insert(l.coeffs, l.konst);
                }
            },
            Formula::Atom(Atom::Dvd(d, l)) => match dvds.get(&(d.clone(), l.coeffs.clone())) {
                Some(k) if *k != l.konst => return None,
                _ => {
                    dvds.insert((d, l.coeffs), l.konst);
                }
            },
            Formula::Atom(Atom::NDvd(d, l)) => {
                ndvds.insert((d, l.coeffs, l.konst));
            }
            other => {
                rest.insert(other);
            }
        }
    }
    for ((d, c), k) in &dvds {
        if ndvds.contains(&(d.clone(), c.clone(), k.clone())) {
            return None;
        }
    }
    for (c, k) in &lts {
        // L + k < 0 and -L + k2 < 0 leave k2 < L < -k.
        if let Some(k2) = lts.get(&negated(c)) {
            if k + k2 > BigInt::from(-2) {
                return None;
            }
        }
    }
    for (c, k) in &eqs {
        // L = -k decides every atom over L or -L.
        if let Some(k2) = lts.remove(c) {
            if !(k2 - k).is_negative() {
                return None;
            }
        }
        if let Some(k2) = lts.remove(&negated(c)) {
            if !(k + k2).is_negative() {
                return None;
            }
        }
        let decided: Vec<(BigInt, Coeffs)> =
            dvds.keys().filter(|(_, dc)| dc == c).cloned().collect();
        for key in decided {
            let k2 = dvds.remove(&key).expect("present");
            if !(k2 - k).mod_floor(&key.0).is_zero() {
                return None;
            }
        }
        let decided: Vec<(BigInt, Coeffs, BigInt)> =
            ndvds.iter().filter(|(_, dc, _)| dc == c).cloned().collect();
        for key in decided {
            ndvds.remove(&key);
            if (&key.2 - k).mod_floor(&key.0).is_zero() {
                return None;
            }
        }
    }
    let atoms = lts
        .into_iter()
        .map(|(coeffs, konst)| Atom::Lt(Lin { coeffs, konst }))
        .chain(
            eqs.into_iter()
                .map(|(coeffs, konst)| Atom::Eq(Lin { coeffs, konst })),
        )
        .chain(
            dvds.into_iter()
                .map(|((d, coeffs), konst)| Atom::Dvd(d, Lin { coeffs, konst })),
        )
        .chain(
            ndvds
                .into_iter()
                .map(|(d, coeffs, konst)| Atom::NDvd(d, Lin { coeffs, konst })),
        );
    rest.extend(atoms.map(Formula::Atom));
    Some(rest)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn constant(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    pub fn atom(a: Atom) -> Formula {
        a.normalize()
    }

    pub fn and(items: Vec<Formula>) -> Formula {
        let mut set = BTreeSet::new();
        for f in items {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => set.extend(inner),
                other => {
                    set.insert(other);
                }
            }
        }
        if set.len() > 1 {
            match prune_conjunction(set) {
                Some(kept) => set = kept,
                None => return Formula::False,
            }
        }
        match set.len() {
            0 => Formula::True,
            1 => set.into_iter().next().unwrap(),
            _ => Formula::And(set.into_iter().collect()),
        }
    }

    pub fn or(items: Vec<Formula>) -> Formula {
        let mut set = BTreeSet::new();
        for f in items {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => set.extend(inner),
                other => {
                    set.insert(other);
                }
            }
        }
        match set.len() {
            0 => Formula::False,
            1 => set.into_iter().next().unwrap(),
            _ => Formula::Or(set.into_iter().collect()),
        }
    }

    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a) => a.negate(),
            Formula::And(fs) => Formula::or(fs.iter().map(Formula::negate).collect()),
            Formula::Or(fs) => Formula::and(fs.iter().map(Formula::negate).collect()),
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Atom(a) => a.mentions(v),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|f| f.mentions(v)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(Atom::BVar(v, _)) => {
                out.insert(v.clone());
            }
            Formula::Atom(a) => out.extend(a.lin().unwrap().vars().cloned()),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Applies `f` to every atom and re-normalises.
    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Formula) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => f(a),
            Formula::And(fs) => Formula::and(fs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(fs) => Formula::or(fs.iter().map(|g| g.map_atoms(f)).collect()),
        }
    }

    /// Substitutes a linear expression for an integer variable.
    pub fn subst_int(&self, v: &Var, by: &Lin) -> Formula {
        if !self.mentions(v) {
            return self.clone();
        }
        self.map_atoms(&|a| {
            if a.mentions(v) {
                Formula::atom(a.map_lin(|l| l.subst(v, by)))
            } else {
                Formula::Atom(a.clone())
            }
        })
    }

    pub fn subst_bool(&self, v: &Var, val: bool) -> Formula {
        self.map_atoms(&|a| match a {
            Atom::BVar(w, p) if w == v => Formula::constant(*p == val),
            _ => Formula::Atom(a.clone()),
        })
    }

    /// Scales every atom mentioning `v` so its coefficient is `±delta`.
    pub(crate) fn scale_coeff(&self, v: &Var, delta: &BigInt) -> Formula {
        self.map_atoms(&|a| {
            let c = match a.lin() {
                Some(l) if l.mentions(v) => l.coeff(v),
                _ => return Formula::Atom(a.clone()),
            };
            let k = delta / c.abs();
            Formula::Atom(match a {
                Atom::Lt(l) => Atom::Lt(l.scale(&k)),
                Atom::Eq(l) => Atom::Eq(l.scale(&k)),
                Atom::Dvd(d, l) => Atom::Dvd(d * &k, l.scale(&k)),
                Atom::NDvd(d, l) => Atom::NDvd(d * &k, l.scale(&k)),
                Atom::BVar(..) => unreachable!(),
            })
        })
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) {
            match f {
                Formula::Atom(a) => out.push(a),
                Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| go(g, out)),
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }

    pub fn eval(&self, ints: &BTreeMap<Var, BigInt>, bools: &BTreeMap<Var, bool>) -> Option<bool> {
        match self {
            Formula::True => Some(true),
            Formula::False => Some(false),
            Formula::Atom(a) => a.eval(ints, bools),
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(ints, bools)? {
                        return Some(false);
                    }
                }
                Some(true)
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(ints, bools)? {
                        return Some(true);
                    }
                }
                Some(false)
            }
        }
    }

    /// Substitutes constants for every assigned variable.
    pub fn instantiate(
        &self,
        ints: &BTreeMap<Var, BigInt>,
        bools: &BTreeMap<Var, bool>,
    ) -> Formula {
        let mut f = self.clone();
        for (v, k) in ints {
            f = f.subst_int(v, &Lin::constant(k.clone()));
        }
        for (v, b) in bools {
            if f.mentions(v) {
                f = f.subst_bool(v, *b);
            }
        }
        f
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(Atom::Lt(l)) => write!(f, "{} < 0", l),
            Formula::Atom(Atom::Eq(l)) => write!(f, "{} = 0", l),
            Formula::Atom(Atom::Dvd(d, l)) => write!(f, "{} | {}", d, l),
            Formula::Atom(Atom::NDvd(d, l)) => write!(f, "not {} | {}", d, l),
            Formula::Atom(Atom::BVar(v, p)) => {
                if *p {
                    write!(f, "{}", v)
                } else {
                    write!(f, "not {}", v)
                }
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let sep = if matches!(self, Formula::And(_)) {
                    " /\\ "
                } else {
                    " \\/ "
                };
                f.write_str("(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{}", g)?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x() -> Var {
        Var::int("x")
    }

    fn lin(cx: i64, cy: i64, k: i64) -> Lin {
        let mut l = Lin::constant(BigInt::from(k));
        for (v, c) in [(x(), cx), (Var::int("y"), cy)] {
            if c != 0 {
                l.coeffs.insert(v, BigInt::from(c));
            }
        }
        l
    }

    #[test]
    fn conjunction_pruning() {
        // x + y < 3 /\ x + y < 1 keeps the tighter bound
        let f = Formula::and(vec![
            Formula::atom(Atom::Lt(lin(1, 1, -3))),
            Formula::atom(Atom::Lt(lin(1, 1, -1))),
        ]);
        assert_eq!(f, Formula::Atom(Atom::Lt(lin(1, 1, -1))));
        // x < 0 /\ x > 0 is empty, x < 1 /\ x > -1 is not
        let opposite = |a, b| {
            Formula::and(vec![
                Formula::atom(Atom::Lt(lin(1, 0, a))),
                Formula::atom(Atom::Lt(lin(-1, 0, b))),
            ])
        };
        assert_eq!(opposite(0, 0), Formula::False);
        assert_ne!(opposite(-1, -1), Formula::False);
        // x = 2 decides x < 5 and 2 | x, and refutes 3 | x
        let eq = Formula::atom(Atom::Eq(lin(1, 0, -2)));
        let f = Formula::and(vec![
            eq.clone(),
            Formula::atom(Atom::Lt(lin(1, 0, -5))),
            Formula::atom(Atom::Dvd(BigInt::from(2), lin(1, 0, 0))),
        ]);
        assert_eq!(f, eq);
        let g = Formula::and(vec![
            eq.clone(),
            Formula::atom(Atom::Dvd(BigInt::from(3), lin(1, 0, 0))),
        ]);
        assert_eq!(g, Formula::False);
        let h = Formula::and(vec![
            Formula::atom(Atom::Dvd(BigInt::from(3), lin(1, 1, 0))),
            Formula::atom(Atom::NDvd(BigInt::from(3), lin(1, 1, 0))),
        ]);
        assert_eq!(h, Formula::False);
    }

    fn atom_strategy() -> impl Strategy<Value = Atom> {
        (0..4u8, -2..=2i64, -2..=2i64, -4..=4i64, 2..=4i64).prop_map(|(kind, cx, cy, k, d)| {
            let l = lin(cx, cy, k);
            match kind {
                0 => Atom::Lt(l),
                1 => Atom::Eq(l),
                2 => Atom::Dvd(BigInt::from(d), l),
                _ => Atom::NDvd(BigInt::from(d), l),
            }
        })
    }

    proptest! {
        #[test]
        fn pruned_conjunction_is_equivalent(atoms in proptest::collection::vec(atom_strategy(), 1..6)) {
            let f = Formula::and(atoms.iter().map(|a| Formula::atom(a.clone())).collect());
            let bools = BTreeMap::new();
            for i in -6..=6 {
                for j in -6..=6 {
                    let ints: BTreeMap<Var, BigInt> =
                        [(x(), BigInt::from(i)), (Var::int("y"), BigInt::from(j))].into_iter().collect();
                    let direct = atoms.iter().all(|a| a.eval(&ints, &bools) == Some(true));
                    prop_assert_eq!(f.eval(&ints, &bools), Some(direct), "{} at x={}, y={}", f, i, j);
                }
            }
        }
    }

    #[test]
    fn lt_tightening() {
        // 2x - 3 < 0  ⇔  x ≤ 1  ⇔  x - 2 < 0
        let l = Lin::var(x())
            .scale(&BigInt::from(2))
            .add_const(&BigInt::from(-3));
        let f = Formula::atom(Atom::Lt(l));
        let expect = Formula::Atom(Atom::Lt(Lin::var(x()).add_const(&BigInt::from(-2))));
        assert_eq!(f, expect);
    }

    #[test]
    fn eq_without_integer_solution() {
        let l = Lin::var(x())
            .scale(&BigInt::from(2))
            .add_const(&BigInt::from(1));
        assert_eq!(Formula::atom(Atom::Eq(l)), Formula::False);
    }

    #[test]
    fn divisibility_reduction() {
        let l = Lin::var(x())
            .scale(&BigInt::from(4))
            .add_const(&BigInt::from(2));
        // 6 | 4x + 2  ⇔  3 | 2x + 1
        match Formula::atom(Atom::Dvd(BigInt::from(6), l)) {
            Formula::Atom(Atom::Dvd(d, _)) => assert_eq!(d, BigInt::from(3)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn negation_is_complement() {
        let l = Lin::var(x()).add_const(&BigInt::from(-2));
        for a in [
            Atom::Lt(l.clone()),
            Atom::Eq(l.clone()),
            Atom::Dvd(BigInt::from(3), l),
        ] {
            let f = Formula::atom(a);
            let g = f.negate();
            for i in -5..5 {
                let env: BTreeMap<_, _> = [(x(), BigInt::from(i))].into_iter().collect();
                let b = BTreeMap::new();
                assert_ne!(f.eval(&env, &b), g.eval(&env, &b));
            }
        }
    }
}
