//! Constrained terms, ∃-terms and constrained ∃-equations, with the
//! symbolic rewrite steps over them.
//!
//! A step on a constrained ∃-term `(∃x⃗:η. s)[φ]` matches a renamed rule
//! `ℓ → r [ψ]` at a position of `s`. Guard variables of `ℓ` must be bound
//! to values, guard variables of `φ` or binder variables; extra variables
//! of the rule become fresh binder variables. The step is licensed when
//! `φ ∧ η ⇒ ∃z⃗. ψγ` is valid, and the instantiated rule guard joins the
//! binder constraint.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use crate::lctrs::{Origin, Rule};
use crate::solver::simplify::propagate_values;
use crate::solver::{simplify_constraint, Solver, Verdict};
use crate::term::{match_term, unify, Func, FuncDecl, Position, Sort, Subst, Term, Var, VarGen};

#[derive(Debug, Clone, Error)]
pub enum StepError {
    #[error("position {0} does not exist")]
    Position(Position),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("rule guard not established: {judgment} is {verdict}")]
    Unjustified { judgment: String, verdict: Verdict },
}

#[derive(Debug, Clone, Error)]
pub enum CeqError {
    #[error("sides have different sorts ({0} vs {1})")]
    SortMismatch(Sort, Sort),
    #[error("{0} is not a boolean theory constraint")]
    BadConstraint(String),
    #[error("bound variable {0} is not theory-sorted")]
    BinderSort(Var),
    #[error("bound variable {0} is listed twice")]
    DuplicateBinder(Var),
    #[error("bound variable {0} occurs in neither side")]
    UnusedBinder(Var),
    #[error("the guard does not establish the binder constraint: {0}")]
    Unjustified(Verdict),
}

fn is_constraint(t: &Term) -> bool {
    t.sort() == Sort::Bool && t.is_theory()
}

fn check_constraint(t: &Term) -> Result<(), CeqError> {
    if is_constraint(t) {
        Ok(())
    } else {
        Err(CeqError::BadConstraint(t.to_string()))
    }
}

/// `⟨s, φ⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstrainedTerm {
    pub term: Term,
    pub guard: Term,
}

/// `∃x⃗:η. s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExistsTerm {
    pub binder: Vec<Var>,
    pub eta: Term,
    pub term: Term,
}

/// `⟨∃x⃗:η. s⟩[φ]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstrainedExistsTerm {
    pub inner: ExistsTerm,
    pub guard: Term,
}

/// `(∃x⃗:η. s ≈ t)[φ]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ceq {
    pub binder: Vec<Var>,
    pub eta: Term,
    pub lhs: Term,
    pub rhs: Term,
    pub guard: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "l" | "left" => Some(Side::Left),
            "r" | "right" => Some(Side::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "l",
            Side::Right => "r",
        })
    }
}

/// `s ≈ t` as a term, so that a side position `p` becomes `i.p`.
pub fn pair(s: Term, t: Term) -> Term {
    let sort = s.sort();
    Term::App(
        Func::User(FuncDecl::new(
            "≈",
            vec![sort.clone(), sort],
            Sort::named("≈"),
        )),
        vec![s, t],
    )
}

fn unpair(t: Term) -> (Term, Term) {
    match t {
        Term::App(_, mut args) if args.len() == 2 => {
            let r = args.pop().unwrap();
            (args.pop().unwrap(), r)
        }
        other => unreachable!("not an equation pair: {}", other),
    }
}

enum Mode<'a> {
    Plain,
    Exists { binder: &'a [Var], eta: &'a Term },
}

struct Rewritten {
    term: Term,
    fresh: Vec<Var>,
    instance: Term,
}

/// Variables of the rhs and guard absent from the lhs, in order of
/// appearance.
fn extras_in_order(r: &Rule) -> Vec<Var> {
    let lhs = r.lhs.vars();
    r.rhs
        .vars_ordered()
        .into_iter()
        .chain(r.guard.vars_ordered())
        .filter(|v| !lhs.contains(v))
        .unique()
        .collect()
}

fn rewrite(
    target: &Term,
    pos: &Position,
    rule: &Rule,
    pins: &Subst,
    guard: &Term,
    mode: Mode<'_>,
    solver: &Solver,
) -> Result<Rewritten, StepError> {
    let sub = target
        .subterm_at(pos)
        .map_err(|_| StepError::Position(pos.clone()))?;
    if !matches!(sub, Term::App(..)) {
        return Err(StepError::NotApplicable(format!(
            "{} at {} is not an application",
            sub, pos
        )));
    }
    let mut avoid = target.vars();
    guard.collect_vars(&mut avoid);
    let binder: &[Var] = match &mode {
        Mode::Plain => &[],
        Mode::Exists { binder, eta } => {
            avoid.extend(binder.iter().cloned());
            eta.collect_vars(&mut avoid);
            binder
        }
    };
    let mut gen = VarGen::new();
    gen.observe_all(&avoid);
    let (r, ren) = rule.rename(&mut gen);

    let mut gamma = match_term(&r.lhs, sub)
        .ok_or_else(|| StepError::NotApplicable(format!("{} does not match {}", rule.lhs, sub)))?;

    let mut pinned = Subst::new();
    for (v, t) in pins.iter() {
        let renamed = ren.get(v).and_then(Term::as_var).ok_or_else(|| {
            StepError::NotApplicable(format!("rule {} has no variable {}", rule.id, v))
        })?;
        pinned
            .insert(renamed.clone(), t.clone())
            .map_err(|e| StepError::NotApplicable(format!("binding for {}: {}", v, e)))?;
    }

    let lhs_vars = r.lhs.vars();
    let guard_vars = guard.vars();
    for (v, t) in pinned.iter() {
        if lhs_vars.contains(v) && gamma.get(v) != Some(t) {
            return Err(StepError::NotApplicable(format!(
                "binding {} conflicts with the match {}",
                t,
                gamma.get(v).map(|x| x.to_string()).unwrap_or_default()
            )));
        }
    }
    for v in r.guard.vars().intersection(&lhs_vars) {
        let img = gamma.get(v).expect("lhs variable matched");
        let ok = match img {
            Term::Val(_) => true,
            Term::Var(y) => guard_vars.contains(y) || binder.contains(y),
            _ => false,
        };
        if !ok {
            return Err(StepError::NotApplicable(format!(
                "guard variable would be bound to {}, which is neither a value nor a constrained variable",
                img
            )));
        }
    }

    let rename_back = |v: &Var| -> Var {
        ren.iter()
            .find(|(_, t)| t.as_var() == Some(v))
            .map(|(o, _)| o.clone())
            .unwrap_or_else(|| v.clone())
    };
    let mut fresh: Vec<Var> = Vec::new();
    let renamed_vars: BTreeSet<Var> = ren
        .iter()
        .filter_map(|(_, t)| t.as_var().cloned())
        .collect();
    for v in extras_in_order(&r) {
        let img = match pinned.get(&v) {
            Some(t) => {
                let plain = matches!(mode, Mode::Plain);
                match t {
                    Term::Val(_) if plain => t.clone(),
                    Term::Var(y) if plain && guard_vars.contains(y) => t.clone(),
                    Term::Var(y)
                        if !avoid.contains(y)
                            && !fresh.contains(y)
                            && (!renamed_vars.contains(y) || *y == v) =>
                    {
                        fresh.push(y.clone());
                        t.clone()
                    }
                    _ => {
                        return Err(StepError::NotApplicable(format!(
                            "extra variable {} cannot be bound to {}",
                            rename_back(&v),
                            t
                        )))
                    }
                }
            }
            None => {
                let y = if r.origin == Origin::Calculation {
                    match sub.vars_ordered().first() {
                        Some(first) => gen.fresh(first.name(), v.sort().clone()),
                        None => v.clone(),
                    }
                } else {
                    v.clone()
                };
                fresh.push(y.clone());
                Term::Var(y)
            }
        };
        gamma.insert(v.clone(), img).map_err(|e| {
            StepError::NotApplicable(format!("binding for {}: {}", rename_back(&v), e))
        })?;
    }

    let instance = r.guard.apply(&gamma);
    if !is_constraint(&instance) {
        return Err(StepError::NotApplicable(format!(
            "instantiated guard {} is not a constraint",
            instance
        )));
    }
    let hyp = match mode {
        Mode::Plain => guard.clone(),
        Mode::Exists { eta, .. } => Term::and_simple(guard.clone(), eta.clone()),
    };
    if !instance.is_true() {
        let verdict = solver.is_valid_exists(&hyp, &fresh, &instance);
        if !verdict.is_valid() {
            return Err(StepError::Unjustified {
                judgment: judgment_text(&hyp, &fresh, &instance),
                verdict,
            });
        }
    }
    let reduct = target
        .replace_at(pos, r.rhs.apply(&gamma))
        .map_err(|e| StepError::NotApplicable(e.to_string()))?;
    Ok(Rewritten {
        term: reduct,
        fresh,
        instance,
    })
}

/// Readable rendering of `φ ⇒ ∃xs. ψ`.
pub fn judgment_text(phi: &Term, xs: &[Var], psi: &Term) -> String {
    if xs.is_empty() {
        format!("{} => {}", phi, psi)
    } else {
        format!("{} => exists {}. {}", phi, xs.iter().join(", "), psi)
    }
}

/// Conjoins the new conjuncts of `instance` to `eta`, leaving out those
/// already entailed by the outer guard, `eta` and the remaining new
/// conjuncts. A conjunct is kept whenever it is the last one mentioning
/// some bound variable.
fn absorb(guard: &Term, eta: &Term, binder: &[Var], instance: &Term, solver: &Solver) -> Term {
    let mut kept: Vec<Term> = simplify_constraint(instance)
        .conjuncts()
        .into_iter()
        .filter(|c| !c.is_true())
        .collect();
    let mut i = 0;
    while i < kept.len() {
        let c = kept[i].clone();
        let others: Vec<Term> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, d)| d.clone())
            .collect();
        let covered = c
            .vars()
            .iter()
            .filter(|v| binder.contains(v))
            .all(|v| eta.contains_var(v) || others.iter().any(|d| d.contains_var(v)));
        let context = Term::conj([guard.clone(), eta.clone()].into_iter().chain(others));
        if covered && solver.entails(&context, &c).is_valid() {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    simplify_constraint(&Term::conj(std::iter::once(eta.clone()).chain(kept)))
}

/// Binder clean-up shared by ∃-terms and ∃-equations: value bindings of
/// bound variables are substituted, bound variables that left the body are
/// projected out, and every remaining bound variable is kept in `η`.
fn tidy_binder(binder: &mut Vec<Var>, eta: &mut Term, body: &mut [&mut Term], solver: &Solver) {
    let (_, binds) = propagate_values(eta);
    let s: Subst = binds
        .iter()
        .filter(|(v, _)| binder.contains(v))
        .map(|(v, x)| (v.clone(), Term::Val(x.clone())))
        .collect();
    if !s.is_empty() {
        *eta = eta.apply(&s);
        for t in body.iter_mut() {
            **t = t.apply(&s);
        }
        binder.retain(|v| !s.contains(v));
    }
    *eta = simplify_constraint(eta);
    let unused: Vec<Var> = binder
        .iter()
        .filter(|v| !body.iter().any(|t| t.contains_var(v)))
        .cloned()
        .collect();
    if !unused.is_empty() {
        if let Ok(q) = solver.eliminate_exists(&unused, eta) {
            *eta = simplify_constraint(&q);
            binder.retain(|v| !unused.contains(v));
        }
    }
    let missing: Vec<Term> = binder
        .iter()
        .filter(|v| !eta.contains_var(v))
        .map(|v| Term::eq(Term::Var(v.clone()), Term::Var(v.clone())))
        .collect();
    if !missing.is_empty() {
        *eta = Term::conj(
            std::iter::once(eta.clone())
                .filter(|e| !e.is_true())
                .chain(missing),
        );
    }
    if binder.is_empty() && eta.is_ground() && !eta.is_false() {
        *eta = Term::tt();
    }
}

impl ConstrainedTerm {
    pub fn new(term: Term, guard: Term) -> ConstrainedTerm {
        ConstrainedTerm { term, guard }
    }

    /// One constrained rewrite step at `pos`. Unpinned extra variables
    /// become fresh variables of the guard.
    pub fn step(
        &self,
        pos: &Position,
        rule: &Rule,
        pins: &Subst,
        solver: &Solver,
    ) -> Result<ConstrainedTerm, StepError> {
        let rw = rewrite(
            &self.term,
            pos,
            rule,
            pins,
            &self.guard,
            Mode::Plain,
            solver,
        )?;
        Ok(ConstrainedTerm {
            term: rw.term,
            guard: simplify_constraint(&Term::and_simple(self.guard.clone(), rw.instance)),
        })
    }
}

impl fmt::Display for ConstrainedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.term, self.guard)
    }
}

impl ExistsTerm {
    pub fn new(binder: Vec<Var>, eta: Term, term: Term) -> ExistsTerm {
        ExistsTerm { binder, eta, term }
    }

    /// Violated invariants: distinct bound variables occurring in `η` and
    /// in the body, a satisfiable `η`, and a closed valid `η` when nothing
    /// is bound.
    pub fn diagnostics(&self, solver: &Solver) -> Vec<String> {
        let mut out = binder_shape(&self.binder);
        for x in &self.binder {
            if !self.eta.contains_var(x) {
                out.push(format!(
                    "bound variable {} does not occur in the binder constraint",
                    x
                ));
            }
            if !self.term.contains_var(x) {
                out.push(format!("bound variable {} does not occur in the body", x));
            }
        }
        if self.binder.is_empty() {
            if !self.eta.is_ground() || !solver.is_valid(&self.eta).is_valid() {
                out.push(format!(
                    "binder constraint {} is not closed and valid",
                    self.eta
                ));
            }
        } else {
            let sat = solver.is_satisfiable(&self.eta);
            if !sat.is_sat() {
                out.push(format!("binder constraint {} is {}", self.eta, sat));
            }
        }
        out
    }
}

fn binder_shape(binder: &[Var]) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for x in binder {
        if !x.sort().is_theory() {
            out.push(format!("bound variable {} is not theory-sorted", x));
        }
        if !seen.insert(x) {
            out.push(format!("bound variable {} is listed twice", x));
        }
    }
    out
}

fn fmt_binder(f: &mut fmt::Formatter<'_>, binder: &[Var], eta: &Term) -> fmt::Result {
    write!(f, "exists {} [{}]. ", binder.iter().join(", "), eta)
}

impl fmt::Display for ExistsTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.binder.is_empty() {
            return write!(f, "{}", self.term);
        }
        fmt_binder(f, &self.binder, &self.eta)?;
        write!(f, "{}", self.term)
    }
}

impl ConstrainedExistsTerm {
    /// Builds the pair, renaming bound variables apart from the guard.
    pub fn new(binder: Vec<Var>, eta: Term, term: Term, guard: Term) -> ConstrainedExistsTerm {
        let (binder, eta, mut bodies) = rename_binder_apart(binder, eta, vec![term], &guard);
        ConstrainedExistsTerm {
            inner: ExistsTerm {
                binder,
                eta,
                term: bodies.pop().unwrap(),
            },
            guard,
        }
    }

    pub fn diagnostics(&self, solver: &Solver) -> Vec<String> {
        let mut out = self.inner.diagnostics(solver);
        let gv = self.guard.vars();
        for v in self.inner.eta.vars() {
            if !self.inner.binder.contains(&v) && !gv.contains(&v) {
                out.push(format!(
                    "free variable {} of the binder constraint is not a guard variable",
                    v
                ));
            }
        }
        for x in &self.inner.binder {
            if gv.contains(x) {
                out.push(format!("bound variable {} also occurs in the guard", x));
            }
        }
        let v = solver.is_valid_exists(&self.guard, &self.inner.binder, &self.inner.eta);
        if !v.is_valid() {
            out.push(format!(
                "{} is {}",
                judgment_text(&self.guard, &self.inner.binder, &self.inner.eta),
                v.outcome
            ));
        }
        out
    }

    /// One ∃-rewrite step at `pos` of the body.
    pub fn step(
        &self,
        pos: &Position,
        rule: &Rule,
        pins: &Subst,
        solver: &Solver,
    ) -> Result<ConstrainedExistsTerm, StepError> {
        let ExistsTerm { binder, eta, term } = &self.inner;
        let rw = rewrite(
            term,
            pos,
            rule,
            pins,
            &self.guard,
            Mode::Exists { binder, eta },
            solver,
        )?;
        let mut binder: Vec<Var> = binder.iter().cloned().chain(rw.fresh).collect();
        let mut eta = absorb(&self.guard, eta, &binder, &rw.instance, solver);
        let mut term = rw.term;
        tidy_binder(&mut binder, &mut eta, &mut [&mut term], solver);
        Ok(ConstrainedExistsTerm {
            inner: ExistsTerm { binder, eta, term },
            guard: simplify_constraint(&self.guard),
        })
    }
}

impl fmt::Display for ConstrainedExistsTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inner.binder.is_empty() {
            write!(f, "{}", self.inner.term)?;
        } else {
            write!(f, "({})", self.inner)?;
        }
        if !self.guard.is_true() {
            write!(f, " [{}]", self.guard)?;
        }
        Ok(())
    }
}

fn rename_binder_apart(
    binder: Vec<Var>,
    eta: Term,
    bodies: Vec<Term>,
    guard: &Term,
) -> (Vec<Var>, Term, Vec<Term>) {
    let gv = guard.vars();
    if !binder.iter().any(|x| gv.contains(x)) {
        return (binder, eta, bodies);
    }
    let mut gen = VarGen::new();
    gen.observe_all(&gv);
    gen.observe_all(&binder);
    gen.observe_all(&eta.vars());
    for b in &bodies {
        gen.observe_all(&b.vars());
    }
    let mut ren = Subst::new();
    let binder = binder
        .into_iter()
        .map(|x| {
            if gv.contains(&x) {
                let y = gen.fresh_like(&x);
                ren.insert(x, Term::Var(y.clone())).expect("same sort");
                y
            } else {
                x
            }
        })
        .collect();
    (
        binder,
        eta.apply(&ren),
        bodies.iter().map(|b| b.apply(&ren)).collect(),
    )
}

impl Ceq {
    /// Checked construction. Bound variables are renamed apart from the
    /// guard, bound variables missing from `η` get a trivial `x = x`, free
    /// variables of `η` missing from `φ` get one in `φ`, and `φ ⇒ ∃x⃗. η`
    /// must be valid.
    pub fn new(
        binder: Vec<Var>,
        eta: Term,
        lhs: Term,
        rhs: Term,
        guard: Term,
        solver: &Solver,
    ) -> Result<Ceq, CeqError> {
        let (ls, rs) = (lhs.sort(), rhs.sort());
        if ls != rs {
            return Err(CeqError::SortMismatch(ls, rs));
        }
        check_constraint(&eta)?;
        check_constraint(&guard)?;
        let mut seen = BTreeSet::new();
        for x in &binder {
            if !x.sort().is_theory() {
                return Err(CeqError::BinderSort(x.clone()));
            }
            if !seen.insert(x.clone()) {
                return Err(CeqError::DuplicateBinder(x.clone()));
            }
            if !lhs.contains_var(x) && !rhs.contains_var(x) {
                return Err(CeqError::UnusedBinder(x.clone()));
            }
        }
        let (binder, eta, mut sides) = rename_binder_apart(binder, eta, vec![lhs, rhs], &guard);
        let rhs = sides.pop().unwrap();
        let lhs = sides.pop().unwrap();
        let missing: Vec<Term> = binder
            .iter()
            .filter(|v| !eta.contains_var(v))
            .map(|v| Term::eq(Term::Var(v.clone()), Term::Var(v.clone())))
            .collect();
        let eta = if missing.is_empty() {
            eta
        } else {
            Term::conj(std::iter::once(eta).filter(|e| !e.is_true()).chain(missing))
        };
        let eta = if binder.is_empty() && eta.is_true() {
            Term::tt()
        } else {
            eta
        };
        let gv = guard.vars();
        let unguarded: Vec<Term> = eta
            .vars()
            .into_iter()
            .filter(|v| !binder.contains(v) && !gv.contains(v))
            .map(|v| Term::eq(Term::Var(v.clone()), Term::Var(v)))
            .collect();
        let guard = if unguarded.is_empty() {
            guard
        } else {
            Term::conj(
                std::iter::once(guard)
                    .filter(|g| !g.is_true())
                    .chain(unguarded),
            )
        };
        let eq = Ceq {
            binder,
            eta,
            lhs,
            rhs,
            guard,
        };
        let v = solver.is_valid_exists(&eq.guard, &eq.binder, &eq.eta);
        if !v.is_valid() {
            return Err(CeqError::Unjustified(v));
        }
        Ok(eq)
    }

    /// A plain constrained equation `s ≈ t [φ]`.
    pub fn plain(lhs: Term, rhs: Term, guard: Term) -> Ceq {
        Ceq {
            binder: vec![],
            eta: Term::tt(),
            lhs,
            rhs,
            guard,
        }
    }

    pub fn side(&self, side: Side) -> &Term {
        match side {
            Side::Left => &self.lhs,
            Side::Right => &self.rhs,
        }
    }

    /// All variables, bound ones included.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self.binder.iter().cloned().collect();
        for t in [&self.eta, &self.lhs, &self.rhs, &self.guard] {
            t.collect_vars(&mut out);
        }
        out
    }

    /// `Var(s, t, φ) \ x⃗`.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in [&self.lhs, &self.rhs, &self.guard] {
            t.collect_vars(&mut out);
        }
        for x in &self.binder {
            out.remove(x);
        }
        out
    }

    /// The equation as a constrained ∃-term over `s ≈ t`.
    pub fn as_exists_term(&self) -> ConstrainedExistsTerm {
        ConstrainedExistsTerm {
            inner: ExistsTerm {
                binder: self.binder.clone(),
                eta: self.eta.clone(),
                term: pair(self.lhs.clone(), self.rhs.clone()),
            },
            guard: self.guard.clone(),
        }
    }

    pub fn from_exists_term(t: ConstrainedExistsTerm) -> Ceq {
        let (lhs, rhs) = unpair(t.inner.term);
        Ceq {
            binder: t.inner.binder,
            eta: t.inner.eta,
            lhs,
            rhs,
            guard: t.guard,
        }
    }

    /// Violated well-formedness conditions; empty when well-formed.
    pub fn diagnostics(&self, solver: &Solver) -> Vec<String> {
        let mut out = binder_shape(&self.binder);
        let gv = self.guard.vars();
        if self.lhs.sort() != self.rhs.sort() {
            out.push(format!(
                "sides have different sorts ({} vs {})",
                self.lhs.sort(),
                self.rhs.sort()
            ));
        }
        for (name, c) in [("binder constraint", &self.eta), ("guard", &self.guard)] {
            if !is_constraint(c) {
                out.push(format!("{} {} is not a boolean theory constraint", name, c));
            }
        }
        for x in &self.binder {
            if !self.eta.contains_var(x) {
                out.push(format!(
                    "bound variable {} does not occur in the binder constraint",
                    x
                ));
            }
            if !self.lhs.contains_var(x) && !self.rhs.contains_var(x) {
                out.push(format!("bound variable {} occurs in neither side", x));
            }
            if gv.contains(x) {
                out.push(format!("bound variable {} also occurs in the guard", x));
            }
        }
        for v in self.eta.vars() {
            if !self.binder.contains(&v) && !gv.contains(&v) {
                out.push(format!(
                    "free variable {} of the binder constraint is not a guard variable",
                    v
                ));
            }
        }
        if out.is_empty() {
            let v = solver.is_valid_exists(&self.guard, &self.binder, &self.eta);
            if !v.is_valid() {
                out.push(format!(
                    "{} is {}",
                    judgment_text(&self.guard, &self.binder, &self.eta),
                    v
                ));
            }
        }
        out
    }

    pub fn is_well_formed(&self, solver: &Solver) -> bool {
        self.diagnostics(solver).is_empty()
    }

    /// Canonical form after a step: simplified constraints, guard values
    /// substituted into the sides, bound variables with a value or absent
    /// from both sides removed.
    pub fn normalize(mut self, solver: &Solver) -> Ceq {
        self.guard = simplify_constraint(&self.guard);
        let (_, binds) = propagate_values(&self.guard);
        let s: Subst = binds
            .iter()
            .filter(|(v, _)| !self.binder.contains(v))
            .map(|(v, x)| (v.clone(), Term::Val(x.clone())))
            .collect();
        self.lhs = self.lhs.apply(&s);
        self.rhs = self.rhs.apply(&s);
        self.eta = self.eta.apply(&s);
        tidy_binder(
            &mut self.binder,
            &mut self.eta,
            &mut [&mut self.lhs, &mut self.rhs],
            solver,
        );
        self
    }

    /// One ∃-rewrite step at `pos` of the chosen side, with the equation
    /// read as a term rooted in `≈`.
    pub fn step(
        &self,
        side: Side,
        pos: &Position,
        rule: &Rule,
        pins: &Subst,
        solver: &Solver,
    ) -> Result<Ceq, StepError> {
        let mut full = vec![side.index()];
        full.extend(pos.0.iter().copied());
        let cet = self.as_exists_term();
        let next = cet
            .step(&Position(full), rule, pins, solver)
            .map_err(|e| match e {
                StepError::Position(_) => StepError::Position(pos.clone()),
                other => other,
            })?;
        Ok(Ceq::from_exists_term(next).normalize(solver))
    }

    /// The member of an expansion obtained from `rule` at `pos` of the left
    /// side: the equation is instantiated by the most general unifier of
    /// the subterm and the renamed lhs, and the rule is applied there. The
    /// rule guard without its extra variables joins the outer guard; the
    /// extra variables become bound. `None` when nothing unifies.
    pub fn narrow(
        &self,
        pos: &Position,
        rule: &Rule,
        solver: &Solver,
    ) -> Result<Option<Ceq>, StepError> {
        self.narrow_with(pos, rule, true, solver)
    }

    /// Narrowing as in plain constrained RI: the extra variables of the
    /// rule stay free and its whole guard joins the outer guard.
    pub fn narrow_free(
        &self,
        pos: &Position,
        rule: &Rule,
        solver: &Solver,
    ) -> Result<Option<Ceq>, StepError> {
        self.narrow_with(pos, rule, false, solver)
    }

    fn narrow_with(
        &self,
        pos: &Position,
        rule: &Rule,
        bind: bool,
        solver: &Solver,
    ) -> Result<Option<Ceq>, StepError> {
        let sub = self
            .lhs
            .subterm_at(pos)
            .map_err(|_| StepError::Position(pos.clone()))?;
        let mut gen = VarGen::new();
        gen.observe_all(&self.all_vars());
        let (r, _) = rule.rename(&mut gen);
        let Some(theta) = unify(sub, &r.lhs) else {
            return Ok(None);
        };
        if let Some(x) = self.binder.iter().find(|x| theta.contains(x)) {
            return Err(StepError::NotApplicable(format!(
                "the unifier instantiates bound variable {}",
                x
            )));
        }
        for v in r.guard.vars().intersection(&r.lhs.vars()) {
            let img = Term::Var(v.clone()).apply(&theta);
            if !(img.is_value() || img.is_var()) {
                return Err(StepError::NotApplicable(format!(
                    "guard variable would be bound to {}, which is neither a value nor a variable",
                    img
                )));
            }
        }
        let mut full = theta.clone();
        let extras = extras_in_order(&r);
        let mut fresh = Vec::new();
        for z in &extras {
            let y = if r.origin == Origin::Calculation {
                match sub.vars_ordered().first() {
                    Some(first) => gen.fresh(first.name(), z.sort().clone()),
                    None => z.clone(),
                }
            } else {
                z.clone()
            };
            full.insert(z.clone(), Term::Var(y.clone()))
                .expect("same sort");
            fresh.push(y);
        }
        let instance = r.guard.apply(&full);
        if !is_constraint(&instance) {
            return Err(StepError::NotApplicable(format!(
                "instantiated guard {} is not a constraint",
                instance
            )));
        }
        let lhs = self.lhs.apply(&theta);
        let reduct = lhs
            .replace_at(pos, r.rhs.apply(&full))
            .map_err(|e| StepError::NotApplicable(e.to_string()))?;
        if !bind {
            return Ok(Some(
                Ceq {
                    binder: self.binder.clone(),
                    eta: self.eta.apply(&theta),
                    lhs: reduct,
                    rhs: self.rhs.apply(&theta),
                    guard: simplify_constraint(&Term::and_simple(
                        self.guard.apply(&theta),
                        instance,
                    )),
                }
                .normalize(solver),
            ));
        }
        let outer = if fresh.is_empty() {
            instance.clone()
        } else {
            solver.eliminate_exists(&fresh, &instance).map_err(|e| {
                StepError::NotApplicable(format!("cannot project the rule guard: {}", e))
            })?
        };
        let guard = simplify_constraint(&Term::and_simple(self.guard.apply(&theta), outer));
        let eta = self.eta.apply(&theta);
        let binder: Vec<Var> = self.binder.iter().cloned().chain(fresh).collect();
        let eta = absorb(&guard, &eta, &binder, &instance, solver);
        Ok(Some(
            Ceq {
                binder,
                eta,
                lhs: reduct,
                rhs: self.rhs.apply(&theta),
                guard,
            }
            .normalize(solver),
        ))
    }

    /// Equality up to a renaming of variables and equivalence of the
    /// constraints: `φ ⇔ φ'` and `φ ⇒ (η ⇔ η')` after renaming.
    pub fn equivalent_to(&self, other: &Ceq, solver: &Solver) -> bool {
        let p = pair(self.lhs.clone(), self.rhs.clone());
        let q = pair(other.lhs.clone(), other.rhs.clone());
        let (Some(rho), Some(_)) = (match_term(&p, &q), match_term(&q, &p)) else {
            return false;
        };
        let mapped: BTreeSet<Var> = self
            .binder
            .iter()
            .map(|x| {
                rho.get(x)
                    .and_then(Term::as_var)
                    .cloned()
                    .unwrap_or_else(|| x.clone())
            })
            .collect();
        if mapped != other.binder.iter().cloned().collect() {
            return false;
        }
        let phi = self.guard.apply(&rho);
        let eta = self.eta.apply(&rho);
        solver.equivalent(&phi, &other.guard).is_valid()
            && solver
                .entails(&other.guard, &Term::iff(eta, other.eta.clone()))
                .is_valid()
    }
}

impl fmt::Display for Ceq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.binder.is_empty() {
            write!(f, "{} = {}", self.lhs, self.rhs)?;
        } else {
            f.write_str("(")?;
            fmt_binder(f, &self.binder, &self.eta)?;
            write!(f, "{} = {})", self.lhs, self.rhs)?;
        }
        if !self.guard.is_true() {
            write!(f, " [{}]", self.guard)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Gt,
    Le,
    Lt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Le => "<=",
            Relation::Lt => "<",
        }
    }
}

/// `s ⋈ t [φ]` over integer-sorted sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub lhs: Term,
    pub rel: Relation,
    pub rhs: Term,
    pub guard: Term,
}

impl Inequality {
    /// `s ≥ t` becomes `∃m: m ≥ 0. s ≈ t + m`, `>` uses `m ≥ 1`, and `≤`,
    /// `<` put the slack on the left side.
    pub fn to_ceq(&self) -> Result<Ceq, CeqError> {
        for s in [&self.lhs, &self.rhs] {
            if s.sort() != Sort::Int {
                return Err(CeqError::SortMismatch(s.sort(), Sort::Int));
            }
        }
        check_constraint(&self.guard)?;
        let mut gen = VarGen::new();
        for t in [&self.lhs, &self.rhs, &self.guard] {
            gen.observe_all(&t.vars());
        }
        let m = gen.fresh("m", Sort::Int);
        let mt = Term::Var(m.clone());
        let low = match self.rel {
            Relation::Ge | Relation::Le => 0,
            Relation::Gt | Relation::Lt => 1,
        };
        let (lhs, rhs) = match self.rel {
            Relation::Ge | Relation::Gt => {
                (self.lhs.clone(), Term::add(self.rhs.clone(), mt.clone()))
            }
            Relation::Le | Relation::Lt => {
                (Term::add(self.lhs.clone(), mt.clone()), self.rhs.clone())
            }
        };
        Ok(Ceq {
            binder: vec![m],
            eta: Term::ge(mt, Term::int(low)),
            lhs,
            rhs,
            guard: self.guard.clone(),
        })
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel.symbol(), self.rhs)?;
        if !self.guard.is_true() {
            write!(f, " [{}]", self.guard)?;
        }
        Ok(())
    }
}

/// Candidate rewrite positions of an equation: left side then right side,
/// each leftmost-outermost, restricted to applications.
pub fn redex_positions(eq: &Ceq) -> Vec<(Side, Position)> {
    let mut out = Vec::new();
    for side in [Side::Left, Side::Right] {
        let t = eq.side(side);
        for p in t.positions() {
            if matches!(t.subterm_at(&p), Ok(Term::App(..))) {
                out.push((side, p));
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::signature::Signature;
    use crate::term::TheoryOp;

    pub(crate) fn v(n: &str) -> Term {
        Term::Var(Var::int(n))
    }

    pub(crate) fn vi(n: &str, i: u32) -> Term {
        Term::Var(Var::with_index(n, i, Sort::Int))
    }

    pub(crate) fn pow_rules() -> (Signature, Rule, Rule) {
        let mut sig = Signature::standard();
        let pow = sig
            .declare("pow", vec![Sort::Int, Sort::Int], Sort::Int)
            .unwrap();
        let app = |a: Term, b: Term| Term::App(Func::User(pow.clone()), vec![a, b]);
        let r1 = Rule::new(
            "R1",
            app(v("x"), v("y")),
            Term::int(1),
            Term::lt(v("y"), Term::int(1)),
            Origin::User,
        )
        .unwrap();
        let r2 = Rule::new(
            "R2",
            app(v("x"), v("y")),
            Term::mul(v("x"), app(v("x"), Term::sub(v("y"), Term::int(1)))),
            Term::ge(v("y"), Term::int(1)),
            Origin::User,
        )
        .unwrap();
        (sig, r1, r2)
    }

    fn pow(sig: &Signature, a: Term, b: Term) -> Term {
        Term::App(sig.func("pow").unwrap(), vec![a, b])
    }

    fn f_r1() -> (Signature, Rule, Rule) {
        let mut sig = Signature::standard();
        let f = sig
            .declare("f", vec![Sort::Int, Sort::Int], Sort::Int)
            .unwrap();
        let app = Term::App(Func::User(f), vec![v("x"), v("y")]);
        let a = Rule::new(
            "R1",
            app.clone(),
            Term::add(v("x"), v("z")),
            Term::and(Term::gt(v("x"), v("y")), Term::ge(v("z"), v("x"))),
            Origin::User,
        )
        .unwrap();
        let b = Rule::new("R2", app, v("x"), Term::le(v("x"), v("y")), Origin::User).unwrap();
        (sig, a, b)
    }

    fn p(s: &str) -> Position {
        Position::parse(s).unwrap()
    }

    #[test]
    fn constrained_term_steps() {
        let solver = Solver::builtin();
        let (sig, _, r2) = pow_rules();
        let ct = ConstrainedTerm::new(
            pow(&sig, Term::int(2), v("y")),
            Term::gt(v("y"), Term::int(2)),
        );
        let one = ct.step(&p("ε"), &r2, &Subst::new(), &solver).unwrap();
        assert_eq!(
            one.term,
            Term::mul(
                Term::int(2),
                pow(&sig, Term::int(2), Term::sub(v("y"), Term::int(1)))
            )
        );
        assert_eq!(one.guard, Term::gt(v("y"), Term::int(2)));
        let calc = Rule::calculation(TheoryOp::Sub);
        let two = one.step(&p("2.2"), &calc, &Subst::new(), &solver).unwrap();
        assert_eq!(
            two.term,
            Term::mul(Term::int(2), pow(&sig, Term::int(2), vi("y", 1)))
        );
        assert_eq!(
            two.guard,
            Term::and(
                Term::gt(v("y"), Term::int(2)),
                Term::eq(vi("y", 1), Term::sub(v("y"), Term::int(1)))
            )
        );
        let three = two.step(&p("2"), &r2, &Subst::new(), &solver);
        assert!(three.is_ok(), "y' >= 1 follows from y > 2");
    }

    #[test]
    fn plain_step_needs_entailment() {
        let solver = Solver::builtin();
        let (sig, r1, _) = f_r1();
        let f = sig.func("f").unwrap();
        let ct = ConstrainedTerm::new(
            Term::App(f, vec![v("x"), v("y")]),
            Term::and(Term::ge(v("x"), v("y")), Term::ge(v("y"), Term::int(0))),
        );
        match ct.step(&p("ε"), &r1, &Subst::new(), &solver) {
            Err(StepError::Unjustified { verdict, .. }) => {
                assert!(!verdict.is_valid() && !verdict.is_unknown())
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn plain_step_pins() {
        let solver = Solver::builtin();
        let (sig, r1, _) = f_r1();
        let f = sig.func("f").unwrap();
        let ct = ConstrainedTerm::new(
            Term::App(f, vec![v("x"), Term::int(0)]),
            Term::ge(v("x"), Term::int(1)),
        );
        let pins = Subst::new().bind(Var::int("z"), v("x"));
        let out = ct.step(&p("ε"), &r1, &pins, &solver).unwrap();
        assert_eq!(out.term, Term::add(v("x"), v("x")));
        let bad = Subst::new().bind(Var::int("z"), Term::int(0));
        assert!(ct.step(&p("ε"), &r1, &bad, &solver).is_err());
        let unknown = Subst::new().bind(Var::int("q"), Term::int(0));
        assert!(ct.step(&p("ε"), &r1, &unknown, &solver).is_err());
    }

    #[test]
    fn exists_term_calculation_step() {
        let solver = Solver::builtin();
        let (sig, _, _) = pow_rules();
        let body = Term::add(
            Term::mul(
                Term::int(2),
                pow(&sig, Term::int(2), Term::sub(v("n"), Term::int(1))),
            ),
            v("m"),
        );
        let cet = ConstrainedExistsTerm::new(
            vec![Var::int("m")],
            Term::ge(v("m"), Term::int(0)),
            body,
            Term::gt(v("n"), Term::int(1)),
        );
        let calc = Rule::calculation(TheoryOp::Sub);
        let out = cet
            .step(&p("1.2.2"), &calc, &Subst::new(), &solver)
            .unwrap();
        assert_eq!(
            out.inner.binder,
            vec![Var::int("m"), Var::with_index("n", 1, Sort::Int)]
        );
        assert_eq!(
            out.to_string(),
            "(exists m, n' [m >= 0 /\\ n' = n - 1]. 2 * pow(2, n') + m) [n > 1]"
        );
        assert!(out.diagnostics(&solver).is_empty());
    }

    #[test]
    fn exists_term_step_needs_every_instance() {
        let solver = Solver::builtin();
        let (sig, r1, r2) = f_r1();
        let f = sig.func("f").unwrap();
        let cet = ConstrainedExistsTerm::new(
            vec![Var::int("x")],
            Term::ge(v("x"), v("y")),
            Term::App(f, vec![v("x"), v("y")]),
            Term::ge(v("y"), Term::int(0)),
        );
        assert!(matches!(
            cet.step(&p("ε"), &r1, &Subst::new(), &solver),
            Err(StepError::Unjustified { .. })
        ));
        assert!(matches!(
            cet.step(&p("ε"), &r2, &Subst::new(), &solver),
            Err(StepError::Unjustified { .. })
        ));
        let narrower = ConstrainedExistsTerm::new(
            vec![Var::int("x")],
            Term::gt(v("x"), v("y")),
            cet.inner.term.clone(),
            cet.guard.clone(),
        );
        let out = narrower.step(&p("ε"), &r1, &Subst::new(), &solver).unwrap();
        assert_eq!(out.inner.binder, vec![Var::int("x"), Var::int("z")]);
        assert_eq!(out.inner.term, Term::add(v("x"), v("z")));
    }

    pub(crate) fn pow_goal(sig: &Signature) -> Ceq {
        Ceq::new(
            vec![Var::int("m")],
            Term::ge(v("m"), Term::int(0)),
            pow(sig, v("x"), v("n")),
            Term::add(v("n"), v("m")),
            Term::and(
                Term::eq(v("x"), Term::int(2)),
                Term::ge(v("n"), Term::int(0)),
            ),
            &Solver::builtin(),
        )
        .unwrap()
    }

    #[test]
    fn pow_derivation() {
        let solver = Solver::builtin();
        let (sig, r1, r2) = pow_rules();
        let e = pow_goal(&sig);
        assert!(e.is_well_formed(&solver));
        assert_eq!(
            e.to_string(),
            "(exists m [m >= 0]. pow(x, n) = n + m) [x = 2 /\\ n >= 0]"
        );

        let c = e.narrow(&p("ε"), &r1, &solver).unwrap().unwrap();
        assert_eq!(
            c.to_string(),
            "(exists m [m >= 0]. 1 = n + m) [x = 2 /\\ n >= 0 /\\ n < 1]"
        );
        let d = e.narrow(&p("ε"), &r2, &solver).unwrap().unwrap();
        assert_eq!(
            d.to_string(),
            "(exists m [m >= 0]. 2 * pow(2, n - 1) = n + m) [x = 2 /\\ n >= 1]"
        );

        let calc = Rule::calculation(TheoryOp::Sub);
        let d1 = d
            .step(Side::Left, &p("2.2"), &calc, &Subst::new(), &solver)
            .unwrap();
        assert_eq!(
            d1.to_string(),
            "(exists m, n' [m >= 0 /\\ n' = n - 1]. 2 * pow(2, n') = n + m) [x = 2 /\\ n >= 1]"
        );
        assert!(d1.is_well_formed(&solver));

        let h = Rule::new(
            "H1",
            e.lhs.clone(),
            e.rhs.clone(),
            Term::and(e.guard.clone(), e.eta.clone()),
            Origin::Hypothesis,
        )
        .unwrap();
        let d2 = d1
            .step(Side::Left, &p("2"), &h, &Subst::new(), &solver)
            .unwrap();
        assert_eq!(
            d2.to_string(),
            "(exists m, n', m' [m >= 0 /\\ n' = n - 1 /\\ m' >= 0]. 2 * (n' + m') = n + m) [x = 2 /\\ n >= 1]"
        );
        assert!(d2.is_well_formed(&solver));
        assert!(d
            .step(Side::Left, &p("ε"), &calc, &Subst::new(), &solver)
            .is_err());
        assert!(d
            .step(Side::Right, &p("1"), &calc, &Subst::new(), &solver)
            .is_err());
        assert!(matches!(
            d.step(Side::Left, &p("3"), &calc, &Subst::new(), &solver),
            Err(StepError::Position(_))
        ));
    }

    #[test]
    fn narrowing_r1() {
        let solver = Solver::builtin();
        let (sig, r1, r2) = f_r1();
        let f = sig.func("f").unwrap();
        let e = Ceq::plain(
            Term::App(f, vec![v("x"), Term::int(0)]),
            Term::add(v("x"), v("x")),
            Term::ge(v("x"), Term::int(1)),
        );
        let a = e.narrow(&p("ε"), &r1, &solver).unwrap().unwrap();
        assert_eq!(a.to_string(), "(exists z [z >= x]. x + z = x + x) [x >= 1]");
        let b = e.narrow(&p("ε"), &r2, &solver).unwrap().unwrap();
        assert!(solver.is_satisfiable(&b.guard).is_unsat());
    }

    #[test]
    fn well_formedness() {
        let solver = Solver::builtin();
        let (sig, _, _) = pow_rules();
        let mut e = pow_goal(&sig);
        e.guard = Term::le(v("n"), Term::int(-1));
        assert!(e.is_well_formed(&solver));
        let mut bad = e.clone();
        bad.rhs = v("n");
        assert!(!bad.is_well_formed(&solver));
        assert!(matches!(
            Ceq::new(
                vec![Var::int("m")],
                Term::ge(v("m"), Term::int(0)),
                v("n"),
                v("n"),
                Term::tt(),
                &solver
            ),
            Err(CeqError::UnusedBinder(_))
        ));
        let clash = Ceq::new(
            vec![Var::int("n")],
            Term::ge(v("n"), Term::int(0)),
            v("n"),
            Term::int(1),
            Term::ge(v("n"), Term::int(5)),
            &solver,
        )
        .unwrap();
        assert_eq!(clash.binder, vec![Var::with_index("n", 1, Sort::Int)]);
        let padded = Ceq::new(
            vec![Var::int("m")],
            Term::lt(v("m"), v("n")),
            v("m"),
            Term::int(1),
            Term::tt(),
            &solver,
        )
        .unwrap();
        assert_eq!(padded.guard, Term::eq(v("n"), v("n")));
        assert!(padded.is_well_formed(&solver));
        assert!(matches!(
            Ceq::new(
                vec![Var::int("m")],
                Term::eq(Term::mul(Term::int(2), v("m")), v("n")),
                v("m"),
                Term::int(1),
                Term::eq(v("n"), v("n")),
                &solver
            ),
            Err(CeqError::Unjustified(_))
        ));
    }

    #[test]
    fn inequalities() {
        let (sig, _, _) = pow_rules();
        let iq = Inequality {
            lhs: pow(&sig, Term::int(2), v("n")),
            rel: Relation::Ge,
            rhs: v("n"),
            guard: Term::ge(v("n"), Term::int(0)),
        };
        let e = iq.to_ceq().unwrap();
        assert_eq!(
            e.to_string(),
            "(exists m [m >= 0]. pow(2, n) = n + m) [n >= 0]"
        );
        let lt = Inequality {
            rel: Relation::Lt,
            ..iq.clone()
        };
        assert_eq!(
            lt.to_ceq().unwrap().to_string(),
            "(exists m [m >= 1]. pow(2, n) + m = n) [n >= 0]"
        );
    }

    #[test]
    fn equivalence_up_to_renaming() {
        let solver = Solver::builtin();
        let (sig, _, _) = pow_rules();
        let e = pow_goal(&sig);
        let mut f = e.clone();
        f.binder = vec![Var::int("k")];
        f.eta = Term::le(Term::int(0), v("k"));
        f.rhs = Term::add(v("n"), v("k"));
        assert!(e.equivalent_to(&f, &solver));
        f.eta = Term::ge(v("k"), Term::int(1));
        assert!(!e.equivalent_to(&f, &solver));
    }
}
