//! Constrained rewrite rules, rule-class checks and ground rewriting.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::signature::Signature;
use crate::solver::Solver;
use crate::term::{match_term, Func, Position, Sort, Subst, Term, TheoryOp, Value, Var, VarGen};
use crate::theory::{apply_op, calc_rule_parts, evaluate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {0}: sides have different sorts ({1} vs {2})")]
    SortMismatch(String, Sort, Sort),
    #[error("rule {0}: left-hand side is a variable")]
    VariableLhs(String),
    #[error("rule {0}: left-hand side is a theory term")]
    TheoryLhs(String),
    #[error("rule {0}: guard is not boolean")]
    GuardSort(String),
    #[error("rule {0}: guard is not a theory term")]
    GuardNotTheory(String),
    #[error("rule {0}: extra variable {1} has the non-theory sort {2}")]
    UnsortedExtra(String, Var, Sort),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    User,
    Calculation,
    Hypothesis,
}

/// `lhs -> rhs [guard]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: String,
    pub lhs: Term,
    pub rhs: Term,
    pub guard: Term,
    pub origin: Origin,
}

/// A violated rule-class assumption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A1: right-hand side variable absent from lhs and guard.
    ExtraNotInGuard(Var),
    /// A2: value at a lhs position.
    ValueInLhs(Position),
    /// A3: theory variable occurring more than once in the lhs.
    NonLinearTheoryVar(Var),
}

impl Violation {
    /// Whether the left-value-free transformation removes the violation.
    /// Repeated theory variables that are not guard variables stay.
    pub fn fixable(&self, rule: &Rule) -> bool {
        match self {
            Violation::NonLinearTheoryVar(v) => rule.guard.contains_var(v),
            _ => true,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ExtraNotInGuard(v) => {
                write!(f, "A1: extra variable {} does not occur in the guard", v)
            }
            Violation::ValueInLhs(p) => write!(f, "A2: value in left-hand side at position {}", p),
            Violation::NonLinearTheoryVar(v) => write!(
                f,
                "A3: theory variable {} occurs repeatedly in the left-hand side",
                v
            ),
        }
    }
}

impl Rule {
    /// A rule with the shape checks applied: same-sorted sides, boolean
    /// theory guard, and (except for calculations) a lhs that is neither a
    /// variable nor a theory term.
    pub fn new(
        id: &str,
        lhs: Term,
        rhs: Term,
        guard: Term,
        origin: Origin,
    ) -> Result<Rule, RuleError> {
        let (ls, rs) = (lhs.sort(), rhs.sort());
        if ls != rs {
            return Err(RuleError::SortMismatch(id.to_string(), ls, rs));
        }
        if guard.sort() != Sort::Bool {
            return Err(RuleError::GuardSort(id.to_string()));
        }
        if !guard.is_theory() {
            return Err(RuleError::GuardNotTheory(id.to_string()));
        }
        if lhs.is_var() {
            return Err(RuleError::VariableLhs(id.to_string()));
        }
        if origin != Origin::Calculation && lhs.is_theory() {
            return Err(RuleError::TheoryLhs(id.to_string()));
        }
        let lv = lhs.vars();
        if let Some(y) = rhs
            .vars()
            .into_iter()
            .find(|y| !lv.contains(y) && !y.sort().is_theory())
        {
            let sort = y.sort().clone();
            return Err(RuleError::UnsortedExtra(id.to_string(), y, sort));
        }
        Ok(Rule {
            id: id.to_string(),
            lhs,
            rhs,
            guard,
            origin,
        })
    }

    /// The calculation rule for `op`.
    pub fn calculation(op: TheoryOp) -> Rule {
        let (lhs, z, guard) = calc_rule_parts(op);
        Rule {
            id: format!("calc:{}", op.name()),
            lhs,
            rhs: Term::Var(z),
            guard,
            origin: Origin::Calculation,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.lhs.vars();
        self.rhs.collect_vars(&mut out);
        self.guard.collect_vars(&mut out);
        out
    }

    /// `Var(φ) ∪ (Var(r) \ Var(ℓ))`.
    pub fn logical_vars(&self) -> BTreeSet<Var> {
        let lv = self.lhs.vars();
        let mut out = self.guard.vars();
        out.extend(self.rhs.vars().into_iter().filter(|v| !lv.contains(v)));
        out
    }

    /// Variables of rhs and guard that do not occur in the lhs.
    pub fn extra_vars(&self) -> BTreeSet<Var> {
        let lv = self.lhs.vars();
        let mut out = self.guard.vars();
        self.rhs.collect_vars(&mut out);
        out.retain(|v| !lv.contains(v));
        out
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let lv = self.lhs.vars();
        let gv = self.guard.vars();
        for v in self.rhs.vars() {
            if !lv.contains(&v) && !gv.contains(&v) {
                out.push(Violation::ExtraNotInGuard(v));
            }
        }
        if self.origin != Origin::Calculation {
            for p in self.lhs.value_positions() {
                out.push(Violation::ValueInLhs(p));
            }
        }
        for v in self.lhs.vars_ordered() {
            if v.sort().is_theory() && self.lhs.var_occurrences(&v) > 1 {
                out.push(Violation::NonLinearTheoryVar(v));
            }
        }
        out
    }

    /// Left-value-free, A1-padded form: every value and every repeated
    /// guard-variable occurrence in the lhs becomes a fresh variable bound
    /// in the guard, and every unguarded extra variable `y` gains `y = y`.
    /// Rules already in the class are returned unchanged.
    pub fn normalize(&self) -> Rule {
        if self.origin == Origin::Calculation {
            return self.clone();
        }
        let mut gen = VarGen::new();
        gen.observe_all(&self.vars());
        let gv = self.guard.vars();
        let mut lhs = self.lhs.clone();
        let mut extra_guard = Vec::new();
        let mut seen = BTreeSet::new();
        for p in self.lhs.positions() {
            let sub = self.lhs.subterm_at(&p).expect("own position");
            let replace = match sub {
                Term::Val(v) => Some(gen.fresh("x", v.sort())),
                Term::Var(v) if gv.contains(v) => {
                    if seen.insert(v.clone()) {
                        None
                    } else {
                        Some(gen.fresh_like(v))
                    }
                }
                _ => None,
            };
            if let Some(x) = replace {
                extra_guard.push(Term::eq(Term::Var(x.clone()), sub.clone()));
                lhs = lhs.replace_at(&p, Term::Var(x)).expect("same sort");
            }
        }
        let known: BTreeSet<Var> = self.lhs.vars().union(&gv).cloned().collect();
        for y in self.rhs.vars_ordered() {
            if !known.contains(&y) {
                extra_guard.push(Term::eq(Term::Var(y.clone()), Term::Var(y)));
            }
        }
        if extra_guard.is_empty() {
            return self.clone();
        }
        let mut parts = if self.guard.is_true() {
            vec![]
        } else {
            vec![self.guard.clone()]
        };
        parts.extend(extra_guard);
        Rule {
            id: self.id.clone(),
            lhs,
            rhs: self.rhs.clone(),
            guard: Term::conj(parts),
            origin: self.origin,
        }
    }

    /// Copy over variables fresh w.r.t. `gen`.
    pub fn rename(&self, gen: &mut VarGen) -> (Rule, Subst) {
        let vars: Vec<Var> = {
            let mut v = self.lhs.vars_ordered();
            for w in self
                .rhs
                .vars_ordered()
                .into_iter()
                .chain(self.guard.vars_ordered())
            {
                if !v.contains(&w) {
                    v.push(w);
                }
            }
            v
        };
        let ren = gen.renaming(&vars);
        (
            Rule {
                id: self.id.clone(),
                lhs: self.lhs.apply(&ren),
                rhs: self.rhs.apply(&ren),
                guard: self.guard.apply(&ren),
                origin: self.origin,
            },
            ren,
        )
    }

    /// Equal up to a renaming of variables.
    pub fn is_variant_of(&self, other: &Rule) -> bool {
        let pack = |r: &Rule| (r.lhs.clone(), r.rhs.clone(), r.guard.clone());
        let (l1, r1, g1) = pack(self);
        let (l2, r2, g2) = pack(other);
        let mut s = Subst::new();
        crate::term::match_into(&l1, &l2, &mut s)
            && crate::term::match_into(&r1, &r2, &mut s)
            && crate::term::match_into(&g1, &g2, &mut s)
            && {
                let mut back = Subst::new();
                crate::term::match_into(&l2, &l1, &mut back)
                    && crate::term::match_into(&r2, &r1, &mut back)
                    && crate::term::match_into(&g2, &g1, &mut back)
            }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)?;
        if !self.guard.is_true() {
            write!(f, " [{}]", self.guard)?;
        }
        Ok(())
    }
}

/// One ground rewrite step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundStep {
    pub reduct: Term,
    pub rule: String,
    pub position: Position,
    pub subst: Subst,
}

/// A rule instance found at a position, before extra variables are fixed.
#[derive(Debug, Clone)]
struct Redex<'a> {
    rule: &'a Rule,
    position: Position,
    gamma: Subst,
    extras: Vec<Var>,
    guard: Term,
}

/// Error of [`Lctrs::normalize_ground`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step limit {limit} exceeded; reached {term}")]
pub struct LimitExceeded {
    pub limit: usize,
    pub term: Term,
}

/// A logically constrained rewrite system over the integer theory.
#[derive(Debug, Clone, Default)]
pub struct Lctrs {
    pub signature: Signature,
    pub rules: Vec<Rule>,
    calc: Vec<Rule>,
}

impl Lctrs {
    pub fn new(signature: Signature, rules: Vec<Rule>) -> Lctrs {
        Lctrs {
            signature,
            rules,
            calc: TheoryOp::ALL
                .iter()
                .map(|&op| Rule::calculation(op))
                .collect(),
        }
    }

    /// Rules normalised into the left-value-free class.
    pub fn normalized(&self) -> Lctrs {
        Lctrs {
            signature: self.signature.clone(),
            rules: self.rules.iter().map(Rule::normalize).collect(),
            calc: self.calc.clone(),
        }
    }

    pub fn calc_rules(&self) -> &[Rule] {
        &self.calc
    }

    pub fn calc_rule(&self, op: TheoryOp) -> &Rule {
        self.calc
            .iter()
            .find(|r| r.lhs.root() == Some(&Func::Theory(op)))
            .expect("all operators")
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().chain(&self.calc).find(|r| r.id == id)
    }

    /// Roots of user and calculation lhs.
    pub fn defined(&self) -> BTreeSet<Func> {
        let mut out: BTreeSet<Func> = TheoryOp::ALL.iter().map(|&op| Func::Theory(op)).collect();
        out.extend(self.rules.iter().filter_map(|r| r.lhs.root().cloned()));
        out
    }

    pub fn is_defined(&self, f: &Func) -> bool {
        match f {
            Func::Theory(_) => true,
            Func::User(_) => self.rules.iter().any(|r| r.lhs.root() == Some(f)),
        }
    }

    /// (defined symbols, constructor symbols); values are constructors too.
    pub fn symbol_roles(&self) -> (BTreeSet<Func>, BTreeSet<Func>) {
        let defined = self.defined();
        let constructors = self
            .signature
            .symbols()
            .map(|d| Func::User(d.clone()))
            .filter(|f| !defined.contains(f))
            .collect();
        (defined, constructors)
    }

    pub fn is_constructor_term(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) | Term::Val(_) => true,
            Term::App(f, args) => {
                !self.is_defined(f) && args.iter().all(|a| self.is_constructor_term(a))
            }
        }
    }

    /// `f(t1..tn)` with `f` defined and constructor arguments.
    pub fn is_basic(&self, t: &Term) -> bool {
        match t {
            Term::App(f, args) => {
                self.is_defined(f) && args.iter().all(|a| self.is_constructor_term(a))
            }
            _ => false,
        }
    }

    /// Rule instances applicable at `pos` of ground `t`, calculations first.
    fn redexes_at<'a>(&'a self, t: &Term, pos: &Position) -> Vec<Redex<'a>> {
        let sub = t.subterm_at(pos).expect("valid position");
        let mut out = Vec::new();
        if let Term::App(Func::Theory(op), args) = sub {
            if args.iter().all(Term::is_value) {
                let rule = self.calc_rule(*op);
                let vals: Vec<Value> = args.iter().map(|a| a.as_value().unwrap().clone()).collect();
                if let Ok(v) = apply_op(*op, &vals) {
                    let mut gamma = match_term(&rule.lhs, sub).expect("calculation pattern");
                    gamma
                        .insert(rule.rhs.as_var().unwrap().clone(), Term::Val(v))
                        .expect("sorted");
                    out.push(Redex {
                        rule,
                        position: pos.clone(),
                        gamma,
                        extras: vec![],
                        guard: Term::tt(),
                    });
                }
            }
            return out;
        }
        for rule in &self.rules {
            let Some(gamma) = match_term(&rule.lhs, sub) else {
                continue;
            };
            let lv = rule.logical_vars();
            if lv
                .iter()
                .any(|v| gamma.get(v).is_some_and(|t| !t.is_value()))
            {
                continue;
            }
            let extras: Vec<Var> = rule.extra_vars().into_iter().collect();
            let guard = rule.guard.apply(&gamma);
            out.push(Redex {
                rule,
                position: pos.clone(),
                gamma,
                extras,
                guard,
            });
        }
        out
    }

    fn redexes<'a>(&'a self, t: &Term, innermost: bool) -> Vec<Redex<'a>> {
        let positions = if innermost {
            t.positions_innermost()
        } else {
            t.positions()
        };
        positions
            .iter()
            .flat_map(|p| self.redexes_at(t, p))
            .collect()
    }

    fn step_of(t: &Term, r: &Redex<'_>, extra: &Subst) -> GroundStep {
        let subst = r.gamma.then(extra);
        let reduct = t
            .replace_at(&r.position, r.rule.rhs.apply(&subst))
            .expect("same sort");
        GroundStep {
            reduct,
            rule: r.rule.id.clone(),
            position: r.position.clone(),
            subst,
        }
    }

    /// All one-step reducts of ground `t` whose extra variables take values
    /// in `[-b, b]`.
    pub fn ground_steps_within(&self, t: &Term, b: i64) -> Vec<GroundStep> {
        let mut out = Vec::new();
        for r in self.redexes(t, false) {
            for extra in assignments(&r.extras, b) {
                if holds(&r.guard, &extra) {
                    out.push(Lctrs::step_of(t, &r, &extra));
                }
            }
        }
        out
    }

    /// Lazy stream of all one-step reducts of ground `t`. Extra variables
    /// are enumerated by ascending magnitude, interleaved across redexes.
    pub fn ground_steps<'a>(&'a self, t: &Term, solver: &'a Solver) -> GroundSteps<'a> {
        let redexes = self
            .redexes(t, false)
            .into_iter()
            .filter(|r| r.extras.is_empty() || !solver.is_satisfiable(&r.guard).is_unsat())
            .map(|r| (r, true))
            .collect();
        GroundSteps {
            term: t.clone(),
            redexes,
            layer: 0,
            buffer: Vec::new(),
            solver,
        }
    }

    /// First step under leftmost-innermost order with calculations first
    /// and smallest extra-variable witnesses.
    pub fn first_step(&self, t: &Term, solver: &Solver) -> Option<GroundStep> {
        for r in self.redexes(t, true) {
            if r.extras.is_empty() {
                if holds(&r.guard, &Subst::new()) {
                    return Some(Lctrs::step_of(t, &r, &Subst::new()));
                }
                continue;
            }
            let sat = solver.is_satisfiable(&r.guard);
            if sat.is_unsat() {
                continue;
            }
            // A solver witness bounds the layers that need searching.
            let limit = sat
                .witness
                .as_ref()
                .map(|w| {
                    w.iter()
                        .filter_map(|(_, t)| t.as_value().and_then(|v| v.as_int()).map(|i| i.abs()))
                        .max()
                        .and_then(|m| num_traits::ToPrimitive::to_i64(&m))
                        .unwrap_or(0)
                })
                .unwrap_or(16);
            for k in 0..=limit {
                if let Some(extra) = layer(&r.extras, k).into_iter().find(|e| holds(&r.guard, e)) {
                    return Some(Lctrs::step_of(t, &r, &extra));
                }
            }
        }
        None
    }

    /// Rewrites to normal form under the fixed strategy.
    pub fn normalize_ground(
        &self,
        t: &Term,
        limit: usize,
        solver: &Solver,
    ) -> Result<(Term, usize), LimitExceeded> {
        let mut cur = t.clone();
        for steps in 0..=limit {
            match self.first_step(&cur, solver) {
                None => return Ok((cur, steps)),
                Some(_) if steps == limit => break,
                Some(s) => cur = s.reduct,
            }
        }
        Err(LimitExceeded { limit, term: cur })
    }
}

/// Lazy ground-step stream; see [`Lctrs::ground_steps`].
pub struct GroundSteps<'a> {
    term: Term,
    redexes: Vec<(Redex<'a>, bool)>,
    layer: i64,
    buffer: Vec<GroundStep>,
    solver: &'a Solver,
}

impl Iterator for GroundSteps<'_> {
    type Item = GroundStep;

    fn next(&mut self) -> Option<GroundStep> {
        loop {
            if let Some(s) = self.buffer.pop() {
                return Some(s);
            }
            if self.redexes.iter().all(|(_, live)| !live) {
                return None;
            }
            let k = self.layer;
            let mut found = Vec::new();
            for (r, live) in self.redexes.iter_mut() {
                if !*live {
                    continue;
                }
                for extra in layer(&r.extras, k) {
                    if holds(&r.guard, &extra) {
                        found.push(Lctrs::step_of(&self.term, r, &extra));
                    }
                }
                *live = !r.extras.is_empty() && has_beyond(self.solver, &r.guard, &r.extras, k);
            }
            self.layer += 1;
            found.reverse();
            self.buffer = found;
        }
    }
}

/// Whether `guard` has solutions with some extra variable beyond `±k`.
fn has_beyond(solver: &Solver, guard: &Term, extras: &[Var], k: i64) -> bool {
    let ints: Vec<&Var> = extras.iter().filter(|v| *v.sort() == Sort::Int).collect();
    if ints.is_empty() {
        return false;
    }
    let outside = Term::disj(ints.iter().map(|v| {
        let x = Term::Var((*v).clone());
        Term::or(
            Term::gt(x.clone(), Term::int(k)),
            Term::lt(x, Term::int(-k)),
        )
    }));
    !solver
        .is_satisfiable(&Term::and(guard.clone(), outside))
        .is_unsat()
}

fn holds(guard: &Term, extra: &Subst) -> bool {
    matches!(evaluate(&guard.apply(extra)), Ok(Value::Bool(true)))
}

/// Assignments to `vars` with values in `[-b, b]`.
pub fn assignments(vars: &[Var], b: i64) -> Vec<Subst> {
    let mut out = vec![Subst::new()];
    for v in vars {
        let vals: Vec<Term> = match v.sort() {
            Sort::Bool => vec![Term::ff(), Term::tt()],
            _ => (-b..=b).map(Term::int).collect(),
        };
        out = out
            .into_iter()
            .flat_map(|s| {
                vals.iter()
                    .map(move |x| s.clone().bind(v.clone(), x.clone()))
            })
            .collect();
    }
    out
}

/// Assignments whose largest integer magnitude is exactly `k` (booleans
/// belong to layer 0), ordered by magnitude then sign.
fn layer(vars: &[Var], k: i64) -> Vec<Subst> {
    let ints = vars.iter().filter(|v| *v.sort() == Sort::Int).count();
    if ints == 0 {
        return if k == 0 { assignments(vars, 0) } else { vec![] };
    }
    let ordered: Vec<i64> = (0..=k)
        .flat_map(|i| if i == 0 { vec![0] } else { vec![i, -i] })
        .collect();
    let mut out = vec![Subst::new()];
    for v in vars {
        let vals: Vec<Term> = match v.sort() {
            Sort::Bool => vec![Term::ff(), Term::tt()],
            _ => ordered.iter().map(|&i| Term::int(i)).collect(),
        };
        out = out
            .into_iter()
            .flat_map(|s| {
                vals.iter()
                    .map(move |x| s.clone().bind(v.clone(), x.clone()))
            })
            .collect();
    }
    out.retain(|s| {
        s.iter()
            .filter_map(|(_, t)| t.as_value().and_then(Value::as_int).map(|i| i.abs()))
            .max()
            .is_some_and(|m| m == k.into())
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::FuncDecl;

    fn v(n: &str) -> Term {
        Term::Var(Var::int(n))
    }

    fn pow_rules() -> (Lctrs, Func) {
        let mut sig = Signature::standard();
        let pow = Func::User(
            sig.declare("pow", vec![Sort::Int, Sort::Int], Sort::Int)
                .unwrap(),
        );
        let app = |a: Term, b: Term| Term::app(pow.clone(), vec![a, b]).unwrap();
        let rules = vec![
            Rule::new(
                "R1",
                app(v("x"), v("y")),
                Term::int(1),
                Term::lt(v("y"), Term::int(1)),
                Origin::User,
            )
            .unwrap(),
            Rule::new(
                "R2",
                app(v("x"), v("y")),
                Term::mul(v("x"), app(v("x"), Term::sub(v("y"), Term::int(1)))),
                Term::ge(v("y"), Term::int(1)),
                Origin::User,
            )
            .unwrap(),
        ];
        (Lctrs::new(sig, rules), pow)
    }

    #[test]
    fn pow_two_three_takes_ten_steps() {
        let (r, pow) = pow_rules();
        let t = Term::app(pow, vec![Term::int(2), Term::int(3)]).unwrap();
        let (nf, steps) = r.normalize_ground(&t, 64, &Solver::builtin()).unwrap();
        assert_eq!((nf, steps), (Term::int(8), 10));
        let (nf, steps) = r
            .normalize_ground(&Term::int(7), 64, &Solver::builtin())
            .unwrap();
        assert_eq!((nf, steps), (Term::int(7), 0));
        let (nf, steps) = r
            .normalize_ground(
                &Term::sub(Term::int(3), Term::int(1)),
                64,
                &Solver::builtin(),
            )
            .unwrap();
        assert_eq!((nf, steps), (Term::int(2), 1));
    }

    #[test]
    fn ground_step_contains_recursive_case() {
        let (r, pow) = pow_rules();
        let t = Term::app(pow.clone(), vec![Term::int(2), Term::int(3)]).unwrap();
        let expect = Term::mul(
            Term::int(2),
            Term::app(
                pow,
                vec![Term::int(2), Term::sub(Term::int(3), Term::int(1))],
            )
            .unwrap(),
        );
        let steps: Vec<_> = r.ground_steps(&t, &Solver::builtin()).collect();
        assert!(steps.iter().any(|s| s.reduct == expect));
        assert!(r
            .ground_steps(&Term::int(8), &Solver::builtin())
            .next()
            .is_none());
    }

    #[test]
    fn extra_variable_stream_starts_at_smallest_witness() {
        let mut sig = Signature::standard();
        let f = Func::User(
            sig.declare("f", vec![Sort::Int, Sort::Int], Sort::Int)
                .unwrap(),
        );
        let rule = Rule::new(
            "R1",
            Term::app(f.clone(), vec![v("x"), v("y")]).unwrap(),
            Term::add(v("x"), v("z")),
            Term::and(Term::gt(v("x"), v("y")), Term::ge(v("z"), v("x"))),
            Origin::User,
        )
        .unwrap();
        let r = Lctrs::new(sig, vec![rule]);
        let t = Term::app(f, vec![Term::int(1), Term::int(0)]).unwrap();
        let solver = Solver::builtin();
        let first: Vec<Term> = r
            .ground_steps(&t, &solver)
            .take(3)
            .map(|s| s.reduct)
            .collect();
        assert_eq!(
            first,
            vec![
                Term::add(Term::int(1), Term::int(1)),
                Term::add(Term::int(1), Term::int(2)),
                Term::add(Term::int(1), Term::int(3))
            ]
        );
    }

    #[test]
    fn finite_extra_streams_terminate() {
        let mut sig = Signature::standard();
        let g = Func::User(sig.declare("g", vec![Sort::Int], Sort::Int).unwrap());
        let rule = Rule::new(
            "R1",
            Term::app(g.clone(), vec![v("x")]).unwrap(),
            v("z"),
            Term::and(
                Term::ge(v("z"), v("x")),
                Term::le(v("z"), Term::add(v("x"), Term::int(1))),
            ),
            Origin::User,
        )
        .unwrap();
        let r = Lctrs::new(sig, vec![rule]);
        let t = Term::app(g, vec![Term::int(4)]).unwrap();
        assert_eq!(r.ground_steps(&t, &Solver::builtin()).count(), 2);
    }

    #[test]
    fn logical_variables() {
        let (r, _) = pow_rules();
        assert_eq!(
            r.rules[0].logical_vars(),
            [Var::int("y")].into_iter().collect()
        );
        let fd = FuncDecl::new("f", vec![Sort::Int], Sort::Int);
        let rule = Rule::new(
            "R1",
            Term::app(Func::User(fd), vec![v("x")]).unwrap(),
            v("x"),
            Term::tt(),
            Origin::User,
        )
        .unwrap();
        assert!(rule.logical_vars().is_empty());
    }

    #[test]
    fn normalization() {
        let mut sig = Signature::standard();
        let pow = Func::User(
            sig.declare("pow", vec![Sort::Int, Sort::Int], Sort::Int)
                .unwrap(),
        );
        let rule = Rule::new(
            "H1",
            Term::app(pow.clone(), vec![Term::int(2), v("n")]).unwrap(),
            Term::add(v("n"), v("m")),
            Term::and(
                Term::ge(v("n"), Term::int(0)),
                Term::ge(v("m"), Term::int(0)),
            ),
            Origin::Hypothesis,
        )
        .unwrap();
        let n = rule.normalize();
        assert_eq!(n.lhs, Term::app(pow, vec![v("x"), v("n")]).unwrap());
        assert!(n
            .guard
            .conjuncts()
            .contains(&Term::eq(v("x"), Term::int(2))));
        assert!(n.violations().is_empty());
        let (r, _) = pow_rules();
        assert_eq!(r.rules[1].normalize(), r.rules[1]);

        let g = Func::User(sig.declare("g", vec![Sort::Int], Sort::Int).unwrap());
        let h = Func::User(
            sig.declare("h", vec![Sort::Int, Sort::Int], Sort::Int)
                .unwrap(),
        );
        let rule = Rule::new(
            "R1",
            Term::app(g, vec![v("x")]).unwrap(),
            Term::app(h, vec![v("x"), v("y")]).unwrap(),
            Term::tt(),
            Origin::User,
        )
        .unwrap();
        assert_eq!(rule.normalize().guard, Term::eq(v("y"), v("y")));

        let nat = sig.declare_sort("Nat").unwrap();
        let k = Func::User(sig.declare("k", vec![nat.clone()], nat.clone()).unwrap());
        let (a, b) = (
            Term::Var(Var::new("a", nat.clone())),
            Term::Var(Var::new("b", nat)),
        );
        let err = Rule::new(
            "R2",
            Term::app(k.clone(), vec![a]).unwrap(),
            Term::app(k, vec![b]).unwrap(),
            Term::tt(),
            Origin::User,
        );
        assert_eq!(
            err.unwrap_err().to_string(),
            "rule R2: extra variable b has the non-theory sort Nat"
        );
    }

    #[test]
    fn basic_terms() {
        let (r, pow) = pow_rules();
        assert!(r.is_basic(&Term::app(pow.clone(), vec![Term::int(2), v("n")]).unwrap()));
        let inner = Term::app(pow.clone(), vec![Term::int(2), Term::int(1)]).unwrap();
        assert!(!r.is_basic(&Term::app(pow, vec![inner, v("n")]).unwrap()));
        assert!(!r.is_basic(&Term::int(3)));
    }
}
