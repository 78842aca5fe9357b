//! Bounded ground truth: instance enumeration, joinability search,
//! inductive-theorem checking at a bound, and executable checks of the
//! soundness of constrained steps and of the rule normalisation.
//!
//! Everything here works on ground terms with the one-step relation of
//! [`Lctrs::ground_steps_within`], never on the symbolic machinery it is
//! used to test.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::constrained::{Ceq, ConstrainedExistsTerm, ConstrainedTerm, ExistsTerm};
use crate::lctrs::{assignments, Lctrs, Rule};
use crate::ri::session::SimplificationStep;
use crate::term::{match_into, Func, Position, Sort, Subst, Term, Var};
use crate::theory::{evaluate_under, values_of};
use crate::Value;

/// Search limits. Free variables range over `[-values, values]`, binder
/// witnesses over `[-witnesses, witnesses]`, conversions are searched to
/// `depth` levels from each end, and at most `steps` reducts of a term are
/// followed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub values: i64,
    pub witnesses: i64,
    pub depth: usize,
    pub steps: usize,
}

impl Default for Bound {
    fn default() -> Bound {
        Bound {
            values: 3,
            witnesses: 16,
            depth: 12,
            steps: 64,
        }
    }
}

impl Bound {
    pub fn with_values(values: i64) -> Bound {
        Bound {
            values,
            ..Bound::default()
        }
    }

    pub fn is_valid(&self) -> bool {
        self.values >= 1 && self.witnesses >= 0 && self.depth > 0 && self.steps > 0
    }
}

fn holds(phi: &Term, s: &Subst) -> bool {
    matches!(evaluate_under(phi, s), Ok(Value::Bool(true)))
}

/// Assignments to `vars` by ascending largest magnitude, up to `b`.
fn by_magnitude(vars: &[Var], b: i64) -> impl Iterator<Item = Subst> + '_ {
    (0..=b).flat_map(move |k| {
        assignments(vars, k).into_iter().filter(move |s| {
            let top = s
                .iter()
                .filter_map(|(_, t)| {
                    t.as_value()
                        .and_then(Value::as_int)
                        .map(|i| i.magnitude().clone())
                })
                .max()
                .unwrap_or_default();
            top == k.unsigned_abs().into()
        })
    })
}

/// Bounded oracle over a rewrite system. Hypothesis rules are passed in as
/// part of `system` where needed.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub system: Lctrs,
    pub bound: Bound,
}

impl Oracle {
    pub fn new(system: Lctrs, bound: Bound) -> Oracle {
        Oracle { system, bound }
    }

    /// Ground constructor terms of `sort` of depth at most 2.
    pub fn pool(&self, sort: &Sort) -> Vec<Term> {
        const CAP: usize = 64;
        let defined = self.system.defined();
        let ctors: Vec<Func> = self
            .system
            .signature
            .symbols_of_sort(sort)
            .map(|d| Func::User(d.clone()))
            .filter(|f| !defined.contains(f))
            .collect();
        let leaf = |s: &Sort| -> Vec<Term> {
            if s.is_theory() {
                values_of(s, 1).into_iter().map(Term::Val).collect()
            } else {
                self.system
                    .signature
                    .symbols_of_sort(s)
                    .filter(|d| d.args.is_empty() && !defined.contains(&Func::User((*d).clone())))
                    .map(|d| Term::App(Func::User(d.clone()), vec![]))
                    .collect()
            }
        };
        let mut out = Vec::new();
        for f in &ctors {
            let mut tuples = vec![vec![]];
            for s in f.arg_sorts() {
                let opts = leaf(s);
                tuples = tuples
                    .into_iter()
                    .flat_map(|t: Vec<Term>| {
                        opts.iter().map(move |o| {
                            let mut t = t.clone();
                            t.push(o.clone());
                            t
                        })
                    })
                    .collect();
            }
            for args in tuples {
                out.push(Term::App(f.clone(), args));
            }
        }
        out.sort_by_key(Term::size);
        out.truncate(CAP);
        out
    }

    fn domain(&self, v: &Var) -> Vec<Term> {
        if v.sort().is_theory() {
            values_of(v.sort(), self.bound.values)
                .into_iter()
                .map(Term::Val)
                .collect()
        } else {
            self.pool(v.sort())
        }
    }

    /// Ground substitutions for `vars` respecting `phi`, in enumeration
    /// order (first variable outermost).
    pub fn substitutions(&self, vars: &[Var], phi: &Term) -> Vec<Subst> {
        let mut out = vec![Subst::new()];
        for v in vars {
            let dom = self.domain(v);
            out = out
                .into_iter()
                .flat_map(|s| {
                    dom.iter()
                        .map(move |x| s.clone().bind(v.clone(), x.clone()))
                })
                .collect();
        }
        out.retain(|s| holds(phi, s));
        out
    }

    pub fn ginst_term(&self, ct: &ConstrainedTerm) -> Vec<Term> {
        let vars: Vec<Var> = ct.term.vars().union(&ct.guard.vars()).cloned().collect();
        let mut out: Vec<Term> = self
            .substitutions(&vars, &ct.guard)
            .into_iter()
            .map(|g| ct.term.apply(&g))
            .collect();
        out.dedup();
        out
    }

    /// Closed instances `∃x⃗:ηγ. sγ` of an ∃-term over its free variables.
    pub fn ginst_exists(&self, et: &ExistsTerm) -> Vec<ExistsTerm> {
        let mut free: BTreeSet<Var> = et.term.vars().union(&et.eta.vars()).cloned().collect();
        for x in &et.binder {
            free.remove(x);
        }
        let vars: Vec<Var> = free.into_iter().collect();
        self.substitutions(&vars, &Term::tt())
            .into_iter()
            .map(|g| ExistsTerm {
                binder: et.binder.clone(),
                eta: et.eta.apply(&g),
                term: et.term.apply(&g),
            })
            .collect()
    }

    pub fn ginst_constrained_exists(&self, ct: &ConstrainedExistsTerm) -> Vec<ExistsTerm> {
        let et = &ct.inner;
        let mut free: BTreeSet<Var> = et.term.vars().union(&et.eta.vars()).cloned().collect();
        ct.guard.collect_vars(&mut free);
        for x in &et.binder {
            free.remove(x);
        }
        let vars: Vec<Var> = free.into_iter().collect();
        self.substitutions(&vars, &ct.guard)
            .into_iter()
            .map(|g| ExistsTerm {
                binder: et.binder.clone(),
                eta: et.eta.apply(&g),
                term: et.term.apply(&g),
            })
            .collect()
    }

    /// Closed ∃-equations `∃x⃗:ηγ. sγ ≈ tγ` for `γ` respecting the guard,
    /// with the substitutions that produced them.
    pub fn ginst_ceq(&self, eq: &Ceq) -> Vec<(Subst, Ceq)> {
        let vars: Vec<Var> = eq.free_vars().into_iter().collect();
        self.substitutions(&vars, &eq.guard)
            .into_iter()
            .map(|g| {
                let inst = Ceq {
                    binder: eq.binder.clone(),
                    eta: eq.eta.apply(&g),
                    lhs: eq.lhs.apply(&g),
                    rhs: eq.rhs.apply(&g),
                    guard: Term::tt(),
                };
                (g, inst)
            })
            .collect()
    }

    /// One-step reducts of a ground term, extras in `[-values, values]`.
    pub fn successors(&self, t: &Term) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        for s in self.system.ground_steps_within(t, self.bound.values) {
            if !out.contains(&s.reduct) {
                out.push(s.reduct);
            }
            if out.len() >= self.bound.steps {
                break;
            }
        }
        out
    }

    /// Whether `s` and `t` have a common reduct within the depth limit.
    pub fn joinable(&self, s: &Term, t: &Term) -> bool {
        if s == t {
            return true;
        }
        let mut seen = [HashSet::from([s.clone()]), HashSet::from([t.clone()])];
        let mut frontier = [vec![s.clone()], vec![t.clone()]];
        for _ in 0..self.bound.depth {
            for side in 0..2 {
                let mut next = Vec::new();
                for u in &frontier[side] {
                    for w in self.successors(u) {
                        if seen[1 - side].contains(&w) {
                            return true;
                        }
                        if seen[side].insert(w.clone()) {
                            next.push(w);
                        }
                    }
                }
                frontier[side] = next;
            }
            if frontier.iter().all(Vec::is_empty) {
                break;
            }
        }
        false
    }

    /// Reachable terms without reducts, in discovery order.
    pub fn normal_forms(&self, t: &Term) -> Vec<Term> {
        let mut out = Vec::new();
        let mut seen = HashSet::from([t.clone()]);
        let mut queue = VecDeque::from([(t.clone(), 0)]);
        while let Some((u, d)) = queue.pop_front() {
            let next = self.successors(&u);
            if next.is_empty() {
                out.push(u);
                continue;
            }
            if d >= self.bound.depth {
                continue;
            }
            for w in next {
                if seen.insert(w.clone()) {
                    queue.push_back((w, d + 1));
                }
            }
        }
        out
    }

    /// Whether a ground term has no reduct at the bound.
    pub fn is_normal(&self, t: &Term) -> bool {
        self.successors(t).is_empty()
    }

    /// For every ground instance of the free variables respecting the
    /// guard (values in `[-values, values]`, normal forms only), searches
    /// binder values in `[-witnesses, witnesses]` respecting `η` under which
    /// the sides are joinable.
    pub fn inductive_theorem(&self, eq: &Ceq) -> InductiveReport {
        let mut rows = Vec::new();
        for (gamma, inst) in self.ginst_ceq(eq) {
            if !gamma.iter().all(|(_, t)| self.is_normal(t)) {
                continue;
            }
            let witness = by_magnitude(&inst.binder, self.bound.witnesses)
                .filter(|th| holds(&inst.eta, th))
                .find(|th| self.joinable(&inst.lhs.apply(th), &inst.rhs.apply(th)));
            match witness {
                Some(theta) => rows.push(Instance { gamma, theta }),
                None => {
                    return InductiveReport {
                        equation: eq.to_string(),
                        bound: self.bound,
                        verdict: InductiveVerdict::Refuted {
                            lhs_normal_forms: self.normal_forms(&inst.lhs),
                            rhs_normal_forms: self.normal_forms(&inst.rhs),
                            counterexample: gamma,
                        },
                        instances: rows,
                    }
                }
            }
        }
        InductiveReport {
            equation: eq.to_string(),
            bound: self.bound,
            verdict: InductiveVerdict::HoldsAtBound,
            instances: rows,
        }
    }

    /// Both soundness statements for one recorded step `source ⇀ target`
    /// by `rule` at `pos`:
    ///
    /// 1. every `θ` respecting `φ ∧ η` of the source has a `σ` respecting
    ///    `φ′ ∧ η′` of the target, agreeing with `θ` on shared variables,
    ///    with `sθ → tσ` by the rule at `pos`;
    /// 2. every such `σ` of the target has a corresponding `θ`.
    pub fn check_step(&self, step: &CeStep) -> SoundnessReport {
        let mut system = self.system.clone();
        if system.rule(&step.rule.id).is_none() {
            system.rules.push(step.rule.clone());
        }
        let oracle = Oracle::new(system, self.bound);
        let src = &step.source;
        let dst = &step.target;
        let src_phi = Term::and_simple(src.guard.clone(), src.inner.eta.clone());
        let dst_phi = Term::and_simple(dst.guard.clone(), dst.inner.eta.clone());
        let src_vars = vars_of(src);
        let dst_vars = vars_of(dst);
        let mut report = SoundnessReport::default();

        for theta in oracle.substitutions(&src_vars, &src_phi) {
            report.checked_forward += 1;
            let s = src.inner.term.apply(&theta);
            let shared = theta.restrict(&dst_vars.iter().cloned().collect());
            let pattern = dst.inner.term.apply(&shared);
            let found = oracle.rule_steps(&s, step).into_iter().any(|u| {
                let mut sigma = shared.clone();
                if !match_into(&pattern, &u, &mut sigma) {
                    return false;
                }
                let rest: Vec<Var> = dst_vars
                    .iter()
                    .filter(|v| !sigma.contains(v))
                    .cloned()
                    .collect();
                let ok = by_magnitude(&rest, self.bound.witnesses)
                    .any(|extra| holds(&dst_phi, &sigma.then(&extra)));
                ok
            });
            if !found {
                report.failure = Some(SoundnessFailure {
                    statement: 1,
                    subst: theta,
                    term: s,
                });
                return report;
            }
        }

        for sigma in oracle.substitutions(&dst_vars, &dst_phi) {
            report.checked_backward += 1;
            let t = dst.inner.term.apply(&sigma);
            let shared = sigma.restrict(&src_vars.iter().cloned().collect());
            let rest: Vec<Var> = src_vars
                .iter()
                .filter(|v| !shared.contains(v))
                .cloned()
                .collect();
            let found = by_magnitude(&rest, self.bound.witnesses).any(|extra| {
                let theta = shared.then(&extra);
                holds(&src_phi, &theta)
                    && oracle
                        .rule_steps(&src.inner.term.apply(&theta), step)
                        .contains(&t)
            });
            if !found {
                report.failure = Some(SoundnessFailure {
                    statement: 2,
                    subst: sigma,
                    term: t,
                });
                return report;
            }
        }
        report
    }

    fn rule_steps(&self, s: &Term, step: &CeStep) -> Vec<Term> {
        self.system
            .ground_steps_within(s, self.bound.witnesses)
            .into_iter()
            .filter(|g| g.rule == step.rule.id && g.position == step.pos)
            .map(|g| g.reduct)
            .collect()
    }

    /// Compares the root reducts of `original` and `transformed` on
    /// `samples` random ground terms with the root symbol of the lhs.
    pub fn check_transform(
        &self,
        original: &Rule,
        transformed: &Rule,
        samples: usize,
        seed: u64,
    ) -> TransformReport {
        let one = |r: &Rule| Lctrs::new(self.system.signature.clone(), vec![r.clone()]);
        let (a, b) = (one(original), one(transformed));
        let Some(Term::App(f, _)) = Some(&original.lhs) else {
            return TransformReport {
                samples: 0,
                mismatch: None,
            };
        };
        let mut rng = StdRng::seed_from_u64(seed);
        let doms: Vec<Vec<Term>> = f
            .arg_sorts()
            .iter()
            .map(|s| {
                if s.is_theory() {
                    values_of(s, self.bound.values)
                        .into_iter()
                        .map(Term::Val)
                        .collect()
                } else {
                    self.pool(s)
                }
            })
            .collect();
        if doms.iter().any(Vec::is_empty) {
            return TransformReport {
                samples: 0,
                mismatch: None,
            };
        }
        let reducts = |sys: &Lctrs, t: &Term| -> BTreeSet<Term> {
            sys.ground_steps_within(t, self.bound.values)
                .into_iter()
                .filter(|g| g.position.is_root())
                .map(|g| g.reduct)
                .collect()
        };
        for _ in 0..samples {
            let args: Vec<Term> = doms
                .iter()
                .map(|d| d[rng.gen_range(0..d.len())].clone())
                .collect();
            let t = Term::App(f.clone(), args);
            let (ra, rb) = (reducts(&a, &t), reducts(&b, &t));
            if ra != rb {
                return TransformReport {
                    samples,
                    mismatch: Some((t, ra.into_iter().collect(), rb.into_iter().collect())),
                };
            }
        }
        TransformReport {
            samples,
            mismatch: None,
        }
    }

    pub fn check_rule_transform(&self, rule: &Rule, samples: usize, seed: u64) -> TransformReport {
        self.check_transform(rule, &rule.normalize(), samples, seed)
    }
}

fn vars_of(t: &ConstrainedExistsTerm) -> Vec<Var> {
    let mut out: BTreeSet<Var> = t.inner.term.vars();
    t.inner.eta.collect_vars(&mut out);
    t.guard.collect_vars(&mut out);
    out.extend(t.inner.binder.iter().cloned());
    out.into_iter().collect()
}

/// A recorded step `source ⇀ target` by `rule` at `pos`.
#[derive(Debug, Clone)]
pub struct CeStep {
    pub source: ConstrainedExistsTerm,
    pub target: ConstrainedExistsTerm,
    pub rule: Rule,
    pub pos: Position,
}

impl From<&SimplificationStep> for CeStep {
    fn from(s: &SimplificationStep) -> CeStep {
        let mut pos = vec![s.side.index()];
        pos.extend(s.pos.0.iter().copied());
        CeStep {
            source: s.before.as_exists_term(),
            target: s.after.as_exists_term(),
            rule: s.rule.clone(),
            pos: Position(pos),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SoundnessFailure {
    pub statement: u8,
    pub subst: Subst,
    pub term: Term,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub checked_forward: usize,
    pub checked_backward: usize,
    pub failure: Option<SoundnessFailure>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(
                f,
                "passed ({} source and {} target instances)",
                self.checked_forward, self.checked_backward
            ),
            Some(e) => write!(
                f,
                "statement {} fails at {} on {}",
                e.statement, e.subst, e.term
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub gamma: Subst,
    pub theta: Subst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum InductiveVerdict {
    HoldsAtBound,
    Refuted {
        counterexample: Subst,
        lhs_normal_forms: Vec<Term>,
        rhs_normal_forms: Vec<Term>,
    },
}

/// Outcome of [`Oracle::inductive_theorem`] with the witnesses found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InductiveReport {
    pub equation: String,
    pub bound: Bound,
    pub verdict: InductiveVerdict,
    pub instances: Vec<Instance>,
}

impl InductiveReport {
    pub fn holds(&self) -> bool {
        self.verdict == InductiveVerdict::HoldsAtBound
    }
}

impl fmt::Display for InductiveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "equation: {}", self.equation)?;
        writeln!(
            f,
            "bound: values [-{0}, {0}], witnesses [-{1}, {1}], depth {2}",
            self.bound.values, self.bound.witnesses, self.bound.depth
        )?;
        let join = |ts: &[Term]| {
            ts.iter()
                .map(Term::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        match &self.verdict {
            InductiveVerdict::HoldsAtBound => writeln!(
                f,
                "verdict: holds at bound ({} instances)",
                self.instances.len()
            )?,
            InductiveVerdict::Refuted {
                counterexample,
                lhs_normal_forms,
                rhs_normal_forms,
            } => {
                writeln!(f, "verdict: refuted")?;
                writeln!(f, "counterexample: {}", counterexample)?;
                writeln!(f, "lhs normal forms: {}", join(lhs_normal_forms))?;
                writeln!(f, "rhs normal forms: {}", join(rhs_normal_forms))?;
            }
        }
        if !self.instances.is_empty() {
            writeln!(f, "{:<32} witness", "instance")?;
            for row in &self.instances {
                writeln!(f, "{:<32} {}", row.gamma.to_string(), row.theta)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformReport {
    pub samples: usize,
    pub mismatch: Option<(Term, Vec<Term>, Vec<Term>)>,
}

impl TransformReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constrained::tests::{pow_goal, pow_rules, v};
    use crate::lctrs::Origin;
    use crate::signature::Signature;
    use crate::solver::Solver;
    use crate::term::FuncDecl;

    pub(crate) fn r1() -> (Signature, Lctrs) {
        let mut sig = Signature::standard();
        let f = Func::User(
            sig.declare("f", vec![Sort::Int, Sort::Int], Sort::Int)
                .unwrap(),
        );
        let fxy = Term::App(f, vec![v("x"), v("y")]);
        let a = Rule::new(
            "R1",
            fxy.clone(),
            Term::add(v("x"), v("z")),
            Term::and(Term::gt(v("x"), v("y")), Term::ge(v("z"), v("x"))),
            Origin::User,
        )
        .unwrap();
        let b = Rule::new("R2", fxy, v("x"), Term::le(v("x"), v("y")), Origin::User).unwrap();
        (sig.clone(), Lctrs::new(sig, vec![a, b]))
    }

    fn app(sig: &Signature, name: &str, args: Vec<Term>) -> Term {
        Term::App(sig.func(name).unwrap(), args)
    }

    #[test]
    fn ginst_counts() {
        let (sig, a, b) = pow_rules();
        let o = Oracle::new(Lctrs::new(sig.clone(), vec![a, b]), Bound::with_values(2));
        let e = Ceq {
            binder: vec![Var::int("x")],
            eta: Term::ge(v("x"), Term::int(2)),
            lhs: app(&sig, "pow", vec![Term::int(2), v("y")]),
            rhs: v("x"),
            guard: Term::gt(v("y"), Term::int(0)),
        };
        let inst: Vec<String> = o
            .ginst_ceq(&e)
            .into_iter()
            .map(|(_, c)| c.to_string())
            .collect();
        assert_eq!(
            inst,
            [
                "(exists x [x >= 2]. pow(2, 1) = x)",
                "(exists x [x >= 2]. pow(2, 2) = x)"
            ]
        );
        let unsat = ConstrainedTerm::new(
            v("y"),
            Term::and(
                Term::gt(v("y"), Term::int(0)),
                Term::lt(v("y"), Term::int(0)),
            ),
        );
        assert!(o.ginst_term(&unsat).is_empty());
        assert_eq!(
            o.ginst_term(&ConstrainedTerm::new(Term::int(4), Term::tt())),
            [Term::int(4)]
        );
        let direct = (-2..=2)
            .flat_map(|y| (-2..=2).map(move |z| (y, z)))
            .filter(|(y, z)| y < z)
            .count();
        let ct = ConstrainedTerm::new(Term::add(v("y"), v("z")), Term::lt(v("y"), v("z")));
        assert_eq!(
            o.substitutions(&[Var::int("y"), Var::int("z")], &ct.guard)
                .len(),
            direct
        );
    }

    #[test]
    fn joinability() {
        let (_, sys) = r1();
        let o = Oracle::new(sys.clone(), Bound::default());
        let f10 = Term::App(
            sys.signature.func("f").unwrap(),
            vec![Term::int(1), Term::int(0)],
        );
        let two = Term::add(Term::int(1), Term::int(1));
        assert!(o.joinable(&f10, &two));
        assert!(o.joinable(&two, &f10));
        let three = Term::add(Term::int(1), Term::int(2));
        assert!(!o.joinable(&three, &two));
        assert!(o.joinable(&three, &three));
        assert_eq!(o.normal_forms(&three), [Term::int(3)]);
    }

    #[test]
    fn toy_inductive_theorems() {
        let (sig, sys) = r1();
        let o = Oracle::new(sys, Bound::with_values(4));
        let f = |a, b| app(&sig, "f", vec![a, b]);
        let thm = Ceq::plain(
            f(v("x"), Term::int(0)),
            Term::add(v("x"), v("x")),
            Term::ge(v("x"), Term::int(1)),
        );
        assert!(o.inductive_theorem(&thm).holds());
        let guard = Term::and(Term::ge(v("x"), Term::int(1)), Term::ge(v("z"), v("x")));
        let bad = Ceq::plain(Term::add(v("x"), v("z")), Term::add(v("x"), v("x")), guard);
        let rep = o.inductive_theorem(&bad);
        let InductiveVerdict::Refuted {
            counterexample,
            lhs_normal_forms,
            rhs_normal_forms,
        } = &rep.verdict
        else {
            panic!("{}", rep)
        };
        assert_eq!(counterexample.to_string(), "{x -> 1, z -> 2}");
        assert_eq!(lhs_normal_forms, &[Term::int(3)]);
        assert_eq!(rhs_normal_forms, &[Term::int(2)]);
        assert!(rep.to_string().contains("refuted"));
    }

    #[test]
    fn equation_three_witnesses() {
        let (sig, a, b) = pow_rules();
        let o = Oracle::new(Lctrs::new(sig.clone(), vec![a, b]), Bound::default());
        let rep = o.inductive_theorem(&pow_goal(&sig));
        assert!(rep.holds(), "{}", rep);
        assert_eq!(rep.instances.len(), 4);
        for row in &rep.instances {
            let n = row
                .gamma
                .get(&Var::int("n"))
                .unwrap()
                .as_value()
                .unwrap()
                .as_int()
                .unwrap()
                .clone();
            let n: i64 = num_traits::ToPrimitive::to_i64(&n).unwrap();
            assert_eq!(
                row.theta.get(&Var::int("m")),
                Some(&Term::int((1 << n) - n))
            );
        }
    }

    #[test]
    fn overlapping_system() {
        let mut sig = Signature::standard();
        let nat = sig.declare_sort("Nat").unwrap();
        let res = sig.declare_sort("Res").unwrap();
        let z = Term::App(
            Func::User(sig.declare("z", vec![], nat.clone()).unwrap()),
            vec![],
        );
        let s = sig.declare("s", vec![nat.clone()], nat.clone()).unwrap();
        let a = Term::App(
            Func::User(sig.declare("a", vec![], res.clone()).unwrap()),
            vec![],
        );
        let b = Term::App(
            Func::User(sig.declare("b", vec![], res.clone()).unwrap()),
            vec![],
        );
        let f = Func::User(sig.declare("f", vec![nat.clone()], res).unwrap());
        let x = Var::new("x", nat);
        let rules = vec![
            Rule::new(
                "R1",
                Term::App(f.clone(), vec![z.clone()]),
                a.clone(),
                Term::tt(),
                Origin::User,
            )
            .unwrap(),
            Rule::new(
                "R2",
                Term::App(f.clone(), vec![z]),
                b.clone(),
                Term::tt(),
                Origin::User,
            )
            .unwrap(),
            Rule::new(
                "R3",
                Term::App(
                    f.clone(),
                    vec![Term::App(Func::User(s), vec![Term::Var(x.clone())])],
                ),
                a.clone(),
                Term::tt(),
                Origin::User,
            )
            .unwrap(),
        ];
        let o = Oracle::new(Lctrs::new(sig, rules), Bound::default());
        assert_eq!(o.pool(x.sort()).len(), 2);
        assert!(o
            .inductive_theorem(&Ceq::plain(
                Term::App(f, vec![Term::Var(x)]),
                a.clone(),
                Term::tt()
            ))
            .holds());
        assert!(!o.inductive_theorem(&Ceq::plain(b, a, Term::tt())).holds());
        let _ = FuncDecl::new;
    }

    #[test]
    fn rule_transform() {
        let (sig, a, b) = pow_rules();
        let o = Oracle::new(Lctrs::new(sig.clone(), vec![]), Bound::default());
        let two = Rule::new(
            "P",
            app(&sig, "pow", vec![Term::int(2), v("n")]),
            Term::mul(
                Term::int(2),
                app(
                    &sig,
                    "pow",
                    vec![Term::int(2), Term::sub(v("n"), Term::int(1))],
                ),
            ),
            Term::ge(v("n"), Term::int(1)),
            Origin::User,
        )
        .unwrap();
        for r in [&a, &b, &two] {
            assert!(o.check_rule_transform(r, 200, 1).passed(), "{}", r);
        }
        let norm = two.normalize();
        let corrupted = Rule {
            guard: Term::conj(norm.guard.conjuncts().into_iter().map(|c| {
                if c.to_string().ends_with("= 2") {
                    Term::eq(c.args()[0].clone(), Term::int(3))
                } else {
                    c
                }
            })),
            ..norm
        };
        assert!(!o.check_transform(&two, &corrupted, 200, 1).passed());
    }

    #[test]
    fn step_soundness() {
        let (sig, a, b) = pow_rules();
        let solver = Solver::builtin();
        let sys = Lctrs::new(sig.clone(), vec![a.clone(), b.clone()]);
        let o = Oracle::new(sys.clone(), Bound::default());
        let pow = |x, y| app(&sig, "pow", vec![x, y]);
        // A calculation step under the binder.
        let src = ConstrainedExistsTerm::new(
            vec![Var::int("m")],
            Term::ge(v("m"), Term::int(0)),
            Term::add(
                Term::mul(
                    Term::int(2),
                    pow(Term::int(2), Term::sub(v("n"), Term::int(1))),
                ),
                v("m"),
            ),
            Term::gt(v("n"), Term::int(1)),
        );
        let sub = sys.calc_rule(crate::TheoryOp::Sub).clone();
        let p = Position(vec![1, 2, 2]);
        let dst = src.step(&p, &sub, &Subst::new(), &solver).unwrap();
        let step = CeStep {
            source: src,
            target: dst.clone(),
            rule: sub.clone(),
            pos: p.clone(),
        };
        let rep = o.check_step(&step);
        assert!(rep.passed(), "{}", rep);
        assert!(rep.checked_forward > 0 && rep.checked_backward > 0);
        let weakened = CeStep {
            target: ConstrainedExistsTerm {
                guard: Term::gt(v("n"), Term::int(0)),
                ..dst
            },
            ..step
        };
        let rep = o.check_step(&weakened);
        assert_eq!(rep.failure.map(|f| f.statement), Some(2));
    }

    #[test]
    fn forced_step_with_extra_fails() {
        let (sig, sys) = r1();
        let o = Oracle::new(sys.clone(), Bound::default());
        let f = Term::App(sig.func("f").unwrap(), vec![v("x"), v("y")]);
        let src = ConstrainedExistsTerm::new(
            vec![Var::int("x")],
            Term::ge(v("x"), v("y")),
            f,
            Term::ge(v("y"), Term::int(0)),
        );
        let dst = ConstrainedExistsTerm::new(
            vec![Var::int("x"), Var::int("z")],
            Term::conj([
                Term::ge(v("x"), v("y")),
                Term::gt(v("x"), v("y")),
                Term::ge(v("z"), v("x")),
            ]),
            Term::add(v("x"), v("z")),
            Term::ge(v("y"), Term::int(0)),
        );
        let rep = o.check_step(&CeStep {
            source: src,
            target: dst,
            rule: sys.rules[0].clone(),
            pos: Position::root(),
        });
        let fail = rep.failure.expect("statement 1 fails");
        assert_eq!(fail.statement, 1);
        assert_eq!(fail.subst.to_string(), "{x -> 0, y -> 0}");
    }
}
