//! Rewriting induction over constrained ∃-equations: states `⟨E, H⟩`,
//! the Expansion, Simplification and Deletion moves, and their side
//! conditions.

pub mod session;
pub mod termination;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::constrained::{judgment_text, redex_positions, Ceq, Side, StepError};
use crate::lctrs::{Lctrs, Origin, Rule};
use crate::solver::{Outcome, Solver, Verdict};
use crate::term::{Func, Position, Subst, Term, Var};
use termination::TerminationVerdict;

/// An equation of `E` with its stable index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    pub id: usize,
    pub eq: Ceq,
}

/// `⟨E, H⟩`. Indices of equations never change; new equations receive
/// fresh indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RiState {
    pub equations: Vec<Equation>,
    pub hypotheses: Vec<Rule>,
    pub next_id: usize,
}

impl RiState {
    pub fn new(goals: Vec<Ceq>) -> RiState {
        let equations: Vec<Equation> = goals
            .into_iter()
            .enumerate()
            .map(|(id, eq)| Equation { id, eq })
            .collect();
        RiState {
            next_id: equations.len(),
            equations,
            hypotheses: Vec::new(),
        }
    }

    pub fn get(&self, id: usize) -> Option<&Ceq> {
        self.equations.iter().find(|e| e.id == id).map(|e| &e.eq)
    }

    pub fn is_proved(&self) -> bool {
        self.equations.is_empty()
    }

    fn replace(&mut self, id: usize, members: Vec<Ceq>) {
        let at = self
            .equations
            .iter()
            .position(|e| e.id == id)
            .expect("equation present");
        self.equations.remove(at);
        for (k, eq) in members.into_iter().enumerate() {
            let id = self.next_id;
            self.next_id += 1;
            self.equations.insert(at + k, Equation { id, eq });
        }
    }

    fn update(&mut self, id: usize, eq: Ceq) {
        let e = self
            .equations
            .iter_mut()
            .find(|e| e.id == id)
            .expect("equation present");
        e.eq = eq;
    }
}

impl fmt::Display for RiState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "E:")?;
        for e in &self.equations {
            writeln!(f, "  [{}] {}", e.id, e.eq)?;
        }
        writeln!(f, "H:")?;
        for h in &self.hypotheses {
            writeln!(f, "  {}: {}", h.id, h)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    L2R,
    R2L,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::L2R => "l2r",
            Orientation::R2L => "r2l",
        })
    }
}

impl Orientation {
    pub fn parse(s: &str) -> Option<Orientation> {
        match s {
            "l2r" => Some(Orientation::L2R),
            "r2l" => Some(Orientation::R2L),
            _ => None,
        }
    }
}

/// One inference. Bindings of a Simplification pin rule variables, both
/// given in display form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Move {
    Expansion {
        eq: usize,
        orient: Orientation,
        pos: Position,
        assume_terminating: bool,
    },
    Simplification {
        eq: usize,
        side: Side,
        pos: Position,
        rule: String,
        bind: Vec<(String, String)>,
    },
    Deletion {
        eq: usize,
    },
}

impl Move {
    pub fn kind(&self) -> &'static str {
        match self {
            Move::Expansion { .. } => "expansion",
            Move::Simplification { .. } => "simplification",
            Move::Deletion { .. } => "deletion",
        }
    }

    pub fn eq(&self) -> usize {
        match self {
            Move::Expansion { eq, .. }
            | Move::Simplification { eq, .. }
            | Move::Deletion { eq } => *eq,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Expansion {
                eq,
                orient,
                pos,
                assume_terminating,
            } => {
                write!(f, "expansion eq={} orient={} pos={}", eq, orient, pos)?;
                if *assume_terminating {
                    f.write_str(" termination=assumed")?;
                }
                Ok(())
            }
            Move::Simplification {
                eq,
                side,
                pos,
                rule,
                bind,
            } => {
                write!(
                    f,
                    "simplification eq={} side={} pos={} rule={}",
                    eq, side, pos, rule
                )?;
                if !bind.is_empty() {
                    let b: Vec<String> = bind.iter().map(|(v, t)| format!("{}:{}", v, t)).collect();
                    write!(f, " bind={}", b.join(","))?;
                }
                Ok(())
            }
            Move::Deletion { eq } => write!(f, "deletion eq={}", eq),
        }
    }
}

impl FromStr for Move {
    type Err = MoveError;

    fn from_str(line: &str) -> Result<Move, MoveError> {
        let bad = |why: &str| MoveError::Malformed(format!("{}: {}", why, line.trim()));
        let mut words = line.split_whitespace();
        let kind = words.next().ok_or_else(|| bad("empty move"))?;
        let mut fields = std::collections::BTreeMap::new();
        for w in words {
            let (k, v) = w.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            if fields.insert(k, v).is_some() {
                return Err(bad("repeated key"));
            }
        }
        let mut take = |k: &str| fields.remove(k);
        let eq: usize = take("eq")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing eq"))?;
        let pos = |v: Option<&str>| {
            v.and_then(Position::parse)
                .ok_or_else(|| bad("missing or invalid pos"))
        };
        let mv = match kind {
            "expansion" => Move::Expansion {
                eq,
                orient: take("orient")
                    .and_then(Orientation::parse)
                    .ok_or_else(|| bad("missing or invalid orient"))?,
                pos: pos(take("pos"))?,
                assume_terminating: match take("termination") {
                    None => false,
                    Some("assumed") => true,
                    Some(_) => return Err(bad("invalid termination")),
                },
            },
            "simplification" => Move::Simplification {
                eq,
                side: take("side")
                    .and_then(Side::parse)
                    .ok_or_else(|| bad("missing or invalid side"))?,
                pos: pos(take("pos"))?,
                rule: take("rule").ok_or_else(|| bad("missing rule"))?.to_string(),
                bind: match take("bind") {
                    None => vec![],
                    Some(b) => b
                        .split(',')
                        .map(|kv| {
                            kv.split_once(':')
                                .map(|(k, v)| (k.to_string(), v.to_string()))
                        })
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad("invalid bind"))?,
                },
            },
            "deletion" => Move::Deletion { eq },
            _ => return Err(bad("unknown move kind")),
        };
        if let Some(k) = fields.keys().next() {
            return Err(bad(&format!("unexpected key {}", k)));
        }
        Ok(mv)
    }
}

/// A side-condition check and the verdict it received.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub condition: String,
    pub judgment: String,
    pub verdict: Verdict,
}

impl Evidence {
    fn new(condition: &str, judgment: impl Into<String>, verdict: Verdict) -> Evidence {
        Evidence {
            condition: condition.to_string(),
            judgment: judgment.into(),
            verdict,
        }
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} is {}",
            self.condition, self.judgment, self.verdict
        )
    }
}

fn failed(note: &str) -> Verdict {
    Verdict {
        outcome: Outcome::Invalid,
        witness: None,
        note: Some(note.to_string()),
    }
}

#[derive(Debug, Clone, Error)]
pub enum MoveError {
    #[error("no equation with index {0}")]
    UnknownEquation(usize),
    #[error("no rule named {0}")]
    UnknownRule(String),
    #[error("not applicable: {reason}")]
    NotApplicable {
        reason: String,
        evidence: Vec<Evidence>,
    },
    #[error("side condition failed: {reason}")]
    SideCondition {
        reason: String,
        evidence: Vec<Evidence>,
    },
    #[error("malformed move: {0}")]
    Malformed(String),
}

impl MoveError {
    pub fn evidence(&self) -> &[Evidence] {
        match self {
            MoveError::NotApplicable { evidence, .. }
            | MoveError::SideCondition { evidence, .. } => evidence,
            _ => &[],
        }
    }
}

/// What applying a move produced besides the new state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub mv: Move,
    pub evidence: Vec<Evidence>,
    pub termination: Option<TerminationVerdict>,
    pub notes: Vec<String>,
}

/// A move as offered to a user, with its applicability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveInfo {
    pub mv: Move,
    pub applicable: bool,
    pub blocked_by: Option<String>,
    pub evidence: Vec<Evidence>,
    pub termination: Option<TerminationVerdict>,
}

/// The rewrite system, solver and options a proof runs against.
#[derive(Debug, Clone)]
pub struct Engine {
    pub system: Lctrs,
    pub solver: Solver,
    pub assume_terminating: bool,
}

type Narrowing = fn(&Ceq, &Position, &Rule, &Solver) -> Result<Option<Ceq>, StepError>;

impl Engine {
    /// The rules of `system` are normalised into the left-value-free class.
    pub fn new(system: &Lctrs, solver: Solver) -> Engine {
        Engine {
            system: system.normalized(),
            solver,
            assume_terminating: false,
        }
    }

    pub fn with_assumed_termination(mut self, yes: bool) -> Engine {
        self.assume_terminating = yes;
        self
    }

    pub fn lookup_rule(&self, st: &RiState, id: &str) -> Option<Rule> {
        self.system
            .rule(id)
            .or_else(|| st.hypotheses.iter().find(|h| h.id == id))
            .cloned()
    }

    /// `s → t [φ ∧ η]` in the left-value-free class, or why not.
    pub fn orient(&self, eq: &Ceq, dir: Orientation, id: &str) -> Result<Rule, String> {
        let (l, r) = match dir {
            Orientation::L2R => (&eq.lhs, &eq.rhs),
            Orientation::R2L => (&eq.rhs, &eq.lhs),
        };
        let guard = Term::conj(
            eq.guard
                .conjuncts()
                .into_iter()
                .chain(eq.eta.conjuncts())
                .filter(|c| !c.is_true()),
        );
        let rule = Rule::new(id, l.clone(), r.clone(), guard, Origin::Hypothesis)
            .map_err(|e| e.to_string())?
            .normalize();
        match rule.violations().first() {
            Some(v) => Err(v.to_string()),
            None => Ok(rule),
        }
    }

    /// Sufficient condition for every respecting normal instance of `s|p`
    /// being a redex: arguments are guard variables or values and the
    /// guards of the rules for the root symbol cover `φ`.
    pub fn reduction_complete(&self, s: &Term, p: &Position, phi: &Term) -> Verdict {
        let Ok(sub) = s.subterm_at(p) else {
            return Verdict::unknown(format!("no position {}", p));
        };
        let Term::App(f, args) = sub else {
            return Verdict::unknown(format!("{} is not an application", sub));
        };
        let gv = phi.vars();
        if !args
            .iter()
            .all(|a| a.is_value() || a.as_var().is_some_and(|v| gv.contains(v)))
        {
            return Verdict::unknown("an argument is neither a guard variable nor a value");
        }
        let mut cases = Vec::new();
        let mut gen = crate::term::VarGen::new();
        gen.observe_all(&s.vars());
        gen.observe_all(&gv);
        for rule in self.system.rules.iter().chain(self.system.calc_rules()) {
            if rule.lhs.root() != Some(f) {
                continue;
            }
            let (r, _) = rule.rename(&mut gen);
            let mut sigma = Subst::new();
            for (l, a) in r.lhs.args().iter().zip(args) {
                match l.as_var() {
                    Some(y) if !sigma.contains(y) => {
                        sigma.insert(y.clone(), a.clone()).expect("same sort")
                    }
                    _ => {
                        return Verdict::unknown(format!(
                            "rule {} is not of the form f(y1, ..., yn)",
                            rule.id
                        ))
                    }
                }
            }
            let inst = r.guard.apply(&sigma);
            let extras: Vec<Var> = r.extra_vars().into_iter().collect();
            let case = if extras.is_empty() {
                inst
            } else {
                match self.solver.eliminate_exists(&extras, &inst) {
                    Ok(q) => q,
                    Err(e) => return Verdict::unknown(e.to_string()),
                }
            };
            cases.push(case);
        }
        if cases.is_empty() {
            return failed(&format!("no rule for {}", f.name()));
        }
        self.solver.entails(phi, &Term::disj(cases))
    }

    pub fn termination_with(&self, st: &RiState, candidate: &Rule) -> TerminationVerdict {
        let rules: Vec<Rule> = self
            .system
            .rules
            .iter()
            .chain(&st.hypotheses)
            .chain(std::iter::once(candidate))
            .cloned()
            .collect();
        termination::check(&rules, &self.solver)
    }

    /// `Expd(s → t [φ∧η], p)` over `R ∪ R_calc`, for the equation viewed
    /// with `s` on the left. Members with unsatisfiable guards are dropped
    /// and reported in the notes.
    pub fn expd(&self, view: &Ceq, pos: &Position) -> Result<(Vec<Ceq>, Vec<String>), MoveError> {
        self.expd_with(view, pos, Ceq::narrow)
    }

    /// `Expd` with extra variables left free, as plain constrained RI
    /// computes it. Not used by any move.
    pub fn expd_free(
        &self,
        view: &Ceq,
        pos: &Position,
    ) -> Result<(Vec<Ceq>, Vec<String>), MoveError> {
        self.expd_with(view, pos, Ceq::narrow_free)
    }

    fn expd_with(
        &self,
        view: &Ceq,
        pos: &Position,
        narrow: Narrowing,
    ) -> Result<(Vec<Ceq>, Vec<String>), MoveError> {
        let mut members = Vec::new();
        let mut notes = Vec::new();
        for rule in self.system.rules.iter().chain(self.system.calc_rules()) {
            match narrow(view, pos, rule, &self.solver) {
                Ok(None) => {}
                Ok(Some(m)) => {
                    let sat = self.solver.is_satisfiable(&m.guard);
                    if sat.is_unsat() {
                        notes.push(format!(
                            "{} gives {} with an unsatisfiable guard; dropped",
                            rule.id, m
                        ));
                        continue;
                    }
                    for d in m.diagnostics(&self.solver) {
                        notes.push(format!("{} gives {}: {}", rule.id, m, d));
                    }
                    members.push(m);
                }
                Err(e) => {
                    return Err(MoveError::SideCondition {
                        reason: format!("case of rule {}: {}", rule.id, e),
                        evidence: vec![],
                    })
                }
            }
        }
        Ok((members, notes))
    }

    /// Which Deletion condition holds, with the verdicts of all checks.
    pub fn deletion_check(&self, eq: &Ceq) -> (bool, Vec<Evidence>) {
        let judgment = format!("{} == {}", eq.lhs, eq.rhs);
        if eq.lhs == eq.rhs {
            return (
                true,
                vec![Evidence::new(
                    "identical sides",
                    judgment,
                    Verdict::new(Outcome::Valid),
                )],
            );
        }
        let mut ev = vec![Evidence::new(
            "identical sides",
            judgment,
            failed("sides differ"),
        )];
        let sat = self.solver.is_satisfiable(&eq.guard);
        let unsat = sat.is_unsat();
        ev.push(Evidence::new(
            "unsatisfiable guard",
            format!("sat({})", eq.guard),
            sat,
        ));
        if unsat {
            return (true, ev);
        }
        let allowed = |t: &Term| {
            t.is_theory()
                && t.vars()
                    .iter()
                    .all(|v| eq.binder.contains(v) || eq.guard.contains_var(v))
        };
        if !(allowed(&eq.lhs) && allowed(&eq.rhs)) {
            ev.push(Evidence::new(
                "valid theory equation",
                eq.to_string(),
                failed("sides are not theory terms over guard and bound variables"),
            ));
            return (false, ev);
        }
        let body = Term::and_simple(eq.eta.clone(), Term::eq(eq.lhs.clone(), eq.rhs.clone()));
        let judgment = judgment_text(&eq.guard, &eq.binder, &body);
        let v = self.solver.is_valid_exists(&eq.guard, &eq.binder, &body);
        let ok = v.is_valid();
        ev.push(Evidence::new("valid theory equation", judgment, v));
        (ok, ev)
    }

    fn resolve_pins(
        &self,
        rule: &Rule,
        bind: &[(String, String)],
        eq: &Ceq,
    ) -> Result<Subst, MoveError> {
        let mut out = Subst::new();
        let known = eq.all_vars();
        for (name, val) in bind {
            let v = rule
                .vars()
                .into_iter()
                .find(|v| v.to_string() == *name)
                .ok_or_else(|| {
                    MoveError::Malformed(format!("rule {} has no variable {}", rule.id, name))
                })?;
            let t = if let Ok(i) = val.parse::<i64>() {
                Term::int(i)
            } else if val == "true" || val == "false" {
                Term::bool(val == "true")
            } else if let Some(k) = known.iter().find(|k| k.to_string() == *val) {
                Term::Var(k.clone())
            } else {
                Term::Var(
                    Var::parse_display(val, v.sort().clone())
                        .ok_or_else(|| MoveError::Malformed(format!("invalid binding {}", val)))?,
                )
            };
            out.insert(v, t)
                .map_err(|e| MoveError::Malformed(e.to_string()))?;
        }
        Ok(out)
    }

    /// Applies `mv`, returning the next state and the record of the move.
    pub fn apply(&self, st: &RiState, mv: &Move) -> Result<(RiState, MoveRecord), MoveError> {
        let eq = st.get(mv.eq()).ok_or(MoveError::UnknownEquation(mv.eq()))?;
        match mv {
            Move::Deletion { eq: id } => {
                let (ok, evidence) = self.deletion_check(eq);
                if !ok {
                    return Err(MoveError::SideCondition {
                        reason: "no Deletion condition holds".into(),
                        evidence,
                    });
                }
                let mut next = st.clone();
                next.replace(*id, vec![]);
                Ok((
                    next,
                    MoveRecord {
                        mv: mv.clone(),
                        evidence,
                        termination: None,
                        notes: vec![],
                    },
                ))
            }
            Move::Simplification {
                eq: id,
                side,
                pos,
                rule,
                bind,
            } => {
                let r = self
                    .lookup_rule(st, rule)
                    .ok_or_else(|| MoveError::UnknownRule(rule.clone()))?;
                let pins = self.resolve_pins(&r, bind, eq)?;
                let out = eq
                    .step(*side, pos, &r, &pins, &self.solver)
                    .map_err(|e| match e {
                        StepError::Unjustified { judgment, verdict } => MoveError::NotApplicable {
                            reason: format!(
                                "rule {} at {}.{}: guard not established",
                                r.id, side, pos
                            ),
                            evidence: vec![Evidence::new("rule guard", judgment, verdict)],
                        },
                        other => MoveError::NotApplicable {
                            reason: other.to_string(),
                            evidence: vec![],
                        },
                    })?;
                let notes = out.diagnostics(&self.solver);
                let mut next = st.clone();
                next.update(*id, out);
                Ok((
                    next,
                    MoveRecord {
                        mv: mv.clone(),
                        evidence: vec![],
                        termination: None,
                        notes,
                    },
                ))
            }
            Move::Expansion {
                eq: id,
                orient,
                pos,
                assume_terminating,
            } => {
                let view = match orient {
                    Orientation::L2R => eq.clone(),
                    Orientation::R2L => Ceq {
                        lhs: eq.rhs.clone(),
                        rhs: eq.lhs.clone(),
                        ..eq.clone()
                    },
                };
                let hid = format!("H{}", st.hypotheses.len() + 1);
                let candidate = self.orient(&view, Orientation::L2R, &hid).map_err(|why| {
                    MoveError::SideCondition {
                        reason: format!("orientation {}: {}", orient, why),
                        evidence: vec![],
                    }
                })?;
                let rc = self.reduction_complete(&view.lhs, pos, &view.guard);
                let mut evidence = vec![Evidence::new(
                    "reduction-complete",
                    format!("{} at {} under {}", view.lhs, pos, view.guard),
                    rc.clone(),
                )];
                if !rc.is_valid() {
                    return Err(MoveError::SideCondition {
                        reason: format!("position {} is not reduction-complete", pos),
                        evidence,
                    });
                }
                let tv = self.termination_with(st, &candidate);
                let assumed =
                    !tv.is_terminating() && (*assume_terminating || self.assume_terminating);
                if !tv.is_terminating() && !assumed {
                    return Err(MoveError::SideCondition {
                        reason: format!("termination: {}", tv),
                        evidence,
                    });
                }
                let (members, notes) = self.expd(&view, pos)?;
                evidence.push(Evidence::new(
                    "terminating",
                    format!(
                        "R with {} hypotheses and {}",
                        st.hypotheses.len(),
                        candidate
                    ),
                    if tv.is_terminating() {
                        Verdict::new(Outcome::Valid)
                    } else {
                        Verdict::unknown("assumed")
                    },
                ));
                let mut next = st.clone();
                next.replace(*id, members);
                next.hypotheses.push(candidate);
                Ok((
                    next,
                    MoveRecord {
                        mv: Move::Expansion {
                            eq: *id,
                            orient: *orient,
                            pos: pos.clone(),
                            assume_terminating: assumed,
                        },
                        evidence,
                        termination: Some(if assumed {
                            TerminationVerdict::assumed()
                        } else {
                            tv
                        }),
                        notes,
                    },
                ))
            }
        }
    }

    fn candidate_rules<'a>(&'a self, st: &'a RiState) -> impl Iterator<Item = &'a Rule> {
        self.system
            .rules
            .iter()
            .chain(self.system.calc_rules())
            .chain(&st.hypotheses)
    }

    fn expansion_positions(t: &Term) -> Vec<Position> {
        t.positions()
            .into_iter()
            .filter(|p| matches!(t.subterm_at(p), Ok(Term::App(Func::User(_), _))))
            .collect()
    }

    /// Moves of `st` in the fixed order: per equation, Deletion, then
    /// Simplifications by redex position and rule, then Expansions. Moves
    /// blocked only by an unknown verdict are listed as not applicable.
    pub fn moves(&self, st: &RiState) -> Vec<MoveInfo> {
        let mut out = Vec::new();
        for Equation { id, eq } in &st.equations {
            let (ok, evidence) = self.deletion_check(eq);
            out.push(MoveInfo {
                mv: Move::Deletion { eq: *id },
                applicable: ok,
                blocked_by: (!ok).then(|| "no Deletion condition holds".to_string()),
                evidence,
                termination: None,
            });
            for (side, pos) in redex_positions(eq) {
                let root = eq
                    .side(side)
                    .subterm_at(&pos)
                    .ok()
                    .and_then(Term::root)
                    .cloned();
                for rule in self.candidate_rules(st) {
                    if rule.lhs.root() != root.as_ref() {
                        continue;
                    }
                    let mv = Move::Simplification {
                        eq: *id,
                        side,
                        pos: pos.clone(),
                        rule: rule.id.clone(),
                        bind: vec![],
                    };
                    match eq.step(side, &pos, rule, &Subst::new(), &self.solver) {
                        Ok(_) => out.push(MoveInfo {
                            mv,
                            applicable: true,
                            blocked_by: None,
                            evidence: vec![],
                            termination: None,
                        }),
                        Err(StepError::Unjustified { judgment, verdict })
                            if verdict.is_unknown() =>
                        {
                            out.push(MoveInfo {
                                mv,
                                applicable: false,
                                blocked_by: Some("rule guard: unknown".into()),
                                evidence: vec![Evidence::new("rule guard", judgment, verdict)],
                                termination: None,
                            })
                        }
                        Err(_) => {}
                    }
                }
            }
            for orient in [Orientation::L2R, Orientation::R2L] {
                let view = match orient {
                    Orientation::L2R => eq.clone(),
                    Orientation::R2L => Ceq {
                        lhs: eq.rhs.clone(),
                        rhs: eq.lhs.clone(),
                        ..eq.clone()
                    },
                };
                let hid = format!("H{}", st.hypotheses.len() + 1);
                let Ok(candidate) = self.orient(&view, Orientation::L2R, &hid) else {
                    continue;
                };
                let mut tv = None;
                for pos in Engine::expansion_positions(&view.lhs) {
                    let rc = self.reduction_complete(&view.lhs, &pos, &view.guard);
                    if !rc.is_valid() {
                        continue;
                    }
                    let tv = tv
                        .get_or_insert_with(|| self.termination_with(st, &candidate))
                        .clone();
                    let ok = tv.is_terminating() || self.assume_terminating;
                    out.push(MoveInfo {
                        mv: Move::Expansion {
                            eq: *id,
                            orient,
                            pos: pos.clone(),
                            assume_terminating: !tv.is_terminating() && self.assume_terminating,
                        },
                        applicable: ok,
                        blocked_by: (!ok).then(|| "termination: unknown".to_string()),
                        evidence: vec![Evidence::new(
                            "reduction-complete",
                            format!("{} at {} under {}", view.lhs, pos, view.guard),
                            rc,
                        )],
                        termination: Some(tv),
                    });
                }
            }
        }
        out
    }

    /// The move the automatic strategy takes next: a Deletion, else a
    /// Simplification (rules of R and calculations before hypotheses,
    /// calculations only directly below a user symbol), else the first
    /// Expansion whose side conditions hold.
    pub fn auto_move(&self, st: &RiState) -> Option<Move> {
        for Equation { id, eq } in &st.equations {
            if self.deletion_check(eq).0 {
                return Some(Move::Deletion { eq: *id });
            }
        }
        for Equation { id, eq } in &st.equations {
            let positions = redex_positions(eq);
            let groups: [Vec<&Rule>; 2] = [
                self.system
                    .rules
                    .iter()
                    .chain(self.system.calc_rules())
                    .collect(),
                st.hypotheses.iter().collect(),
            ];
            for group in &groups {
                for (side, pos) in &positions {
                    let t = eq.side(*side);
                    let root = t.subterm_at(pos).ok().and_then(Term::root).cloned();
                    let under_user = pos
                        .parent()
                        .and_then(|q| t.subterm_at(&q).ok().and_then(Term::root).cloned())
                        .is_some_and(|f| !f.is_theory());
                    for rule in group {
                        if rule.lhs.root() != root.as_ref()
                            || (rule.origin == Origin::Calculation && !under_user)
                        {
                            continue;
                        }
                        if eq
                            .step(*side, pos, rule, &Subst::new(), &self.solver)
                            .is_ok()
                        {
                            return Some(Move::Simplification {
                                eq: *id,
                                side: *side,
                                pos: pos.clone(),
                                rule: rule.id.clone(),
                                bind: vec![],
                            });
                        }
                    }
                }
            }
        }
        for Equation { id, eq } in &st.equations {
            for orient in [Orientation::L2R, Orientation::R2L] {
                let view = match orient {
                    Orientation::L2R => eq.clone(),
                    Orientation::R2L => Ceq {
                        lhs: eq.rhs.clone(),
                        rhs: eq.lhs.clone(),
                        ..eq.clone()
                    },
                };
                let hid = format!("H{}", st.hypotheses.len() + 1);
                let Ok(candidate) = self.orient(&view, Orientation::L2R, &hid) else {
                    continue;
                };
                let Some(pos) = Engine::expansion_positions(&view.lhs)
                    .into_iter()
                    .find(|p| {
                        self.reduction_complete(&view.lhs, p, &view.guard)
                            .is_valid()
                    })
                else {
                    continue;
                };
                let tv = self.termination_with(st, &candidate);
                if tv.is_terminating() || self.assume_terminating {
                    let mv = Move::Expansion {
                        eq: *id,
                        orient,
                        pos,
                        assume_terminating: false,
                    };
                    if self.apply(st, &mv).is_ok() {
                        return Some(mv);
                    }
                }
            }
        }
        None
    }
}
