//! Satisfiability and validity of constraints, including judgments of the
//! form `φ ⇒ ∃x⃗. ψ`.
//!
//! Linear integer and boolean content is decided by quantifier elimination.
//! Nonlinear content goes to the external bridge when one is configured and
//! is otherwise answered with `Unknown`. Every `Sat`/`Invalid` verdict carries
//! a witness that has been re-checked by evaluation.

pub mod cooper;
pub mod formula;
pub mod linearize;
pub mod simplify;
pub mod smt;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::term::{Sort, Subst, Term, Value, Var};
use crate::theory::{evaluate, respects};
use formula::Formula;
use linearize::Linearizer;
use smt::{SmtAnswer, SmtBridge};

pub use simplify::simplify_constraint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("nonlinear content: {0}")]
    NonLinear(String),
    #[error("non-theory symbol {0} in constraint")]
    NonTheory(String),
    #[error("ill-sorted constraint: {0}")]
    IllSorted(String),
    #[error("undefined theory operation: {0}")]
    Partial(String),
    #[error("quantifier elimination exceeded its size limit")]
    TooLarge,
    #[error("external solver: {0}")]
    Smt(String),
    #[error("internal solver error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Valid,
    Invalid,
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Valid => "valid",
            Outcome::Invalid => "invalid",
            Outcome::Sat => "sat",
            Outcome::Unsat => "unsat",
            Outcome::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Subst>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn new(outcome: Outcome) -> Verdict {
        Verdict {
            outcome,
            witness: None,
            note: None,
        }
    }

    pub fn unknown(note: impl Into<String>) -> Verdict {
        Verdict {
            outcome: Outcome::Unknown,
            witness: None,
            note: Some(note.into()),
        }
    }

    fn with_witness(outcome: Outcome, w: Subst) -> Verdict {
        Verdict {
            outcome,
            witness: Some(w),
            note: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.outcome == Outcome::Valid
    }

    pub fn is_sat(&self) -> bool {
        self.outcome == Outcome::Sat
    }

    pub fn is_unsat(&self) -> bool {
        self.outcome == Outcome::Unsat
    }

    pub fn is_unknown(&self) -> bool {
        self.outcome == Outcome::Unknown
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.outcome)?;
        if let Some(w) = &self.witness {
            write!(f, " {}", w)?;
        }
        if let Some(n) = &self.note {
            write!(f, " ({})", n)?;
        }
        Ok(())
    }
}

/// Range searched when double-checking an `Invalid` verdict whose witness
/// could not be confirmed by elimination.
const BOUNDED_CHECK: i64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Query {
    Sat(Term),
    ValidExists(Term, Vec<Var>, Term),
}

/// Solver front end. Cheap to clone; clones share the query cache.
#[derive(Debug, Clone, Default)]
pub struct Solver {
    smt: Option<Arc<SmtBridge>>,
    cache: Arc<Mutex<HashMap<Query, Verdict>>>,
}

fn model_to_subst(
    vars: &BTreeSet<Var>,
    ints: &BTreeMap<Var, BigInt>,
    bools: &BTreeMap<Var, bool>,
) -> Subst {
    vars.iter()
        .filter(|v| !v.is_internal())
        .map(|v| {
            let t = match v.sort() {
                Sort::Bool => Term::bool(bools.get(v).copied().unwrap_or(false)),
                _ => Term::big(ints.get(v).cloned().unwrap_or_default()),
            };
            (v.clone(), t)
        })
        .collect()
}

fn closes(phi: &Term, w: &Subst) -> bool {
    matches!(evaluate(&phi.apply(w)), Ok(Value::Bool(true)))
}

impl Solver {
    /// Built-in procedures only.
    pub fn builtin() -> Solver {
        Solver::default()
    }

    /// Built-in procedures with an external fallback for nonlinear content.
    pub fn with_smt(command: &str) -> Solver {
        Solver {
            smt: Some(Arc::new(SmtBridge::new(command))),
            cache: Arc::default(),
        }
    }

    pub fn has_external(&self) -> bool {
        self.smt.is_some()
    }

    fn cached(&self, q: Query, compute: impl FnOnce() -> Verdict) -> Verdict {
        if let Some(v) = self.cache.lock().unwrap().get(&q) {
            return v.clone();
        }
        let v = compute();
        self.cache.lock().unwrap().insert(q, v.clone());
        v
    }

    pub fn is_satisfiable(&self, phi: &Term) -> Verdict {
        if phi.sort() != Sort::Bool {
            return Verdict::unknown(format!("constraint {} is not boolean", phi));
        }
        self.cached(Query::Sat(phi.clone()), || self.sat_uncached(phi))
    }

    fn sat_uncached(&self, phi: &Term) -> Verdict {
        let vars = phi.vars();
        let (reduced, binds) = simplify::propagate_values(phi);
        let pinned: Subst = binds
            .iter()
            .map(|(v, x)| (v.clone(), Term::Val(x.clone())))
            .collect();
        let builtin = (|| {
            let mut lz = Linearizer::new();
            let f = lz.formula(&reduced)?;
            let (_, defs) = lz.take();
            let mut parts = defs;
            parts.push(f);
            cooper::find_model(&Formula::and(parts))
        })();
        let verdict = match builtin {
            Ok(None) => Verdict::new(Outcome::Unsat),
            Ok(Some((ints, bools))) => {
                let mut w = model_to_subst(&vars, &ints, &bools);
                for (v, t) in pinned.iter() {
                    w.insert(v.clone(), t.clone()).expect("sorted binding");
                }
                Verdict::with_witness(Outcome::Sat, w)
            }
            Err(SolverError::NonLinear(why)) => self.sat_external(phi, &why),
            Err(e) => Verdict::unknown(e.to_string()),
        };
        self.checked(phi, verdict)
    }

    fn sat_external(&self, phi: &Term, why: &str) -> Verdict {
        let Some(smt) = &self.smt else {
            return Verdict::unknown(format!("nonlinear content: {}", why));
        };
        let answer = smt::script(phi, None).and_then(|s| smt.check(&s, &phi.vars()));
        match answer {
            Ok(SmtAnswer::Unsat) => Verdict::new(Outcome::Unsat),
            Ok(SmtAnswer::Sat(m)) => Verdict::with_witness(Outcome::Sat, m.restrict(&phi.vars())),
            Ok(SmtAnswer::Unknown) => Verdict::unknown("external solver answered unknown"),
            Err(e) => Verdict::unknown(e.to_string()),
        }
    }

    /// Downgrades a `Sat` verdict whose witness fails evaluation.
    fn checked(&self, phi: &Term, v: Verdict) -> Verdict {
        match (&v.outcome, &v.witness) {
            (Outcome::Sat, Some(w)) if respects(w, phi) => v,
            (Outcome::Sat, _) => Verdict::unknown("witness failed evaluation"),
            _ => v,
        }
    }

    pub fn is_valid(&self, phi: &Term) -> Verdict {
        if phi.sort() != Sort::Bool {
            return Verdict::unknown(format!("constraint {} is not boolean", phi));
        }
        let neg = self.is_satisfiable(&Term::not(phi.clone()));
        match neg.outcome {
            Outcome::Unsat => Verdict::new(Outcome::Valid),
            Outcome::Sat => Verdict {
                outcome: Outcome::Invalid,
                witness: neg.witness,
                note: None,
            },
            _ => neg,
        }
    }

    /// Validity of `φ ⇒ ∃xs. ψ`.
    pub fn is_valid_exists(&self, phi: &Term, xs: &[Var], psi: &Term) -> Verdict {
        if xs.is_empty() {
            return self.is_valid(&Term::implies(phi.clone(), psi.clone()));
        }
        let mut distinct = BTreeSet::new();
        if !xs
            .iter()
            .all(|x| x.sort().is_theory() && distinct.insert(x.clone()))
        {
            return Verdict::unknown("bound variables must be distinct theory variables");
        }
        let key = Query::ValidExists(phi.clone(), xs.to_vec(), psi.clone());
        self.cached(key, || self.valid_exists_uncached(phi, xs, psi))
    }

    fn valid_exists_uncached(&self, phi: &Term, xs: &[Var], psi: &Term) -> Verdict {
        let mut free: BTreeSet<Var> = phi.vars();
        free.extend(psi.vars().into_iter().filter(|v| !xs.contains(v)));

        // Values fixed by φ may linearise ψ.
        let (_, binds) = simplify::propagate_values(phi);
        let pin: Subst = binds
            .iter()
            .filter(|(v, _)| !xs.contains(v))
            .map(|(v, x)| (v.clone(), Term::Val(x.clone())))
            .collect();
        let psi_p = psi.apply(&pin);

        let builtin = (|| -> Result<Option<(Subst, Formula)>, SolverError> {
            let mut lz = Linearizer::new();
            let fpsi = lz.formula(&psi_p)?;
            let (mut extras, defs) = lz.take();
            let mut parts = defs;
            parts.push(fpsi);
            extras.extend(xs.iter().cloned());
            let q = cooper::qe_exists_all(&extras, &Formula::and(parts))?;
            let fphi = lz.formula(phi)?;
            let (_, defs) = lz.take();
            let mut parts = defs;
            parts.push(fphi);
            parts.push(q.negate());
            Ok(cooper::find_model(&Formula::and(parts))?
                .map(|(ints, bools)| (model_to_subst(&free, &ints, &bools), q)))
        })();

        match builtin {
            Ok(None) => Verdict::new(Outcome::Valid),
            Ok(Some((w, q))) => self.confirm_invalid(phi, xs, psi, w, Some(&q)),
            Err(SolverError::NonLinear(why)) => {
                self.valid_exists_external(phi, xs, psi, &free, &why)
            }
            Err(e) => Verdict::unknown(e.to_string()),
        }
    }

    fn valid_exists_external(
        &self,
        phi: &Term,
        xs: &[Var],
        psi: &Term,
        free: &BTreeSet<Var>,
        why: &str,
    ) -> Verdict {
        let Some(smt) = &self.smt else {
            return Verdict::unknown(format!("nonlinear content: {}", why));
        };
        let answer = smt::script(phi, Some((xs, psi))).and_then(|s| smt.check(&s, free));
        match answer {
            Ok(SmtAnswer::Unsat) => Verdict::new(Outcome::Valid),
            Ok(SmtAnswer::Sat(m)) => self.confirm_invalid(phi, xs, psi, m.restrict(free), None),
            Ok(SmtAnswer::Unknown) => Verdict::unknown("external solver answered unknown"),
            Err(e) => Verdict::unknown(e.to_string()),
        }
    }

    /// Accepts an `Invalid` witness only if `φ` holds under it and no
    /// binder assignment satisfies `ψ`: decided by elimination when the
    /// instantiated body is linear, otherwise by bounded search.
    fn confirm_invalid(
        &self,
        phi: &Term,
        xs: &[Var],
        psi: &Term,
        w: Subst,
        _q: Option<&Formula>,
    ) -> Verdict {
        if !closes(phi, &w) {
            return Verdict::unknown("counter-witness does not satisfy the hypothesis");
        }
        let body = psi.apply(&w);
        let mut lz = Linearizer::new();
        let exact = lz.formula(&body).and_then(|f| {
            let (mut extras, defs) = lz.take();
            let mut parts = defs;
            parts.push(f);
            extras.extend(xs.iter().cloned());
            cooper::qe_exists_all(&extras, &Formula::and(parts))
        });
        match exact {
            Ok(Formula::False) => Verdict::with_witness(Outcome::Invalid, w),
            Ok(Formula::True) => Verdict::unknown("counter-witness refuted by elimination"),
            _ => {
                if bounded_exists(xs, &body, BOUNDED_CHECK) {
                    Verdict::unknown("counter-witness refuted by bounded search")
                } else {
                    Verdict {
                        outcome: Outcome::Invalid,
                        witness: Some(w),
                        note: Some(format!("no binder values in [-{0}, {0}]", BOUNDED_CHECK)),
                    }
                }
            }
        }
    }

    /// Quantifier-free equivalent of `∃xs. ψ` over the integers.
    pub fn eliminate_exists(&self, xs: &[Var], psi: &Term) -> Result<Term, SolverError> {
        let mut lz = Linearizer::new();
        let f = lz.formula(psi)?;
        let (mut extras, defs) = lz.take();
        let mut parts = defs;
        parts.push(f);
        extras.extend(xs.iter().cloned());
        let q = cooper::qe_exists_all(&extras, &Formula::and(parts))?;
        Ok(simplify::formula_to_term(&q))
    }

    /// Validity of `a ⇔ b`.
    pub fn equivalent(&self, a: &Term, b: &Term) -> Verdict {
        self.is_valid(&Term::iff(a.clone(), b.clone()))
    }

    /// Validity of `a ⇒ b`.
    pub fn entails(&self, a: &Term, b: &Term) -> Verdict {
        self.is_valid(&Term::implies(a.clone(), b.clone()))
    }

    pub fn simplify(&self, phi: &Term) -> Term {
        simplify_constraint(phi)
    }
}

/// Brute-force search for binder values in `[-b, b]` closing `body`.
pub fn bounded_exists(xs: &[Var], body: &Term, b: i64) -> bool {
    fn go(xs: &[Var], body: &Term, b: i64, acc: &mut Subst) -> bool {
        match xs.split_first() {
            None => closes(body, acc),
            Some((x, rest)) => {
                let vals: Vec<Term> = match x.sort() {
                    Sort::Bool => vec![Term::ff(), Term::tt()],
                    _ => (-b..=b).map(Term::int).collect(),
                };
                for v in vals {
                    acc.insert(x.clone(), v).expect("sorted");
                    if go(rest, body, b, acc) {
                        return true;
                    }
                }
                acc.remove(x);
                false
            }
        }
    }
    go(xs, body, b, &mut Subst::new())
}
