//! Termination certificates from dependency pairs and integer rankings.
//!
//! Every user symbol call in a right-hand side gives a dependency pair.
//! Each cycle of the dependency graph must admit a ranking: one integer
//! argument per symbol, such that along every pair of the cycle the ranked
//! argument never grows and along some pair it strictly drops while staying
//! above a fixed bound. Strict pairs are removed and the rest is checked
//! again. Ranked arguments are compared only when the lhs side is a guard
//! variable or value and the rhs side is a theory term over logical
//! variables, so both denote values in any rewrite step.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::lctrs::Rule;
use crate::solver::Solver;
use crate::term::{Func, Sort, Term};

/// `ℓ♯ → u♯ [φ]` for a call `u` in the rhs of rule `rule`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyPair {
    pub rule: String,
    pub lhs: Term,
    pub rhs: Term,
    pub guard: Term,
    logical: BTreeSet<crate::term::Var>,
}

impl fmt::Display for DependencyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}# -> {}#", self.lhs, self.rhs)?;
        if !self.guard.is_true() {
            write!(f, " [{}]", self.guard)?;
        }
        Ok(())
    }
}

fn root_name(t: &Term) -> String {
    t.root().map(|f| f.name().to_string()).unwrap_or_default()
}

pub fn dependency_pairs(rules: &[Rule]) -> Vec<DependencyPair> {
    let defined: BTreeSet<Func> = rules
        .iter()
        .filter_map(|r| r.lhs.root().cloned())
        .filter(|f| !f.is_theory())
        .collect();
    let mut out = Vec::new();
    for r in rules {
        for p in r.rhs.positions() {
            let u = r.rhs.subterm_at(&p).expect("own position");
            if u.root().is_some_and(|f| defined.contains(f)) {
                out.push(DependencyPair {
                    rule: r.id.clone(),
                    lhs: r.lhs.clone(),
                    rhs: u.clone(),
                    guard: r.guard.clone(),
                    logical: r.logical_vars(),
                });
            }
        }
    }
    out
}

/// One round of the certificate: a cycle of pairs, the ranked argument of
/// each symbol, the bound, and the pairs removed by strict decrease.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub pairs: Vec<usize>,
    pub ranks: BTreeMap<String, usize>,
    pub bound: i64,
    pub strict: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub pairs: Vec<String>,
    pub stages: Vec<Stage>,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.stages.is_empty() {
            return write!(
                f,
                "no recursive dependency pairs ({} in total)",
                self.pairs.len()
            );
        }
        let parts = self.stages.iter().map(|s| {
            let ranks = s
                .ranks
                .iter()
                .map(|(g, k)| format!("{}@{}", g, k))
                .join(", ");
            let strict = s.strict.iter().map(|i| &self.pairs[*i]).join("; ");
            format!(
                "rank {} bounded by {}, strict on {}",
                ranks, s.bound, strict
            )
        });
        f.write_str(&parts.collect::<Vec<_>>().join(" | "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminationOutcome {
    Terminating,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TerminationVerdict {
    pub outcome: TerminationOutcome,
    pub certificate: Option<Certificate>,
    pub reason: String,
}

impl TerminationVerdict {
    pub fn is_terminating(&self) -> bool {
        self.outcome == TerminationOutcome::Terminating
    }

    pub fn assumed() -> TerminationVerdict {
        TerminationVerdict {
            outcome: TerminationOutcome::Terminating,
            certificate: None,
            reason: "assumed".into(),
        }
    }
}

impl fmt::Display for TerminationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.outcome, &self.certificate) {
            (TerminationOutcome::Terminating, Some(c)) => write!(f, "terminating ({})", c),
            (TerminationOutcome::Terminating, None) => write!(f, "terminating ({})", self.reason),
            (TerminationOutcome::Unknown, _) => write!(f, "unknown ({})", self.reason),
        }
    }
}

/// Pairs on a cycle of the graph restricted to `set`, grouped by strongly
/// connected component. An edge joins pairs whose call and lhs share the
/// root symbol.
fn cycles(dps: &[DependencyPair], set: &[usize]) -> Vec<Vec<usize>> {
    let succ = |i: usize| -> Vec<usize> {
        set.iter()
            .copied()
            .filter(|&j| root_name(&dps[i].rhs) == root_name(&dps[j].lhs))
            .collect()
    };
    let reach = |from: usize| -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut todo = succ(from);
        while let Some(j) = todo.pop() {
            if seen.insert(j) {
                todo.extend(succ(j));
            }
        }
        seen
    };
    let closure: BTreeMap<usize, BTreeSet<usize>> = set.iter().map(|&i| (i, reach(i))).collect();
    let mut done = BTreeSet::new();
    let mut out = Vec::new();
    for &i in set {
        if done.contains(&i) || !closure[&i].contains(&i) {
            continue;
        }
        let comp: Vec<usize> = set
            .iter()
            .copied()
            .filter(|j| closure[&i].contains(j) && closure[j].contains(&i))
            .collect();
        done.extend(comp.iter().copied());
        out.push(comp);
    }
    out
}

/// The ranked argument pair of `dp`, when both sides denote values.
fn ranked_args<'a>(
    dp: &'a DependencyPair,
    ranks: &BTreeMap<String, usize>,
) -> Option<(&'a Term, &'a Term)> {
    let k = *ranks.get(&root_name(&dp.lhs))?;
    let j = *ranks.get(&root_name(&dp.rhs))?;
    let a = dp.lhs.args().get(k - 1)?;
    let b = dp.rhs.args().get(j - 1)?;
    let gv = dp.guard.vars();
    let a_ok = a.is_value() || a.as_var().is_some_and(|v| gv.contains(v));
    let b_ok = b.is_theory() && b.vars().iter().all(|v| dp.logical.contains(v));
    (a_ok && b_ok && a.sort() == Sort::Int && b.sort() == Sort::Int).then_some((a, b))
}

fn weakly(dp: &DependencyPair, ranks: &BTreeMap<String, usize>, solver: &Solver) -> bool {
    ranked_args(dp, ranks).is_some_and(|(a, b)| {
        solver
            .entails(&dp.guard, &Term::ge(a.clone(), b.clone()))
            .is_valid()
    })
}

fn strictly(
    dp: &DependencyPair,
    ranks: &BTreeMap<String, usize>,
    bound: i64,
    solver: &Solver,
) -> bool {
    ranked_args(dp, ranks).is_some_and(|(a, b)| {
        let claim = Term::and(
            Term::gt(a.clone(), b.clone()),
            Term::ge(a.clone(), Term::int(bound)),
        );
        solver.entails(&dp.guard, &claim).is_valid()
    })
}

fn bound_candidates(dps: &[DependencyPair], comp: &[usize]) -> Vec<i64> {
    let mut out = BTreeSet::from([0i64]);
    for &i in comp {
        for p in dps[i].guard.value_positions() {
            if let Some(c) = dps[i]
                .guard
                .subterm_at(&p)
                .ok()
                .and_then(Term::as_value)
                .and_then(|v| v.as_int())
                .and_then(num_traits::ToPrimitive::to_i64)
            {
                out.extend([c - 1, c, c + 1]);
            }
        }
    }
    // Larger bounds are harder to entail; try them last.
    out.into_iter().sorted_by_key(|b| (b.abs(), *b)).collect()
}

fn find_stage(dps: &[DependencyPair], comp: &[usize], solver: &Solver) -> Option<Stage> {
    let symbols: Vec<(String, Vec<usize>)> = comp
        .iter()
        .flat_map(|&i| [&dps[i].lhs, &dps[i].rhs])
        .map(|t| {
            let ints = t
                .root()
                .map(|f| {
                    f.arg_sorts()
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| **s == Sort::Int)
                        .map(|(k, _)| k + 1)
                        .collect()
                })
                .unwrap_or_default();
            (root_name(t), ints)
        })
        .unique_by(|(n, _)| n.clone())
        .collect();
    let bounds = bound_candidates(dps, comp);
    for choice in symbols
        .iter()
        .map(|(_, ks)| ks.iter().copied())
        .multi_cartesian_product()
    {
        let ranks: BTreeMap<String, usize> =
            symbols.iter().map(|(n, _)| n.clone()).zip(choice).collect();
        if !comp.iter().all(|&i| weakly(&dps[i], &ranks, solver)) {
            continue;
        }
        for &bound in &bounds {
            let strict: Vec<usize> = comp
                .iter()
                .copied()
                .filter(|&i| strictly(&dps[i], &ranks, bound, solver))
                .collect();
            if !strict.is_empty() {
                return Some(Stage {
                    pairs: comp.to_vec(),
                    ranks,
                    bound,
                    strict,
                });
            }
        }
    }
    None
}

/// Searches a certificate for `rules` (calculation rules need not be
/// passed: they have no calls).
pub fn check(rules: &[Rule], solver: &Solver) -> TerminationVerdict {
    let dps = dependency_pairs(rules);
    let mut stages = Vec::new();
    let mut work = vec![(0..dps.len()).collect::<Vec<_>>()];
    while let Some(set) = work.pop() {
        for comp in cycles(&dps, &set) {
            match find_stage(&dps, &comp, solver) {
                Some(stage) => {
                    let rest: Vec<usize> = comp
                        .iter()
                        .copied()
                        .filter(|i| !stage.strict.contains(i))
                        .collect();
                    stages.push(stage);
                    work.push(rest);
                }
                None => {
                    return TerminationVerdict {
                        outcome: TerminationOutcome::Unknown,
                        certificate: None,
                        reason: format!(
                            "no ranking decreases along the cycle {}",
                            comp.iter().map(|i| dps[*i].to_string()).join("; ")
                        ),
                    }
                }
            }
        }
    }
    let cert = Certificate {
        pairs: dps.iter().map(|d| d.to_string()).collect(),
        stages,
    };
    if !validate(rules, &cert, solver) {
        return TerminationVerdict {
            outcome: TerminationOutcome::Unknown,
            certificate: None,
            reason: "certificate failed re-validation".into(),
        };
    }
    TerminationVerdict {
        outcome: TerminationOutcome::Terminating,
        reason: cert.to_string(),
        certificate: Some(cert),
    }
}

/// Independent re-check of a certificate: the cycle decomposition is
/// recomputed and every cycle met must be covered by a stage whose claims
/// hold.
pub fn validate(rules: &[Rule], cert: &Certificate, solver: &Solver) -> bool {
    let dps = dependency_pairs(rules);
    if dps.iter().map(|d| d.to_string()).collect::<Vec<_>>() != cert.pairs {
        return false;
    }
    let mut work = vec![(0..dps.len()).collect::<Vec<_>>()];
    let mut used = 0;
    while let Some(set) = work.pop() {
        for comp in cycles(&dps, &set) {
            let Some(stage) = cert.stages.iter().find(|s| s.pairs == comp) else {
                return false;
            };
            let ok = !stage.strict.is_empty()
                && comp.iter().all(|&i| weakly(&dps[i], &stage.ranks, solver))
                && stage.strict.iter().all(|&i| {
                    comp.contains(&i) && strictly(&dps[i], &stage.ranks, stage.bound, solver)
                });
            if !ok {
                return false;
            }
            used += 1;
            work.push(
                comp.iter()
                    .copied()
                    .filter(|i| !stage.strict.contains(i))
                    .collect(),
            );
        }
    }
    used == cert.stages.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constrained::tests::{pow_rules, v};
    use crate::lctrs::Origin;
    use crate::term::Var;
    use rand::{Rng, SeedableRng};

    fn h3(sig: &crate::Signature) -> Rule {
        let pow = sig.func("pow").unwrap();
        Rule::new(
            "H1",
            Term::App(pow, vec![v("x"), v("n")]),
            Term::add(v("n"), v("m")),
            Term::conj([
                Term::eq(v("x"), Term::int(2)),
                Term::ge(v("n"), Term::int(0)),
                Term::ge(v("m"), Term::int(0)),
            ]),
            Origin::Hypothesis,
        )
        .unwrap()
    }

    #[test]
    fn pow_system() {
        let solver = Solver::builtin();
        let (sig, a, b) = pow_rules();
        let v1 = check(&[a.clone(), b.clone()], &solver);
        assert!(v1.is_terminating(), "{}", v1);
        let cert = v1.certificate.clone().unwrap();
        assert_eq!(cert.stages.len(), 1);
        assert_eq!(cert.stages[0].ranks.get("pow"), Some(&2));
        let v2 = check(&[a, b, h3(&sig)], &solver);
        assert!(v2.is_terminating(), "{}", v2);
    }

    #[test]
    fn loops_are_unknown() {
        let solver = Solver::builtin();
        let mut sig = crate::Signature::standard();
        let f = sig.declare("f", vec![Sort::Int], Sort::Int).unwrap();
        let fx = Term::App(Func::User(f), vec![v("x")]);
        let loop_rule = Rule::new("R1", fx.clone(), fx, Term::tt(), Origin::User).unwrap();
        assert_eq!(
            check(&[loop_rule], &solver).outcome,
            TerminationOutcome::Unknown
        );

        let (sig, a, b) = pow_rules();
        let pow = sig.func("pow").unwrap();
        let up = Rule::new(
            "H1",
            Term::App(pow.clone(), vec![v("x"), v("n")]),
            Term::App(pow, vec![v("x"), Term::add(v("n"), Term::int(1))]),
            Term::and(
                Term::eq(v("x"), Term::int(2)),
                Term::ge(v("n"), Term::int(0)),
            ),
            Origin::Hypothesis,
        )
        .unwrap();
        assert_eq!(
            check(&[a, b, up], &solver).outcome,
            TerminationOutcome::Unknown
        );
    }

    #[test]
    fn tampered_certificates_fail() {
        let solver = Solver::builtin();
        let (_, a, b) = pow_rules();
        let rules = [a, b];
        let mut cert = check(&rules, &solver).certificate.unwrap();
        assert!(validate(&rules, &cert, &solver));
        cert.stages[0].ranks.insert("pow".into(), 1);
        assert!(!validate(&rules, &cert, &solver));
        let mut cert = check(&rules, &solver).certificate.unwrap();
        cert.stages[0].bound = 5;
        assert!(!validate(&rules, &cert, &solver));
    }

    #[test]
    fn random_descent_checks() {
        let solver = Solver::builtin();
        let (sig, a, b) = pow_rules();
        let rules = [a, b, h3(&sig)];
        let cert = check(&rules, &solver).certificate.unwrap();
        let dps = dependency_pairs(&rules);
        let stage = &cert.stages[0];
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 500 {
            let i = stage.pairs[rng.gen_range(0..stage.pairs.len())];
            let dp = &dps[i];
            let gamma: crate::Subst = dp
                .guard
                .vars()
                .into_iter()
                .chain(dp.lhs.vars())
                .map(|x: Var| (x, Term::int(rng.gen_range(-50..50))))
                .collect();
            if !crate::theory::respects(&gamma, &dp.guard) {
                continue;
            }
            let (l, r) = ranked_args(dp, &stage.ranks).unwrap();
            let lv = crate::theory::evaluate(&l.apply(&gamma)).unwrap();
            let rv = crate::theory::evaluate(&r.apply(&gamma)).unwrap();
            let (lv, rv) = (lv.as_int().unwrap().clone(), rv.as_int().unwrap().clone());
            assert!(lv >= rv);
            if stage.strict.contains(&i) {
                assert!(lv > rv && lv >= stage.bound.into());
            }
            checked += 1;
        }
    }
}
