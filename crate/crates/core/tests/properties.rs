//! Property tests against independent brute-force oracles.

use std::sync::Arc;

use proptest::prelude::*;

use lcri_core::constrained::ConstrainedTerm;
use lcri_core::oracle::{Bound, Oracle};
use lcri_core::ri::session::Session;
use lcri_core::ri::Engine;
use lcri_core::syntax::{parse_goal, parse_problem, parse_term, print_problem, Goal, Problem};
use lcri_core::theory::evaluate_under;
use lcri_core::{Solver, Subst, Term, Value, Var};

const POW: &str = include_str!("../../../problems/pow.lctrs");
const TOY: &str = include_str!("../../../problems/toy.lctrs");

fn problem(text: &str) -> Problem {
    parse_problem(text).expect("problem parses")
}

fn holds(phi: &Term, s: &Subst) -> bool {
    evaluate_under(phi, s) == Ok(Value::Bool(true))
}

fn assign(pairs: &[(&str, i64)]) -> Subst {
    pairs
        .iter()
        .fold(Subst::new(), |s, (v, x)| s.bind(Var::int(v), Term::int(*x)))
}

fn var_named(t: &Term, name: &str) -> Option<Var> {
    t.vars().into_iter().find(|v| v.to_string() == name)
}

fn linear() -> impl Strategy<Value = String> {
    (-3..=3i64, prop::sample::select(vec!["x", "y"]), -4..=4i64)
        .prop_map(|(c, v, k)| format!("{} * {} + {}", c, v, k))
}

fn relation() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["<", "<=", ">", ">=", "=", "!="])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elimination_agrees_with_search(
        c in -3..=3i64, d in 1..=3i64, k in -5..=5i64, r in relation(), c2 in -3..=3i64, k2 in -5..=5i64,
    ) {
        let text = format!("{} * x + {} * y {} {} /\\ y <= {} * x + {}", c, d, r, k, c2, k2);
        let psi = parse_term(&lcri_core::Signature::standard(), &text).unwrap();
        let y = var_named(&psi, "y").unwrap();
        let solver = Solver::builtin();
        let qe = solver.eliminate_exists(&[y], &psi).unwrap();
        for x in -6..=6 {
            let got = holds(&qe, &assign(&[("x", x)]));
            let found = (-40..=40).any(|y| holds(&psi, &assign(&[("x", x), ("y", y)])));
            // every solution set in y is bounded above and its largest
            // element is at least -24, so the box decides existence
            prop_assert_eq!(got, found, "{} gives {} at x = {}", psi, qe, x);
        }
    }

    #[test]
    fn joinability_is_symmetric_and_reflexive(a in -3..=3i64, b in -3..=3i64, c in -3..=3i64, e in -3..=3i64) {
        let p = problem(TOY);
        let oracle = Oracle::new(p.system(), Bound::default());
        let s = parse_term(&p.signature, &format!("f({}, {})", a, b)).unwrap();
        let t = parse_term(&p.signature, &format!("{} + {}", c, e)).unwrap();
        prop_assert!(oracle.joinable(&s, &s));
        prop_assert_eq!(oracle.joinable(&s, &t), oracle.joinable(&t, &s));
        // f(a, b) reaches a when a <= b and a + z for z >= a otherwise,
        // with the extra z drawn from [-3, 3]
        let reachable = if a <= b { c + e == a } else { (a..=3).any(|z| a + z == c + e) };
        prop_assert_eq!(oracle.joinable(&s, &t), reachable, "{} vs {}", s, t);
    }

    #[test]
    fn ground_instances_match_enumeration(lhs in linear(), r in relation(), rhs in linear(), b in 1..=3i64) {
        let p = problem(TOY);
        let guard = parse_term(&p.signature, &format!("{} {} {}", lhs, r, rhs)).unwrap();
        let term = parse_term(&p.signature, "f(x, y)").unwrap();
        let oracle = Oracle::new(p.system(), Bound::with_values(b));
        let inst = oracle.ginst_term(&ConstrainedTerm::new(term, guard.clone()));
        let mut expected = 0;
        for x in -b..=b {
            for y in -b..=b {
                let s = assign(&[("x", x), ("y", y)]);
                if holds(&guard, &s) {
                    expected += 1;
                }
            }
        }
        prop_assert_eq!(inst.len(), expected);
    }

    #[test]
    fn deletion_only_removes_theorems(a in -2..=2i64, b in -3..=3i64, c in -2..=2i64, d in -3..=3i64, e in -2..=2i64, r in relation()) {
        let p = problem(TOY);
        let text = format!("exists z [z {} {} * x + {}] . x + z = {} * x + {} [x >= {}]", r, a, b, c, d, e);
        let Ok(eq) = parse_goal(&p.signature, &text).unwrap().to_ceq() else {
            return Ok(());
        };
        let engine = Engine::new(&p.system(), Solver::builtin());
        let (deleted, _) = engine.deletion_check(&eq);
        let theorem = (-8..=8).filter(|x| *x >= e).all(|x| {
            (-40..=40).any(|z| {
                let s = assign(&[("x", x), ("z", z)]);
                holds(&eq.eta, &s) && x + z == c * x + d
            })
        });
        prop_assert!(!deleted || theorem, "{} deleted but is not valid", text);
        if theorem {
            prop_assert!(deleted, "{} is a valid theory equation but was kept", text);
        }
    }

    #[test]
    fn inequalities_become_equivalent_equations(a in -2..=2i64, b in -3..=3i64, c in -2..=2i64, d in -3..=3i64, e in -2..=2i64, op in prop::sample::select(vec![">=", ">", "<=", "<"])) {
        let sig = lcri_core::Signature::standard();
        let text = format!("{} * x + {} {} {} * x + {} [x >= {}]", a, b, op, c, d, e);
        let Goal::Inequality(ineq) = parse_goal(&sig, &text).unwrap() else {
            panic!("{} is an inequality", text);
        };
        let eq = ineq.to_ceq().unwrap();
        for x in -4..=4 {
            let s = assign(&[("x", x)]);
            if !holds(&eq.guard, &s) {
                continue;
            }
            let (l, r) = (a * x + b, c * x + d);
            let direct = match op { ">=" => l >= r, ">" => l > r, "<=" => l <= r, _ => l < r };
            let found = match eq.binder.as_slice() {
                [m] => (-60..=60).any(|v| {
                    let t = s.clone().bind(m.clone(), Term::int(v));
                    holds(&eq.eta, &t) && holds(&Term::eq(eq.lhs.clone(), eq.rhs.clone()), &t)
                }),
                [] => holds(&Term::eq(eq.lhs.clone(), eq.rhs.clone()), &s),
                more => panic!("unexpected binder {:?}", more),
            };
            prop_assert_eq!(found, direct, "{} as {} at x = {}", text, eq, x);
        }
    }

    #[test]
    fn printing_and_parsing_round_trip(rhs in linear(), r in relation(), g in linear(), nested in any::<bool>()) {
        let body = if nested { format!("f({}, y) + z", rhs) } else { rhs.clone() };
        let text = format!(
            "SIGNATURE\n  f : Int * Int -> Int\nRULES\n  f(x, y) -> {} [x {} {} /\\ z >= 0]\nGOALS\n  f(x, 1) = {} [x {} {}]\n",
            body, r, g, rhs, r, g
        );
        let p = problem(&text);
        let printed = print_problem(&p);
        let q = parse_problem(&printed).unwrap();
        prop_assert_eq!(&p.rules, &q.rules);
        prop_assert_eq!(print_problem(&q), printed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replaying_a_transcript_reproduces_the_state(choices in prop::collection::vec(0..8usize, 0..6), pow in any::<bool>()) {
        let p = problem(if pow { POW } else { TOY });
        let engine = Arc::new(Engine::new(&p.system(), Solver::builtin()));
        let goals = p.goal_equations().unwrap();
        let mut s = Session::new(engine.clone(), goals.clone());
        for c in choices {
            let options: Vec<_> = engine.moves(s.state()).into_iter().filter(|m| m.applicable).collect();
            if options.is_empty() {
                break;
            }
            let mv = options[c % options.len()].mv.clone();
            s.apply(&mv).unwrap();
        }
        let again = Session::replay(engine, goals, &s.transcript()).unwrap();
        prop_assert_eq!(again.state().to_string(), s.state().to_string());
        prop_assert_eq!(again.transcript(), s.transcript());
        prop_assert!(s.verify_replay());
    }
}
