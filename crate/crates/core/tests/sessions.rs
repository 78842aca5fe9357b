use std::sync::Arc;

use lcri_core::ri::session::{Session, Status};
use lcri_core::ri::Engine;
use lcri_core::syntax::parse_problem;
use lcri_core::Solver;

fn auto(text: &str, budget: usize) -> Session {
    let p = parse_problem(text).unwrap();
    let engine = Engine::new(&p.system(), Solver::builtin());
    let mut s = Session::new(Arc::new(engine), p.goal_equations().unwrap());
    s.auto(budget);
    s
}

#[test]
fn inequality_goal_is_proved() {
    let s = auto(include_str!("../../../problems/pow-inequality.lctrs"), 20);
    assert_eq!(s.status(), Status::Proved);
    assert_eq!(s.history().len(), 5);
}

#[test]
fn toy_goals_split_as_expected() {
    let s = auto(include_str!("../../../problems/toy.lctrs"), 20);
    assert_eq!(s.status(), Status::Stuck);
    assert_eq!(
        s.transcript(),
        "deletion eq=2\nsimplification eq=0 side=l pos=ε rule=R1\ndeletion eq=0\n"
    );
    let left: Vec<String> = s
        .state()
        .equations
        .iter()
        .map(|e| e.eq.to_string())
        .collect();
    assert_eq!(left, ["x + z = x + x [x >= 1 /\\ z >= x]"]);
}

#[test]
fn constructor_cases_are_not_certified() {
    let s = auto(include_str!("../../../problems/overlap.lctrs"), 20);
    assert_eq!(s.status(), Status::Stuck);
    assert!(s.history().is_empty());
}

#[test]
fn budget_bounds_the_run() {
    let s = auto(include_str!("../../../problems/pow.lctrs"), 3);
    assert_eq!(s.history().len(), 3);
    assert_eq!(s.status(), Status::Open);
}
