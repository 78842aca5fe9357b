//! The external solver bridge against scripted stand-ins for a solver.

use std::os::unix::fs::PermissionsExt;
use std::path::Path;

use lcri_core::{Outcome, Solver, Term, Var};

fn fake_solver(dir: &Path, name: &str, reply: &str) -> String {
    let path = dir.join(name);
    std::fs::write(
        &path,
        format!("#!/bin/sh\ncat > /dev/null\nprintf '{}'\n", reply),
    )
    .unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path.display().to_string()
}

fn square_is_nine() -> Term {
    let x = Term::var(Var::int("x"));
    Term::eq(Term::mul(x.clone(), x), Term::int(9))
}

#[test]
fn nonlinear_queries_need_a_backend() {
    let v = Solver::builtin().is_satisfiable(&square_is_nine());
    assert_eq!(v.outcome, Outcome::Unknown);
}

#[test]
fn witnesses_from_the_backend_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let honest = fake_solver(
        dir.path(),
        "honest",
        "sat\\n((define-fun |x| () Int (- 3)))\\n",
    );
    let v = Solver::with_smt(&honest).is_satisfiable(&square_is_nine());
    assert_eq!(v.outcome, Outcome::Sat);
    assert_eq!(v.witness.unwrap().get(&Var::int("x")), Some(&Term::int(-3)));

    let lying = fake_solver(dir.path(), "lying", "sat\\n((define-fun |x| () Int 2))\\n");
    let v = Solver::with_smt(&lying).is_satisfiable(&square_is_nine());
    assert_eq!(v.outcome, Outcome::Unknown);
}

#[test]
fn unsat_and_unknown_answers() {
    let dir = tempfile::tempdir().unwrap();
    let unsat = fake_solver(dir.path(), "unsat", "unsat\\n");
    let s = Solver::with_smt(&unsat);
    assert_eq!(s.is_satisfiable(&square_is_nine()).outcome, Outcome::Unsat);
    let x = Term::var(Var::int("x"));
    let nonneg = Term::ge(Term::mul(x.clone(), x), Term::int(0));
    assert_eq!(s.is_valid(&nonneg).outcome, Outcome::Valid);

    let unknown = fake_solver(dir.path(), "unknown", "unknown\\n");
    assert_eq!(
        Solver::with_smt(&unknown)
            .is_satisfiable(&square_is_nine())
            .outcome,
        Outcome::Unknown
    );
    let missing = dir.path().join("absent").display().to_string();
    assert_eq!(
        Solver::with_smt(&missing)
            .is_satisfiable(&square_is_nine())
            .outcome,
        Outcome::Unknown
    );
}

#[test]
fn linear_queries_stay_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let wrong = fake_solver(dir.path(), "wrong", "unsat\\n");
    let x = Term::var(Var::int("x"));
    let v =
        Solver::with_smt(&wrong).is_satisfiable(&Term::eq(Term::add(x.clone(), x), Term::int(4)));
    assert_eq!(v.outcome, Outcome::Sat);
}
