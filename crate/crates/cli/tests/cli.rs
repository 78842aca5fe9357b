use std::path::PathBuf;
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name)
}

fn lcri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcri"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn prove_pow_automatically() {
    let o = lcri(&["prove", problem("pow.lctrs").to_str().unwrap(), "--auto"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "expansion eq=0 orient=l2r pos=ε\n\
         deletion eq=1\n\
         simplification eq=2 side=l pos=2.2 rule=calc:sub\n\
         simplification eq=2 side=l pos=2 rule=H1\n\
         deletion eq=2\n"
    );
}

#[test]
fn budget_exhaustion_exits_two() {
    let o = lcri(&[
        "prove",
        problem("pow.lctrs").to_str().unwrap(),
        "--auto",
        "--budget",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn validate_rejects_variable_lhs() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.lctrs");
    std::fs::write(
        &f,
        "THEORY ints\nSIGNATURE\n  g : Int -> Int\nRULES\n  x -> g(x)\n",
    )
    .unwrap();
    let o = lcri(&["validate", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
    let o = lcri(&["validate", problem("pow.lctrs").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validate_reports_normalisation() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("lvf.lctrs");
    std::fs::write(
        &f,
        "SIGNATURE\n  pow : Int * Int -> Int\nRULES\n  pow(2, n) -> 1 [n < 1]\n",
    )
    .unwrap();
    let o = lcri(&["validate", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("A2: value in left-hand side at position 1"),
        "{}",
        text
    );
    assert!(
        text.contains("normalised: pow(x, n) -> 1 [n < 1 /\\ x = 2]"),
        "{}",
        text
    );
}

#[test]
fn oracle_check_finds_the_counterexample() {
    let o = lcri(&[
        "oracle-check",
        problem("toy.lctrs").to_str().unwrap(),
        "--bound",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(
        text.contains("counterexample: {x -> 1, z -> 2}"),
        "{}",
        text
    );
    assert_eq!(text.matches("holds at bound").count(), 2);
}

#[test]
fn replay_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("proof.txt");
    let o = lcri(&["prove", problem("pow.lctrs").to_str().unwrap(), "--auto"]);
    std::fs::write(&t, &o.stdout).unwrap();
    let o = lcri(&[
        "replay",
        problem("pow.lctrs").to_str().unwrap(),
        t.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("status: proved\n"));
    std::fs::write(&t, "deletion eq=0\n").unwrap();
    let o = lcri(&[
        "replay",
        problem("pow.lctrs").to_str().unwrap(),
        t.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("transcript line 1"));
}

#[test]
fn interactive_moves_from_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_lcri"))
        .args(["prove", problem("pow.lctrs").to_str().unwrap()])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"moves\nexpansion eq=0 orient=l2r pos=1\nexpansion eq=0 orient=l2r pos=\xce\xb5\nundo\nauto 20\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("undone: expansion eq=0 orient=l2r pos=ε"),
        "{}",
        err
    );
    assert!(err.contains("error: side condition failed"), "{}", err);
    assert_eq!(stdout(&o).lines().count(), 5);
}
