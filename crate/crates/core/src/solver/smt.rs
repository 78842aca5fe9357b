//! External solver bridge over the SMT-LIB 2 text protocol.
//!
//! Each query spawns the configured command, writes a script to its
//! standard input and reads `sat`/`unsat`/`unknown` plus an optional model
//! from its standard output.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use num_bigint::BigInt;
use num_traits::Signed;

use super::SolverError;
use crate::term::{Func, Sort, Subst, Term, TheoryOp, Value, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmtAnswer {
    Sat(Subst),
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtBridge {
    command: String,
}

fn sym(v: &Var) -> String {
    format!("|{}|", v)
}

fn sort_name(s: &Sort) -> Result<&'static str, SolverError> {
    match s {
        Sort::Int => Ok("Int"),
        Sort::Bool => Ok("Bool"),
        Sort::Named(n) => Err(SolverError::NonTheory(n.to_string())),
    }
}

fn int_lit(i: &BigInt) -> String {
    if i.is_negative() {
        format!("(- {})", -i)
    } else {
        i.to_string()
    }
}

/// SMT-LIB rendering of a theory term. `div`/`mod` are mapped to
/// truncating division; `exp` has no encoding.
pub fn encode(t: &Term) -> Result<String, SolverError> {
    use TheoryOp::*;
    Ok(match t {
        Term::Var(v) => {
            sort_name(v.sort())?;
            sym(v)
        }
        Term::Val(Value::Int(i)) => int_lit(i),
        Term::Val(Value::Bool(b)) => b.to_string(),
        Term::App(Func::User(d), _) => return Err(SolverError::NonTheory(d.name.to_string())),
        Term::App(Func::Theory(op), args) => {
            let a: Vec<String> = args.iter().map(encode).collect::<Result<_, _>>()?;
            let bin = |s: &str| format!("({} {} {})", s, a[0], a[1]);
            let tdiv = || {
                format!(
                    "(ite (>= {0} 0) (div {0} {1}) (- (div (- {0}) {1})))",
                    a[0], a[1]
                )
            };
            match op {
                Add => bin("+"),
                Sub => bin("-"),
                Mul => bin("*"),
                Exp => return Err(SolverError::NonLinear(format!("no encoding for {}", t))),
                Div => tdiv(),
                Mod => format!("(- {} (* {} {}))", a[0], a[1], tdiv()),
                Ge => bin(">="),
                Gt => bin(">"),
                Le => bin("<="),
                Lt => bin("<"),
                EqInt | EqBool | Iff => bin("="),
                NeInt | NeBool => bin("distinct"),
                And => bin("and"),
                Or => bin("or"),
                Implies => bin("=>"),
                Not => format!("(not {})", a[0]),
            }
        }
    })
}

/// Script checking satisfiability of `phi` with the optional block
/// `∀bound. ¬body` conjoined.
pub fn script(phi: &Term, negated_exists: Option<(&[Var], &Term)>) -> Result<String, SolverError> {
    let mut free: BTreeSet<Var> = phi.vars();
    if let Some((xs, body)) = negated_exists {
        for v in body.vars() {
            if !xs.contains(&v) {
                free.insert(v);
            }
        }
    }
    let mut s = String::from("(set-logic ALL)\n");
    for v in &free {
        writeln!(s, "(declare-const {} {})", sym(v), sort_name(v.sort())?).unwrap();
    }
    writeln!(s, "(assert {})", encode(phi)?).unwrap();
    if let Some((xs, body)) = negated_exists {
        let binders: Vec<String> = xs
            .iter()
            .map(|v| Ok(format!("({} {})", sym(v), sort_name(v.sort())?)))
            .collect::<Result<_, SolverError>>()?;
        writeln!(
            s,
            "(assert (not (exists ({}) {})))",
            binders.join(" "),
            encode(body)?
        )
        .unwrap();
    }
    s.push_str("(check-sat)\n(get-model)\n(exit)\n");
    Ok(s)
}

impl SmtBridge {
    pub fn new(command: &str) -> SmtBridge {
        SmtBridge {
            command: command.to_string(),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Runs one query. `vars` lists the variables whose model values are
    /// wanted.
    pub fn check(&self, script: &str, vars: &BTreeSet<Var>) -> Result<SmtAnswer, SolverError> {
        log::debug!("smt query via `{}`:\n{}", self.command, script);
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Smt(format!("cannot start `{}`: {}", self.command, e)))?;
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(script.as_bytes())
            .map_err(|e| SolverError::Smt(e.to_string()))?;
        let out = child
            .wait_with_output()
            .map_err(|e| SolverError::Smt(e.to_string()))?;
        let text = String::from_utf8_lossy(&out.stdout);
        parse_response(&text, vars)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' | ')' => {
                out.push(c.to_string());
                chars.next();
            }
            '|' => {
                chars.next();
                let mut tok = String::from("|");
                for d in chars.by_ref() {
                    tok.push(d);
                    if d == '|' {
                        break;
                    }
                }
                out.push(tok);
            }
            ';' => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut tok = String::new();
                while let Some(&d) = chars.peek() {
                    if d == '(' || d == ')' || d.is_whitespace() {
                        break;
                    }
                    tok.push(d);
                    chars.next();
                }
                out.push(tok);
            }
        }
    }
    out
}

fn parse_sexps(tokens: &[String]) -> Vec<Sexp> {
    fn go(tokens: &[String], i: &mut usize) -> Option<Sexp> {
        let t = tokens.get(*i)?;
        *i += 1;
        if t == "(" {
            let mut items = Vec::new();
            while tokens.get(*i).is_some_and(|t| t != ")") {
                items.push(go(tokens, i)?);
            }
            *i += 1;
            Some(Sexp::List(items))
        } else {
            Some(Sexp::Atom(t.clone()))
        }
    }
    let mut i = 0;
    let mut out = Vec::new();
    while let Some(s) = go(tokens, &mut i) {
        out.push(s);
    }
    out
}

fn value_of(s: &Sexp) -> Option<Value> {
    match s {
        Sexp::Atom(a) if a == "true" => Some(Value::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Value::Bool(false)),
        Sexp::Atom(a) => a.parse::<BigInt>().ok().map(Value::Int),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(m), x] if m == "-" => match value_of(x)? {
                Value::Int(i) => Some(Value::Int(-i)),
                _ => None,
            },
            _ => None,
        },
    }
}

/// Parses the solver's reply. Model entries for unknown names are ignored.
pub fn parse_response(text: &str, vars: &BTreeSet<Var>) -> Result<SmtAnswer, SolverError> {
    let sexps = parse_sexps(&tokenize(text));
    let status = sexps
        .iter()
        .find_map(|s| match s {
            Sexp::Atom(a) if a == "sat" || a == "unsat" || a == "unknown" => Some(a.as_str()),
            _ => None,
        })
        .ok_or_else(|| SolverError::Smt(format!("no check-sat answer in {:?}", text.trim())))?;
    match status {
        "unsat" => return Ok(SmtAnswer::Unsat),
        "unknown" => return Ok(SmtAnswer::Unknown),
        _ => {}
    }
    let mut model = Subst::new();
    let mut visit = |items: &[Sexp]| {
        if let [Sexp::Atom(df), Sexp::Atom(name), Sexp::List(_), Sexp::Atom(_), val] = items {
            if df == "define-fun" {
                let name = name.trim_matches('|');
                if let Some(v) = vars.iter().find(|v| v.to_string() == name) {
                    if let Some(x) = value_of(val) {
                        let _ = model.insert(v.clone(), Term::Val(x));
                    }
                }
            }
        }
    };
    for s in &sexps {
        if let Sexp::List(items) = s {
            visit(items);
            for inner in items {
                if let Sexp::List(entry) = inner {
                    visit(entry);
                }
            }
        }
    }
    Ok(SmtAnswer::Sat(model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding() {
        let x = Term::Var(Var::int("x"));
        let t = Term::ge(Term::mul(x.clone(), x), Term::int(-1));
        assert_eq!(encode(&t).unwrap(), "(>= (* |x| |x|) (- 1))");
        let e = Term::op(TheoryOp::Exp, vec![Term::int(2), Term::Var(Var::int("n"))]);
        assert!(encode(&e).is_err());
    }

    #[test]
    fn response_parsing() {
        let vars: BTreeSet<Var> = [Var::int("x"), Var::with_index("n", 1, Sort::Int)]
            .into_iter()
            .collect();
        let reply = "sat\n(\n  (define-fun x () Int (- 3))\n  (define-fun |n'| () Int 4)\n)\n";
        match parse_response(reply, &vars).unwrap() {
            SmtAnswer::Sat(m) => {
                assert_eq!(m.get(&Var::int("x")), Some(&Term::int(-3)));
                assert_eq!(
                    m.get(&Var::with_index("n", 1, Sort::Int)),
                    Some(&Term::int(4))
                );
            }
            other => panic!("{:?}", other),
        }
        assert_eq!(parse_response("unsat\n", &vars).unwrap(), SmtAnswer::Unsat);
        assert!(parse_response("error", &vars).is_err());
    }

    #[test]
    fn script_shape() {
        let x = Term::Var(Var::int("x"));
        let s = script(&Term::ge(x, Term::int(0)), None).unwrap();
        assert!(s.starts_with("(set-logic ALL)\n(declare-const |x| Int)\n(assert (>= |x| 0))"));
        assert!(s.contains("(check-sat)\n(get-model)"));
    }
}
