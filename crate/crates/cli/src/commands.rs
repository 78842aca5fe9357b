//! Subcommands of the `lcri` binary.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use lcri_core::oracle::{Bound, Oracle};
use lcri_core::ri::session::{Session, Status};
use lcri_core::ri::{Engine, Move};
use lcri_core::syntax::{parse_problem, Problem};
use lcri_core::Solver;

use crate::service::{self, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_OPEN: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "lcri",
    version,
    about = "Rewriting induction for constrained existential equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// External SMT-LIB 2 solver command for nonlinear queries, e.g. "z3 -in".
    #[arg(long)]
    pub smt_cmd: Option<String>,
}

impl SolverArgs {
    fn solver(&self) -> Solver {
        match &self.smt_cmd {
            Some(c) => Solver::with_smt(c),
            None => Solver::builtin(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a problem and report the rule-class checks.
    Validate { file: PathBuf },
    /// Prove the goals, automatically or from moves read on standard input.
    Prove {
        file: PathBuf,
        #[arg(long)]
        auto: bool,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        /// Accept Expansions whose termination could not be shown.
        #[arg(long)]
        assume_terminating: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Re-apply a transcript to the goals of a problem.
    Replay {
        file: PathBuf,
        transcript: PathBuf,
        #[arg(long)]
        assume_terminating: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check every goal by bounded enumeration.
    OracleCheck {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        bound: i64,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 16)]
        witnesses: i64,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn load(path: &Path) -> Result<Problem, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    parse_problem(&text).map_err(|e| format!("{}: {}", path.display(), e))
}

fn session(problem: &Problem, solver: Solver, assume: bool) -> Result<Session, String> {
    let goals = problem.goal_equations().map_err(|e| e.to_string())?;
    let engine = Engine::new(&problem.system(), solver).with_assumed_termination(assume);
    Ok(Session::new(Arc::new(engine), goals))
}

fn exit_for(status: Status) -> i32 {
    match status {
        Status::Proved => EXIT_OK,
        _ => EXIT_OPEN,
    }
}

/// Runs a command, writing results to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {}", msg);
            EXIT_ERROR
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match cli.command {
        Command::Validate { file } => {
            let p = load(&file)?;
            let mut ok = true;
            for r in &p.rules {
                let violations = r.violations();
                if violations.is_empty() {
                    writeln!(out, "{}: {}: ok", r.id, r).map_err(io)?;
                    continue;
                }
                writeln!(out, "{}: {}", r.id, r).map_err(io)?;
                for v in &violations {
                    let fix = if v.fixable(r) {
                        "fixed by normalisation"
                    } else {
                        "not fixable"
                    };
                    ok &= v.fixable(r);
                    writeln!(out, "  {} ({})", v, fix).map_err(io)?;
                }
                writeln!(out, "  normalised: {}", r.normalize()).map_err(io)?;
            }
            for g in p.goal_equations().map_err(|e| e.to_string())? {
                writeln!(out, "goal: {}", g).map_err(io)?;
            }
            Ok(if ok { EXIT_OK } else { EXIT_ERROR })
        }
        Command::Prove {
            file,
            auto,
            budget,
            assume_terminating,
            solver,
        } => {
            let p = load(&file)?;
            let mut s = session(&p, solver.solver(), assume_terminating)?;
            if auto {
                s.auto(budget);
            } else {
                interact(&mut s, &mut std::io::stdin().lock(), err).map_err(io)?;
            }
            out.write_all(s.transcript().as_bytes()).map_err(io)?;
            write!(err, "{}", s.state()).map_err(io)?;
            writeln!(err, "status: {}", s.status()).map_err(io)?;
            Ok(exit_for(s.status()))
        }
        Command::Replay {
            file,
            transcript,
            assume_terminating,
            solver,
        } => {
            let p = load(&file)?;
            let text = std::fs::read_to_string(&transcript)
                .map_err(|e| format!("{}: {}", transcript.display(), e))?;
            let goals = p.goal_equations().map_err(|e| e.to_string())?;
            let engine = Engine::new(&p.system(), solver.solver())
                .with_assumed_termination(assume_terminating);
            let s = Session::replay(Arc::new(engine), goals, &text).map_err(|e| e.to_string())?;
            write!(out, "{}", s.state()).map_err(io)?;
            writeln!(out, "status: {}", s.status()).map_err(io)?;
            Ok(exit_for(s.status()))
        }
        Command::OracleCheck {
            file,
            bound,
            depth,
            witnesses,
        } => {
            let p = load(&file)?;
            let b = Bound {
                values: bound,
                witnesses,
                depth,
                ..Bound::default()
            };
            if !b.is_valid() {
                return Err("bounds must be positive".into());
            }
            let oracle = Oracle::new(p.system(), b);
            let mut all = true;
            for g in p.goal_equations().map_err(|e| e.to_string())? {
                let rep = oracle.inductive_theorem(&g);
                all &= rep.holds();
                writeln!(out, "{}", rep).map_err(io)?;
            }
            Ok(if all { EXIT_OK } else { EXIT_OPEN })
        }
        Command::Serve { port, solver } => {
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            let config = ServiceConfig {
                smt_command: solver.smt_cmd,
            };
            rt.block_on(service::serve(port, config)).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

/// Reads commands until end of input: a transcript move line, `undo`,
/// `moves`, `auto N`, `state` or `quit`.
pub fn interact(
    s: &mut Session,
    input: &mut dyn BufRead,
    err: &mut dyn Write,
) -> std::io::Result<()> {
    write!(err, "{}", s.state())?;
    let mut line = String::new();
    loop {
        if s.status() == Status::Proved {
            writeln!(err, "proved")?;
            return Ok(());
        }
        write!(err, "> ")?;
        err.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let cmd = line.trim();
        let mut words = cmd.split_whitespace();
        match words.next() {
            None => continue,
            Some(c) if c.starts_with('#') => continue,
            Some("quit") => return Ok(()),
            Some("state") => write!(err, "{}", s.state())?,
            Some("undo") => match s.undo() {
                Ok(rec) => writeln!(err, "undone: {}", rec.mv)?,
                Err(e) => writeln!(err, "error: {}", e)?,
            },
            Some("moves") => {
                for m in s.engine().moves(s.state()) {
                    match &m.blocked_by {
                        None if m.applicable => writeln!(err, "  {}", m.mv)?,
                        b => writeln!(
                            err,
                            "  ({}) blocked: {}",
                            m.mv,
                            b.as_deref().unwrap_or("not applicable")
                        )?,
                    }
                }
            }
            Some("auto") => {
                let n = words.next().and_then(|w| w.parse().ok()).unwrap_or(100);
                let made = s.auto(n);
                writeln!(err, "{} moves, {}", made, s.status())?;
                write!(err, "{}", s.state())?;
            }
            Some(_) => match cmd.parse::<Move>().and_then(|mv| s.apply(&mv).cloned()) {
                Ok(rec) => {
                    for n in &rec.notes {
                        writeln!(err, "  note: {}", n)?;
                    }
                    write!(err, "{}", s.state())?;
                }
                Err(e) => {
                    writeln!(err, "error: {}", e)?;
                    for ev in e.evidence() {
                        writeln!(err, "  {}", ev)?;
                    }
                }
            },
        }
    }
}
