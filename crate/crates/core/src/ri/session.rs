//! Proof sessions: a state with its move history, undo, automatic search
//! and transcripts.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::{Engine, Move, MoveError, MoveRecord, RiState};
use crate::constrained::{Ceq, Side};
use crate::lctrs::Rule;
use crate::term::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Open,
    Proved,
    Stuck,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Open => "open",
            Status::Proved => "proved",
            Status::Stuck => "stuck",
        })
    }
}

#[derive(Debug, Clone, Error)]
pub enum SessionError {
    #[error("nothing to undo")]
    EmptyHistory,
    #[error("transcript line {line}: {error}")]
    Replay { line: usize, error: MoveError },
}

/// A Simplification taken from a history: the equation before and after,
/// and the rule used where.
#[derive(Debug, Clone)]
pub struct SimplificationStep {
    pub before: Ceq,
    pub after: Ceq,
    pub rule: Rule,
    pub side: Side,
    pub pos: Position,
}

#[derive(Debug, Clone)]
pub struct Session {
    engine: Arc<Engine>,
    initial: RiState,
    state: RiState,
    history: Vec<(RiState, MoveRecord)>,
    stuck: bool,
}

impl Session {
    pub fn new(engine: Arc<Engine>, goals: Vec<Ceq>) -> Session {
        let initial = RiState::new(goals);
        Session {
            engine,
            state: initial.clone(),
            initial,
            history: Vec::new(),
            stuck: false,
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn state(&self) -> &RiState {
        &self.state
    }

    pub fn initial(&self) -> &RiState {
        &self.initial
    }

    /// Source states and records of the applied moves, oldest first.
    pub fn history(&self) -> &[(RiState, MoveRecord)] {
        &self.history
    }

    pub fn status(&self) -> Status {
        if self.state.is_proved() {
            Status::Proved
        } else if self.stuck {
            Status::Stuck
        } else {
            Status::Open
        }
    }

    pub fn apply(&mut self, mv: &Move) -> Result<&MoveRecord, MoveError> {
        let (next, record) = self.engine.apply(&self.state, mv)?;
        let prev = std::mem::replace(&mut self.state, next);
        self.history.push((prev, record));
        self.stuck = false;
        Ok(&self.history.last().unwrap().1)
    }

    pub fn undo(&mut self) -> Result<MoveRecord, SessionError> {
        let (prev, record) = self.history.pop().ok_or(SessionError::EmptyHistory)?;
        self.state = prev;
        self.stuck = false;
        Ok(record)
    }

    /// Applies automatic moves until the goals are gone, no move is left
    /// or `budget` moves were made. Returns the number of moves made.
    pub fn auto(&mut self, budget: usize) -> usize {
        let mut made = 0;
        while !self.state.is_proved() && made < budget {
            match self.engine.auto_move(&self.state) {
                Some(mv) => {
                    if self.apply(&mv).is_err() {
                        self.stuck = true;
                        break;
                    }
                    made += 1;
                }
                None => {
                    self.stuck = true;
                    break;
                }
            }
        }
        if !self.state.is_proved() && made == budget && budget > 0 {
            self.stuck = self.stuck || self.engine.auto_move(&self.state).is_none();
        }
        made
    }

    /// One move per line, followed by `#` comment lines with the notes of
    /// the move.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for (_, rec) in &self.history {
            out.push_str(&rec.mv.to_string());
            out.push('\n');
            for n in &rec.notes {
                out.push_str("#   ");
                out.push_str(n);
                out.push('\n');
            }
        }
        out
    }

    /// Rebuilds a session by applying the moves of `transcript` to the
    /// initial state of `goals`. Blank and `#` lines are skipped.
    pub fn replay(
        engine: Arc<Engine>,
        goals: Vec<Ceq>,
        transcript: &str,
    ) -> Result<Session, SessionError> {
        let mut s = Session::new(engine, goals);
        for (i, line) in transcript.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mv: Move = line
                .parse()
                .map_err(|error| SessionError::Replay { line: i + 1, error })?;
            s.apply(&mv)
                .map_err(|error| SessionError::Replay { line: i + 1, error })?;
        }
        Ok(s)
    }

    /// Whether replaying the history from the initial state reproduces
    /// every recorded state.
    pub fn verify_replay(&self) -> bool {
        let mut st = self.initial.clone();
        for (i, (src, rec)) in self.history.iter().enumerate() {
            if st != *src {
                return false;
            }
            match self.engine.apply(&st, &rec.mv) {
                Ok((next, again)) if again == *rec => st = next,
                _ => return false,
            }
            let expected = self
                .history
                .get(i + 1)
                .map(|(s, _)| s)
                .unwrap_or(&self.state);
            if st != *expected {
                return false;
            }
        }
        st == self.state
    }

    pub fn simplification_steps(&self) -> Vec<SimplificationStep> {
        let mut out = Vec::new();
        for (i, (src, rec)) in self.history.iter().enumerate() {
            if let Move::Simplification {
                eq,
                side,
                pos,
                rule,
                ..
            } = &rec.mv
            {
                let dst = self
                    .history
                    .get(i + 1)
                    .map(|(s, _)| s)
                    .unwrap_or(&self.state);
                let (Some(before), Some(after), Some(rule)) = (
                    src.get(*eq),
                    dst.get(*eq),
                    self.engine.lookup_rule(src, rule),
                ) else {
                    continue;
                };
                out.push(SimplificationStep {
                    before: before.clone(),
                    after: after.clone(),
                    rule,
                    side: *side,
                    pos: pos.clone(),
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constrained::tests::pow_goal;
    use crate::ri::tests::pow_engine;

    #[test]
    fn auto_undo_and_replay() {
        let (sig, engine) = pow_engine();
        let engine = Arc::new(engine);
        let mut s = Session::new(engine.clone(), vec![pow_goal(&sig)]);
        assert_eq!(s.status(), Status::Open);
        assert!(matches!(s.undo(), Err(SessionError::EmptyHistory)));
        assert_eq!(s.auto(20), 5);
        assert_eq!(s.status(), Status::Proved);
        assert!(s.verify_replay());
        let text = s.transcript();
        let again = Session::replay(engine.clone(), vec![pow_goal(&sig)], &text).unwrap();
        assert_eq!(again.state(), s.state());
        assert_eq!(again.transcript(), text);
        assert_eq!(s.simplification_steps().len(), 2);

        let before = s.history()[4].0.clone();
        s.undo().unwrap();
        assert_eq!(s.state(), &before);
        assert!(s.verify_replay());

        let mut one = Session::new(engine.clone(), vec![pow_goal(&sig)]);
        assert_eq!(one.auto(1), 1);
        assert_eq!(one.status(), Status::Open);
        let mut none = Session::new(engine, vec![]);
        assert_eq!(none.auto(5), 0);
        assert_eq!(none.status(), Status::Proved);
    }

    #[test]
    fn replay_reports_the_line() {
        let (sig, engine) = pow_engine();
        let err = Session::replay(
            Arc::new(engine),
            vec![pow_goal(&sig)],
            "# c\nexpansion eq=0 orient=l2r pos=ε\ndeletion eq=2\n",
        )
        .unwrap_err();
        assert!(matches!(err, SessionError::Replay { line: 3, .. }));
    }
}
