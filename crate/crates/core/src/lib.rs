//! Logically constrained term rewriting with existentially quantified
//! constrained equations and a rewriting-induction prover.

pub mod constrained;
pub mod lctrs;
pub mod oracle;
pub mod ri;
pub mod signature;
pub mod solver;
pub mod syntax;
pub mod term;
pub mod theory;

pub use signature::Signature;
pub use solver::{Outcome, Solver, Verdict};
pub use term::{Func, FuncDecl, Position, Sort, Subst, Term, TheoryOp, Value, Var};
