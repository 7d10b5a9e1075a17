//! A small trace replayer. It re-checks, step by step, every primitive
//! inference the main engine claims to have made. It shares no code with
//! the engine: terms, substitution, evaluation and the decision checks for
//! congruence, propositional and arithmetic certificates are all local.
//!
//! A trace is line-oriented text, one s-expression per line. The header
//! fixes the environment (definitions and assumed lemmas) and the theorem;
//! the steps derive numbered facts until one of them is the theorem.

pub mod arith;
pub mod axioms;
pub mod cc;
pub mod prop;
pub mod replay;
pub mod sexp;
pub mod term;
pub mod theory;

use thiserror::Error;

pub use replay::{replay_text, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("definition: {0}")]
    Def(String),
}
