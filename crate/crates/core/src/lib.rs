//! Parsing, checking and proving for calculational proof documents.
//!
//! A document is parsed into definitions, properties and proofs; the
//! checker walks it in order, growing an [`env::Env`] and asking the
//! [`prover`] for every sequent. Successful proofs come with kernel traces
//! that `cpc-kernel` can replay on its own.

pub mod ast;
pub mod checker;
pub mod env;
pub mod eval;
pub mod induction;
pub mod parser;
pub mod prover;
pub mod report;
pub mod term;
pub mod testgen;
pub mod trace;
pub mod typeguard;
