//! Proof documents as parsed, before any checking.

use serde::Serialize;

use crate::term::{Subst, Term};

/// Byte range plus the 1-based line and column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { end: other.end, ..self }
    }

    pub fn text(self, src: &str) -> &str {
        &src[self.start..self.end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProofKind {
    Conjecture,
    Property,
    Lemma,
    Theorem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Equal,
    Iff,
    Implies,
    /// `lhs <= rhs`: the right side implies the left.
    ImpliedBy,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equal => "==",
            Relation::Iff => "<=>",
            Relation::Implies => "=>",
            Relation::ImpliedBy => "<=",
        }
    }

    /// The formula `lhs R rhs` in the core language.
    pub fn formula(self, lhs: Term, rhs: Term) -> Term {
        match self {
            Relation::Equal => Term::eq(lhs, rhs),
            Relation::Iff => Term::app("<=>", vec![lhs, rhs]),
            Relation::Implies => Term::app("=>", vec![lhs, rhs]),
            Relation::ImpliedBy => Term::app("=>", vec![rhs, lhs]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Hint {
    /// A context item `Ck` or derived item `Dk`.
    Item(String),
    Def(String),
    Lemma {
        name: String,
        subst: Option<Subst>,
    },
    Axioms(String),
    Arith,
    Evaluation,
    /// `obvious`, `PL`, `MP`: contribute nothing.
    Trivial(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextItem {
    pub label: String,
    pub term: Term,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedItem {
    pub label: String,
    pub term: Term,
    pub hints: Vec<Hint>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub relation: Relation,
    pub hints: Vec<Hint>,
    pub rhs: Term,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofSeq {
    pub first: Term,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimpleBody {
    pub exportation: Option<Term>,
    pub completion: Option<Term>,
    pub context: Vec<ContextItem>,
    pub derived: Vec<DerivedItem>,
    pub goal: Option<Term>,
    pub seq: Option<ProofSeq>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseKind {
    Contract,
    Base,
    Induction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub kind: CaseKind,
    pub index: u32,
    pub body: SimpleBody,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ProofBody {
    Simple(SimpleBody),
    Inductive { induct: Term, cases: Vec<Case> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proof {
    pub kind: ProofKind,
    pub name: String,
    pub statement: Term,
    pub exportation: Option<Term>,
    pub completion: Option<Term>,
    pub body: ProofBody,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub ret: String,
    pub body: Term,
    pub assume_terminating: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbbrevDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: Term,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyDecl {
    pub name: String,
    pub statement: Term,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ItemKind {
    Function(FunctionDecl),
    Abbrev(AbbrevDecl),
    Property(PropertyDecl),
    Assume(PropertyDecl),
    Proof(Proof),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub kind: ItemKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub items: Vec<Item>,
}
