//! What the checker found, item by item.

use serde::Serialize;

use crate::ast::Span;
use crate::testgen::{render_assignment, Assignment};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Skipped,
    Warn,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Skipped => "SKIPPED",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        }
    }
}

/// One named check with its outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Stable identifier of the kind of check.
    pub code: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, code: &'static str, status: Status) -> Check {
        Check { name: name.into(), code, status, message: None, span: None, counterexamples: Vec::new() }
    }

    pub fn pass(name: impl Into<String>, code: &'static str) -> Check {
        Check::new(name, code, Status::Pass)
    }

    pub fn fail(name: impl Into<String>, code: &'static str, message: impl Into<String>) -> Check {
        Check::new(name, code, Status::Fail).with_message(message)
    }

    pub fn warn(name: impl Into<String>, code: &'static str, message: impl Into<String>) -> Check {
        Check::new(name, code, Status::Warn).with_message(message)
    }

    pub fn with_message(mut self, m: impl Into<String>) -> Check {
        self.message = Some(m.into());
        self
    }

    pub fn at(mut self, span: Span) -> Check {
        self.span = Some(span);
        self
    }

    pub fn with_counterexamples(mut self, cxs: &[Assignment]) -> Check {
        self.counterexamples = cxs.iter().map(render_assignment).collect();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Function,
    Property,
    Assumption,
    Proof,
}

/// The checks run for one document item.
#[derive(Debug, Clone, Serialize)]
pub struct ItemReport {
    pub name: String,
    pub kind: ItemKind,
    /// How the item was introduced, e.g. `Conjecture`.
    pub title: String,
    pub status: Status,
    pub span: Span,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
    #[serde(skip)]
    pub trace: Option<Trace>,
}

impl ItemReport {
    pub fn new(name: &str, kind: ItemKind, title: &str, span: Span, checks: Vec<Check>) -> ItemReport {
        let status = summarize(&checks);
        ItemReport {
            name: name.to_string(),
            kind,
            title: title.to_string(),
            status,
            span,
            checks,
            trace_file: None,
            trace: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Fail if any check failed, warn if any warned, pass otherwise.
pub fn summarize(checks: &[Check]) -> Status {
    checks.iter().map(|c| c.status).filter(|s| *s != Status::Skipped).max().unwrap_or(Status::Pass)
}
