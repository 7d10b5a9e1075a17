//! The run report: checked items plus a flat list of diagnostics.

use cpc_core::ast::Span;
use cpc_core::parser::ParseError;
use cpc_core::report::{Check, ItemReport, Status};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

/// A span tied to the file it points into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Location {
    pub file: String,
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl Location {
    fn new(file: &str, s: Span) -> Location {
        Location { file: file.to_string(), start: s.start, end: s.end, line: s.line, col: s.col }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Related {
    pub span: Location,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagData {
    pub check: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub span: Location,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<Related>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DiagData>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub file: String,
    pub items: Vec<ItemReport>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn new(file: &str, items: Vec<ItemReport>, parse_errors: &[ParseError]) -> Report {
        let mut diagnostics: Vec<Diagnostic> = parse_errors
            .iter()
            .map(|e| Diagnostic {
                severity: Severity::Error,
                code: "syntax".into(),
                span: Location::new(file, e.span),
                message: e.message.clone(),
                related: Vec::new(),
                data: None,
            })
            .collect();
        for item in &items {
            diagnostics.extend(item.checks.iter().filter_map(|c| check_diagnostic(file, item, c)));
        }
        Report { file: file.to_string(), items, diagnostics }
    }

    pub fn has_syntax_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.code == "syntax")
    }

    pub fn all_valid(&self) -> bool {
        self.items.iter().all(ItemReport::is_valid)
    }
}

fn check_diagnostic(file: &str, item: &ItemReport, c: &Check) -> Option<Diagnostic> {
    let severity = match c.status {
        Status::Pass => return None,
        Status::Fail => Severity::Error,
        Status::Warn => Severity::Warning,
        Status::Skipped => Severity::Info,
    };
    let message = c.message.clone().unwrap_or_else(|| format!("{} was skipped", c.name));
    // Checks without their own span point at the whole item.
    let span = Location::new(file, c.span.unwrap_or(item.span));
    let related = if c.span.is_some() {
        vec![Related { span: Location::new(file, item.span), note: format!("in {} {}", item.title, item.name) }]
    } else {
        Vec::new()
    };
    Some(Diagnostic {
        severity,
        code: c.code.to_string(),
        span,
        message,
        related,
        data: Some(DiagData { check: c.name.clone(), counterexamples: c.counterexamples.clone() }),
    })
}
