//! Text, JSON and XML renderings of a report.

use std::fmt::Write;

use cpc_core::ast::Span;
use cpc_core::report::{ItemKind, Status};

use crate::report::{Location, Report};

pub fn json(r: &Report) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
    s.push('\n');
    s
}

fn counterexample_block(cxs: &[String]) -> String {
    format!("({})", cxs.join("\n "))
}

/// The transcript style: one line per check, then QED for a valid proof.
pub fn text(r: &Report) -> String {
    let mut out = String::new();
    for item in &r.items {
        let _ = writeln!(out, "{} {}:", item.title, item.name);
        for c in &item.checks {
            let _ = writeln!(out, "--- {}... {}", c.name, c.status.label());
            if c.status != Status::Pass {
                if let Some(m) = &c.message {
                    let _ = writeln!(out, "{m}");
                }
            }
            if !c.counterexamples.is_empty() {
                let _ = writeln!(out, "{}", counterexample_block(&c.counterexamples));
            }
        }
        if item.kind == ItemKind::Proof {
            out.push_str(if item.is_valid() { "QED\n" } else { "FAILED\n" });
        }
        if let Some(f) = &item.trace_file {
            let _ = writeln!(out, "trace written to {f}");
        }
        out.push('\n');
    }
    for d in r.diagnostics.iter().filter(|d| d.code == "syntax") {
        let _ = writeln!(out, "{}:{}:{}: {}: {}", d.span.file, d.span.line, d.span.col, d.severity.as_str(), d.message);
    }
    let failed = r.items.iter().filter(|i| i.status == Status::Fail).count();
    let warned = r.items.iter().filter(|i| i.status == Status::Warn).count();
    let _ = writeln!(out, "{} items, {failed} failed, {warned} with warnings", r.items.len());
    out
}

fn esc(s: &str) -> String {
    let mut o = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => o.push_str("&amp;"),
            '<' => o.push_str("&lt;"),
            '>' => o.push_str("&gt;"),
            '"' => o.push_str("&quot;"),
            '\'' => o.push_str("&apos;"),
            c => o.push(c),
        }
    }
    o
}

fn span_attrs(s: &Span) -> String {
    format!(r#"start="{}" end="{}" line="{}" col="{}""#, s.start, s.end, s.line, s.col)
}

fn location(l: &Location) -> String {
    format!(r#"<span file="{}" start="{}" end="{}" line="{}" col="{}"/>"#, esc(&l.file), l.start, l.end, l.line, l.col)
}

fn lower<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Same content as the JSON report, element for field.
pub fn xml(r: &Report) -> String {
    let mut o = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(o, r#"<report file="{}">"#, esc(&r.file));
    o.push_str("  <items>\n");
    for item in &r.items {
        let trace = item.trace_file.as_ref().map(|f| format!(r#" trace_file="{}""#, esc(f))).unwrap_or_default();
        let _ = writeln!(
            o,
            r#"    <item name="{}" kind="{}" title="{}" status="{}" {}{trace}>"#,
            esc(&item.name),
            lower(&item.kind),
            esc(&item.title),
            lower(&item.status),
            span_attrs(&item.span)
        );
        for c in &item.checks {
            let span = c.span.map(|s| format!(" {}", span_attrs(&s))).unwrap_or_default();
            let _ = writeln!(
                o,
                r#"      <check name="{}" code="{}" status="{}"{span}>"#,
                esc(&c.name),
                c.code,
                lower(&c.status)
            );
            if let Some(m) = &c.message {
                let _ = writeln!(o, "        <message>{}</message>", esc(m));
            }
            for cx in &c.counterexamples {
                let _ = writeln!(o, "        <counterexample>{}</counterexample>", esc(cx));
            }
            o.push_str("      </check>\n");
        }
        o.push_str("    </item>\n");
    }
    o.push_str("  </items>\n  <diagnostics>\n");
    for d in &r.diagnostics {
        let _ = writeln!(o, r#"    <diagnostic severity="{}" code="{}">"#, d.severity.as_str(), esc(&d.code));
        let _ = writeln!(o, "      {}", location(&d.span));
        let _ = writeln!(o, "      <message>{}</message>", esc(&d.message));
        for rel in &d.related {
            let _ = writeln!(o, r#"      <related note="{}">{}</related>"#, esc(&rel.note), location(&rel.span));
        }
        if let Some(data) = &d.data {
            let _ = writeln!(o, r#"      <data check="{}">"#, esc(&data.check));
            for cx in &data.counterexamples {
                let _ = writeln!(o, "        <counterexample>{}</counterexample>", esc(cx));
            }
            o.push_str("      </data>\n");
        }
        o.push_str("    </diagnostic>\n");
    }
    o.push_str("  </diagnostics>\n</report>\n");
    o
}
