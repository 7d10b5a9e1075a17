//! `cpc`: checks calculational proof documents.
//!
//! Exit codes: 0 when every item is valid, 1 when a check failed, 2 on
//! syntax errors, 3 on internal errors such as unreadable input.

mod render;
mod report;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpc_core::ast::{self, Document};
use cpc_core::checker::{check_document, proof_title, Settings};
use cpc_core::env::Env;
use cpc_core::parser::parse_document;
use cpc_core::prover::Budget;
use cpc_core::report::{ItemKind, ItemReport};

use crate::report::Report;

#[derive(Parser)]
#[command(name = "cpc", version, about = "Check calculational proofs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check every item of a document.
    Check {
        /// Input file, or `-` for stdin.
        file: String,
        #[command(flatten)]
        opts: Opts,
        /// Also write the kernel trace of each valid proof here.
        #[arg(long, value_name = "DIR")]
        trace_out: Option<PathBuf>,
    },
    /// Only parse the document.
    Parse {
        file: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check a document and write one trace file per valid proof.
    Trace {
        file: String,
        #[command(flatten)]
        opts: Opts,
        #[arg(long, value_name = "DIR")]
        trace_out: PathBuf,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for random testing.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random trials per test.
    #[arg(long, default_value_t = 1000)]
    max_tests: u32,
    /// Wall-clock limit per sequent.
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
    /// Threads for the steps of one proof.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Rewrite steps allowed per sequent.
    #[arg(long, default_value_t = 10_000)]
    budget_rewrites: u64,
}

impl Opts {
    fn settings(&self) -> Settings {
        let budget = Budget { rewrite_steps: self.budget_rewrites, wall_ms: self.timeout_ms, ..Budget::default() };
        Settings { budget, trials: self.max_tests, seed: self.seed, jobs: self.jobs.max(1) }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Xml,
}

fn read_input(file: &str) -> std::io::Result<String> {
    if file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(file)
    }
}

fn display_name(file: &str) -> &str {
    if file == "-" {
        "<stdin>"
    } else {
        file
    }
}

/// Items as parsed, with no checks run.
fn parsed_items(doc: &Document) -> Vec<ItemReport> {
    doc.items
        .iter()
        .filter_map(|item| {
            let (name, kind, title) = match &item.kind {
                ast::ItemKind::Function(f) => (&f.name, ItemKind::Function, "Function"),
                ast::ItemKind::Property(p) => (&p.name, ItemKind::Property, "Property"),
                ast::ItemKind::Assume(p) => (&p.name, ItemKind::Assumption, "Assume"),
                ast::ItemKind::Proof(p) => (&p.name, ItemKind::Proof, proof_title(p.kind)),
                ast::ItemKind::Abbrev(_) => return None,
            };
            Some(ItemReport::new(name, kind, title, item.span, Vec::new()))
        })
        .collect()
}

/// File names keep the proof name but never leave the directory.
fn trace_file_name(name: &str) -> String {
    let safe: String = name.chars().map(|c| if c == '/' || c == '\\' || c.is_control() { '_' } else { c }).collect();
    format!("{safe}.trace")
}

fn write_traces(items: &mut [ItemReport], dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for item in items.iter_mut() {
        if let (true, Some(trace)) = (item.is_valid(), &item.trace) {
            let file = trace_file_name(&item.name);
            std::fs::write(dir.join(&file), trace.to_string())?;
            item.trace_file = Some(file);
        }
    }
    Ok(())
}

fn emit(report: &Report, format: Format) {
    let s = match format {
        Format::Text => render::text(report),
        Format::Json => render::json(report),
        Format::Xml => render::xml(report),
    };
    print!("{s}");
}

fn exit_for(report: &Report) -> ExitCode {
    if report.has_syntax_errors() {
        ExitCode::from(2)
    } else if !report.all_valid() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Parse { file, format } => {
            let text = read_input(&file).map_err(|e| format!("{file}: {e}"))?;
            let (doc, errors) = parse_document(&text);
            let report = Report::new(display_name(&file), parsed_items(&doc), &errors);
            emit(&report, format);
            Ok(exit_for(&report))
        }
        Command::Check { file, opts, trace_out } => check(&file, &opts, trace_out.as_deref()),
        Command::Trace { file, opts, trace_out } => check(&file, &opts, Some(&trace_out)),
    }
}

fn check(file: &str, opts: &Opts, trace_out: Option<&Path>) -> Result<ExitCode, String> {
    let text = read_input(file).map_err(|e| format!("{file}: {e}"))?;
    let (doc, errors) = parse_document(&text);
    let (mut items, _) = check_document(&doc, &Env::new(), &opts.settings());
    if let Some(dir) = trace_out {
        write_traces(&mut items, dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let report = Report::new(display_name(file), items, &errors);
    emit(&report, opts.format);
    Ok(exit_for(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(msg)) => {
            eprintln!("cpc: {msg}");
            ExitCode::from(3)
        }
        Err(_) => {
            eprintln!("cpc: internal error");
            ExitCode::from(3)
        }
    }
}
