use cpc_core::checker::{check_document, Settings};
use cpc_core::env::Env;
use cpc_core::parser::parse_document;
use cpc_core::report::{ItemReport, Status};

fn corpus(name: &str) -> String {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn check(src: &str) -> Vec<ItemReport> {
    let (doc, errs) = parse_document(src);
    assert!(errs.is_empty(), "{errs:?}");
    check_document(&doc, &Env::new(), &Settings::default()).0
}

fn item<'a>(reports: &'a [ItemReport], name: &str) -> &'a ItemReport {
    reports.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("no item {name}"))
}

fn assert_all_pass(reports: &[ItemReport]) {
    for r in reports {
        let bad: Vec<_> = r.checks.iter().filter(|c| c.status != Status::Pass).collect();
        assert!(bad.is_empty(), "{}: {bad:#?}", r.name);
    }
}

#[test]
fn posp_mediant_proofs_pass() {
    let reports = check(&corpus("ewd1297.cpc"));
    assert_eq!(reports.len(), 4);
    assert_all_pass(&reports);
    assert!(item(&reports, "ewd-1297").trace.is_some());
}

#[test]
fn generalized_mediant_proofs_pass() {
    let reports = check(&corpus("ewd1297-gen.cpc"));
    let names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["multiply-<-fractions", "ewd-1297-5", "ewd-1297-6", "ewd-1297-gen2"]);
    assert_all_pass(&reports);
}

#[test]
fn rational_mutation_fails_contract_checking() {
    let reports = check(&corpus("ewd1297-rational.cpc"));
    let r = item(&reports, "ewd-1297-3");
    assert_eq!(r.status, Status::Fail);
    let c = &r.checks[0];
    assert_eq!(c.name, "Checking that completed statement passes contract checking");
    assert_eq!(c.status, Status::Fail);
    assert!(c.message.as_deref().unwrap().starts_with("Counterexample found when testing guard obligation:"));
    assert!(c.counterexamples.iter().any(|cx| cx.contains("(b 0)") || cx.contains("(d 0)")), "{:?}", c.counterexamples);
    assert!(r.trace.is_none());
}

#[test]
fn sorting_proofs_pass() {
    let reports = check(&corpus("sorting.cpc"));
    let qsort = item(&reports, "qsort");
    assert_eq!(qsort.status, Status::Warn);
    assert_eq!(qsort.checks[0].code, "assumed-termination");
    let others: Vec<ItemReport> = reports.iter().filter(|r| r.name != "qsort").cloned().collect();
    assert_all_pass(&others);
    let step = item(&reports, "qsort=isort-step");
    assert!(step.checks.iter().any(|c| c.name == "Derived context D7"));
    let full = item(&reports, "qsort=isort");
    assert!(full.checks.iter().any(|c| c.name == "Cases match the induction scheme"));
    assert!(full.checks.iter().any(|c| c.name.starts_with("Induction Case 1: ")));
}

#[test]
fn wrong_induction_term_fails_to_match() {
    let src = corpus("sorting.cpc").replace("Proof by: (Q x)", "Proof by: (I x)");
    let reports = check(&src);
    let full = item(&reports, "qsort=isort");
    assert_eq!(full.status, Status::Fail);
    let m = full.checks.iter().find(|c| c.name == "Cases match the induction scheme").unwrap();
    assert_eq!(m.status, Status::Fail);
}

#[test]
fn citing_an_undefined_lemma_fails_only_that_proof() {
    let src = r#"
Conjecture first-one:
(=> (natp n) (<= 0 n))
Context:
C1. (natp n)
Goal: (<= 0 n)
Proof:
(<= 0 n)
== { C1, arith }
t
QED

Conjecture second-one:
(=> (natp n) (<= 0 (+ n 1)))
Context:
C1. (natp n)
Goal: (<= 0 (+ n 1))
Proof:
(<= 0 (+ n 1))
== { Lemma no-such-lemma }
t
QED
"#;
    let reports = check(src);
    assert_eq!(item(&reports, "first-one").status, Status::Pass);
    let second = item(&reports, "second-one");
    assert_eq!(second.status, Status::Fail);
    assert!(second.checks.iter().any(|c| c.message.as_deref().is_some_and(|m| m.contains("no-such-lemma"))));
}

#[test]
fn reordering_independent_proofs_keeps_statuses() {
    let text = corpus("ewd1297.cpc");
    let split = text.find("Conjecture EWD-1297-2:").unwrap();
    let end = text.find("Conjecture EWD-1297:").unwrap();
    let (head, rest) = text.split_at(split);
    let (two, tail) = rest.split_at(end - split);
    let one_at = head.find("Conjecture EWD-1297-1:").unwrap();
    let swapped = format!("{}{}{}{}", &head[..one_at], two, &head[one_at..], tail);
    let statuses = |rs: Vec<ItemReport>| {
        let mut v: Vec<(String, Status)> = rs.into_iter().map(|r| (r.name, r.status)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    };
    assert_eq!(statuses(check(&text)), statuses(check(&swapped)));
}

#[test]
fn a_wrong_step_is_rejected_with_witnesses() {
    let src = corpus("ewd1297.cpc").replacen(
        "(< (* a d) (* c b))\n== { Lemma multiply-<-fractions }",
        "(< (* a d) (* b b))\n== { Lemma multiply-<-fractions }",
        1,
    );
    let reports = check(&src);
    let r = item(&reports, "ewd-1297-1");
    assert_eq!(r.status, Status::Fail);
    assert!(r.trace.is_none());
    let bad = r.checks.iter().find(|c| c.status == Status::Fail).unwrap();
    assert!(bad.name.starts_with("Proof step"), "{bad:?}");
    assert!(!bad.counterexamples.is_empty(), "{bad:?}");
    assert_eq!(item(&reports, "ewd-1297-2").status, Status::Pass);
}

#[test]
fn nil_in_derived_context_ends_the_proof() {
    let src = r#"
Conjecture contradictory:
(=> (^ (natp n) (< n 0)) (== n 5))
Context:
C1. (natp n)
C2. (< n 0)
Derived Context:
D1. nil { C1, C2, arith }
Goal: (== n 5)
Proof:
n
== { obvious }
7
QED
"#;
    let reports = check(src);
    let r = item(&reports, "contradictory");
    assert!(r.is_valid(), "{:#?}", r.checks);
    assert!(r.trace.is_some());
}

#[test]
fn problem_is_an_alias_of_conjecture() {
    let src = "Problem tiny:\n(=> (natp n) (natp n))\nContext:\nC1. (natp n)\nGoal: (natp n)\nProof:\n(natp n)\n== { C1 }\nt\nQED\n";
    let reports = check(src);
    assert_eq!(item(&reports, "tiny").status, Status::Pass, "{:#?}", reports[0].checks);
}
