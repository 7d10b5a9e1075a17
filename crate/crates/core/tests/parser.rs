use cpc_core::ast::{CaseKind, Hint, ItemKind, Proof, ProofBody, Relation};
use cpc_core::parser::{parse_document, parse_term};
use cpc_core::term::{Term, Value};
use proptest::prelude::*;

fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn proofs(src: &str) -> Vec<Proof> {
    let (doc, errs) = parse_document(src);
    assert!(errs.is_empty(), "{errs:?}");
    doc.items
        .into_iter()
        .filter_map(|i| match i.kind {
            ItemKind::Proof(p) => Some(p),
            _ => None,
        })
        .collect()
}

#[test]
fn induction_step_listing_has_the_expected_shape() {
    let ps = proofs(&corpus("sorting.cpc"));
    let step = ps.iter().find(|p| p.name == "qsort=isort-step").unwrap();
    assert!(step.exportation.is_some());
    let ProofBody::Simple(body) = &step.body else { panic!("simple body expected") };
    assert_eq!(body.context.len(), 5);
    assert_eq!(body.derived.len(), 7);
    assert!(body.goal.is_some());
    assert_eq!(body.seq.as_ref().unwrap().steps.len(), 6);
    // `Prop app-less-not-less (...)` is a lemma reference with a substitution.
    let fifth = &body.seq.as_ref().unwrap().steps[4];
    assert!(fifth
        .hints
        .iter()
        .any(|h| matches!(h, Hint::Lemma { name, subst: Some(_) } if name == "app-less-not-less")));
}

#[test]
fn inductive_wrapper_has_cases() {
    let ps = proofs(&corpus("sorting.cpc"));
    let full = ps.iter().find(|p| p.name == "qsort=isort").unwrap();
    let ProofBody::Inductive { induct, cases } = &full.body else { panic!("inductive body expected") };
    assert_eq!(*induct, parse_term("(qsort x)").unwrap());
    let kinds: Vec<CaseKind> = cases.iter().map(|c| c.kind).collect();
    assert_eq!(kinds, [CaseKind::Base, CaseKind::Induction]);
}

#[test]
fn smallest_proof() {
    let ps = proofs("Conjecture c1: t Proof: t QED");
    assert_eq!(ps.len(), 1);
    let ProofBody::Simple(b) = &ps[0].body else { panic!() };
    assert!(b.context.is_empty());
    let seq = b.seq.as_ref().unwrap();
    assert_eq!(seq.first, Term::t());
    assert!(seq.steps.is_empty());
}

#[test]
fn empty_hint_braces_are_rejected_at_the_braces() {
    let src = "Conjecture c1: t\nProof:\nt\n== { }\nt\nQED\n";
    let (_, errs) = parse_document(src);
    assert_eq!(errs.len(), 1, "{errs:?}");
    assert_eq!(errs[0].line, 4);
    assert_eq!(&src[errs[0].span.start..errs[0].span.start + 1], "{");
}

#[test]
fn errors_recover_at_the_next_item() {
    let src = "Conjecture a: t\nProof:\nt\n== { }\nt\nQED\n\n(definec f (x :all) :all x)\n\nConjecture b: t\nProof:\nt\n== { bogus hint words }\nt\nQED\n\nConjecture c: t Proof: t QED\n";
    let (doc, errs) = parse_document(src);
    assert_eq!(errs.len(), 2, "{errs:?}");
    assert_eq!(doc.items.len(), 2);
}

#[test]
fn context_labels_must_be_consecutive() {
    let src = "Conjecture c: (=> (natp n) (natp n))\nContext:\nC1. (natp n)\nC3. (natp n)\nGoal: (natp n)\nProof:\n(natp n)\n== { C1 }\nt\nQED\n";
    let (_, errs) = parse_document(src);
    assert!(errs[0].message.contains("expected label C2"), "{}", errs[0].message);
}

#[test]
fn inductive_proofs_need_a_base_case() {
    let src = "Conjecture c: (tlp x)\nProof by: (len x)\nInduction Case 1:\nGoal: t\nProof: t\nQED\nQED\n";
    let (_, errs) = parse_document(src);
    assert!(errs.iter().any(|e| e.message.contains("Base Case")), "{errs:?}");
}

#[test]
fn duplicate_names_are_rejected() {
    let (doc, errs) = parse_document("Conjecture 7: t Proof: t QED\nConjecture 7: t Proof: t QED\n");
    assert_eq!(doc.items.len(), 1);
    assert_eq!(errs.len(), 1);
}

#[test]
fn keywords_ignore_case_and_crlf_is_accepted() {
    let src = "conjecture c1:\r\n(=> (natp n) (natp n))\r\ncontext:\r\nC1. (natp n)\r\ngoal: (natp n)\r\nproof:\r\n(natp n)\r\n== { c1, pl }\r\nt\r\nqed\r\n";
    let ps = proofs(src);
    let ProofBody::Simple(b) = &ps[0].body else { panic!() };
    assert_eq!(b.seq.as_ref().unwrap().steps[0].hints, [Hint::Item("C1".into()), Hint::Trivial("pl".into())]);
}

#[test]
fn relations_parse() {
    let ps = proofs("Conjecture r: t Proof: a == { PL } b => { PL } c <= { PL } d <=> { PL } e QED");
    let ProofBody::Simple(b) = &ps[0].body else { panic!() };
    let rels: Vec<Relation> = b.seq.as_ref().unwrap().steps.iter().map(|s| s.relation).collect();
    assert_eq!(rels, [Relation::Equal, Relation::Implies, Relation::ImpliedBy, Relation::Iff]);
}

#[test]
fn term_examples() {
    let t = parse_term("(=> (^ (tlp x) (consp x)) (tlp (rest x)))").unwrap();
    let want = Term::app(
        "=>",
        vec![
            Term::app("^", vec![Term::app("tlp", vec![Term::var("x")]), Term::app("consp", vec![Term::var("x")])]),
            Term::app("tlp", vec![Term::app("rest", vec![Term::var("x")])]),
        ],
    );
    assert_eq!(t, want);
    assert_eq!(parse_term("()").unwrap(), Term::Const(Value::Nil));
    let g = parse_term("(< (/ a b) (/ c d))").unwrap();
    assert_eq!(g.to_string(), "(< (/ a b) (/ c d))");
}

#[test]
fn item_spans_slice_back_to_their_source() {
    let src = corpus("ewd1297.cpc");
    let (doc, _) = parse_document(&src);
    for item in &doc.items {
        let text = item.span.text(&src);
        match &item.kind {
            ItemKind::Proof(p) => {
                assert!(text.to_ascii_lowercase().starts_with(&format!("conjecture {}:", p.name)), "{text}");
                assert!(text.ends_with("QED"));
            }
            ItemKind::Property(_) => assert!(text.starts_with("(property") && text.ends_with(')')),
            _ => {}
        }
    }
}

fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        "[a-z][a-z0-9-]{0,5}"
            .prop_filter("not reserved", |s| !matches!(s.as_str(), "t" | "nil"))
            .prop_map(|s| Term::var(&s)),
        (-50i64..50).prop_map(Term::int),
        Just(Term::t()),
        Just(Term::nil()),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        (
            prop::sample::select(vec!["cons", "+", "*", "<", "==", "^", "v", "=>", "not", "first", "f", "g"]),
            prop::collection::vec(inner, 1..3),
        )
            .prop_map(|(f, args)| {
                let args = match f {
                    "not" | "first" => args[..1].to_vec(),
                    "cons" | "<" | "==" | "=>" if args.len() < 2 => vec![args[0].clone(), args[0].clone()],
                    "cons" | "<" | "==" | "=>" => args[..2].to_vec(),
                    _ => args,
                };
                Term::app(f, args)
            })
    })
}

proptest! {
    #[test]
    fn rendering_reparses_to_the_same_term(t in term_strategy()) {
        let first = parse_term(&t.to_string()).unwrap();
        let again = parse_term(&first.to_string()).unwrap();
        prop_assert_eq!(again, first);
    }

    #[test]
    fn document_parsing_is_total(s in "[()a-zC:{}.;= \\n0-9QED]{0,200}") {
        let _ = parse_document(&s);
    }

    #[test]
    fn mangled_corpus_never_panics(cut in 0usize..4000, junk in "[(){}:.=]{0,3}") {
        let src = corpus("sorting.cpc");
        let cut = cut.min(src.len());
        let cut = (0..=cut).rev().find(|&i| src.is_char_boundary(i)).unwrap();
        let mangled = format!("{}{}{}", &src[..cut], junk, &src[cut..]);
        let _ = parse_document(&mangled);
    }
}
