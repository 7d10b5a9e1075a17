use std::collections::BTreeMap;

use cpc_core::ast::ItemKind;
use cpc_core::env::{DefinitionError, Env};
use cpc_core::eval::{eval_ground, EvalError, DEFAULT_EVAL_BUDGET};
use cpc_core::parser::{parse_document, parse_term};
use cpc_core::term::{apply_subst, match_term, Subst, Term, Value};
use proptest::prelude::*;

fn p(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn subst(pairs: &[(&str, &str)]) -> Subst {
    pairs.iter().map(|(k, v)| (k.to_string(), p(v))).collect()
}

fn sorting_env() -> Env {
    let text = std::fs::read_to_string(format!("{}/../../corpus/sorting.cpc", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let (doc, _) = parse_document(&text);
    let mut env = Env::new();
    for item in doc.items {
        if let ItemKind::Function(d) = item.kind {
            env = env.define_function(&d).unwrap();
        }
    }
    env
}

#[test]
fn substitution_examples() {
    assert_eq!(apply_subst(&Subst::new(), &p("(< a b)")), p("(< a b)"));
    assert_eq!(
        apply_subst(&subst(&[("c", "(+ a c)"), ("d", "(+ b d)")]), &p("(< (* a d) (* c b))")),
        p("(< (* a (+ b d)) (* (+ a c) b))")
    );
    assert_eq!(apply_subst(&subst(&[("x", "y"), ("y", "x")]), &p("(cons x y)")), p("(cons y x)"));
}

#[test]
fn matching_examples() {
    let s = match_term(&p("(insert a x)"), &p("(insert (first y) (isort (rest y)))")).unwrap();
    assert_eq!(s, subst(&[("a", "(first y)"), ("x", "(isort (rest y))")]));
    let id = match_term(&p("x"), &p("x")).unwrap();
    assert_eq!(apply_subst(&id, &p("x")), p("x"));
    assert_eq!(match_term(&p("(cons a a)"), &p("(cons 1 2)")), None);
}

#[test]
fn evaluation_examples() {
    let env = sorting_env();
    let ev = |s: &str| eval_ground(&p(s), &env, DEFAULT_EVAL_BUDGET);
    assert_eq!(ev("(app '(1) '(2))").unwrap(), Value::list(vec![Value::int(1), Value::int(2)]));
    assert_eq!(ev("(isort '(2 1 3))").unwrap(), Value::list(vec![Value::int(1), Value::int(2), Value::int(3)]));
    assert_eq!(ev("(qsort '(3 1 2 1))").unwrap(), ev("(isort '(3 1 2 1))").unwrap());
    assert!(matches!(ev("(/ 1 0)"), Err(EvalError::GuardViolation { .. })));
    assert!(matches!(ev("(first 5)"), Err(EvalError::GuardViolation { .. })));
}

#[test]
fn runaway_recursion_exhausts_the_budget() {
    let (doc, errs) = parse_document("(definec spin (x :tl) :tl :assume-terminating (spin x))");
    assert!(errs.is_empty());
    let ItemKind::Function(d) = &doc.items[0].kind else { panic!() };
    let env = Env::new().define_function(d).unwrap();
    assert_eq!(eval_ground(&p("(spin '(1))"), &env, 10_000), Err(EvalError::BudgetExceeded));
}

#[test]
fn insert_gets_a_contract_rule() {
    let env = sorting_env();
    let rule = env.rule("insert-contract").expect("contract rule");
    assert_eq!(rule.lhs, p("(tlp (insert a x))"));
    assert!(rule.conds.contains(&p("(tlp x)")));
    assert!(env.theory("contract").unwrap().contains("insert-contract"));
}

fn define(src: &str) -> Result<Env, DefinitionError> {
    let (doc, errs) = parse_document(src);
    assert!(errs.is_empty(), "{errs:?}");
    let ItemKind::Function(d) = &doc.items[0].kind else { panic!() };
    Env::new().define_function(d)
}

#[test]
fn bad_definitions_are_refused() {
    assert!(matches!(define("(definec loop (x :tl) :tl (loop x))"), Err(DefinitionError::TerminationUnproven(_))));
    assert!(matches!(define("(definec head (x :all) :all (first x))"), Err(DefinitionError::GuardUnverified { .. })));
    assert!(matches!(define("(definec bin-app (x :tl) :tl x)"), Err(DefinitionError::Redefinition(_))));
}

#[test]
fn theory_unions() {
    let env = sorting_env();
    let min = env.theory("min").unwrap();
    let exec = env.theory("executable").unwrap();
    assert_eq!(min.union(&exec), env.theory("min-executable").unwrap());
    assert_eq!(min.union(&min), min);
    let contract = env.theory("contract").unwrap();
    assert!(min.rules.is_subset(&contract.rules));
    assert!(env.theory("type-prescription").unwrap().rules.is_subset(&contract.rules));
    assert!(env.theory("no-such-theory").is_none());
}

#[test]
fn extending_never_changes_the_original() {
    let base = Env::new();
    let before = format!("{:?}", base.theory("full").unwrap());
    let _bigger = define("(definec twice (x :tl) :tl (bin-app x x))").unwrap();
    let again = base.add_lemma("l", p("(tlp nil)"), cpc_core::env::LemmaStatus::Assumed);
    assert!(base.lemma("l").is_none());
    assert!(again.lemma("l").is_some());
    assert_eq!(format!("{:?}", base.theory("full").unwrap()), before);
}

fn value_strategy() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        (-20i64..20).prop_map(Value::int),
        (-20i64..20, 1i64..5).prop_map(|(n, d)| { Value::Rat(num_rational::BigRational::new(n.into(), d.into())) }),
        prop::sample::select(vec!["a", "b", "zz"]).prop_map(|s| Value::Sym(s.to_string())),
        "[a-c]{0,2}".prop_map(Value::Str),
        Just(Value::Nil),
        Just(Value::True),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| (inner.clone(), inner).prop_map(|(h, t)| Value::cons(h, t)))
}

fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf =
        prop_oneof![prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var), (-3i64..3).prop_map(Term::int),];
    leaf.prop_recursive(3, 16, 3, |inner| {
        (prop::sample::select(vec!["cons", "f", "g", "+"]), prop::collection::vec(inner, 2..3))
            .prop_map(|(f, args)| Term::app(f, args))
    })
}

fn lt(a: &Value, b: &Value) -> bool {
    let env = Env::new();
    let t = Term::app("<<", vec![Term::Const(a.clone()), Term::Const(b.clone())]);
    eval_ground(&t, &env, DEFAULT_EVAL_BUDGET).unwrap().truthy()
}

proptest! {
    #[test]
    fn empty_substitution_is_left_identity(t in term_strategy(), u in term_strategy()) {
        let s: Subst = BTreeMap::from([("x".to_string(), u)]);
        prop_assert_eq!(apply_subst(&s, &apply_subst(&Subst::new(), &t)), apply_subst(&s, &t));
    }

    #[test]
    fn matches_round_trip(pat in term_strategy(), s in prop::collection::btree_map(prop::sample::select(vec!["x", "y", "z"]).prop_map(String::from), term_strategy(), 0..3)) {
        let target = apply_subst(&s, &pat);
        let found = match_term(&pat, &target).expect("an instance always matches");
        prop_assert_eq!(apply_subst(&found, &pat), target);
    }

    #[test]
    fn total_order_is_trichotomous_and_transitive(a in value_strategy(), b in value_strategy(), c in value_strategy()) {
        let holds = [lt(&a, &b), lt(&b, &a), a == b];
        prop_assert_eq!(holds.iter().filter(|h| **h).count(), 1);
        if lt(&a, &b) && lt(&b, &c) {
            prop_assert!(lt(&a, &c));
        }
    }

    #[test]
    fn evaluation_is_deterministic(t in term_strategy(), x in value_strategy()) {
        let env = Env::new();
        let g = apply_subst(&BTreeMap::from([("x".to_string(), Term::Const(x)), ("y".to_string(), Term::int(1)), ("z".to_string(), Term::nil())]), &t);
        prop_assert_eq!(eval_ground(&g, &env, 1000), eval_ground(&g, &env, 1000));
    }
}
