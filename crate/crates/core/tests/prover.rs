use cpc_core::env::{Env, RuleSet};
use cpc_core::eval::eval_with;
use cpc_core::parser::parse_term;
use cpc_core::prover::{prove, Budget, ProofOutcome, Sequent};
use cpc_core::term::{Subst, Term};
use cpc_kernel::{replay_text, Verdict};

fn p(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn rules(env: &Env, names: &[&str]) -> RuleSet {
    env.theories(names).unwrap()
}

/// Proves and replays in the kernel; returns the outcome.
fn prove_replayed(env: &Env, hyps: &[&str], concl: &str, rs: &RuleSet, lemmas: &[(String, Subst)]) -> ProofOutcome {
    let seq = Sequent { hyps: hyps.iter().map(|h| p(h)).collect(), concl: p(concl) };
    let out = prove(env, &seq, rs, lemmas, &Budget::default());
    if let ProofOutcome::Proved(proof) = &out {
        let trace = proof.clone().into_trace(env, "t", seq.formula());
        let text = trace.to_string();
        assert_eq!(replay_text(&text), Verdict::Accepted, "kernel rejected:\n{text}");
    }
    out
}

fn assert_proved(env: &Env, hyps: &[&str], concl: &str, names: &[&str]) {
    let out = prove_replayed(env, hyps, concl, &rules(env, names), &[]);
    assert!(matches!(out, ProofOutcome::Proved(_)), "{concl}: {out:?}");
}

#[test]
fn excluded_middle() {
    let env = Env::new();
    assert_proved(&env, &[], "(v p (not p))", &["min"]);
}

#[test]
fn congruence_chains_step_facts() {
    let env = Env::new();
    let hyps = ["(== (q x) t1)", "(== t1 t2)", "(== t2 t3)", "(== t3 t4)", "(== t4 t5)", "(== t5 (i x))"];
    assert_proved(&env, &hyps, "(== (q x) (i x))", &["min"]);
}

#[test]
fn cancellation_of_a_common_monomial() {
    let env = Env::new();
    assert_proved(
        &env,
        &["(rationalp a)", "(< (+ (* a b) (* a d)) (+ (* a b) (* c b)))"],
        "(< (* a d) (* c b))",
        &["min", "arith"],
    );
}

#[test]
fn arithmetic_needs_permission() {
    let env = Env::new();
    let out = prove_replayed(&env, &["(< x y)", "(< y z)"], "(< x z)", &rules(&env, &["min"]), &[]);
    assert!(!matches!(out, ProofOutcome::Proved(_)));
    assert_proved(&env, &["(< x y)", "(< y z)"], "(< x z)", &["min", "arith"]);
}

#[test]
fn nonlinear_positivity_with_a_square() {
    let env = Env::new();
    assert_proved(&env, &["(rationalp b)", "(rationalp d)", "(< 0 (* b d))"], "(< 0 (* b (+ b d)))", &["min", "arith"]);
}

#[test]
fn definition_unfolding_and_cons_axioms() {
    let env = Env::new();
    let mut names = vec!["min", "cons-axioms"];
    let defs = env.definition_rules("bin-app");
    let mut rs = rules(&env, &names);
    rs.rules.extend(defs);
    let out = prove_replayed(&env, &[], "(== (bin-app (cons a nil) y) (cons a y))", &rs, &[]);
    assert!(matches!(out, ProofOutcome::Proved(_)), "{out:?}");
    names.push("contract");
    assert_proved(&env, &["(consp x)"], "(== (cons (first x) (rest x)) x)", &names);
}

#[test]
fn hypotheses_rewrite_the_goal() {
    let env = Env::new();
    assert_proved(
        &env,
        &["(tlp x)", "(not (== x nil))", "(=> (tlp (rest x)) (== (f (rest x)) (g (rest x))))"],
        "(== (h (f (rest x))) (h (g (rest x))))",
        &["contract"],
    );
}

#[test]
fn false_claims_are_disproved_with_a_checked_witness() {
    let env = Env::new();
    let seq = Sequent { hyps: vec![p("(tlp x)"), p("(tlp y)")], concl: p("(== (bin-app x y) (bin-app y x))") };
    match prove(&env, &seq, &rules(&env, &["full"]), &[], &Budget::default()) {
        ProofOutcome::Disproved(w) => {
            let m = w.into_iter().collect();
            let v = eval_with(&seq.formula(), &m, &env, 1_000_000).unwrap();
            assert!(!v.truthy());
        }
        other => panic!("expected a witness, got {other:?}"),
    }
}

#[test]
fn same_input_same_trace() {
    let env = Env::new();
    let seq = Sequent { hyps: vec![p("(< x y)"), p("(< y z)")], concl: p("(< x z)") };
    let rs = rules(&env, &["min", "arith"]);
    let a = prove(&env, &seq, &rs, &[], &Budget::default());
    let b = prove(&env, &seq, &rs, &[], &Budget::default());
    match (a, b) {
        (ProofOutcome::Proved(a), ProofOutcome::Proved(b)) => {
            let ta = a.into_trace(&env, "t", seq.formula()).to_string();
            let tb = b.into_trace(&env, "t", seq.formula()).to_string();
            assert_eq!(ta, tb);
        }
        other => panic!("{other:?}"),
    }
}

mod propositional_oracle {
    use super::*;
    use proptest::prelude::*;

    fn formula() -> impl Strategy<Value = Term> {
        let leaf = (0..4usize).prop_map(|i| Term::var(&format!("p{i}")));
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Term::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("^", vec![a, b])),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("v", vec![a, b])),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("=>", vec![a, b])),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("<=>", vec![a, b])),
                (inner.clone(), inner.clone(), inner).prop_map(|(a, b, c)| Term::app("if", vec![a, b, c])),
            ]
        })
    }

    fn truth(t: &Term, m: u32) -> bool {
        match t {
            Term::Var(v) => m >> v[1..].parse::<u32>().unwrap() & 1 == 1,
            Term::App(f, a) => match f.as_str() {
                "not" => !truth(&a[0], m),
                "^" => truth(&a[0], m) && truth(&a[1], m),
                "v" => truth(&a[0], m) || truth(&a[1], m),
                "=>" => !truth(&a[0], m) || truth(&a[1], m),
                "<=>" => truth(&a[0], m) == truth(&a[1], m),
                _ => {
                    if truth(&a[0], m) {
                        truth(&a[1], m)
                    } else {
                        truth(&a[2], m)
                    }
                }
            },
            Term::Const(c) => c.truthy(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn validity_matches_truth_tables(f in formula()) {
            let env = Env::new();
            let valid = (0..16).all(|m| truth(&f, m));
            let concl = f.to_string();
            let out = prove_replayed(&env, &[], &concl, &rules(&env, &["min"]), &[]);
            prop_assert_eq!(matches!(out, ProofOutcome::Proved(_)), valid, "{}", concl);
        }
    }
}
