//! Exportation, guard obligations, type-predicate recognition and the
//! contract-completion checks.

use thiserror::Error;

use crate::env::Env;
use crate::eval::{builtin_guard, RECOGNIZERS};
use crate::prover::{self, Budget, ProofOutcome, Sequent};
use crate::term::{apply_subst, Subst, Term};
use crate::testgen::{self, Assignment};

fn conjuncts(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::App(f, a) if f == "^" => a.iter().for_each(|x| conjuncts(x, out)),
        Term::Const(crate::term::Value::True) => {}
        _ => {
            if !out.contains(t) {
                out.push(t.clone())
            }
        }
    }
}

/// Rewrites `(=> a (=> b c))` into `(=> (^ a b) c)`, flattening nested
/// conjunctions in hypothesis position and dropping repeated hypotheses.
pub fn export(t: &Term) -> Term {
    let mut hyps = Vec::new();
    let mut cur = t;
    while let Term::App(f, a) = cur {
        if f != "=>" || a.len() != 2 {
            break;
        }
        conjuncts(&a[0], &mut hyps);
        cur = &a[1];
    }
    Term::implies(hyps, cur.clone())
}

/// Hypotheses and conclusion of an exported statement.
pub fn split(t: &Term) -> (Vec<Term>, Term) {
    match t {
        Term::App(f, a) if f == "=>" && a.len() == 2 => {
            let mut hyps = Vec::new();
            conjuncts(&a[0], &mut hyps);
            (hyps, a[1].clone())
        }
        _ => (Vec::new(), t.clone()),
    }
}

pub fn is_exported(t: &Term) -> bool {
    export(t) == *t
}

/// Guard of one call, as conditions over its arguments.
pub fn call_guard(f: &str, args: &[Term], env: &Env) -> Vec<Term> {
    if let Some(def) = env.function(f) {
        let s: Subst = def.params.iter().map(|p| p.0.clone()).zip(args.iter().cloned()).collect();
        return def
            .params
            .iter()
            .filter(|(_, r)| r != "allp")
            .map(|(p, r)| apply_subst(&s, &Term::app(r, vec![Term::Var(p.clone())])))
            .collect();
    }
    builtin_guard(f, args)
}

fn walk(t: &Term, path: &mut Vec<Term>, out: &mut Vec<(Vec<Term>, Term)>, env: &Env) {
    let Term::App(f, a) = t else { return };
    let scoped = |path: &mut Vec<Term>, extra: Vec<Term>, x: &Term, out: &mut Vec<(Vec<Term>, Term)>| {
        let n = path.len();
        path.extend(extra);
        walk(x, path, out, env);
        path.truncate(n);
    };
    match (f.as_str(), a.len()) {
        ("if", 3) => {
            walk(&a[0], path, out, env);
            scoped(path, vec![a[0].clone()], &a[1], out);
            scoped(path, vec![Term::not(a[0].clone())], &a[2], out);
        }
        ("^", _) => {
            for i in 0..a.len() {
                scoped(path, a[..i].to_vec(), &a[i], out);
            }
        }
        ("v", _) => {
            for i in 0..a.len() {
                scoped(path, a[..i].iter().cloned().map(Term::not).collect(), &a[i], out);
            }
        }
        ("=>", 2) => {
            walk(&a[0], path, out, env);
            scoped(path, vec![a[0].clone()], &a[1], out);
        }
        _ => {
            for x in a {
                walk(x, path, out, env);
            }
            for g in call_guard(f, a, env) {
                let ob = (path.clone(), g);
                if !out.contains(&ob) {
                    out.push(ob);
                }
            }
        }
    }
}

/// Guard obligations of `t` with the path conditions under which each is
/// needed.
pub fn guard_obligations(t: &Term, env: &Env) -> Vec<(Vec<Term>, Term)> {
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out, env);
    out
}

/// Guard obligations as formulas `(=> (^ path) g)`.
pub fn guards(t: &Term, env: &Env) -> Vec<Term> {
    guard_obligations(t, env).into_iter().map(|(p, g)| Term::implies(p, g)).collect()
}

/// Recognizer applications: built-in recognizers and user predicates of
/// one argument declared to return a boolean.
pub fn is_type_predicate(t: &Term, env: &Env) -> bool {
    match t {
        Term::App(r, a) if a.len() == 1 => {
            (RECOGNIZERS.contains(&r.as_str()) && r != "allp")
                || env.function(r).is_some_and(|d| d.params.len() == 1 && d.ret == "boolp")
        }
        _ => false,
    }
}

/// Theory used to discharge guard obligations: type reasoning plus
/// arithmetic, since `(posp b)` alone does not give `b != 0` in min.
pub const GUARD_THEORIES: &[&str] = &["contract", "arith"];

/// A guard obligation that could not be proved, with any falsifying
/// assignments the tester found.
#[derive(Debug, Clone, PartialEq)]
pub struct FailedGuard {
    pub obligation: Term,
    pub counterexamples: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompletionError {
    #[error("the exportation is not equivalent to the statement")]
    NotEquivalent,
    #[error("the exportation is not in exported form")]
    NotExported,
    #[error("the contract completion changes the conclusion")]
    ConclusionChanged,
    #[error("the contract completion drops hypotheses {}", render_list(.0))]
    HypothesesDropped(Vec<Term>),
    #[error("the contract completion is not equivalent to the hypotheses plus their guards")]
    CompletionNotEquivalent,
    #[error("guard obligations of the completed statement fail")]
    NotContractCompleted(Vec<FailedGuard>),
}

fn render_list(ts: &[Term]) -> String {
    ts.iter().map(Term::to_string).collect::<Vec<_>>().join(" ")
}

/// The statement a proof establishes after exportation and contract
/// completion. `trivial` means no hypotheses were added to the exportation.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub statement: Term,
    pub trivial: bool,
}

/// Search settings shared by the completion checks.
#[derive(Debug, Clone, Copy)]
pub struct CheckLimits {
    pub budget: Budget,
    pub trials: u32,
    pub seed: u64,
}

fn min_proves(env: &Env, concl: Term, limits: &CheckLimits) -> bool {
    let rules = env.theory("min").expect("min theory");
    let seq = Sequent { hyps: vec![], concl };
    matches!(prover::prove(env, &seq, &rules, &[], &limits.budget), ProofOutcome::Proved(_))
}

/// Guard obligations of `stmt` that its own hypotheses do not discharge.
pub fn failed_guards(stmt: &Term, env: &Env, limits: &CheckLimits) -> Vec<FailedGuard> {
    let rules = env.theories(GUARD_THEORIES).expect("built-in theories");
    let mut out = Vec::new();
    for (path, g) in guard_obligations(stmt, env) {
        let seq = Sequent { hyps: path, concl: g };
        if matches!(prover::prove(env, &seq, &rules, &[], &limits.budget), ProofOutcome::Proved(_)) {
            continue;
        }
        let obligation = seq.formula();
        let report = testgen::test_formula(&obligation, env, limits.trials, limits.seed);
        out.push(FailedGuard { obligation, counterexamples: report.counterexamples });
    }
    out
}

/// Validates the optional exportation `e` and contract completion `c` of
/// statement `s`, returning the statement the proof must establish.
pub fn check_contract_completion(
    s: &Term,
    e: Option<&Term>,
    c: Option<&Term>,
    env: &Env,
    limits: &CheckLimits,
) -> Result<Completion, CompletionError> {
    let e = match e {
        Some(e) => {
            if !is_exported(e) {
                return Err(CompletionError::NotExported);
            }
            if *e != *s && !min_proves(env, Term::app("<=>", vec![e.clone(), s.clone()]), limits) {
                return Err(CompletionError::NotEquivalent);
            }
            e.clone()
        }
        None => export(s),
    };
    // A completion only counts when it adds hypotheses to the exportation.
    let mut trivial = true;
    let completed = match c {
        Some(c) => {
            let c = export(c);
            let (hc, cc) = split(&c);
            let (he, ce) = split(&e);
            if cc != ce {
                return Err(CompletionError::ConclusionChanged);
            }
            let dropped: Vec<Term> = he.iter().filter(|h| !hc.contains(h)).cloned().collect();
            if !dropped.is_empty() {
                return Err(CompletionError::HypothesesDropped(dropped));
            }
            if hc != he {
                let mut want = he.clone();
                want.extend(guards(&e, env));
                let iff = Term::app("<=>", vec![Term::and(hc), Term::and(want)]);
                if !min_proves(env, iff, limits) {
                    return Err(CompletionError::CompletionNotEquivalent);
                }
                trivial = false;
            }
            c
        }
        None => e,
    };
    let failed = failed_guards(&completed, env, limits);
    if !failed.is_empty() {
        return Err(CompletionError::NotContractCompleted(failed));
    }
    Ok(Completion { statement: completed, trivial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;
    use crate::term::Value;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn export_flattens_nested_implications() {
        let t = p("(=> (^ a b) (=> c (=> (^ d a) e)))");
        assert_eq!(export(&t), p("(=> (^ a b c d) e)"));
        assert!(is_exported(&export(&t)));
        assert_eq!(export(&p("(f x)")), p("(f x)"));
    }

    #[test]
    fn guards_are_contextualized() {
        let env = Env::new();
        let g = guards(&p("(if (consp x) (first x) nil)"), &env);
        assert_eq!(g, vec![p("(=> (consp x) (consp x))")]);
        let g = guards(&p("(/ a b)"), &env);
        assert_eq!(g, vec![p("(rationalp a)"), p("(rationalp b)"), p("(not (== b 0))")]);
        let g = guards(&p("(^ (consp x) (< (first x) 1))"), &env);
        assert!(g.contains(&p("(=> (consp x) (rationalp (first x)))")));
    }

    #[test]
    fn recognizers_are_type_predicates() {
        let env = Env::new();
        assert!(is_type_predicate(&p("(tlp x)"), &env));
        assert!(!is_type_predicate(&p("(allp x)"), &env));
        assert!(!is_type_predicate(&p("(< 0 x)"), &env));
    }
    fn limits() -> CheckLimits {
        CheckLimits { budget: Budget::default(), trials: 1000, seed: 0 }
    }

    #[test]
    fn posp_denominators_are_completed() {
        let env = Env::new();
        let s =
            p("(=> (^ (posp a) (posp b) (posp c) (posp d)) (== (< (/ a b) (/ (+ a c) (+ b d))) (< (/ a b) (/ c d))))");
        let c = check_contract_completion(&s, None, None, &env, &limits()).unwrap();
        assert!(c.trivial);
        assert_eq!(c.statement, s);
    }

    #[test]
    fn rational_denominators_fail_with_zero_witnesses() {
        let env = Env::new();
        let s = p("(=> (^ (rationalp a) (rationalp b) (rationalp c) (rationalp d)) (== (< (/ a b) (/ (+ a c) (+ b d))) (< (/ a b) (/ c d))))");
        let Err(CompletionError::NotContractCompleted(failed)) =
            check_contract_completion(&s, None, None, &env, &limits())
        else {
            panic!("expected a completion failure");
        };
        let zero = Value::int(0);
        let witnessed = failed
            .iter()
            .flat_map(|f| &f.counterexamples)
            .any(|cx| cx.iter().any(|(x, v)| (x == "b" || x == "d") && *v == zero));
        assert!(witnessed, "{failed:?}");
    }

    #[test]
    fn explicit_completion_adds_guard_hypotheses() {
        let env = Env::new();
        let s = p("(=> (rationalp b) (== (/ 1 b) (/ 1 b)))");
        let c = p("(=> (^ (rationalp b) (not (== b 0))) (== (/ 1 b) (/ 1 b)))");
        let done = check_contract_completion(&s, None, Some(&c), &env, &limits()).unwrap();
        assert!(!done.trivial);
        let dropped = p("(=> (not (== b 0)) (== (/ 1 b) (/ 1 b)))");
        assert!(matches!(
            check_contract_completion(&s, None, Some(&dropped), &env, &limits()),
            Err(CompletionError::HypothesesDropped(_))
        ));
    }

    #[test]
    fn nonlinear_hypothesis_completes_the_generalization() {
        let env = Env::new();
        let s = p("(=> (^ (rationalp a) (rationalp b) (rationalp c) (rationalp d) (< 0 (* b d))) (== (< (/ a b) (/ (+ a c) (+ b d))) (< (/ a b) (/ c d))))");
        assert!(check_contract_completion(&s, None, None, &env, &limits()).unwrap().trivial);
    }
}
