use cpc_kernel::{replay_text, Verdict};

fn accepted(text: &str) -> bool {
    matches!(replay_text(text), Verdict::Accepted)
}

fn rejected_at(text: &str) -> Option<usize> {
    match replay_text(text) {
        Verdict::Rejected { step, .. } => Some(step),
        Verdict::Accepted => None,
    }
}

#[test]
fn empty_trace_for_true_statement() {
    assert!(accepted("(CPC-TRACE 1)\n(THEOREM t)\n"));
}

#[test]
fn missing_theorem_is_rejected() {
    assert!(!accepted("(CPC-TRACE 1)\n"));
}

const REWRITE: &str = "(CPC-TRACE 1)
(THEOREM (== (first (cons a b)) a))
(REFL 1 (first (cons a b)))
(REWRITE 2 1 (1) first-cons ((x a) (y b)) ())
(DONE 2)
";

#[test]
fn rewrite_with_axiom() {
    assert_eq!(replay_text(REWRITE), Verdict::Accepted);
}

#[test]
fn perturbed_position_is_rejected_at_that_step() {
    let bad = REWRITE.replace("(REWRITE 2 1 (1)", "(REWRITE 2 1 (2)");
    assert_eq!(rejected_at(&bad), Some(4));
}

#[test]
fn wrong_rule_is_rejected() {
    let bad = REWRITE.replace("first-cons", "rest-cons");
    assert_eq!(rejected_at(&bad), Some(4));
}

#[test]
fn conditional_rule_needs_condition_fact() {
    let text = "(CPC-TRACE 1)
(THEOREM (=> (consp x) (== (cons (first x) (rest x)) x)))
(SUBPROOF 1 (=> (consp x) (== (cons (first x) (rest x)) x)))
(PROP 2 (consp x) (1) ())
(REFL 3 (cons (first x) (rest x)))
(REWRITE 4 3 (1) cons-first-rest ((x x)) (2))
(PROP 5 nil (1 4) ())
(QED 6)
(DONE 6)
";
    assert_eq!(replay_text(text), Verdict::Accepted);
    let bad = text.replace("cons-first-rest ((x x)) (2)", "cons-first-rest ((x x)) ()");
    assert_eq!(rejected_at(&bad), Some(6));
}

#[test]
fn excluded_middle_by_propagation() {
    let text = "(CPC-TRACE 1)\n(THEOREM (v p (not p)))\n(PROP 1 (v p (not p)) () ())\n(DONE 1)\n";
    assert_eq!(replay_text(text), Verdict::Accepted);
    let bad = text.replace("(v p (not p))", "(v p q)");
    assert!(!accepted(&bad));
}

#[test]
fn learned_clauses_must_be_unit_implied() {
    // (p v q) ^ (p v ~q) ^ (~p v q) ^ (~p v ~q) is unsatisfiable but
    // propagation alone cannot see it; learning (p) first makes it so.
    let f = "(^ (v p q) (v p (not q)) (v (not p) q) (v (not p) (not q)))";
    let with = format!("(CPC-TRACE 1)\n(THEOREM (not {f}))\n(PROP 1 (not {f}) () ((p)))\n(DONE 1)\n");
    assert_eq!(replay_text(&with), Verdict::Accepted);
    let bogus = with.replace(" (v (not p) (not q))", "");
    assert!(!accepted(&bogus));
}

#[test]
fn farkas_certificate() {
    let text = "(CPC-TRACE 1)
(THEOREM (=> (< x y) (not (< y x))))
(FARKAS 1 ((not (< x y)) (not (< y x))) ((lit 0 1) (lit 1 1)))
(PROP 2 (=> (< x y) (not (< y x))) (1) ())
(DONE 2)
";
    assert_eq!(replay_text(text), Verdict::Accepted);
    let bad = text.replace("((lit 0 1) (lit 1 1))", "((lit 0 1) (lit 1 2))");
    assert_eq!(rejected_at(&bad), Some(3));
    let neg = text.replace("((lit 0 1) (lit 1 1))", "((lit 0 -1) (lit 1 -1))");
    assert_eq!(rejected_at(&neg), Some(3));
}

#[test]
fn farkas_with_square() {
    // 0 <= x*x, so (< (* x x) 0) is impossible.
    let text = "(CPC-TRACE 1)
(THEOREM (not (< (* x x) 0)))
(FARKAS 1 ((not (< (* x x) 0))) ((lit 0 1) (square x 1)))
(DONE 1)
";
    assert_eq!(replay_text(text), Verdict::Accepted);
}

#[test]
fn congruence_clause() {
    let text = "(CPC-TRACE 1)
(THEOREM (v (not (== a b)) (== (first a) (first b))))
(CC 1 ((not (== a b)) (== (first a) (first b))))
(DONE 1)
";
    assert_eq!(replay_text(text), Verdict::Accepted);
    let bad = text.replace("(CC 1 ((not (== a b)) (== (first a) (first b))))", "(CC 1 ((== (first a) (first b))))");
    assert!(!accepted(&bad));
}

#[test]
fn congruence_uses_ground_evaluation() {
    let text = "(CPC-TRACE 1)
(THEOREM (v (not (== a 2)) (== (+ a 1) 3)))
(CC 1 ((not (== a 2)) (== (+ a 1) 3)))
(DONE 1)
";
    assert_eq!(replay_text(text), Verdict::Accepted);
}

#[test]
fn evaluation_of_user_definition() {
    let text = "(CPC-TRACE 1)
(DEF len2 ((x allp)) natp (terminates structural) (if (consp x) (+ 1 (len2 (rest x))) 0))
(THEOREM (== (len2 '(a b c)) 3))
(REFL 1 (len2 '(a b c)))
(EVAL 2 1 (1))
(DONE 2)
";
    assert_eq!(replay_text(text), Verdict::Accepted);
}

#[test]
fn non_decreasing_definition_is_rejected() {
    let text = "(CPC-TRACE 1)\n(DEF loop ((x allp)) allp (terminates structural) (loop x))\n(THEOREM t)\n";
    assert_eq!(rejected_at(text), Some(2));
    let assumed = text.replace("structural", "assumed");
    assert!(accepted(&assumed));
}

const INDUCT: &str = "(CPC-TRACE 1)
(DEF len2 ((x allp)) natp (terminates structural) (if (consp x) (+ 1 (len2 (rest x))) 0))
(LEMMA c (=> (not t) (natp (len2 x))))
(LEMMA b (=> (not (consp x)) (natp (len2 x))))
(LEMMA i (=> (^ (consp x) (natp (len2 (rest x)))) (natp (len2 x))))
(THEOREM (natp (len2 x)))
(INST 1 c ())
(INST 2 i ())
(INST 3 b ())
(INDUCT 4 (natp (len2 x)) len2 (x) (1 2 3))
(DONE 4)
";

#[test]
fn induction_obligations_are_recomputed() {
    assert_eq!(replay_text(INDUCT), Verdict::Accepted);
    let swapped = INDUCT.replace("(1 2 3)", "(1 3 2)");
    assert_eq!(rejected_at(&swapped), Some(10));
}

#[test]
fn subproof_facts_do_not_escape() {
    let text = "(CPC-TRACE 1)
(THEOREM nil)
(SUBPROOF 1 (v q (not q)))
(PROP 2 nil (1) ())
(QED 3)
(DONE 2)
";
    assert_eq!(rejected_at(text), Some(6));
}

#[test]
fn qed_requires_contradiction() {
    let text = "(CPC-TRACE 1)\n(THEOREM p)\n(SUBPROOF 1 p)\n(QED 2)\n(DONE 2)\n";
    assert_eq!(rejected_at(text), Some(4));
}

#[test]
fn boolean_equality_via_boolp_step() {
    let text = "(CPC-TRACE 1)
(THEOREM (== (== (< a b) (consp c)) (<=> (< a b) (consp c))))
(REFL 1 (boolp (< a b)))
(BOOLP 2 1 (1))
(TRUE 3 2)
(REFL 4 (boolp (consp c)))
(BOOLP 5 4 (1))
(TRUE 6 5)
(REFL 7 (== (< a b) (consp c)))
(REWRITE 8 7 (1) equal-booleans ((x (< a b)) (y (consp c))) (3 6))
(DONE 8)
";
    assert_eq!(replay_text(text), Verdict::Accepted);
    let bad = text.replace("(boolp (consp c))", "(boolp c)");
    assert_eq!(rejected_at(&bad), Some(7));
}

#[test]
fn repeated_literals_still_propagate() {
    let text = "(CPC-TRACE 1)
(THEOREM (<=> p p))
(SUBPROOF 1 (<=> p p))
(PROP 2 (not (<=> p p)) (1) ())
(PROP 3 nil (2) ())
(QED 4)
(DONE 4)
";
    assert_eq!(replay_text(text), Verdict::Accepted);
}
