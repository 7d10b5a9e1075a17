//! Built-in axiom groups. Each entry is `(rule id, group, statement)`.
//!
//! Statements have the shape `(== l r)`, `(=> c (== l r))` or
//! `(=> (^ c1 .. cn) (== l r))`. The main engine reads this table to build
//! its rule sets; the kernel reads it to resolve rule ids during replay.

pub const AXIOMS: &[(&str, &str, &str)] = &[
    // min: if, cons and equality basics
    ("first-cons", "min", "(== (first (cons x y)) x)"),
    ("rest-cons", "min", "(== (rest (cons x y)) y)"),
    ("consp-cons", "min", "(== (consp (cons x y)) t)"),
    ("endp-consp", "min", "(== (endp x) (not (consp x)))"),
    ("if-true", "min", "(=> c (== (if c x y) x))"),
    ("if-false", "min", "(=> (not c) (== (if c x y) y))"),
    ("if-same", "min", "(== (if c x x) x)"),
    ("equal-refl", "min", "(== (== x x) t)"),
    ("allp-true", "min", "(== (allp x) t)"),
    ("equal-booleans", "min", "(=> (^ (boolp x) (boolp y)) (== (== x y) (<=> x y)))"),
    ("not-not", "min", "(=> (boolp x) (== (not (not x)) x))"),
    ("consp-when-tlp", "min", "(=> (^ (tlp x) (not (== x nil))) (== (consp x) t))"),
    // cons axioms
    ("tlp-cons", "contract", "(== (tlp (cons x y)) (tlp y))"),
    ("cons-first-rest", "cons-axioms", "(=> (consp x) (== (cons (first x) (rest x)) x))"),
    // contract rules for primitives
    ("rest-tlp-contract", "contract", "(=> (^ (tlp x) (consp x)) (== (tlp (rest x)) t))"),
    ("cons-consp-contract", "contract", "(== (consp (cons x y)) t)"),
    // type prescriptions
    ("posp-natp", "type-prescription", "(=> (posp x) (== (natp x) t))"),
    ("posp-intp", "type-prescription", "(=> (posp x) (== (intp x) t))"),
    ("posp-rationalp", "type-prescription", "(=> (posp x) (== (rationalp x) t))"),
    ("natp-intp", "type-prescription", "(=> (natp x) (== (intp x) t))"),
    ("natp-rationalp", "type-prescription", "(=> (natp x) (== (rationalp x) t))"),
    ("intp-rationalp", "type-prescription", "(=> (intp x) (== (rationalp x) t))"),
    ("plus-rationalp", "type-prescription", "(== (rationalp (+ x y)) t)"),
    ("times-rationalp", "type-prescription", "(== (rationalp (* x y)) t)"),
    ("neg-rationalp", "type-prescription", "(== (rationalp (- x)) t)"),
    ("div-rationalp", "type-prescription", "(== (rationalp (/ x y)) t)"),
    ("plus-posp", "type-prescription", "(=> (^ (posp x) (posp y)) (== (posp (+ x y)) t))"),
    ("times-posp", "type-prescription", "(=> (^ (posp x) (posp y)) (== (posp (* x y)) t))"),
    ("plus-natp", "type-prescription", "(=> (^ (natp x) (natp y)) (== (natp (+ x y)) t))"),
    ("times-natp", "type-prescription", "(=> (^ (natp x) (natp y)) (== (natp (* x y)) t))"),
    ("plus-intp", "type-prescription", "(=> (^ (intp x) (intp y)) (== (intp (+ x y)) t))"),
    ("times-intp", "type-prescription", "(=> (^ (intp x) (intp y)) (== (intp (* x y)) t))"),
    ("neg-intp", "type-prescription", "(=> (intp x) (== (intp (- x)) t))"),
    ("boolp-not", "type-prescription", "(== (boolp (not x)) t)"),
    ("boolp-equal", "type-prescription", "(== (boolp (== x y)) t)"),
    ("boolp-lt", "type-prescription", "(== (boolp (< x y)) t)"),
    ("boolp-consp", "type-prescription", "(== (boolp (consp x)) t)"),
    ("boolp-tlp", "type-prescription", "(== (boolp (tlp x)) t)"),
    ("boolp-total-order", "type-prescription", "(== (boolp (<< x y)) t)"),
];
