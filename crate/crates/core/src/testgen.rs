//! Random counterexample search.
//!
//! Values are drawn per recognizer with a bias toward small numbers and
//! short lists, constraints are enforced by rejection, and every reported
//! assignment is re-evaluated before it is returned.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::Env;
use crate::eval::{eval_with, recognize, DEFAULT_EVAL_BUDGET};
use crate::term::{value_plain, Term, Value};
use crate::typeguard::{export, split};

pub type Assignment = Vec<(String, Value)>;

pub const DEFAULT_TRIALS: u32 = 1000;
pub const MAX_COUNTEREXAMPLES: usize = 3;

/// What to generate and which constraints a candidate must meet.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSpec {
    pub vars: Vec<(String, String)>,
    pub constraints: Vec<Term>,
    pub trials: u32,
    pub seed: u64,
}

impl TestSpec {
    /// Reads variable types and constraints off the hypotheses of an
    /// implication; the conclusion is returned as the target.
    pub fn for_formula(formula: &Term, env: &Env, trials: u32, seed: u64) -> (TestSpec, Term) {
        let (hyps, concl) = split(&export(formula));
        let mut vars: Vec<(String, String)> = formula.vars().into_iter().map(|v| (v, "allp".to_string())).collect();
        for h in &hyps {
            if let Term::App(r, a) = h {
                if let [Term::Var(x)] = a.as_slice() {
                    if let Some(slot) = vars.iter_mut().find(|(v, ty)| v == x && ty == "allp") {
                        if env.is_recognizer(r) {
                            slot.1 = r.clone();
                        }
                    }
                }
            }
        }
        (TestSpec { vars, constraints: hyps, trials, seed }, concl)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestReport {
    pub counterexamples: Vec<Assignment>,
    /// Trials whose assignment met every constraint.
    pub satisfying: u32,
    pub trials: u32,
}

impl TestReport {
    /// True when no candidate ever met the constraints, so nothing was
    /// actually tested.
    pub fn vacuous(&self) -> bool {
        self.satisfying == 0
    }
}

/// Renders an assignment as `((var value) ...)`.
pub fn render_assignment(a: &Assignment) -> String {
    let parts: Vec<String> = a.iter().map(|(x, v)| format!("({x} {})", value_plain(v))).collect();
    format!("({})", parts.join(" "))
}

const SYMBOLS: &[&str] = &["a", "b", "c", "x", "y", "foo"];

struct Gen<'a> {
    rng: ChaCha8Rng,
    env: &'a Env,
}

impl Gen<'_> {
    fn small_int(&mut self) -> BigInt {
        let r: f64 = self.rng.gen();
        let n: i64 = if r < 0.3 {
            [0, 1, -1][self.rng.gen_range(0..3)]
        } else if r < 0.8 {
            self.rng.gen_range(-10..=10)
        } else {
            self.rng.gen_range(-1000..=1000)
        };
        BigInt::from(n)
    }

    fn rational(&mut self) -> Value {
        let num = self.small_int();
        let den = if self.rng.gen_bool(0.6) { BigInt::from(1) } else { BigInt::from(self.rng.gen_range(2..=9)) };
        Value::Rat(BigRational::new(num, den))
    }

    fn integer(&mut self) -> BigInt {
        self.small_int()
    }

    fn symbol(&mut self) -> Value {
        Value::Sym(SYMBOLS[self.rng.gen_range(0..SYMBOLS.len())].to_string())
    }

    fn list(&mut self, depth: u32, nonempty: bool) -> Value {
        let mut items = Vec::new();
        while (nonempty && items.is_empty()) || (items.len() < 8 && self.rng.gen_bool(0.65)) {
            items.push(self.any(depth + 1));
        }
        Value::list(items)
    }

    fn any(&mut self, depth: u32) -> Value {
        let k = if depth > 2 { self.rng.gen_range(0..6) } else { self.rng.gen_range(0..8) };
        match k {
            0..=2 => Value::Rat(BigRational::from_integer(self.integer())),
            3 => self.rational(),
            4 => self.symbol(),
            5 => Value::from_bool(self.rng.gen_bool(0.5)),
            6 => self.list(depth, false),
            _ => Value::cons(self.any(depth + 1), self.any(depth + 1)),
        }
    }

    fn value(&mut self, ty: &str) -> Value {
        use num_traits::Signed;
        match ty {
            "natp" => Value::Rat(BigRational::from_integer(self.integer().abs())),
            "posp" => Value::Rat(BigRational::from_integer(self.integer().abs() + 1)),
            "intp" => Value::Rat(BigRational::from_integer(self.integer())),
            "rationalp" => self.rational(),
            "boolp" => Value::from_bool(self.rng.gen_bool(0.5)),
            "symbolp" => {
                if self.rng.gen_bool(0.2) {
                    Value::from_bool(self.rng.gen_bool(0.5))
                } else {
                    self.symbol()
                }
            }
            "tlp" => self.list(0, false),
            "consp" => {
                if self.rng.gen_bool(0.8) {
                    self.list(0, true)
                } else {
                    Value::cons(self.any(1), self.any(1))
                }
            }
            other => {
                // A user recognizer: draw from the type of its argument and
                // let the constraint reject what it does not accept.
                let inner = self.env.function(other).and_then(|d| d.params.first()).map(|p| p.1.clone());
                match inner {
                    Some(t) if t != other => self.value(&t),
                    _ => self.any(0),
                }
            }
        }
    }
}

fn holds(t: &Term, a: &BTreeMap<String, Value>, env: &Env) -> Option<bool> {
    eval_with(t, a, env, DEFAULT_EVAL_BUDGET).ok().map(|v| v.truthy())
}

/// Searches for assignments meeting the constraints under which `target`
/// evaluates to false.
pub fn find_counterexamples(target: &Term, spec: &TestSpec, env: &Env) -> TestReport {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(spec.seed), env };
    let mut report = TestReport { trials: spec.trials, ..TestReport::default() };
    for _ in 0..spec.trials {
        let assignment: Assignment = spec.vars.iter().map(|(x, ty)| (x.clone(), g.value(ty))).collect();
        if spec.vars.iter().zip(&assignment).any(|((_, ty), (_, v))| recognize(ty, v) == Some(false)) {
            continue;
        }
        let map: BTreeMap<String, Value> = assignment.iter().cloned().collect();
        if !spec.constraints.iter().all(|c| holds(c, &map, env) == Some(true)) {
            continue;
        }
        report.satisfying += 1;
        if holds(target, &map, env) == Some(false) && !report.counterexamples.contains(&assignment) {
            report.counterexamples.push(assignment);
            if report.counterexamples.len() >= MAX_COUNTEREXAMPLES {
                break;
            }
        }
    }
    report
}

/// Tests an implication: hypotheses become constraints, the conclusion
/// the target.
pub fn test_formula(formula: &Term, env: &Env, trials: u32, seed: u64) -> TestReport {
    let (spec, target) = TestSpec::for_formula(formula, env, trials, seed);
    find_counterexamples(&target, &spec, env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    #[test]
    fn zero_denominators_are_found() {
        let env = Env::new();
        let f = parse_term(
            "(=> (^ (rationalp a) (rationalp b) (rationalp c) (rationalp d)) (^ (not (== b 0)) (not (== d 0))))",
        )
        .unwrap();
        let r = test_formula(&f, &env, DEFAULT_TRIALS, 7);
        assert!(!r.counterexamples.is_empty());
        for cx in &r.counterexamples {
            let m: BTreeMap<_, _> = cx.iter().cloned().collect();
            assert!(m["b"] == Value::int(0) || m["d"] == Value::int(0));
        }
    }

    #[test]
    fn true_target_has_no_counterexamples() {
        let env = Env::new();
        let r = test_formula(&Term::t(), &env, 100, 1);
        assert!(r.counterexamples.is_empty());
    }

    #[test]
    fn same_seed_same_report() {
        let env = Env::new();
        let f = parse_term("(=> (^ (tlp x) (tlp y)) (== (bin-app x y) (bin-app y x)))").unwrap();
        let a = test_formula(&f, &env, 300, 42);
        let b = test_formula(&f, &env, 300, 42);
        assert_eq!(a, b);
        assert!(!a.counterexamples.is_empty());
        assert_eq!(render_assignment(&a.counterexamples[0]).chars().next(), Some('('));
    }

    proptest::proptest! {
        #[test]
        fn generated_values_satisfy_their_recognizer(seed in 0u64..500, k in 0usize..8) {
            let env = Env::new();
            let ty = ["natp", "posp", "intp", "rationalp", "boolp", "symbolp", "tlp", "consp"][k];
            let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), env: &env };
            let v = g.value(ty);
            proptest::prop_assert_eq!(recognize(ty, &v), Some(true));
        }
    }
}
