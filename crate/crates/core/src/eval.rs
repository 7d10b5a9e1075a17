//! Ground evaluation with guard checking.
//!
//! Built-ins have total logical semantics, but the evaluator refuses to go
//! through a call whose guard fails; that is how contract violations show up
//! during testing.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::env::Env;
use crate::term::{Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("guard {guard} fails for {call}")]
    GuardViolation { call: String, guard: Term },
    #[error("evaluation budget exhausted")]
    BudgetExceeded,
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
}

pub const DEFAULT_EVAL_BUDGET: u64 = 1_000_000;

/// Names of the recognizers understood natively.
pub const RECOGNIZERS: &[&str] = &["allp", "boolp", "natp", "posp", "intp", "rationalp", "tlp", "consp", "symbolp"];

pub fn recognize(r: &str, v: &Value) -> Option<bool> {
    Some(match r {
        "allp" => true,
        "boolp" => matches!(v, Value::True | Value::Nil),
        "natp" => matches!(v, Value::Rat(q) if q.is_integer() && !q.is_negative()),
        "posp" => matches!(v, Value::Rat(q) if q.is_integer() && q.is_positive()),
        "intp" => matches!(v, Value::Rat(q) if q.is_integer()),
        "rationalp" => matches!(v, Value::Rat(_)),
        "tlp" => v.is_true_list(),
        "consp" => matches!(v, Value::Cons(..)),
        "symbolp" => matches!(v, Value::Sym(_) | Value::True | Value::Nil),
        _ => return None,
    })
}

/// Logical semantics of a strict built-in, without guards.
pub fn apply_builtin(f: &str, v: &[Value]) -> Option<Value> {
    let b = Value::from_bool;
    if let Some(r) = recognize(f, v.first()?) {
        return (v.len() == 1).then(|| b(r));
    }
    Some(match (f, v.len()) {
        ("cons", 2) => Value::cons(v[0].clone(), v[1].clone()),
        ("first", 1) => match &v[0] {
            Value::Cons(h, _) => (**h).clone(),
            _ => Value::Nil,
        },
        ("rest", 1) => match &v[0] {
            Value::Cons(_, t) => (**t).clone(),
            _ => Value::Nil,
        },
        ("endp", 1) => b(!matches!(v[0], Value::Cons(..))),
        ("not", 1) => b(!v[0].truthy()),
        ("^", n) if n >= 2 => b(v.iter().all(Value::truthy)),
        ("v", n) if n >= 2 => b(v.iter().any(Value::truthy)),
        ("=>", 2) => b(!v[0].truthy() || v[1].truthy()),
        ("<=>", 2) => b(v[0].truthy() == v[1].truthy()),
        ("==", 2) => b(v[0] == v[1]),
        ("<", 2) => b(v[0].fix() < v[1].fix()),
        ("<<", 2) => b(v[0].total_cmp(&v[1]) == std::cmp::Ordering::Less),
        ("+", 2) => Value::Rat(v[0].fix() + v[1].fix()),
        ("*", 2) => Value::Rat(v[0].fix() * v[1].fix()),
        ("-", 1) => Value::Rat(-v[0].fix()),
        ("/", 2) => {
            let d = v[1].fix();
            if d.is_zero() {
                Value::Rat(BigRational::zero())
            } else {
                Value::Rat(v[0].fix() / d)
            }
        }
        _ => return None,
    })
}

/// Guard of a built-in as terms over `args`.
pub fn builtin_guard(f: &str, args: &[Term]) -> Vec<Term> {
    let rat = |t: &Term| Term::app("rationalp", vec![t.clone()]);
    match (f, args.len()) {
        ("first", 1) | ("rest", 1) => vec![Term::app("consp", vec![args[0].clone()])],
        ("+", 2) | ("*", 2) | ("<", 2) => vec![rat(&args[0]), rat(&args[1])],
        ("-", 1) => vec![rat(&args[0])],
        ("/", 2) => vec![rat(&args[0]), rat(&args[1]), Term::not(Term::eq(args[1].clone(), Term::int(0)))],
        _ => Vec::new(),
    }
}

fn builtin_guard_holds(f: &str, v: &[Value]) -> bool {
    match (f, v.len()) {
        ("first", 1) | ("rest", 1) => matches!(v[0], Value::Cons(..)),
        ("+", 2) | ("*", 2) | ("<", 2) => v.iter().all(|x| x.as_rat().is_some()),
        ("-", 1) => v[0].as_rat().is_some(),
        ("/", 2) => v.iter().all(|x| x.as_rat().is_some()) && !v[1].fix().is_zero(),
        _ => true,
    }
}

/// Nesting limit for calls to defined functions. Deeper recursion is
/// reported as budget exhaustion instead of overflowing the stack.
pub const MAX_CALL_DEPTH: u32 = 200;

struct Evaluator<'a> {
    env: &'a Env,
    fuel: u64,
    depth: u32,
}

type Frame = BTreeMap<String, Value>;

impl Evaluator<'_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        if self.fuel == 0 {
            return Err(EvalError::BudgetExceeded);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval(&mut self, t: &Term, frame: &Frame) -> Result<Value, EvalError> {
        self.tick()?;
        match t {
            Term::Var(x) => frame.get(x).cloned().ok_or_else(|| EvalError::Unbound(x.clone())),
            Term::Const(v) => Ok(v.clone()),
            Term::App(f, a) => {
                match (f.as_str(), a.len()) {
                    ("if", 3) => {
                        let c = self.eval(&a[0], frame)?;
                        return self.eval(if c.truthy() { &a[1] } else { &a[2] }, frame);
                    }
                    ("^", _) => {
                        for x in a {
                            if !self.eval(x, frame)?.truthy() {
                                return Ok(Value::Nil);
                            }
                        }
                        return Ok(Value::True);
                    }
                    ("v", _) => {
                        for x in a {
                            if self.eval(x, frame)?.truthy() {
                                return Ok(Value::True);
                            }
                        }
                        return Ok(Value::Nil);
                    }
                    ("=>", 2) => {
                        if !self.eval(&a[0], frame)?.truthy() {
                            return Ok(Value::True);
                        }
                        return Ok(Value::from_bool(self.eval(&a[1], frame)?.truthy()));
                    }
                    _ => {}
                }
                let vals = a.iter().map(|x| self.eval(x, frame)).collect::<Result<Vec<_>, _>>()?;
                self.call(f, vals)
            }
        }
    }

    fn call(&mut self, f: &str, vals: Vec<Value>) -> Result<Value, EvalError> {
        let quoted = || Term::App(f.to_string(), vals.iter().cloned().map(Term::Const).collect());
        if let Some(def) = self.env.function(f) {
            for ((p, r), v) in def.params.iter().zip(&vals) {
                let ok = match recognize(r, v) {
                    Some(b) => b,
                    None => self.call(r, vec![v.clone()])?.truthy(),
                };
                if !ok {
                    return Err(EvalError::GuardViolation {
                        call: quoted().to_string(),
                        guard: Term::app(r, vec![Term::Var(p.clone())]),
                    });
                }
            }
            if self.depth >= MAX_CALL_DEPTH {
                return Err(EvalError::BudgetExceeded);
            }
            let frame: Frame = def.params.iter().map(|(p, _)| p.clone()).zip(vals).collect();
            self.depth += 1;
            let out = self.eval(&def.body, &frame);
            self.depth -= 1;
            return out;
        }
        if !builtin_guard_holds(f, &vals) {
            let args: Vec<Term> = vals.iter().cloned().map(Term::Const).collect();
            let guard = Term::and(builtin_guard(f, &args));
            return Err(EvalError::GuardViolation { call: quoted().to_string(), guard });
        }
        apply_builtin(f, &vals).ok_or_else(|| EvalError::UnknownFunction(f.to_string()))
    }
}

/// Evaluates a ground term, checking guards along the way.
pub fn eval_ground(t: &Term, env: &Env, budget: u64) -> Result<Value, EvalError> {
    Evaluator { env, fuel: budget, depth: 0 }.eval(t, &Frame::new())
}

/// Evaluates `t` under an assignment of its free variables.
pub fn eval_with(t: &Term, bindings: &BTreeMap<String, Value>, env: &Env, budget: u64) -> Result<Value, EvalError> {
    Evaluator { env, fuel: budget, depth: 0 }.eval(t, bindings)
}

/// Total logical evaluation: no guard checks, `None` only when fuel runs
/// out or a function is unknown. Agrees with the kernel's evaluator.
pub fn eval_logic(t: &Term, env: &Env, fuel: &mut u64) -> Option<Value> {
    logic(t, env, fuel, 0)
}

fn logic(t: &Term, env: &Env, fuel: &mut u64, depth: u32) -> Option<Value> {
    if *fuel == 0 {
        return None;
    }
    *fuel -= 1;
    match t {
        Term::Var(_) => None,
        Term::Const(c) => Some(c.clone()),
        Term::App(f, a) => {
            match (f.as_str(), a.len()) {
                ("if", 3) => {
                    let c = logic(&a[0], env, fuel, depth)?;
                    return logic(if c.truthy() { &a[1] } else { &a[2] }, env, fuel, depth);
                }
                ("^", _) => {
                    for x in a {
                        if !logic(x, env, fuel, depth)?.truthy() {
                            return Some(Value::Nil);
                        }
                    }
                    return Some(Value::True);
                }
                ("v", _) => {
                    for x in a {
                        if logic(x, env, fuel, depth)?.truthy() {
                            return Some(Value::True);
                        }
                    }
                    return Some(Value::Nil);
                }
                ("=>", 2) => {
                    if !logic(&a[0], env, fuel, depth)?.truthy() {
                        return Some(Value::True);
                    }
                    return Some(Value::from_bool(logic(&a[1], env, fuel, depth)?.truthy()));
                }
                _ => {}
            }
            let vals = a.iter().map(|x| logic(x, env, fuel, depth)).collect::<Option<Vec<_>>>()?;
            if let Some(def) = env.function(f) {
                if def.params.len() != vals.len() || depth >= MAX_CALL_DEPTH {
                    return None;
                }
                let s: crate::term::Subst =
                    def.params.iter().map(|(p, _)| p.clone()).zip(vals.into_iter().map(Term::Const)).collect();
                return logic(&crate::term::apply_subst(&s, &def.body), env, fuel, depth + 1);
            }
            apply_builtin(f, &vals)
        }
    }
}
