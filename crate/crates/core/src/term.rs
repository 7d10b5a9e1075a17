//! First-order terms over the ACL2s-style universe, with substitution,
//! syntactic matching and the canonical prefix rendering.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Nil,
    True,
    Rat(BigRational),
    Sym(String),
    Str(String),
    Cons(Arc<Value>, Arc<Value>),
}

impl Value {
    pub fn from_bool(b: bool) -> Value {
        if b {
            Value::True
        } else {
            Value::Nil
        }
    }

    pub fn int(n: i64) -> Value {
        Value::Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn cons(h: Value, t: Value) -> Value {
        Value::Cons(Arc::new(h), Arc::new(t))
    }

    pub fn list(items: Vec<Value>) -> Value {
        items.into_iter().rev().fold(Value::Nil, |acc, v| Value::cons(v, acc))
    }

    pub fn truthy(&self) -> bool {
        !matches!(self, Value::Nil)
    }

    /// Arithmetic view: anything that is not a rational counts as zero.
    pub fn fix(&self) -> BigRational {
        match self {
            Value::Rat(r) => r.clone(),
            _ => BigRational::zero(),
        }
    }

    pub fn as_rat(&self) -> Option<&BigRational> {
        match self {
            Value::Rat(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_true_list(&self) -> bool {
        let mut cur = self;
        loop {
            match cur {
                Value::Nil => return true,
                Value::Cons(_, t) => cur = t,
                _ => return false,
            }
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Rat(_) => 0,
            Value::Nil | Value::True | Value::Sym(_) => 1,
            Value::Str(_) => 2,
            Value::Cons(..) => 3,
        }
    }

    fn symbol_name(&self) -> &str {
        match self {
            Value::Nil => "nil",
            Value::True => "t",
            Value::Sym(s) => s,
            _ => "",
        }
    }

    /// The fixed total order behind `<<`: rationals, then symbols, then
    /// strings, then conses; each rank ordered internally.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match self.rank().cmp(&other.rank()) {
            Ordering::Equal => {}
            o => return o,
        }
        match (self, other) {
            (Value::Rat(a), Value::Rat(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Cons(h1, t1), Value::Cons(h2, t2)) => h1.total_cmp(h2).then_with(|| t1.total_cmp(t2)),
            _ => self.symbol_name().cmp(other.symbol_name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(Value),
    App(String, Vec<Term>),
}

pub type Subst = BTreeMap<String, Term>;

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    pub fn t() -> Term {
        Term::Const(Value::True)
    }

    pub fn nil() -> Term {
        Term::Const(Value::Nil)
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Value::int(n))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        Term::app("not", vec![t])
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::app("==", vec![a, b])
    }

    /// Conjunction with the degenerate cases folded: no conjuncts is `t`,
    /// one conjunct is itself.
    pub fn and(mut items: Vec<Term>) -> Term {
        match items.len() {
            0 => Term::t(),
            1 => items.pop().unwrap(),
            _ => Term::app("^", items),
        }
    }

    pub fn or(mut items: Vec<Term>) -> Term {
        match items.len() {
            0 => Term::nil(),
            1 => items.pop().unwrap(),
            _ => Term::app("v", items),
        }
    }

    /// `(=> (^ hyps) concl)`, or just `concl` when there are no hypotheses.
    pub fn implies(hyps: Vec<Term>, concl: Term) -> Term {
        if hyps.is_empty() {
            concl
        } else {
            Term::app("=>", vec![Term::and(hyps), concl])
        }
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Term::App(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, a) => a,
            _ => &[],
        }
    }

    pub fn is_app(&self, f: &str, arity: usize) -> bool {
        matches!(self, Term::App(g, a) if g == f && a.len() == arity)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::App(_, a) => a.iter().all(Term::is_ground),
        }
    }

    pub fn as_const(&self) -> Option<&Value> {
        match self {
            Term::Const(v) => Some(v),
            _ => None,
        }
    }

    /// Free variables in first-occurrence order.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::App(_, a) => a.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, a) => 1 + a.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn mentions_fn(&self, f: &str) -> bool {
        match self {
            Term::App(g, a) => g == f || a.iter().any(|t| t.mentions_fn(f)),
            _ => false,
        }
    }

    pub fn functions(&self, out: &mut Vec<String>) {
        if let Term::App(f, a) = self {
            if !out.contains(f) {
                out.push(f.clone());
            }
            a.iter().for_each(|t| t.functions(out));
        }
    }

    pub fn at(&self, pos: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in pos {
            cur = cur.args().get(i)?;
        }
        Some(cur)
    }

    pub fn replace_at(&self, pos: &[usize], new: Term) -> Term {
        match pos.split_first() {
            None => new,
            Some((&i, rest)) => match self {
                Term::App(f, args) => {
                    let mut args = args.clone();
                    args[i] = args[i].replace_at(rest, new);
                    Term::App(f.clone(), args)
                }
                _ => panic!("replace_at: position outside term"),
            },
        }
    }
}

/// Simultaneous substitution.
pub fn apply_subst(s: &Subst, t: &Term) -> Term {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
        Term::App(f, a) => Term::App(f.clone(), a.iter().map(|x| apply_subst(s, x)).collect()),
    }
}

/// The most general substitution `s` with `apply_subst(s, pattern) == target`.
pub fn match_term(pattern: &Term, target: &Term) -> Option<Subst> {
    let mut s = Subst::new();
    if match_into(pattern, target, &mut s) {
        Some(s)
    } else {
        None
    }
}

pub fn match_into(pattern: &Term, target: &Term, s: &mut Subst) -> bool {
    match (pattern, target) {
        (Term::Var(v), _) => match s.get(v) {
            Some(bound) => bound == target,
            None => {
                s.insert(v.clone(), target.clone());
                true
            }
        },
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_into(x, y, s))
        }
        _ => false,
    }
}

pub fn rat_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn write_datum(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Nil => write!(f, "nil"),
        Value::True => write!(f, "t"),
        Value::Rat(r) => write!(f, "{}", rat_to_string(r)),
        Value::Sym(s) => write!(f, "{s}"),
        Value::Str(s) => write!(f, "{s:?}"),
        Value::Cons(h, t) => {
            write!(f, "(")?;
            write_datum(h, f)?;
            let mut cur: &Value = t;
            loop {
                match cur {
                    Value::Nil => break,
                    Value::Cons(h, t) => {
                        write!(f, " ")?;
                        write_datum(h, f)?;
                        cur = t;
                    }
                    other => {
                        write!(f, " . ")?;
                        write_datum(other, f)?;
                        break;
                    }
                }
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if matches!(self, Value::Sym(_) | Value::Cons(..)) {
            write!(f, "'")?;
        }
        write_datum(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::App(g, args) => {
                write!(f, "({g}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Renders a value without the leading quote, as counterexamples are shown.
pub fn value_plain(v: &Value) -> String {
    struct Plain<'a>(&'a Value);
    impl fmt::Display for Plain<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_datum(self.0, f)
        }
    }
    Plain(v).to_string()
}
