//! Kernel-local terms and values. Deliberately independent of the main engine.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::sexp::Sx;
use crate::KernelError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KVal {
    Rat(BigRational),
    T,
    Nil,
    Sym(String),
    Str(String),
    Cons(Rc<KVal>, Rc<KVal>),
}

impl KVal {
    pub fn truthy(&self) -> bool {
        !matches!(self, KVal::Nil)
    }

    pub fn from_bool(b: bool) -> KVal {
        if b {
            KVal::T
        } else {
            KVal::Nil
        }
    }

    pub fn cons(a: KVal, b: KVal) -> KVal {
        KVal::Cons(Rc::new(a), Rc::new(b))
    }

    /// Arithmetic view: non-rationals count as zero.
    pub fn fix(&self) -> BigRational {
        match self {
            KVal::Rat(r) => r.clone(),
            _ => BigRational::zero(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            KVal::Rat(_) => 0,
            KVal::T | KVal::Nil | KVal::Sym(_) => 1,
            KVal::Str(_) => 2,
            KVal::Cons(..) => 3,
        }
    }

    fn sym_name(&self) -> &str {
        match self {
            KVal::T => "t",
            KVal::Nil => "nil",
            KVal::Sym(s) => s,
            _ => "",
        }
    }

    /// The total order used by `<<`.
    pub fn total_lt(&self, other: &KVal) -> bool {
        order(self, other) == std::cmp::Ordering::Less
    }
}

fn order(a: &KVal, b: &KVal) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    match a.rank().cmp(&b.rank()) {
        Equal => {}
        o => return o,
    }
    match (a, b) {
        (KVal::Rat(x), KVal::Rat(y)) => x.cmp(y),
        (KVal::Str(x), KVal::Str(y)) => x.cmp(y),
        (KVal::Cons(h1, t1), KVal::Cons(h2, t2)) => match order(h1, h2) {
            Equal => order(t1, t2),
            o => o,
        },
        _ => a.sym_name().cmp(b.sym_name()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KTerm {
    Var(String),
    Const(KVal),
    App(String, Vec<KTerm>),
}

pub type KSubst = BTreeMap<String, KTerm>;

impl KTerm {
    pub fn app(f: &str, args: Vec<KTerm>) -> KTerm {
        KTerm::App(f.to_string(), args)
    }

    pub fn t() -> KTerm {
        KTerm::Const(KVal::T)
    }

    pub fn nil() -> KTerm {
        KTerm::Const(KVal::Nil)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: KTerm) -> KTerm {
        KTerm::app("not", vec![t])
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            KTerm::App(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn args(&self) -> &[KTerm] {
        match self {
            KTerm::App(_, a) => a,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            KTerm::Var(_) => false,
            KTerm::Const(_) => true,
            KTerm::App(_, a) => a.iter().all(KTerm::is_ground),
        }
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            KTerm::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            KTerm::Const(_) => {}
            KTerm::App(_, a) => a.iter().for_each(|t| t.vars(out)),
        }
    }

    pub fn subst(&self, s: &KSubst) -> KTerm {
        match self {
            KTerm::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            KTerm::Const(_) => self.clone(),
            KTerm::App(f, a) => KTerm::App(f.clone(), a.iter().map(|t| t.subst(s)).collect()),
        }
    }

    pub fn at(&self, pos: &[usize]) -> Option<&KTerm> {
        let mut cur = self;
        for &i in pos {
            cur = cur.args().get(i)?;
        }
        Some(cur)
    }

    pub fn replace_at(&self, pos: &[usize], new: KTerm) -> Option<KTerm> {
        match pos.split_first() {
            None => Some(new),
            Some((&i, rest)) => match self {
                KTerm::App(f, args) if i < args.len() => {
                    let mut args = args.clone();
                    args[i] = args[i].replace_at(rest, new)?;
                    Some(KTerm::App(f.clone(), args))
                }
                _ => None,
            },
        }
    }

    pub fn mentions_fn(&self, f: &str) -> bool {
        match self {
            KTerm::App(g, a) => g == f || a.iter().any(|t| t.mentions_fn(f)),
            _ => false,
        }
    }
}

pub fn parse_rat(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    if body.is_empty() {
        return None;
    }
    let (n, d) = match body.split_once('/') {
        Some((n, d)) => (n, d),
        None => (body, "1"),
    };
    if n.is_empty() || d.is_empty() || !n.bytes().all(|b| b.is_ascii_digit()) || !d.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    let r = BigRational::new(n, d);
    Some(if neg { -r } else { r })
}

fn datum(sx: &Sx) -> Result<KVal, KernelError> {
    Ok(match sx {
        Sx::Str(s) => KVal::Str(s.clone()),
        Sx::Quote(inner) => datum(inner)?,
        Sx::Atom(a) => {
            if let Some(r) = parse_rat(a) {
                KVal::Rat(r)
            } else if a == "t" {
                KVal::T
            } else if a == "nil" {
                KVal::Nil
            } else {
                KVal::Sym(a.clone())
            }
        }
        Sx::List(items) => {
            let (items, tail) = if items.len() >= 3 && items[items.len() - 2].as_atom() == Some(".") {
                (&items[..items.len() - 2], datum(&items[items.len() - 1])?)
            } else {
                (&items[..], KVal::Nil)
            };
            let mut acc = tail;
            for it in items.iter().rev() {
                acc = KVal::cons(datum(it)?, acc);
            }
            acc
        }
    })
}

pub fn term_of(sx: &Sx) -> Result<KTerm, KernelError> {
    Ok(match sx {
        Sx::Str(s) => KTerm::Const(KVal::Str(s.clone())),
        Sx::Quote(inner) => KTerm::Const(datum(inner)?),
        Sx::Atom(a) => {
            if let Some(r) = parse_rat(a) {
                KTerm::Const(KVal::Rat(r))
            } else if a == "t" {
                KTerm::t()
            } else if a == "nil" {
                KTerm::nil()
            } else {
                KTerm::Var(a.clone())
            }
        }
        Sx::List(items) => {
            let Some((head, rest)) = items.split_first() else {
                return Ok(KTerm::nil());
            };
            let f = head.as_atom().ok_or_else(|| KernelError::Syntax("application head must be a symbol".into()))?;
            if f == "quote" && rest.len() == 1 {
                return Ok(KTerm::Const(datum(&rest[0])?));
            }
            KTerm::App(f.to_string(), rest.iter().map(term_of).collect::<Result<_, _>>()?)
        }
    })
}

pub fn subst_of(sx: &Sx) -> Result<KSubst, KernelError> {
    let items = sx.as_list().ok_or_else(|| KernelError::Syntax("substitution must be a list".into()))?;
    let mut s = KSubst::new();
    for it in items {
        match it.as_list() {
            Some([Sx::Atom(v), t]) => {
                if s.insert(v.clone(), term_of(t)?).is_some() {
                    return Err(KernelError::Syntax(format!("duplicate binding for {v}")));
                }
            }
            _ => return Err(KernelError::Syntax("bad substitution binding".into())),
        }
    }
    Ok(s)
}

fn fmt_rat(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn fmt_datum(v: &KVal, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        KVal::Rat(r) => fmt_rat(r, f),
        KVal::T => write!(f, "t"),
        KVal::Nil => write!(f, "nil"),
        KVal::Sym(s) => write!(f, "{s}"),
        KVal::Str(s) => write!(f, "{s:?}"),
        KVal::Cons(h, t) => {
            write!(f, "(")?;
            fmt_datum(h, f)?;
            let mut cur: &KVal = t;
            loop {
                match cur {
                    KVal::Nil => break,
                    KVal::Cons(h, t) => {
                        write!(f, " ")?;
                        fmt_datum(h, f)?;
                        cur = t;
                    }
                    other => {
                        write!(f, " . ")?;
                        fmt_datum(other, f)?;
                        break;
                    }
                }
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for KVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KVal::Sym(_) | KVal::Cons(..) => {
                write!(f, "'")?;
                fmt_datum(self, f)
            }
            _ => fmt_datum(self, f),
        }
    }
}

impl fmt::Display for KTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KTerm::Var(v) => write!(f, "{v}"),
            KTerm::Const(c) => write!(f, "{c}"),
            KTerm::App(g, args) => {
                write!(f, "({g}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
