//! The environment snapshot a trace is replayed against: function
//! definitions, assumed lemmas and built-in axioms, plus the kernel's own
//! evaluator.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::axioms::AXIOMS;
use crate::sexp::read_all;
use crate::term::{term_of, KSubst, KTerm, KVal};
use crate::KernelError;

#[derive(Debug, Clone)]
pub struct KDef {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub ret: String,
    pub body: KTerm,
}

/// A conditional equation `conds => lhs = rhs`.
#[derive(Debug, Clone)]
pub struct KRule {
    pub conds: Vec<KTerm>,
    pub lhs: KTerm,
    pub rhs: KTerm,
}

pub const PRIMITIVES: &[&str] = &[
    "cons",
    "first",
    "rest",
    "consp",
    "endp",
    "not",
    "^",
    "v",
    "=>",
    "<=>",
    "==",
    "<",
    "<<",
    "+",
    "*",
    "-",
    "/",
    "tlp",
    "boolp",
    "natp",
    "posp",
    "intp",
    "rationalp",
    "symbolp",
    "allp",
    "if",
];

const BOOL_HEADS: &[&str] = &[
    "not",
    "^",
    "v",
    "=>",
    "<=>",
    "==",
    "<",
    "<<",
    "consp",
    "endp",
    "tlp",
    "boolp",
    "natp",
    "posp",
    "intp",
    "rationalp",
    "symbolp",
    "allp",
];

#[derive(Debug, Default, Clone)]
pub struct Snapshot {
    pub defs: BTreeMap<String, KDef>,
    pub lemmas: BTreeMap<String, KTerm>,
    pub rules: BTreeMap<String, KRule>,
    bool_fns: BTreeSet<String>,
}

/// Splits `(=> (^ h1 .. hn) c)` into hypotheses and conclusion.
pub fn split_implication(t: &KTerm) -> (Vec<KTerm>, KTerm) {
    if let KTerm::App(f, a) = t {
        if f == "=>" && a.len() == 2 {
            let hyps = match &a[0] {
                KTerm::App(g, hs) if g == "^" => hs.clone(),
                h => vec![h.clone()],
            };
            return (hyps, a[1].clone());
        }
    }
    (Vec::new(), t.clone())
}

pub fn flatten_branches(t: &KTerm, path: &mut Vec<KTerm>, out: &mut Vec<(Vec<KTerm>, KTerm)>) {
    match t {
        KTerm::App(f, a) if f == "if" && a.len() == 3 => {
            path.push(a[0].clone());
            flatten_branches(&a[1], path, out);
            path.pop();
            path.push(KTerm::not(a[0].clone()));
            flatten_branches(&a[2], path, out);
            path.pop();
        }
        _ => out.push((path.clone(), t.clone())),
    }
}

fn calls_of(t: &KTerm, f: &str, out: &mut Vec<Vec<KTerm>>) {
    if let KTerm::App(g, a) = t {
        if g == f && !out.contains(a) {
            out.push(a.clone());
        }
        for x in a {
            calls_of(x, f, out);
        }
    }
}

fn conj(mut items: Vec<KTerm>) -> KTerm {
    match items.len() {
        0 => KTerm::t(),
        1 => items.pop().unwrap(),
        _ => KTerm::app("^", items),
    }
}

fn implies(hyps: Vec<KTerm>, concl: KTerm) -> KTerm {
    if hyps.is_empty() {
        concl
    } else {
        KTerm::app("=>", vec![conj(hyps), concl])
    }
}

impl Snapshot {
    pub fn new() -> Result<Snapshot, KernelError> {
        let mut s = Snapshot::default();
        for (id, _, text) in AXIOMS {
            let sx = read_all(text)?;
            let stmt = term_of(&sx[0])?;
            let rule = rule_from_statement(&stmt, &s)
                .ok_or_else(|| KernelError::Syntax(format!("axiom {id} is not an equation")))?;
            s.rules.insert((*id).to_string(), rule);
        }
        Ok(s)
    }

    pub fn is_bool_valued(&self, t: &KTerm) -> bool {
        match t {
            KTerm::Const(KVal::T) | KTerm::Const(KVal::Nil) => true,
            KTerm::Const(_) | KTerm::Var(_) => false,
            KTerm::App(f, a) => {
                if f == "if" && a.len() == 3 {
                    self.is_bool_valued(&a[1]) && self.is_bool_valued(&a[2])
                } else {
                    BOOL_HEADS.contains(&f.as_str()) || self.bool_fns.contains(f)
                }
            }
        }
    }

    pub fn add_def(&mut self, def: KDef) -> Result<(), KernelError> {
        let name = def.name.clone();
        if PRIMITIVES.contains(&name.as_str()) || self.defs.contains_key(&name) {
            return Err(KernelError::Def(format!("{name} redefined")));
        }
        let params: Vec<String> = def.params.iter().map(|p| p.0.clone()).collect();
        let mut seen = BTreeSet::new();
        if !params.iter().all(|p| seen.insert(p.clone())) {
            return Err(KernelError::Def(format!("{name} has duplicate parameters")));
        }
        let mut fv = Vec::new();
        def.body.vars(&mut fv);
        if let Some(v) = fv.iter().find(|v| !params.contains(v)) {
            return Err(KernelError::Def(format!("{name} body mentions free variable {v}")));
        }
        check_calls(&def.body, self, &name, params.len())?;
        // boolean-valued by structure, assuming recursive calls are.
        self.bool_fns.insert(name.clone());
        if !self.is_bool_valued(&def.body) {
            self.bool_fns.remove(&name);
        }
        let call = KTerm::App(name.clone(), params.iter().map(|p| KTerm::Var(p.clone())).collect());
        if !def.body.mentions_fn(&name) {
            self.rules.insert(format!("{name}.def"), KRule { conds: vec![], lhs: call.clone(), rhs: def.body.clone() });
        }
        let mut branches = Vec::new();
        flatten_branches(&def.body, &mut Vec::new(), &mut branches);
        for (k, (path, leaf)) in branches.into_iter().enumerate() {
            self.rules.insert(format!("{name}.def.{}", k + 1), KRule { conds: path, lhs: call.clone(), rhs: leaf });
        }
        let recs: Vec<KTerm> = def
            .params
            .iter()
            .filter(|(_, r)| r != "allp")
            .map(|(p, r)| KTerm::app(r, vec![KTerm::Var(p.clone())]))
            .collect();
        if def.ret != "allp" {
            self.rules.insert(
                format!("{name}-contract"),
                KRule { conds: recs, lhs: KTerm::app(&def.ret, vec![call]), rhs: KTerm::t() },
            );
        }
        self.defs.insert(name, def);
        Ok(())
    }

    pub fn add_lemma(&mut self, name: &str, stmt: KTerm) -> Result<(), KernelError> {
        if self.lemmas.contains_key(name) {
            return Err(KernelError::Def(format!("lemma {name} declared twice")));
        }
        if let Some(rule) = rule_from_statement(&stmt, self) {
            self.rules.insert(format!("lemma:{name}"), rule);
        }
        self.lemmas.insert(name.to_string(), stmt);
        Ok(())
    }

    /// Obligations of the induction scheme of `f` applied to `vars`, in
    /// generation order: contract case, then one per branch.
    pub fn induction_obligations(&self, f: &str, vars: &[String], stmt: &KTerm) -> Result<Vec<KTerm>, KernelError> {
        let def = self.defs.get(f).ok_or_else(|| KernelError::Def(format!("unknown function {f}")))?;
        if def.params.len() != vars.len() {
            return Err(KernelError::Def(format!("{f} arity mismatch in induction")));
        }
        let distinct: BTreeSet<&String> = vars.iter().collect();
        if distinct.len() != vars.len() {
            return Err(KernelError::Def("induction variables must be distinct".into()));
        }
        if !def.body.mentions_fn(f) {
            return Err(KernelError::Def(format!("{f} is not recursive")));
        }
        let to_vars: KSubst =
            def.params.iter().zip(vars).map(|((p, _), v)| (p.clone(), KTerm::Var(v.clone()))).collect();
        let recs: Vec<KTerm> = def
            .params
            .iter()
            .zip(vars)
            .filter(|((_, r), _)| r != "allp")
            .map(|((_, r), v)| KTerm::app(r, vec![KTerm::Var(v.clone())]))
            .collect();
        let mut out = vec![KTerm::app("=>", vec![KTerm::not(conj(recs.clone())), stmt.clone()])];
        let mut branches = Vec::new();
        flatten_branches(&def.body.subst(&to_vars), &mut Vec::new(), &mut branches);
        for (path, leaf) in branches {
            let mut hyps = recs.clone();
            hyps.extend(path);
            let mut calls = Vec::new();
            calls_of(&leaf, f, &mut calls);
            for args in calls {
                let s: KSubst = vars.iter().cloned().zip(args).collect();
                hyps.push(stmt.subst(&s));
            }
            out.push(implies(hyps, stmt.clone()));
        }
        Ok(out)
    }

    pub fn eval(&self, t: &KTerm, fuel: &mut u64) -> Option<KVal> {
        self.eval_at(t, fuel, 0)
    }

    fn eval_at(&self, t: &KTerm, fuel: &mut u64, depth: u32) -> Option<KVal> {
        if *fuel == 0 {
            return None;
        }
        *fuel -= 1;
        match t {
            KTerm::Var(_) => None,
            KTerm::Const(c) => Some(c.clone()),
            KTerm::App(f, a) => {
                match f.as_str() {
                    "if" if a.len() == 3 => {
                        return if self.eval_at(&a[0], fuel, depth)?.truthy() {
                            self.eval_at(&a[1], fuel, depth)
                        } else {
                            self.eval_at(&a[2], fuel, depth)
                        };
                    }
                    "^" => {
                        for x in a {
                            if !self.eval_at(x, fuel, depth)?.truthy() {
                                return Some(KVal::Nil);
                            }
                        }
                        return Some(KVal::T);
                    }
                    "v" => {
                        for x in a {
                            if self.eval_at(x, fuel, depth)?.truthy() {
                                return Some(KVal::T);
                            }
                        }
                        return Some(KVal::Nil);
                    }
                    "=>" if a.len() == 2 => {
                        if !self.eval_at(&a[0], fuel, depth)?.truthy() {
                            return Some(KVal::T);
                        }
                        return Some(KVal::from_bool(self.eval_at(&a[1], fuel, depth)?.truthy()));
                    }
                    _ => {}
                }
                let vals: Vec<KVal> = a.iter().map(|x| self.eval_at(x, fuel, depth)).collect::<Option<_>>()?;
                if let Some(def) = self.defs.get(f) {
                    if def.params.len() != vals.len() || depth >= MAX_CALL_DEPTH {
                        return None;
                    }
                    let s: KSubst =
                        def.params.iter().zip(vals).map(|((p, _), v)| (p.clone(), KTerm::Const(v))).collect();
                    return self.eval_at(&def.body.subst(&s), fuel, depth + 1);
                }
                apply_primitive(f, &vals)
            }
        }
    }
}

/// Same nesting limit as the checker's evaluator.
const MAX_CALL_DEPTH: u32 = 200;

fn check_calls(t: &KTerm, s: &Snapshot, this: &str, this_arity: usize) -> Result<(), KernelError> {
    if let KTerm::App(f, a) = t {
        let ok = if f == this {
            a.len() == this_arity
        } else if let Some(d) = s.defs.get(f) {
            d.params.len() == a.len()
        } else {
            primitive_arity_ok(f, a.len())
        };
        if !ok {
            return Err(KernelError::Def(format!("bad call to {f} with {} arguments", a.len())));
        }
        for x in a {
            check_calls(x, s, this, this_arity)?;
        }
    }
    Ok(())
}

fn primitive_arity_ok(f: &str, n: usize) -> bool {
    match f {
        "^" | "v" => n >= 2,
        "cons" | "==" | "<" | "<<" | "+" | "*" | "/" | "=>" | "<=>" => n == 2,
        "if" => n == 3,
        "first" | "rest" | "consp" | "endp" | "not" | "-" | "tlp" | "boolp" | "natp" | "posp" | "intp"
        | "rationalp" | "symbolp" | "allp" => n == 1,
        _ => false,
    }
}

fn is_true_list(v: &KVal) -> bool {
    let mut cur = v;
    loop {
        match cur {
            KVal::Nil => return true,
            KVal::Cons(_, t) => cur = t,
            _ => return false,
        }
    }
}

pub fn apply_primitive(f: &str, v: &[KVal]) -> Option<KVal> {
    if !primitive_arity_ok(f, v.len()) {
        return None;
    }
    let b = KVal::from_bool;
    Some(match f {
        "cons" => KVal::cons(v[0].clone(), v[1].clone()),
        "first" => match &v[0] {
            KVal::Cons(h, _) => (**h).clone(),
            _ => KVal::Nil,
        },
        "rest" => match &v[0] {
            KVal::Cons(_, t) => (**t).clone(),
            _ => KVal::Nil,
        },
        "consp" => b(matches!(v[0], KVal::Cons(..))),
        "endp" => b(!matches!(v[0], KVal::Cons(..))),
        "not" => b(!v[0].truthy()),
        "^" => b(v.iter().all(KVal::truthy)),
        "v" => b(v.iter().any(KVal::truthy)),
        "=>" => b(!v[0].truthy() || v[1].truthy()),
        "<=>" => b(v[0].truthy() == v[1].truthy()),
        "==" => b(v[0] == v[1]),
        "<" => b(v[0].fix() < v[1].fix()),
        "<<" => b(v[0].total_lt(&v[1])),
        "+" => KVal::Rat(v[0].fix() + v[1].fix()),
        "*" => KVal::Rat(v[0].fix() * v[1].fix()),
        "-" => KVal::Rat(-v[0].fix()),
        "/" => {
            let d = v[1].fix();
            if d.is_zero() {
                KVal::Rat(BigRational::zero())
            } else {
                KVal::Rat(v[0].fix() / d)
            }
        }
        "tlp" => b(is_true_list(&v[0])),
        "boolp" => b(matches!(v[0], KVal::T | KVal::Nil)),
        "natp" => b(matches!(&v[0], KVal::Rat(r) if r.is_integer() && !r.is_negative())),
        "posp" => b(matches!(&v[0], KVal::Rat(r) if r.is_integer() && r.is_positive())),
        "intp" => b(matches!(&v[0], KVal::Rat(r) if r.is_integer())),
        "rationalp" => b(matches!(v[0], KVal::Rat(_))),
        "symbolp" => b(matches!(v[0], KVal::Sym(_) | KVal::T | KVal::Nil)),
        "allp" => KVal::T,
        _ => return None,
    })
}

/// Reads a rule out of an implication whose conclusion is an equation, a
/// negation, or a boolean-valued atom.
pub fn rule_from_statement(stmt: &KTerm, s: &Snapshot) -> Option<KRule> {
    let (conds, concl) = split_implication(stmt);
    let (lhs, rhs) = match &concl {
        KTerm::App(f, a) if f == "==" && a.len() == 2 => (a[0].clone(), a[1].clone()),
        KTerm::App(f, a) if f == "not" && a.len() == 1 => (a[0].clone(), KTerm::nil()),
        other if s.is_bool_valued(other) && matches!(other, KTerm::App(..)) => (other.clone(), KTerm::t()),
        _ => return None,
    };
    if !matches!(lhs, KTerm::App(..)) {
        return None;
    }
    let mut lv = Vec::new();
    lhs.vars(&mut lv);
    let mut others = Vec::new();
    rhs.vars(&mut others);
    conds.iter().for_each(|c| c.vars(&mut others));
    if others.iter().any(|v| !lv.contains(v)) {
        return None;
    }
    Some(KRule { conds, lhs, rhs })
}
