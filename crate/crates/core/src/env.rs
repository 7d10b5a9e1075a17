//! The checking environment: function definitions with their generated
//! rules, lemmas, abbreviations and named rule groups.
//!
//! An `Env` is a value. Extending it returns a new environment and leaves
//! the old one untouched, so a failed definition never leaks into later
//! checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::ast::{AbbrevDecl, FunctionDecl, ItemKind};
use crate::eval::RECOGNIZERS;
use crate::parser::{parse_document, parse_term};
use crate::prover::{self, Budget, ProofOutcome, Sequent};
use crate::term::{Subst, Term};
use crate::testgen;
use crate::typeguard;

/// Built-in function names and their arities (`None` for n-ary, at least two).
pub const BUILTINS: &[(&str, Option<usize>)] = &[
    ("cons", Some(2)),
    ("first", Some(1)),
    ("rest", Some(1)),
    ("consp", Some(1)),
    ("endp", Some(1)),
    ("not", Some(1)),
    ("^", None),
    ("v", None),
    ("=>", Some(2)),
    ("<=>", Some(2)),
    ("==", Some(2)),
    ("<", Some(2)),
    ("<<", Some(2)),
    ("+", Some(2)),
    ("*", Some(2)),
    ("-", Some(1)),
    ("/", Some(2)),
    ("if", Some(3)),
    ("allp", Some(1)),
    ("boolp", Some(1)),
    ("natp", Some(1)),
    ("posp", Some(1)),
    ("intp", Some(1)),
    ("rationalp", Some(1)),
    ("tlp", Some(1)),
    ("symbolp", Some(1)),
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

const PRELUDE: &str = "
(definec bin-app (x :tl y :tl) :tl
  (if (endp x) y (cons (first x) (bin-app (rest x) y))))
(definec len (x :tl) :nat
  (if (endp x) 0 (+ 1 (len (rest x)))))
";

pub fn builtin_arity(f: &str) -> Option<Option<usize>> {
    BUILTINS.iter().find(|(n, _)| *n == f).map(|(_, a)| *a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Structural,
    Assumed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    /// Parameter names paired with their recognizers.
    pub params: Vec<(String, String)>,
    pub ret: String,
    pub body: Term,
    pub termination: Termination,
}

impl FunctionDef {
    pub fn call(&self) -> Term {
        Term::app(&self.name, self.params.iter().map(|(p, _)| Term::Var(p.clone())).collect())
    }

    pub fn recognizer_hyps(&self) -> Vec<Term> {
        self.params.iter().filter(|(_, r)| r != "allp").map(|(p, r)| Term::app(r, vec![Term::Var(p.clone())])).collect()
    }

    pub fn is_recursive(&self) -> bool {
        self.body.mentions_fn(&self.name)
    }
}

/// A conditional rewrite rule `conds => lhs = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: String,
    pub conds: Vec<Term>,
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LemmaStatus {
    Proved,
    Tested,
    Assumed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma {
    pub name: String,
    pub statement: Term,
    pub status: LemmaStatus,
}

/// The rules a proof attempt may use, plus two permissions that are not
/// rewrite rules: linear arithmetic and evaluation of user functions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSet {
    pub rules: BTreeSet<String>,
    pub arith: bool,
    pub exec: BTreeSet<String>,
}

impl RuleSet {
    pub fn union(&self, o: &RuleSet) -> RuleSet {
        RuleSet {
            rules: self.rules.union(&o.rules).cloned().collect(),
            arith: self.arith || o.arith,
            exec: self.exec.union(&o.exec).cloned().collect(),
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.rules.contains(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefinitionError {
    #[error("{0} is already defined")]
    Redefinition(String),
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("{0} has a repeated parameter")]
    DuplicateParameter(String),
    #[error("{function} mentions free variable {var}")]
    FreeVariable { function: String, var: String },
    #[error("call to unknown function {0}")]
    UnknownFunction(String),
    #[error("{function} called with {given} arguments")]
    Arity { function: String, given: usize },
    #[error("termination of {0} not established by structural recursion")]
    TerminationUnproven(String),
    #[error("guard obligation {obligation} of {function} could not be verified")]
    GuardUnverified { function: String, obligation: String },
    #[error("contract of {function} fails on {counterexample}")]
    ContractViolated { function: String, counterexample: String },
    #[error("{0}")]
    Prelude(String),
}

#[derive(Debug, Clone)]
pub struct Env {
    functions: BTreeMap<String, FunctionDef>,
    function_order: Vec<String>,
    rules: BTreeMap<String, Rule>,
    rule_order: Vec<String>,
    groups: BTreeMap<String, BTreeSet<String>>,
    lemmas: BTreeMap<String, Lemma>,
    lemma_order: Vec<String>,
    abbrevs: BTreeMap<String, AbbrevDecl>,
    bool_fns: BTreeSet<String>,
    /// Rule ids indexed by the head symbol of their left side.
    by_head: BTreeMap<String, Vec<String>>,
}

impl Default for Env {
    fn default() -> Self {
        Env::new()
    }
}

fn split_implication(t: &Term) -> (Vec<Term>, Term) {
    if let Term::App(f, a) = t {
        if f == "=>" && a.len() == 2 {
            let hyps = match &a[0] {
                Term::App(g, hs) if g == "^" => hs.clone(),
                h => vec![h.clone()],
            };
            return (hyps, a[1].clone());
        }
    }
    (Vec::new(), t.clone())
}

/// Flattens an `if` tree into (path conditions, leaf) pairs, left to right.
pub fn flatten_branches(t: &Term, path: &mut Vec<Term>, out: &mut Vec<(Vec<Term>, Term)>) {
    match t {
        Term::App(f, a) if f == "if" && a.len() == 3 => {
            path.push(a[0].clone());
            flatten_branches(&a[1], path, out);
            path.pop();
            path.push(Term::not(a[0].clone()));
            flatten_branches(&a[2], path, out);
            path.pop();
        }
        _ => out.push((path.clone(), t.clone())),
    }
}

fn destructs(t: &Term, x: &str) -> bool {
    match t {
        Term::App(f, a) if (f == "first" || f == "rest") && a.len() == 1 => match &a[0] {
            Term::Var(v) => v == x,
            inner => destructs(inner, x),
        },
        _ => false,
    }
}

pub fn calls_of(t: &Term, f: &str, out: &mut Vec<Vec<Term>>) {
    if let Term::App(g, a) = t {
        if g == f && !out.contains(a) {
            out.push(a.clone());
        }
        for x in a {
            calls_of(x, f, out);
        }
    }
}

/// Every recursive call must shrink some parameter `x` to a first/rest
/// chain of `x`, on a branch that has established `(consp x)`.
fn structurally_decreasing(def: &FunctionDef) -> bool {
    let mut branches = Vec::new();
    flatten_branches(&def.body, &mut Vec::new(), &mut branches);
    for (path, leaf) in &branches {
        if path.iter().any(|c| c.mentions_fn(&def.name)) {
            return false;
        }
        let mut calls = Vec::new();
        calls_of(leaf, &def.name, &mut calls);
        for args in calls {
            let ok = def.params.iter().enumerate().any(|(i, (x, _))| {
                let xv = Term::Var(x.clone());
                let guarded = path.iter().any(|c| {
                    *c == Term::app("consp", vec![xv.clone()]) || *c == Term::not(Term::app("endp", vec![xv.clone()]))
                });
                guarded && destructs(&args[i], x)
            });
            if !ok {
                return false;
            }
        }
    }
    true
}

impl Env {
    /// Built-ins, axiom groups and the prelude definitions.
    pub fn new() -> Env {
        let mut env = Env {
            functions: BTreeMap::new(),
            function_order: Vec::new(),
            rules: BTreeMap::new(),
            rule_order: Vec::new(),
            groups: BTreeMap::new(),
            lemmas: BTreeMap::new(),
            lemma_order: Vec::new(),
            abbrevs: BTreeMap::new(),
            bool_fns: BTreeSet::new(),
            by_head: BTreeMap::new(),
        };
        for (id, group, text) in cpc_kernel::axioms::AXIOMS {
            let stmt = parse_term(text).expect("axiom table parses");
            let (conds, lhs, rhs) = env.rule_parts(&stmt).expect("axiom is an equation");
            env.insert_rule(Rule { id: id.to_string(), conds, lhs, rhs });
            env.groups.entry(group.to_string()).or_default().insert(id.to_string());
        }
        let (doc, errors) = parse_document(PRELUDE);
        assert!(errors.is_empty(), "prelude parses");
        for item in doc.items {
            if let ItemKind::Function(decl) = item.kind {
                env = env.define_function(&decl).expect("prelude definitions are admissible");
            }
        }
        env
    }

    fn insert_rule(&mut self, rule: Rule) {
        if let Some(h) = rule.lhs.head() {
            self.by_head.entry(h.to_string()).or_default().push(rule.id.clone());
        }
        if !self.rules.contains_key(&rule.id) {
            self.rule_order.push(rule.id.clone());
        }
        self.rules.insert(rule.id.clone(), rule);
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.get(name)
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.function_order.iter().map(|n| &self.functions[n])
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.get(id)
    }

    pub fn rules_for_head(&self, head: &str) -> &[String] {
        self.by_head.get(head).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn lemma(&self, name: &str) -> Option<&Lemma> {
        self.lemmas.get(name)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &Lemma> {
        self.lemma_order.iter().map(|n| &self.lemmas[n])
    }

    pub fn is_known_function(&self, f: &str) -> bool {
        builtin_arity(f).is_some() || self.functions.contains_key(f)
    }

    pub fn arity(&self, f: &str) -> Option<Option<usize>> {
        builtin_arity(f).or_else(|| self.functions.get(f).map(|d| Some(d.params.len())))
    }

    pub fn is_recognizer(&self, r: &str) -> bool {
        RECOGNIZERS.contains(&r) || self.functions.get(r).is_some_and(|d| d.params.len() == 1 && d.ret == "boolp")
    }

    pub fn add_abbrev(&self, a: AbbrevDecl) -> Env {
        let mut e = self.clone();
        e.abbrevs.insert(a.name.clone(), a);
        e
    }

    /// Structurally boolean-valued terms; the kernel uses the same test.
    pub fn is_bool_valued(&self, t: &Term) -> bool {
        match t {
            Term::Const(c) => matches!(c, crate::term::Value::True | crate::term::Value::Nil),
            Term::Var(_) => false,
            Term::App(f, a) => {
                if f == "if" && a.len() == 3 {
                    self.is_bool_valued(&a[1]) && self.is_bool_valued(&a[2])
                } else {
                    BOOL_HEADS.contains(&f.as_str()) || self.bool_fns.contains(f)
                }
            }
        }
    }

    /// Reads `(=> conds (== lhs rhs))`, a negation or a boolean atom as a
    /// rewrite rule, mirroring the kernel.
    pub fn rule_parts(&self, stmt: &Term) -> Option<(Vec<Term>, Term, Term)> {
        let (conds, concl) = split_implication(stmt);
        let (lhs, rhs) = match &concl {
            Term::App(f, a) if f == "==" && a.len() == 2 => (a[0].clone(), a[1].clone()),
            Term::App(f, a) if f == "not" && a.len() == 1 => (a[0].clone(), Term::nil()),
            other if self.is_bool_valued(other) && matches!(other, Term::App(..)) => (other.clone(), Term::t()),
            _ => return None,
        };
        if !matches!(lhs, Term::App(..)) {
            return None;
        }
        let lv = lhs.vars();
        let mut others = rhs.vars();
        conds.iter().for_each(|c| others.extend(c.vars()));
        if others.iter().any(|v| !lv.contains(v)) {
            return None;
        }
        Some((conds, lhs, rhs))
    }

    pub fn add_lemma(&self, name: &str, statement: Term, status: LemmaStatus) -> Env {
        let mut e = self.clone();
        if let Some((conds, lhs, rhs)) = e.rule_parts(&statement) {
            e.insert_rule(Rule { id: format!("lemma:{name}"), conds, lhs, rhs });
        }
        if !e.lemmas.contains_key(name) {
            e.lemma_order.push(name.to_string());
        }
        e.lemmas.insert(name.to_string(), Lemma { name: name.to_string(), statement, status });
        e
    }

    /// Rule ids generated for a function definition.
    pub fn definition_rules(&self, f: &str) -> Vec<String> {
        self.rule_order
            .iter()
            .filter(|id| {
                id.strip_prefix(f).is_some_and(|rest| {
                    rest == ".def" || rest.strip_prefix(".def.").is_some_and(|k| k.parse::<u32>().is_ok())
                })
            })
            .cloned()
            .collect()
    }

    fn group(&self, g: &str) -> BTreeSet<String> {
        self.groups.get(g).cloned().unwrap_or_default()
    }

    /// Resolves a named theory.
    pub fn theory(&self, name: &str) -> Option<RuleSet> {
        let mut rs = RuleSet::default();
        match name {
            "min" => rs.rules = self.group("min"),
            "cons-axioms" => rs.rules = self.group("cons-axioms"),
            "type-prescription" => rs.rules = self.group("type-prescription"),
            "contract" => {
                rs.rules = self.group("min");
                rs.rules.extend(self.group("type-prescription"));
                rs.rules.extend(self.group("contract"));
                rs.rules.extend(self.rule_order.iter().filter(|id| id.ends_with("contract")).cloned());
            }
            "arith" | "arithmetic" | "algebra" => rs.arith = true,
            "executable" => rs.exec = self.functions.keys().cloned().collect(),
            "min-executable" => {
                rs.rules = self.group("min");
                rs.exec = self.functions.keys().cloned().collect();
            }
            "full" => {
                rs.rules = self.rules.keys().cloned().collect();
                rs.arith = true;
                rs.exec = self.functions.keys().cloned().collect();
            }
            _ => return None,
        }
        Some(rs)
    }

    /// Union of several named theories; unknown names are an error.
    pub fn theories(&self, names: &[&str]) -> Result<RuleSet, String> {
        names.iter().try_fold(RuleSet::default(), |acc, n| {
            self.theory(n).map(|t| acc.union(&t)).ok_or_else(|| format!("unknown theory {n}"))
        })
    }

    fn check_calls(&self, t: &Term, this: &str, arity: usize) -> Result<(), DefinitionError> {
        if let Term::App(f, a) = t {
            let want = if f == this { Some(Some(arity)) } else { self.arity(f) };
            match want {
                None => return Err(DefinitionError::UnknownFunction(f.clone())),
                Some(Some(n)) if n != a.len() => {
                    return Err(DefinitionError::Arity { function: f.clone(), given: a.len() })
                }
                Some(None) if a.len() < 2 => {
                    return Err(DefinitionError::Arity { function: f.clone(), given: a.len() })
                }
                _ => {}
            }
            for x in a {
                self.check_calls(x, this, arity)?;
            }
        }
        Ok(())
    }

    /// Admits a definition: well-formedness, termination, guard
    /// verification and a random test of the declared return type.
    pub fn define_function(&self, decl: &FunctionDecl) -> Result<Env, DefinitionError> {
        let name = decl.name.clone();
        if self.is_known_function(&name) {
            return Err(DefinitionError::Redefinition(name));
        }
        let mut seen = BTreeSet::new();
        for (p, r) in &decl.params {
            if !seen.insert(p.clone()) {
                return Err(DefinitionError::DuplicateParameter(name));
            }
            if !self.is_recognizer(r) {
                return Err(DefinitionError::UnknownType(r.clone()));
            }
        }
        let self_bool = decl.params.len() == 1 && decl.ret == "boolp";
        if !self.is_recognizer(&decl.ret) && !self_bool {
            return Err(DefinitionError::UnknownType(decl.ret.clone()));
        }
        if let Some(v) = decl.body.vars().into_iter().find(|v| !seen.contains(v)) {
            return Err(DefinitionError::FreeVariable { function: name, var: v });
        }
        self.check_calls(&decl.body, &name, decl.params.len())?;
        let def = FunctionDef {
            name: name.clone(),
            params: decl.params.clone(),
            ret: decl.ret.clone(),
            body: decl.body.clone(),
            termination: if decl.assume_terminating { Termination::Assumed } else { Termination::Structural },
        };
        if def.is_recursive() && !decl.assume_terminating && !structurally_decreasing(&def) {
            return Err(DefinitionError::TerminationUnproven(name));
        }
        let mut env = self.clone();
        env.bool_fns.insert(name.clone());
        if !env.is_bool_valued(&def.body) {
            env.bool_fns.remove(&name);
        }
        let call = def.call();
        if !def.is_recursive() {
            env.insert_rule(Rule {
                id: format!("{name}.def"),
                conds: vec![],
                lhs: call.clone(),
                rhs: def.body.clone(),
            });
        }
        let mut branches = Vec::new();
        flatten_branches(&def.body, &mut Vec::new(), &mut branches);
        for (k, (path, leaf)) in branches.into_iter().enumerate() {
            env.insert_rule(Rule { id: format!("{name}.def.{}", k + 1), conds: path, lhs: call.clone(), rhs: leaf });
        }
        let recs = def.recognizer_hyps();
        if def.ret != "allp" {
            env.insert_rule(Rule {
                id: format!("{name}-contract"),
                conds: recs.clone(),
                lhs: Term::app(&def.ret, vec![call.clone()]),
                rhs: Term::t(),
            });
        }
        env.functions.insert(name.clone(), def.clone());
        env.function_order.push(name.clone());

        // The function's own contract is available while its guards are
        // verified; the contract itself is only tested.
        let rules = env.theory("contract").expect("contract theory");
        for (path, g) in typeguard::guard_obligations(&def.body, &env) {
            let mut hyps = recs.clone();
            hyps.extend(path);
            let seq = Sequent { hyps, concl: g };
            let out = prover::prove(&env, &seq, &rules, &[], &Budget::default());
            if !matches!(out, ProofOutcome::Proved(_)) {
                return Err(DefinitionError::GuardUnverified { function: name, obligation: seq.formula().to_string() });
            }
        }
        if def.ret != "allp" {
            let contract = Term::implies(recs, Term::app(&def.ret, vec![call]));
            if let Some(cx) = testgen::test_formula(&contract, &env, 200, 0x5eed).counterexamples.first() {
                return Err(DefinitionError::ContractViolated {
                    function: name,
                    counterexample: testgen::render_assignment(cx),
                });
            }
        }
        Ok(env)
    }

    /// Header lines describing this environment to the kernel.
    pub fn kernel_header(&self) -> Vec<String> {
        let mut out = Vec::new();
        for d in self.functions() {
            let params: Vec<String> = d.params.iter().map(|(p, r)| format!("({p} {r})")).collect();
            let how = match d.termination {
                Termination::Structural => "structural",
                Termination::Assumed => "assumed",
            };
            out.push(format!("(DEF {} ({}) {} (terminates {how}) {})", d.name, params.join(" "), d.ret, d.body));
        }
        for l in self.lemmas() {
            out.push(format!("(LEMMA {} {})", l.name, l.statement));
        }
        out
    }

    /// Instantiates a lemma, defaulting to the identity substitution.
    pub fn lemma_instance(&self, name: &str, s: Option<&Subst>) -> Option<Term> {
        let l = self.lemmas.get(name)?;
        Some(match s {
            Some(s) => crate::term::apply_subst(s, &l.statement),
            None => l.statement.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_document;

    fn decl(src: &str) -> FunctionDecl {
        let (doc, errs) = parse_document(src);
        assert!(errs.is_empty(), "{errs:?}");
        match doc.items.into_iter().next().unwrap().kind {
            ItemKind::Function(d) => d,
            _ => panic!("not a definition"),
        }
    }

    #[test]
    fn prelude_is_loaded() {
        let env = Env::new();
        assert!(env.function("bin-app").is_some());
        assert!(env.rule("bin-app.def.2").is_some());
        assert!(env.rule("len-contract").is_some());
        assert!(env.theory("contract").unwrap().contains("bin-app-contract"));
        assert!(!env.theory("min").unwrap().contains("bin-app-contract"));
    }

    #[test]
    fn failed_definition_leaves_env_unchanged() {
        let env = Env::new();
        let bad = decl("(definec loop (x :tl) :tl (loop x))");
        assert!(matches!(env.define_function(&bad), Err(DefinitionError::TerminationUnproven(_))));
        assert!(env.function("loop").is_none());
        let dup = decl("(definec len (x :tl) :nat 0)");
        assert!(matches!(env.define_function(&dup), Err(DefinitionError::Redefinition(_))));
    }

    #[test]
    fn guard_failure_is_reported() {
        let env = Env::new();
        let bad = decl("(definec hd (x :all) :all (first x))");
        assert!(matches!(env.define_function(&bad), Err(DefinitionError::GuardUnverified { .. })));
    }

    #[test]
    fn contract_violation_is_found_by_testing() {
        let env = Env::new();
        let bad = decl("(definec dec (n :nat) :nat (+ n -1))");
        assert!(matches!(env.define_function(&bad), Err(DefinitionError::ContractViolated { .. })));
    }

    #[test]
    fn boolean_functions_are_recognizers() {
        let env = Env::new();
        let ordered = decl(
            "(definec orderedp (x :tl) :bool
               (if (endp x) t (if (endp (rest x)) t (^ (<< (first x) (first (rest x))) (orderedp (rest x))))))",
        );
        let env = env.define_function(&ordered).map_err(|e| e.to_string()).unwrap();
        assert!(env.is_recognizer("orderedp"));
        assert!(env.is_bool_valued(&parse_term("(orderedp y)").unwrap()));
    }
}
