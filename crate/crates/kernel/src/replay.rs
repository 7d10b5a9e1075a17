//! Step-by-step replay of a trace.
//!
//! A fact is a term that holds for every assignment of its free variables
//! satisfying the assumptions of the open subproofs. Facts derived inside a
//! subproof disappear when it closes.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Signed;

use crate::arith::{self, CertRow};
use crate::cc;
use crate::prop;
use crate::sexp::{read_all, Sx};
use crate::term::{parse_rat, subst_of, term_of, KSubst, KTerm};
use crate::theory::{flatten_branches, KDef, KRule, Snapshot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    /// `step` is the 1-based line number of the first failing line.
    Rejected {
        step: usize,
        reason: String,
    },
}

const EVAL_FUEL: u64 = 2_000_000;

struct Fact {
    term: KTerm,
    depth: usize,
}

struct Scope {
    target: KTerm,
}

struct State {
    snap: Snapshot,
    theorem: Option<KTerm>,
    facts: HashMap<u64, Fact>,
    scopes: Vec<Scope>,
    done: bool,
}

type Step = Result<(), String>;

fn atom(sx: &Sx) -> Result<&str, String> {
    sx.as_atom().ok_or_else(|| "expected an atom".to_string())
}

fn num(sx: &Sx) -> Result<u64, String> {
    atom(sx)?.parse().map_err(|_| "expected a fact id".to_string())
}

fn list(sx: &Sx) -> Result<&[Sx], String> {
    sx.as_list().ok_or_else(|| "expected a list".to_string())
}

fn term(sx: &Sx) -> Result<KTerm, String> {
    term_of(sx).map_err(|e| e.to_string())
}

fn position(sx: &Sx) -> Result<Vec<usize>, String> {
    list(sx)?.iter().map(|p| atom(p)?.parse::<usize>().map_err(|_| "bad position".to_string())).collect()
}

fn rat(sx: &Sx) -> Result<BigRational, String> {
    parse_rat(atom(sx)?).ok_or_else(|| "bad coefficient".to_string())
}

fn rule_formula(r: &KRule) -> KTerm {
    let eq = KTerm::app("==", vec![r.lhs.clone(), r.rhs.clone()]);
    match r.conds.len() {
        0 => eq,
        1 => KTerm::app("=>", vec![r.conds[0].clone(), eq]),
        _ => KTerm::app("=>", vec![KTerm::app("^", r.conds.clone()), eq]),
    }
}

fn clause_term(lits: &[KTerm]) -> KTerm {
    match lits.len() {
        0 => KTerm::nil(),
        1 => lits[0].clone(),
        _ => KTerm::app("v", lits.to_vec()),
    }
}

/// Whether `t` is a chain of first/rest destructors applied to `x`.
fn destructs(t: &KTerm, x: &str) -> bool {
    match t {
        KTerm::App(f, a) if (f == "first" || f == "rest") && a.len() == 1 => match &a[0] {
            KTerm::Var(v) => v == x,
            inner => destructs(inner, x),
        },
        _ => false,
    }
}

fn structurally_decreasing(def: &KDef) -> bool {
    let mut branches = Vec::new();
    flatten_branches(&def.body, &mut Vec::new(), &mut branches);
    let formals: Vec<&String> = def.params.iter().map(|p| &p.0).collect();
    let mut ok = true;
    for (path, leaf) in &branches {
        let mut calls = Vec::new();
        collect_calls(leaf, &def.name, &mut calls);
        // Calls in the tests of the path also need a decrease; they are
        // rejected outright to keep the check simple.
        if path.iter().any(|c| c.mentions_fn(&def.name)) {
            return false;
        }
        for args in calls {
            let decreases = formals.iter().enumerate().any(|(i, x)| {
                let guarded = path.iter().any(|c| {
                    *c == KTerm::app("consp", vec![KTerm::Var((*x).clone())])
                        || *c == KTerm::not(KTerm::app("endp", vec![KTerm::Var((*x).clone())]))
                });
                guarded && destructs(&args[i], x)
            });
            ok &= decreases;
        }
    }
    ok
}

fn collect_calls(t: &KTerm, f: &str, out: &mut Vec<Vec<KTerm>>) {
    if let KTerm::App(g, a) = t {
        if g == f {
            out.push(a.clone());
        }
        for x in a {
            collect_calls(x, f, out);
        }
    }
}

impl State {
    fn fact(&self, id: u64) -> Result<&KTerm, String> {
        self.facts.get(&id).map(|f| &f.term).ok_or_else(|| format!("fact {id} is not in scope"))
    }

    fn add(&mut self, id: u64, t: KTerm) -> Step {
        if self.facts.contains_key(&id) {
            return Err(format!("fact id {id} reused"));
        }
        self.facts.insert(id, Fact { term: t, depth: self.scopes.len() });
        Ok(())
    }

    fn rule(&self, id: &str) -> Result<&KRule, String> {
        self.snap.rules.get(id).ok_or_else(|| format!("unknown rule {id}"))
    }

    fn header(&mut self, items: &[Sx]) -> Result<bool, String> {
        let head = atom(&items[0])?;
        match head {
            "CPC-TRACE" | "NAME" => {}
            "DEF" => {
                if items.len() != 6 {
                    return Err("DEF takes name, params, return type, termination and body".into());
                }
                let name = atom(&items[1])?.to_string();
                let mut params = Vec::new();
                for p in list(&items[2])? {
                    match list(p)? {
                        [x, r] => params.push((atom(x)?.to_string(), atom(r)?.to_string())),
                        _ => return Err("bad parameter".into()),
                    }
                }
                let ret = atom(&items[3])?.to_string();
                let how = match list(&items[4])? {
                    [k, h] if atom(k)? == "terminates" => atom(h)?.to_string(),
                    _ => return Err("bad termination clause".into()),
                };
                let def = KDef { name, params, ret, body: term(&items[5])? };
                if def.body.mentions_fn(&def.name) {
                    match how.as_str() {
                        "structural" => {
                            if !structurally_decreasing(&def) {
                                return Err(format!("{} does not decrease structurally", def.name));
                            }
                        }
                        "assumed" => {}
                        other => return Err(format!("unknown termination claim {other}")),
                    }
                }
                self.snap.add_def(def).map_err(|e| e.to_string())?;
            }
            "LEMMA" => {
                let [_, n, s] = items else { return Err("LEMMA takes a name and a statement".into()) };
                self.snap.add_lemma(atom(n)?, term(s)?).map_err(|e| e.to_string())?;
            }
            "THEOREM" => {
                let [_, s] = items else { return Err("THEOREM takes one statement".into()) };
                if self.theorem.is_some() {
                    return Err("THEOREM given twice".into());
                }
                self.theorem = Some(term(s)?);
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn step(&mut self, items: &[Sx]) -> Step {
        if self.done {
            return Err("step after DONE".into());
        }
        let head = atom(&items[0])?;
        let args = &items[1..];
        match (head, args.len()) {
            ("SUBPROOF", 2) => {
                let id = num(&args[0])?;
                let target = term(&args[1])?;
                self.scopes.push(Scope { target: target.clone() });
                self.add(id, KTerm::not(target))
            }
            ("QED", 1) => {
                let id = num(&args[0])?;
                let scope = self.scopes.pop().ok_or("QED without an open subproof")?;
                let depth = self.scopes.len();
                let closed = self.facts.values().any(|f| f.term == KTerm::nil());
                self.facts.retain(|_, f| f.depth <= depth);
                if !closed {
                    return Err("subproof closed without deriving nil".into());
                }
                self.add(id, scope.target)
            }
            ("INST", 3) => {
                let id = num(&args[0])?;
                let name = atom(&args[1])?;
                let s = subst_of(&args[2]).map_err(|e| e.to_string())?;
                let stmt = match self.snap.lemmas.get(name) {
                    Some(l) => l.clone(),
                    None => rule_formula(self.rule(name)?),
                };
                self.add(id, stmt.subst(&s))
            }
            ("REFL", 2) => {
                let id = num(&args[0])?;
                let t = term(&args[1])?;
                self.add(id, KTerm::app("==", vec![t.clone(), t]))
            }
            ("REWRITE", 6) => {
                let id = num(&args[0])?;
                let src = self.fact(num(&args[1])?)?.clone();
                let pos = position(&args[2])?;
                let rule = self.rule(atom(&args[3])?)?.clone();
                let s: KSubst = subst_of(&args[4]).map_err(|e| e.to_string())?;
                let conds: Vec<u64> = list(&args[5])?.iter().map(num).collect::<Result<_, _>>()?;
                let at = src.at(&pos).ok_or("position outside the fact")?;
                if rule.lhs.subst(&s) != *at {
                    return Err(format!("rule left side does not match {at}"));
                }
                if conds.len() != rule.conds.len() {
                    return Err("wrong number of condition facts".into());
                }
                for (c, cid) in rule.conds.iter().zip(&conds) {
                    if *self.fact(*cid)? != c.subst(&s) {
                        return Err(format!("fact {cid} does not establish condition {}", c.subst(&s)));
                    }
                }
                let out = src.replace_at(&pos, rule.rhs.subst(&s)).ok_or("bad position")?;
                self.add(id, out)
            }
            ("HYPREW", 4) | ("HYPREW", 5) => {
                let id = num(&args[0])?;
                let src = self.fact(num(&args[1])?)?.clone();
                let pos = position(&args[2])?;
                let eq = self.fact(num(&args[3])?)?.clone();
                let rev = match args.get(4) {
                    None => false,
                    Some(s) if s.as_atom() == Some(":rev") => true,
                    _ => return Err("unknown HYPREW flag".into()),
                };
                let (from, to) = match &eq {
                    KTerm::App(f, a) if f == "==" && a.len() == 2 => {
                        if rev {
                            (a[1].clone(), a[0].clone())
                        } else {
                            (a[0].clone(), a[1].clone())
                        }
                    }
                    KTerm::App(f, a) if f == "not" && a.len() == 1 && !rev => (a[0].clone(), KTerm::nil()),
                    p if !rev && self.snap.is_bool_valued(p) => (p.clone(), KTerm::t()),
                    _ => return Err("fact cannot be used for rewriting".into()),
                };
                if src.at(&pos) != Some(&from) {
                    return Err("subterm does not match the rewriting fact".into());
                }
                self.add(id, src.replace_at(&pos, to).ok_or("bad position")?)
            }
            ("EVAL", 3) => {
                let id = num(&args[0])?;
                let src = self.fact(num(&args[1])?)?.clone();
                let pos = position(&args[2])?;
                let at = src.at(&pos).ok_or("position outside the fact")?;
                if !at.is_ground() {
                    return Err("EVAL on a term with variables".into());
                }
                let mut fuel = EVAL_FUEL;
                let v = self.snap.eval(at, &mut fuel).ok_or("evaluation failed")?;
                self.add(id, src.replace_at(&pos, KTerm::Const(v)).ok_or("bad position")?)
            }
            ("BOOLP", 3) => {
                let id = num(&args[0])?;
                let src = self.fact(num(&args[1])?)?.clone();
                let pos = position(&args[2])?;
                match src.at(&pos) {
                    Some(KTerm::App(f, a)) if f == "boolp" && a.len() == 1 && self.snap.is_bool_valued(&a[0]) => {}
                    _ => return Err("BOOLP needs (boolp u) with u boolean by construction".into()),
                }
                self.add(id, src.replace_at(&pos, KTerm::t()).ok_or("bad position")?)
            }
            ("TRUE", 2) => {
                let id = num(&args[0])?;
                match self.fact(num(&args[1])?)?.clone() {
                    KTerm::App(f, a) if f == "==" && a.len() == 2 && a[1] == KTerm::t() => self.add(id, a[0].clone()),
                    _ => Err("TRUE needs a fact of the form (== p t)".into()),
                }
            }
            ("CC", 2) => {
                let id = num(&args[0])?;
                let lits: Vec<KTerm> = list(&args[1])?.iter().map(term).collect::<Result<_, _>>()?;
                if !cc::clause_valid(&self.snap, &lits) {
                    return Err("clause is not valid by congruence".into());
                }
                self.add(id, clause_term(&lits))
            }
            ("FARKAS", 3) => {
                let id = num(&args[0])?;
                let lits: Vec<KTerm> = list(&args[1])?.iter().map(term).collect::<Result<_, _>>()?;
                let rows: Vec<_> = lits.iter().map(|l| arith::row_of_literal(l, false)).collect();
                let mut cert = Vec::new();
                for r in list(&args[2])? {
                    let r = list(r)?;
                    let kind = r.first().map(atom).transpose()?.unwrap_or("");
                    let idx = |sx: &Sx| -> Result<usize, String> {
                        atom(sx)?.parse().map_err(|_| "bad literal index".to_string())
                    };
                    cert.push(match (kind, r.len()) {
                        ("lit", 3) => CertRow::Lit(idx(&r[1])?, rat(&r[2])?),
                        ("mul", 4) => CertRow::Mul(idx(&r[1])?, idx(&r[2])?, rat(&r[3])?),
                        ("mulmono", 4) => CertRow::MulMono(idx(&r[1])?, term(&r[2])?, rat(&r[3])?),
                        ("square", 3) => CertRow::Square(term(&r[1])?, rat(&r[2])?),
                        _ => return Err("bad certificate row".into()),
                    });
                }
                if cert.iter().any(|c| matches!(c, CertRow::Square(_, k) if k.is_negative())) {
                    return Err("negative square coefficient".into());
                }
                arith::check(&rows, &cert)?;
                self.add(id, clause_term(&lits))
            }
            ("PROP", 4) => {
                let id = num(&args[0])?;
                let target = term(&args[1])?;
                let premises: Vec<KTerm> =
                    list(&args[2])?.iter().map(|p| self.fact(num(p)?).cloned()).collect::<Result<_, _>>()?;
                let learned: Vec<Vec<KTerm>> = list(&args[3])?
                    .iter()
                    .map(|c| list(c)?.iter().map(term).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<_, _>>()?;
                prop::check(&premises, &target, &learned)?;
                self.add(id, target)
            }
            ("INDUCT", 5) => {
                let id = num(&args[0])?;
                let target = term(&args[1])?;
                let f = atom(&args[2])?;
                let vars: Vec<String> =
                    list(&args[3])?.iter().map(|v| atom(v).map(str::to_string)).collect::<Result<_, _>>()?;
                let ids: Vec<u64> = list(&args[4])?.iter().map(num).collect::<Result<_, _>>()?;
                if !self.scopes.is_empty() {
                    return Err("INDUCT inside a subproof".into());
                }
                let obligations = self.snap.induction_obligations(f, &vars, &target).map_err(|e| e.to_string())?;
                if obligations.len() != ids.len() {
                    return Err(format!("scheme has {} obligations, {} given", obligations.len(), ids.len()));
                }
                for (o, i) in obligations.iter().zip(&ids) {
                    if self.fact(*i)? != o {
                        return Err(format!("fact {i} is not the obligation {o}"));
                    }
                }
                self.add(id, target)
            }
            ("DONE", 1) => {
                if !self.scopes.is_empty() {
                    return Err("DONE with open subproofs".into());
                }
                let f = self.fact(num(&args[0])?)?.clone();
                if Some(&f) != self.theorem.as_ref() {
                    return Err("fact is not the theorem".into());
                }
                self.done = true;
                Ok(())
            }
            _ => Err(format!("unknown step {head} with {} arguments", args.len())),
        }
    }
}

/// Replays a whole trace.
pub fn replay_text(text: &str) -> Verdict {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let l = l.trim();
        !l.is_empty() && !l.starts_with(';')
    });
    let snap = match Snapshot::new() {
        Ok(s) => s,
        Err(e) => return Verdict::Rejected { step: 0, reason: e.to_string() },
    };
    let mut st = State { snap, theorem: None, facts: HashMap::new(), scopes: Vec::new(), done: false };
    let mut in_header = true;
    for (n, line) in lines.by_ref() {
        let reject = |reason: String| Verdict::Rejected { step: n + 1, reason };
        let sx = match read_all(line) {
            Ok(v) if v.len() == 1 => v.into_iter().next().unwrap(),
            Ok(_) => return reject("expected exactly one s-expression per line".into()),
            Err(e) => return reject(e.to_string()),
        };
        let items = match sx.as_list() {
            Some(items) if !items.is_empty() => items,
            _ => return reject("expected a non-empty list".into()),
        };
        if in_header {
            match st.header(items) {
                Ok(true) => continue,
                Ok(false) => in_header = false,
                Err(e) => return reject(e),
            }
        }
        if let Err(e) = st.step(items) {
            return reject(e);
        }
    }
    let Some(theorem) = &st.theorem else {
        return Verdict::Rejected { step: 0, reason: "trace has no THEOREM".into() };
    };
    if st.done || *theorem == KTerm::t() {
        Verdict::Accepted
    } else {
        Verdict::Rejected { step: text.lines().count(), reason: "trace ends without DONE".into() }
    }
}
