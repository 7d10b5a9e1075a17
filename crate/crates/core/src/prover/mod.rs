//! Proof search that emits kernel traces.
//!
//! A sequent is refuted inside a subproof: the negated goal and any lemma
//! instances are split into literals, each fact is normalized by
//! conditional rewriting against the facts seen before it, and whatever
//! remains goes to a CDCL loop whose theory conflicts come from congruence
//! closure and Fourier-Motzkin elimination. Every inference is recorded as
//! a kernel step, so a `Proved` result can be replayed independently.

pub mod arith;
pub mod cc;
mod rewrite;
pub mod sat;
mod smt;

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use crate::env::{Env, RuleSet};
use crate::term::{Subst, Term};
use crate::testgen::{self, Assignment};
use crate::trace::{FactId, TStep, Trace, TraceBuilder};

#[derive(Debug, Clone, PartialEq)]
pub struct Sequent {
    pub hyps: Vec<Term>,
    pub concl: Term,
}

impl Sequent {
    pub fn formula(&self) -> Term {
        Term::implies(self.hyps.clone(), self.concl.clone())
    }
}

/// Resource limits for one proof attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub rewrite_steps: u64,
    pub sat_conflicts: u64,
    pub arith_vars: usize,
    pub wall_ms: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { rewrite_steps: 10_000, sat_conflicts: 100_000, arith_vars: 30, wall_ms: 5_000 }
    }
}

/// Trace steps ending in a fact that states the sequent's formula.
#[derive(Debug, Clone)]
pub struct Proof {
    pub steps: TraceBuilder,
    pub fact: FactId,
}

impl Proof {
    /// A self-contained kernel trace proving `theorem`, which must be the
    /// formula this proof established.
    pub fn into_trace(self, env: &Env, name: &str, theorem: Term) -> Trace {
        let mut tb = self.steps;
        tb.push(TStep::Done(self.fact));
        let steps = tb.live_steps(self.fact);
        Trace { name: name.to_string(), header: env.kernel_header(), theorem, steps }
    }
}

#[derive(Debug, Clone)]
pub enum ProofOutcome {
    Proved(Proof),
    /// An assignment under which the sequent's formula evaluates to false.
    Disproved(Assignment),
    Unproved(String),
}

/// A fact usable by HYPREW on the term it is keyed by: an equation read
/// in either direction, a negation (the term becomes nil) or a
/// boolean-valued atom (the term becomes t).
#[derive(Debug, Clone)]
struct Known {
    fact: FactId,
    to: Term,
    rev: bool,
}

type Res<T> = Result<T, String>;

const WITNESS_TRIALS: u32 = 300;

pub(crate) struct Ctx<'a> {
    env: &'a Env,
    rules: &'a RuleSet,
    budget: &'a Budget,
    tb: TraceBuilder,
    /// Every fact established so far, by statement.
    proven: HashMap<Term, FactId>,
    known: HashMap<Term, Known>,
    memo: HashMap<Term, (Term, Option<FactId>)>,
    normal: HashSet<Term>,
    rewrites: u64,
    depth: usize,
    started: Instant,
}

impl<'a> Ctx<'a> {
    fn new(env: &'a Env, rules: &'a RuleSet, budget: &'a Budget) -> Self {
        Ctx {
            env,
            rules,
            budget,
            tb: TraceBuilder::new(),
            proven: HashMap::new(),
            known: HashMap::new(),
            memo: HashMap::new(),
            normal: HashSet::new(),
            rewrites: 0,
            depth: 0,
            started: Instant::now(),
        }
    }

    fn record(&mut self, id: FactId, t: Term) {
        self.proven.entry(t).or_insert(id);
    }

    /// Derives `target` from one premise by unit propagation.
    fn derive(&mut self, src: FactId, target: Term) -> FactId {
        let id = self.tb.fresh();
        self.tb.push(TStep::Prop { id, target: target.clone(), premises: vec![src], learned: vec![] });
        self.record(id, target);
        id
    }

    /// Breaks a fact into the literals and clauses it propositionally
    /// contains.
    fn split(&mut self, id: FactId, f: &Term, out: &mut Vec<(FactId, Term)>) {
        let parts: Vec<Term> = match f {
            Term::App(h, a) if h == "^" => a.clone(),
            Term::App(h, a) if h == "=>" && a.len() == 2 && a[0] == Term::t() => vec![a[1].clone()],
            Term::App(h, a) if h == "not" && a.len() == 1 => match &a[0] {
                Term::App(g, b) if g == "v" => b.iter().cloned().map(Term::not).collect(),
                Term::App(g, b) if g == "=>" && b.len() == 2 => {
                    vec![b[0].clone(), Term::not(b[1].clone())]
                }
                Term::App(g, b) if g == "not" && b.len() == 1 => vec![b[0].clone()],
                _ => {
                    out.push((id, f.clone()));
                    return;
                }
            },
            _ => {
                out.push((id, f.clone()));
                return;
            }
        };
        for p in parts {
            if p == Term::t() {
                continue;
            }
            let pid = self.derive(id, p.clone());
            self.split(pid, &p, out);
        }
    }

    /// Adds a literal to the rewriting context. Returns whether anything
    /// new was learned.
    fn learn(&mut self, id: FactId, lit: &Term) -> bool {
        let (key, how) = match lit {
            Term::App(f, a) if f == "==" && a.len() == 2 => {
                let (l, r) = (&a[0], &a[1]);
                if matches!(l, Term::Const(_)) && !matches!(r, Term::Const(_)) {
                    if contains(l, r) {
                        return false;
                    }
                    (r.clone(), Known { fact: id, to: l.clone(), rev: true })
                } else if !contains(r, l) && l != r {
                    (l.clone(), Known { fact: id, to: r.clone(), rev: false })
                } else {
                    return false;
                }
            }
            Term::App(f, a) if f == "not" && a.len() == 1 => {
                (a[0].clone(), Known { fact: id, to: Term::nil(), rev: false })
            }
            p if matches!(p, Term::App(..)) && self.env.is_bool_valued(p) => {
                (p.clone(), Known { fact: id, to: Term::t(), rev: false })
            }
            _ => return false,
        };
        if self.known.contains_key(&key) {
            return false;
        }
        self.known.insert(key, how);
        self.memo.clear();
        self.normal.clear();
        true
    }

    /// Normalizes a fact, returning the id and statement of its normal form.
    fn normalize_fact(&mut self, id: FactId, f: &Term) -> Res<(FactId, Term)> {
        let (nf, eq) = self.norm_term(f)?;
        match eq {
            Some(eq) if nf != *f => {
                let nid = self.tb.fresh();
                self.tb.push(TStep::HypRew { id: nid, src: id, pos: vec![], eq, rev: false });
                self.record(nid, nf.clone());
                Ok((nid, nf))
            }
            _ => Ok((id, f.clone())),
        }
    }
}

/// Whether `small` occurs in `big`.
fn contains(small: &Term, big: &Term) -> bool {
    big == small || big.args().iter().any(|a| contains(small, a))
}

fn is_literal(t: &Term) -> bool {
    let atom = match t {
        Term::App(f, a) if f == "not" && a.len() == 1 => &a[0],
        other => other,
    };
    !matches!(atom.head(), Some("^" | "v" | "=>" | "<=>" | "if" | "not"))
}

/// Attempts to prove `seq` with the given rules and lemma instances.
pub fn prove(env: &Env, seq: &Sequent, rules: &RuleSet, lemmas: &[(String, Subst)], budget: &Budget) -> ProofOutcome {
    let mut cx = Ctx::new(env, rules, budget);
    match run(&mut cx, seq, lemmas) {
        Ok(fact) => ProofOutcome::Proved(Proof { steps: cx.tb, fact }),
        Err(why) => {
            // A genuine counterexample is worth more than "don't know".
            let report = testgen::test_formula(&seq.formula(), env, WITNESS_TRIALS, 0);
            match report.counterexamples.into_iter().next() {
                Some(w) => ProofOutcome::Disproved(w),
                None => ProofOutcome::Unproved(why),
            }
        }
    }
}

fn run(cx: &mut Ctx<'_>, seq: &Sequent, lemmas: &[(String, Subst)]) -> Res<FactId> {
    let goal = seq.formula();
    let root = cx.tb.fresh();
    cx.tb.push(TStep::Subproof(root, goal.clone()));
    let negated = Term::not(goal.clone());
    cx.record(root, negated.clone());

    let mut parts = Vec::new();
    cx.split(root, &negated, &mut parts);
    let goal_lit = parts.pop();
    for (name, s) in lemmas {
        let stmt = cx.env.lemma_instance(name, Some(s)).ok_or_else(|| format!("unknown lemma {name}"))?;
        let id = cx.tb.fresh();
        cx.tb.push(TStep::Inst(id, name.clone(), s.clone()));
        cx.record(id, stmt.clone());
        cx.split(id, &stmt, &mut parts);
    }
    let (mut queue, complex): (Vec<_>, Vec<_>) = parts.into_iter().partition(|(_, t)| is_literal(t));
    queue.extend(complex);
    queue.extend(goal_lit);

    // Literals settle into the rewriting context as they are met; clauses
    // are revisited while the context keeps growing.
    let mut settled: Vec<(FactId, Term)> = Vec::new();
    for _ in 0..4 {
        let mut pending = Vec::new();
        let mut learned_any = false;
        for (id, f) in queue {
            let (nid, nf) = cx.normalize_fact(id, &f)?;
            if nf == Term::nil() {
                return Ok(close(cx, goal, nid));
            }
            let mut bits = Vec::new();
            cx.split(nid, &nf, &mut bits);
            for (bid, b) in bits {
                if b == Term::nil() {
                    return Ok(close(cx, goal, bid));
                }
                if b == Term::t() {
                    continue;
                }
                if is_literal(&b) {
                    learned_any |= cx.learn(bid, &b);
                    settled.push((bid, b));
                } else {
                    pending.push((bid, b));
                }
            }
        }
        queue = pending;
        if !learned_any {
            break;
        }
    }
    settled.extend(queue);
    let nil = smt::refute(cx, &settled)?;
    Ok(close(cx, goal, nil))
}

/// Closes the subproof once nil is a fact.
fn close(cx: &mut Ctx<'_>, goal: Term, nil: FactId) -> FactId {
    let id = cx.tb.fresh();
    cx.tb.qed(id, nil);
    cx.record(id, goal);
    id
}

/// Derives `target` from established facts by propositional reasoning
/// alone, appending one PROP step to `tb`.
pub fn entail(tb: &mut TraceBuilder, premises: &[(FactId, Term)], target: &Term, budget: &Budget) -> Option<FactId> {
    let mut cnf = sat::Cnf::new();
    for (_, f) in premises {
        cnf.assert_term(f);
    }
    cnf.assert_term(&Term::not(target.clone()));
    let mut solver = sat::Solver::new();
    for c in &cnf.clauses {
        solver.add_clause(c.clone());
    }
    if solver.solve(budget.sat_conflicts) != sat::SatResult::Unsat {
        return None;
    }
    let learned = solver.learned.iter().map(|c| c.iter().map(|&l| cnf.lit_term(l)).collect()).collect();
    let id = tb.fresh();
    let premises = premises.iter().map(|(i, _)| *i).collect();
    tb.push(TStep::Prop { id, target: target.clone(), premises, learned });
    Some(id)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SatVerdict {
    Sat(Assignment),
    Unsat,
    Unknown,
}

/// Whether the hypotheses can hold together: a tested witness, a proof of
/// their negation, or neither.
pub fn sat_check(hyps: &[Term], env: &Env, budget: &Budget, trials: u32, seed: u64) -> SatVerdict {
    let all = Term::and(hyps.to_vec());
    let (spec, _) = testgen::TestSpec::for_formula(&Term::implies(hyps.to_vec(), Term::nil()), env, trials, seed);
    let report = testgen::find_counterexamples(&Term::nil(), &spec, env);
    if let Some(w) = report.counterexamples.into_iter().next() {
        return SatVerdict::Sat(w);
    }
    let rules = env.theories(&["contract", "arith"]).expect("built-in theories");
    let seq = Sequent { hyps: vec![], concl: Term::not(all) };
    match prove(env, &seq, &rules, &[], budget) {
        ProofOutcome::Proved(_) => SatVerdict::Unsat,
        _ => SatVerdict::Unknown,
    }
}
