//! Checking proof documents.
//!
//! A proof is checked the way a reader would check it: exportation and
//! contract completion first, then the context, each derived item, each
//! step of the chain, and finally that the steps give the goal. Every
//! sequent that passes leaves a prover proof behind; these are spliced into
//! one kernel trace for the statement, and the proof only counts as valid
//! once the kernel accepts that trace.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::ast::{self, CaseKind, Document, Hint, ProofBody, SimpleBody, Span};
use crate::env::{Env, LemmaStatus, RuleSet};
use crate::induction::{self, Obligation};
use crate::prover::{self, Budget, Proof, ProofOutcome, SatVerdict, Sequent};
use crate::report::{summarize, Check, ItemKind, ItemReport, Status};
use crate::term::{Subst, Term};
use crate::testgen;
use crate::trace::{FactId, TStep, Trace, TraceBuilder};
use crate::typeguard::{self, CheckLimits, CompletionError, GUARD_THEORIES};

/// Budgets and search parameters for a whole run.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub budget: Budget,
    /// Random trials per test.
    pub trials: u32,
    pub seed: u64,
    /// Threads used for the steps of one chain.
    pub jobs: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { budget: Budget::default(), trials: testgen::DEFAULT_TRIALS, seed: 0, jobs: 1 }
    }
}

impl Settings {
    pub fn limits(&self) -> CheckLimits {
        CheckLimits { budget: self.budget, trials: self.trials, seed: self.seed }
    }
}

/// What a list of hints contributes to a sequent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HintEffect {
    pub hyps: Vec<Term>,
    pub rules: RuleSet,
    pub instances: Vec<(String, Subst)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HintError {
    #[error("unknown lemma {0}")]
    UnknownLemma(String),
    #[error("unknown context label {0}")]
    UnknownContextLabel(String),
    #[error("the substitution for {lemma} binds {var}, which the lemma does not mention")]
    IllTypedSubstitution { lemma: String, var: String },
    #[error("no definition of {0}")]
    UnknownDefinition(String),
    #[error("unknown rule group {0}")]
    UnknownTheory(String),
}

/// Resolves hints against the labelled items in scope.
pub fn hint_eff(hints: &[Hint], items: &BTreeMap<String, Term>, env: &Env) -> Result<HintEffect, HintError> {
    let mut eff = HintEffect::default();
    for h in hints {
        match h {
            Hint::Item(label) => {
                let t = items.get(label).ok_or_else(|| HintError::UnknownContextLabel(label.clone()))?;
                if !eff.hyps.contains(t) {
                    eff.hyps.push(t.clone());
                }
            }
            Hint::Def(f) => {
                if env.function(f).is_none() {
                    return Err(HintError::UnknownDefinition(f.clone()));
                }
                eff.rules.rules.extend(env.definition_rules(f));
                eff.rules.exec.insert(f.clone());
            }
            Hint::Axioms(g) => {
                let t = env.theory(g).ok_or_else(|| HintError::UnknownTheory(g.clone()))?;
                eff.rules = eff.rules.union(&t);
            }
            Hint::Arith => eff.rules.arith = true,
            Hint::Evaluation => eff.rules = eff.rules.union(&env.theory("executable").expect("built-in theory")),
            Hint::Lemma { name, subst } => {
                let lemma = env.lemma(name).ok_or_else(|| HintError::UnknownLemma(name.clone()))?;
                let vars = lemma.statement.vars();
                let s = match subst {
                    Some(s) => {
                        if let Some(var) = s.keys().find(|k| !vars.contains(k)) {
                            return Err(HintError::IllTypedSubstitution { lemma: name.clone(), var: var.clone() });
                        }
                        s.clone()
                    }
                    None => vars.iter().map(|v| (v.clone(), Term::var(v))).collect(),
                };
                let inst = (name.clone(), s);
                if !eff.instances.contains(&inst) {
                    eff.instances.push(inst);
                }
            }
            Hint::Trivial(_) => {}
        }
    }
    Ok(eff)
}

/// A proved sequent and the formula it established.
struct Sub {
    proof: Proof,
    formula: Term,
}

fn attempt(env: &Env, seq: Sequent, rules: &RuleSet, inst: &[(String, Subst)], budget: &Budget) -> Result<Sub, String> {
    match prover::prove(env, &seq, rules, inst, budget) {
        ProofOutcome::Proved(proof) => Ok(Sub { proof, formula: seq.formula() }),
        ProofOutcome::Disproved(w) => Err(format!("false under {}", testgen::render_assignment(&w))),
        ProofOutcome::Unproved(why) => Err(why),
    }
}

fn min_rules(env: &Env) -> RuleSet {
    env.theory("min").expect("built-in theory")
}

fn iff(a: Term, b: Term) -> Term {
    Term::app("<=>", vec![a, b])
}

/// Maps `f` over `items` on up to `jobs` threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(items.len()) {
            std::thread::Builder::new()
                .stack_size(64 << 20)
                .spawn_scoped(s, || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= items.len() {
                        break;
                    }
                    let r = f(&items[i]);
                    out.lock().expect("no worker panicked")[i] = Some(r);
                })
                .expect("spawn worker");
        }
    });
    out.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every item mapped")).collect()
}

/// One sequent to check: a derived item or a link of the chain.
struct StepInput<'a> {
    name: String,
    span: Span,
    /// Everything assumed or derived before this point.
    ctx: &'a [Term],
    items: &'a BTreeMap<String, Term>,
    hints: &'a [Hint],
    concl: Term,
}

struct StepResult {
    check: Check,
    facts: Vec<Sub>,
}

/// Checks one step: its guards from the context, then the step itself from
/// its hints, the recognizers of the context and the guards.
fn check_step(input: &StepInput<'_>, env: &Env, settings: &Settings) -> StepResult {
    let fail = |msg: String| StepResult { check: Check::fail(&input.name, "step", msg).at(input.span), facts: vec![] };
    let eff = match hint_eff(input.hints, input.items, env) {
        Ok(e) => e,
        Err(e) => return fail(format!("bad hint: {e}")),
    };
    let mut base = eff.hyps.clone();
    for c in input.ctx {
        if typeguard::is_type_predicate(c, env) && !base.contains(c) {
            base.push(c.clone());
        }
    }
    let mut guard_terms: Vec<Term> = Vec::new();
    for (path, g) in typeguard::guard_obligations(&Term::implies(base.clone(), input.concl.clone()), env) {
        let t = Term::implies(path.clone(), g.clone());
        if !path.contains(&g) && !base.contains(&t) && !guard_terms.contains(&t) {
            guard_terms.push(t);
        }
    }

    let mut facts = Vec::new();
    let full = env.theories(GUARD_THEORIES).expect("built-in theories").union(&eff.rules);
    for g in &guard_terms {
        if input.ctx.contains(g) {
            continue;
        }
        let seq = Sequent { hyps: input.ctx.to_vec(), concl: g.clone() };
        match attempt(env, seq.clone(), &full, &eff.instances, &settings.budget) {
            Ok(sub) => facts.push(sub),
            Err(why) => {
                let report = testgen::test_formula(&seq.formula(), env, settings.trials, settings.seed);
                let check = Check::fail(
                    &input.name,
                    "guards",
                    format!("guard obligation {g} does not follow from the context ({why})"),
                )
                .at(input.span)
                .with_counterexamples(&report.counterexamples);
                return StepResult { check, facts: vec![] };
            }
        }
    }

    let mut hyps = base;
    hyps.extend(guard_terms);
    let rules = env.theory("contract").expect("built-in theory").union(&eff.rules);
    let seq = Sequent { hyps, concl: input.concl.clone() };
    match attempt(env, seq.clone(), &rules, &eff.instances, &settings.budget) {
        Ok(sub) => {
            facts.push(sub);
            StepResult { check: Check::pass(&input.name, "step").at(input.span), facts }
        }
        Err(why) => {
            // Witnesses refute the step together with its justification,
            // not the step alone.
            let mut just = seq.hyps.clone();
            for (name, s) in &eff.instances {
                just.extend(env.lemma_instance(name, Some(s)));
            }
            let report =
                testgen::test_formula(&Term::implies(just, seq.concl.clone()), env, settings.trials, settings.seed);
            let msg = if report.counterexamples.is_empty() {
                format!("not proved from the given hints: {why}")
            } else {
                format!("counterexample to the step with its hints ({why})")
            };
            StepResult {
                check: Check::fail(&input.name, "step", msg)
                    .at(input.span)
                    .with_counterexamples(&report.counterexamples),
                facts: vec![],
            }
        }
    }
}

/// Proves `(a <=> b)` in min, or reports why not.
fn prove_iff(env: &Env, a: &Term, b: &Term, settings: &Settings) -> Result<Option<Sub>, String> {
    if a == b {
        return Ok(None);
    }
    let seq = Sequent { hyps: vec![], concl: iff(a.clone(), b.clone()) };
    attempt(env, seq, &min_rules(env), &[], &settings.budget).map(Some)
}

/// Result of checking a simple proof body.
struct SimpleOutcome {
    checks: Vec<Check>,
    facts: Vec<Sub>,
    /// What the facts establish together.
    target: Term,
    completion_trivial: bool,
}

impl SimpleOutcome {
    fn ok(&self) -> bool {
        summarize(&self.checks) != Status::Fail
    }
}

fn completion_check(
    name: &str,
    statement: &Term,
    e: Option<&Term>,
    c: Option<&Term>,
    env: &Env,
    settings: &Settings,
    span: Span,
) -> (Check, Option<typeguard::Completion>) {
    match typeguard::check_contract_completion(statement, e, c, env, &settings.limits()) {
        Ok(comp) if comp.trivial => (Check::pass(name, "contract-completion").at(span), Some(comp)),
        Ok(comp) => {
            let msg = format!(
                "non-trivial contract completion; the statement is assumed in its completed form {}",
                comp.statement
            );
            (Check::warn(name, "contract-completion", msg).at(span), Some(comp))
        }
        Err(CompletionError::NotContractCompleted(failed)) => {
            let mut msg = String::from("Counterexample found when testing guard obligation:");
            let mut cxs = Vec::new();
            for f in &failed {
                msg.push_str(&format!("\n{}", f.obligation));
                if cxs.is_empty() {
                    cxs = f.counterexamples.clone();
                }
            }
            (Check::fail(name, "contract-completion", msg).at(span).with_counterexamples(&cxs), None)
        }
        Err(e) => (Check::fail(name, "contract-completion", e.to_string()).at(span), None),
    }
}

fn cited_labels(body: &SimpleBody) -> Vec<String> {
    let mut out = Vec::new();
    let mut note = |hs: &[Hint]| {
        for h in hs {
            if let Hint::Item(l) = h {
                out.push(l.clone());
            }
        }
    };
    body.derived.iter().for_each(|d| note(&d.hints));
    if let Some(seq) = &body.seq {
        seq.steps.iter().for_each(|s| note(&s.hints));
    }
    out
}

/// Runs every check of a simple proof of `statement`.
#[allow(clippy::too_many_arguments)]
fn check_simple(
    prefix: &str,
    statement: &Term,
    e: Option<&Term>,
    c: Option<&Term>,
    body: &SimpleBody,
    span: Span,
    env: &Env,
    settings: &Settings,
) -> SimpleOutcome {
    let named = |s: &str| format!("{prefix}{s}");
    let mut checks = Vec::new();
    let mut facts: Vec<Sub> = Vec::new();

    let (check, comp) = completion_check(
        &named("Checking that completed statement passes contract checking"),
        statement,
        e,
        c,
        env,
        settings,
        span,
    );
    checks.push(check);
    let Some(comp) = comp else {
        return SimpleOutcome { checks, facts, target: statement.clone(), completion_trivial: false };
    };
    let target = if comp.trivial { statement.clone() } else { comp.statement.clone() };
    if comp.trivial {
        // Link the exportation back to the statement in the trace.
        match prove_iff(env, &comp.statement, statement, settings) {
            Ok(sub) => facts.extend(sub),
            Err(why) => {
                checks.push(Check::fail(named("Exportation is equivalent to the statement"), "exportation", why))
            }
        }
    }
    let (_, concl) = typeguard::split(&comp.statement);

    // Goal and context against the statement.
    let goal = body.goal.clone().unwrap_or_else(|| concl.clone());
    if let Some(g) = &body.goal {
        let name = named("Conclusion is proved equivalent to Goal");
        match prove_iff(env, g, &concl, settings) {
            Ok(sub) => {
                checks.push(Check::pass(name, "goal"));
                facts.extend(sub);
            }
            Err(why) => {
                checks.push(Check::fail(name, "goal", format!("goal differs from the conclusion {concl}: {why}")))
            }
        }
    }
    let ctx_terms: Vec<Term> = body.context.iter().map(|c| c.term.clone()).collect();
    let rebuilt = Term::implies(ctx_terms.clone(), goal.clone());
    let name = named("Context and goal are equivalent to the statement");
    match prove_iff(env, &rebuilt, &comp.statement, settings) {
        Ok(sub) => {
            checks.push(Check::pass(name, "context"));
            facts.extend(sub);
        }
        Err(why) => checks.push(Check::fail(name, "context", format!("{rebuilt} is not {}: {why}", comp.statement))),
    }
    for c in &body.context {
        if !env.is_bool_valued(&c.term) && !typeguard::is_type_predicate(&c.term, env) {
            checks
                .push(Check::warn(named(&c.label), "expression-kind", "context item is not boolean-valued").at(c.span));
        }
    }

    // Derived context, in order, each seeing what came before.
    let mut items: BTreeMap<String, Term> = body.context.iter().map(|c| (c.label.clone(), c.term.clone())).collect();
    let mut ctx = ctx_terms.clone();
    let mut early_exit = false;
    let mut nil_derived = false;
    for d in &body.derived {
        let input = StepInput {
            name: named(&format!("Derived context {}", d.label)),
            span: d.span,
            ctx: &ctx,
            items: &items,
            hints: &d.hints,
            concl: d.term.clone(),
        };
        let r = check_step(&input, env, settings);
        let passed = r.check.status == Status::Pass;
        checks.push(r.check);
        facts.extend(r.facts);
        items.insert(d.label.clone(), d.term.clone());
        ctx.push(d.term.clone());
        if passed && (d.term == Term::nil() || d.term == goal) {
            nil_derived = d.term == Term::nil();
            early_exit = true;
            break;
        }
    }

    if early_exit {
        checks.push(
            Check::new(named("Proof steps"), "steps", Status::Skipped)
                .with_message("exit early because hypotheses are UNSAT or they imply the goal"),
        );
    } else if body.goal.is_none() {
        checks
            .push(Check::fail(named("Goal"), "goal", "a goal is required unless nil or the goal is derived").at(span));
    } else if let Some(seq) = &body.seq {
        let mut inputs = Vec::new();
        let mut lhs = seq.first.clone();
        for (i, step) in seq.steps.iter().enumerate() {
            inputs.push((i, lhs.clone(), step));
            lhs = step.rhs.clone();
        }
        let results = par_map(&inputs, settings.jobs, |(i, lhs, step)| {
            let input = StepInput {
                name: named(&format!("Proof step {}", i + 1)),
                span: step.span,
                ctx: &ctx,
                items: &items,
                hints: &step.hints,
                concl: step.relation.formula(lhs.clone(), step.rhs.clone()),
            };
            check_step(&input, env, settings)
        });
        let step_facts: Vec<Term> =
            inputs.iter().map(|(_, lhs, step)| step.relation.formula(lhs.clone(), step.rhs.clone())).collect();
        for r in results {
            checks.push(r.check);
            facts.extend(r.facts);
        }
        let name = named("Final check that Proof steps imply the Goal");
        let seq = Sequent { hyps: step_facts, concl: goal.clone() };
        match attempt(env, seq, &min_rules(env), &[], &settings.budget) {
            Ok(sub) => {
                checks.push(Check::pass(name, "final"));
                facts.push(sub);
            }
            Err(why) => checks.push(Check::fail(name, "final", format!("the steps do not give the goal: {why}"))),
        }
    } else {
        checks.push(Check::fail(named("Proof steps"), "steps", "no proof steps and the goal was not derived").at(span));
    }

    // Warnings that do not affect validity.
    if !nil_derived {
        if let SatVerdict::Unsat =
            prover::sat_check(&ctx, env, &settings.budget, settings.trials.min(300), settings.seed)
        {
            checks.push(Check::warn(
                named("Context is satisfiable"),
                "context-unsat",
                "the context is unsatisfiable but nil was not derived; this likely indicates a mistake",
            ));
        }
    }
    let cited = cited_labels(body);
    for c in &body.context {
        if !cited.contains(&c.label) && !typeguard::is_type_predicate(&c.term, env) {
            checks.push(Check::warn(named(&c.label), "unused-context", "context item is never cited").at(c.span));
        }
    }

    SimpleOutcome { checks, facts, target, completion_trivial: comp.trivial }
}

/// Splices the facts into `tb` and derives `target` from them.
fn assemble(tb: &mut TraceBuilder, facts: Vec<Sub>, target: &Term, budget: &Budget) -> Option<FactId> {
    let mut premises = Vec::new();
    for sub in facts {
        let off = tb.splice(sub.proof.steps);
        premises.push((sub.proof.fact + off, sub.formula));
    }
    prover::entail(tb, &premises, target, budget)
}

fn replay_check(trace: &Trace) -> Check {
    match cpc_kernel::replay_text(&trace.to_string()) {
        cpc_kernel::Verdict::Accepted => Check::pass("Kernel replay of the proof trace", "kernel"),
        cpc_kernel::Verdict::Rejected { step, reason } => {
            Check::fail("Kernel replay of the proof trace", "kernel", format!("rejected at line {step}: {reason}"))
        }
    }
}

/// Outcome of checking one proof.
pub struct ProofResult {
    pub checks: Vec<Check>,
    pub trace: Option<Trace>,
    /// The statement established, if the proof is valid.
    pub established: Option<Term>,
    pub completion_trivial: bool,
}

fn finish(
    mut checks: Vec<Check>,
    mut tb: TraceBuilder,
    fact: Option<FactId>,
    theorem: Term,
    name: &str,
    env: &Env,
    trivial: bool,
) -> ProofResult {
    let Some(fact) = fact else {
        checks.push(Check::fail(
            "Kernel replay of the proof trace",
            "kernel",
            "the checked facts do not combine into the statement",
        ));
        return ProofResult { checks, trace: None, established: None, completion_trivial: trivial };
    };
    tb.push(TStep::Done(fact));
    let trace = Trace {
        name: name.to_string(),
        header: env.kernel_header(),
        theorem: theorem.clone(),
        steps: tb.live_steps(fact),
    };
    let check = replay_check(&trace);
    let accepted = check.status == Status::Pass;
    checks.push(check);
    ProofResult { checks, trace: Some(trace), established: accepted.then_some(theorem), completion_trivial: trivial }
}

/// Checks a proof with a simple body.
pub fn check_simple_proof(
    proof: &ast::Proof,
    body: &SimpleBody,
    span: Span,
    env: &Env,
    settings: &Settings,
) -> ProofResult {
    let e = proof.exportation.as_ref().or(body.exportation.as_ref());
    let c = proof.completion.as_ref().or(body.completion.as_ref());
    let out = check_simple("", &proof.statement, e, c, body, span, env, settings);
    if !out.ok() {
        return ProofResult {
            checks: out.checks,
            trace: None,
            established: None,
            completion_trivial: out.completion_trivial,
        };
    }
    let mut tb = TraceBuilder::new();
    let fact = assemble(&mut tb, out.facts, &out.target, &settings.budget);
    finish(out.checks, tb, fact, out.target, &proof.name, env, out.completion_trivial)
}

fn case_label(kind: CaseKind, index: u32) -> String {
    let k = match kind {
        CaseKind::Contract => "Contract Case",
        CaseKind::Base => "Base Case",
        CaseKind::Induction => "Induction Case",
    };
    format!("{k} {index}")
}

/// Checks a proof by induction: the scheme of the induction term, the
/// match of the cases against it, and each case as a simple proof of its
/// obligation.
pub fn check_inductive_proof(
    proof: &ast::Proof,
    induct: &Term,
    cases: &[ast::Case],
    span: Span,
    env: &Env,
    settings: &Settings,
) -> ProofResult {
    let mut checks = Vec::new();
    let fail = |checks: Vec<Check>, trivial| ProofResult {
        checks,
        trace: None,
        established: None,
        completion_trivial: trivial,
    };
    let (check, comp) = completion_check(
        "Checking that completed statement passes contract checking",
        &proof.statement,
        proof.exportation.as_ref(),
        proof.completion.as_ref(),
        env,
        settings,
        span,
    );
    checks.push(check);
    let Some(comp) = comp else { return fail(checks, false) };
    let stmt = if comp.trivial { proof.statement.clone() } else { comp.statement.clone() };

    let scheme_name = format!("Induction scheme of {induct}");
    let obligations: Vec<Obligation> = match induction::generate_scheme(induct, &stmt, env) {
        Ok(o) => o,
        Err(e) => {
            checks.push(Check::fail(scheme_name, "induction-scheme", e.to_string()).at(span));
            return fail(checks, comp.trivial);
        }
    };
    checks
        .push(Check::pass(scheme_name, "induction-scheme").with_message(format!("{} obligations", obligations.len())));
    let (f, vars) = induction::induct_target(induct, &stmt, env).expect("scheme was generated");

    let user: Vec<Option<Term>> = cases.iter().map(|c| induction::case_statement(&c.body)).collect();
    let bij = match induction::match_cases(&user, &obligations, env, &settings.limits()) {
        Ok(b) => b,
        Err(e) => {
            let mut msg = String::from("cases and generated obligations do not match one to one");
            for &u in &e.cases {
                msg.push_str(&format!("\nno obligation for {}", case_label(cases[u].kind, cases[u].index)));
            }
            for &g in &e.obligations {
                msg.push_str(&format!("\nno case proves {}", obligations[g].exported()));
            }
            checks.push(Check::fail("Cases match the induction scheme", "induction-match", msg).at(span));
            return fail(checks, comp.trivial);
        }
    };
    checks.push(Check::pass("Cases match the induction scheme", "induction-match"));

    let mut tb = TraceBuilder::new();
    let mut ids = Vec::new();
    let mut all_ok = true;
    for (k, ob) in obligations.iter().enumerate() {
        let target = ob.formula();
        match bij[k] {
            None => {
                let name = "Contract case holds without a proof";
                let seq = Sequent { hyps: vec![], concl: target.clone() };
                match attempt(env, seq, &min_rules(env), &[], &settings.budget) {
                    Ok(sub) => {
                        checks.push(Check::pass(name, "induction-case").with_message("discharged automatically"));
                        if let Some(id) = assemble(&mut tb, vec![sub], &target, &settings.budget) {
                            ids.push(id);
                        }
                    }
                    Err(why) => {
                        all_ok = false;
                        checks.push(Check::fail(name, "induction-case", why));
                    }
                }
            }
            Some(u) => {
                let case = &cases[u];
                let prefix = format!("{}: ", case_label(case.kind, case.index));
                let out = check_simple(
                    &prefix,
                    &target,
                    case.body.exportation.as_ref(),
                    case.body.completion.as_ref(),
                    &case.body,
                    case.span,
                    env,
                    settings,
                );
                let ok = out.ok();
                checks.extend(out.checks);
                if !out.completion_trivial {
                    all_ok = false;
                    checks.push(Check::fail(
                        format!("{prefix}Case statement"),
                        "induction-case",
                        "a case must prove its obligation without further contract completion",
                    ));
                } else if ok {
                    if let Some(id) = assemble(&mut tb, out.facts, &target, &settings.budget) {
                        ids.push(id);
                    }
                } else {
                    all_ok = false;
                }
            }
        }
    }
    if !all_ok {
        return fail(checks, comp.trivial);
    }
    let fact = (ids.len() == obligations.len()).then(|| {
        let id = tb.fresh();
        tb.push(TStep::Induct { id, target: stmt.clone(), f, vars, obligations: ids });
        id
    });
    finish(checks, tb, fact, stmt, &proof.name, env, comp.trivial)
}

pub fn proof_title(kind: ast::ProofKind) -> &'static str {
    match kind {
        ast::ProofKind::Conjecture => "Conjecture",
        ast::ProofKind::Property => "Property",
        ast::ProofKind::Lemma => "Lemma",
        ast::ProofKind::Theorem => "Theorem",
    }
}

/// Checks the items of a document in order, threading the environment:
/// admitted definitions, properties and proved statements are visible to
/// everything after them.
pub fn check_document(doc: &Document, env0: &Env, settings: &Settings) -> (Vec<ItemReport>, Env) {
    let mut env = env0.clone();
    let mut out = Vec::new();
    for item in &doc.items {
        match &item.kind {
            ast::ItemKind::Function(decl) => {
                let check = match env.define_function(decl) {
                    Ok(next) => {
                        env = next;
                        if decl.assume_terminating {
                            Check::warn(
                                "Definition admitted",
                                "assumed-termination",
                                format!("termination of {} is assumed, not proved", decl.name),
                            )
                            .at(item.span)
                        } else {
                            Check::pass("Definition admitted", "definition")
                        }
                    }
                    Err(e) => Check::fail("Definition admitted", "definition", e.to_string()).at(item.span),
                };
                out.push(ItemReport::new(&decl.name, ItemKind::Function, "Function", item.span, vec![check]));
            }
            ast::ItemKind::Abbrev(a) => env = env.add_abbrev(a.clone()),
            ast::ItemKind::Property(p) => {
                let report = testgen::test_formula(&p.statement, &env, settings.trials, settings.seed);
                let name = "Random testing found no counterexample";
                let check = if !report.counterexamples.is_empty() {
                    Check::fail(name, "property-test", "counterexample found")
                        .at(item.span)
                        .with_counterexamples(&report.counterexamples)
                } else if report.vacuous() {
                    env = env.add_lemma(&p.name, p.statement.clone(), LemmaStatus::Tested);
                    Check::warn(name, "property-test", "no generated input met the hypotheses").at(item.span)
                } else {
                    env = env.add_lemma(&p.name, p.statement.clone(), LemmaStatus::Tested);
                    Check::pass(name, "property-test")
                        .with_message(format!("{} of {} trials met the hypotheses", report.satisfying, report.trials))
                };
                out.push(ItemReport::new(&p.name, ItemKind::Property, "Property", item.span, vec![check]));
            }
            ast::ItemKind::Assume(p) => {
                env = env.add_lemma(&p.name, p.statement.clone(), LemmaStatus::Assumed);
                let check = Check::warn("Assumed without proof", "assumption", "statement admitted as an axiom");
                out.push(ItemReport::new(&p.name, ItemKind::Assumption, "Assume", item.span, vec![check]));
            }
            ast::ItemKind::Proof(proof) => {
                let result = match &proof.body {
                    ProofBody::Simple(body) => check_simple_proof(proof, body, item.span, &env, settings),
                    ProofBody::Inductive { induct, cases } => {
                        check_inductive_proof(proof, induct, cases, item.span, &env, settings)
                    }
                };
                if let Some(stmt) = &result.established {
                    let status = if result.completion_trivial { LemmaStatus::Proved } else { LemmaStatus::Assumed };
                    env = env.add_lemma(&proof.name, stmt.clone(), status);
                }
                let mut report =
                    ItemReport::new(&proof.name, ItemKind::Proof, proof_title(proof.kind), item.span, result.checks);
                report.trace = result.trace;
                out.push(report);
            }
        }
    }
    (out, env)
}
