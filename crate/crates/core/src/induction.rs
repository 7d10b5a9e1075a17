//! Induction schemes read off recursive definitions, and the matching of
//! user-written cases against them.
//!
//! Obligations are produced in the same order, and with the same formula
//! shape, as the kernel's INDUCT check, so a proof of each obligation can be
//! handed to the kernel unchanged.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{CaseKind, SimpleBody};
use crate::env::{calls_of, flatten_branches, Env};
use crate::prover::{self, ProofOutcome, Sequent};
use crate::term::{apply_subst, Subst, Term};
use crate::typeguard::{export, CheckLimits};

#[derive(Debug, Clone, PartialEq)]
pub struct Obligation {
    pub kind: CaseKind,
    pub tests: Vec<Term>,
    /// Copies of the statement at the arguments of recursive calls.
    pub ihs: Vec<Term>,
    pub statement: Term,
}

impl Obligation {
    /// `(=> (^ tests ihs) statement)`, exactly as the kernel states it.
    pub fn formula(&self) -> Term {
        let mut hyps = self.tests.clone();
        hyps.extend(self.ihs.iter().cloned());
        Term::implies(hyps, self.statement.clone())
    }

    pub fn exported(&self) -> Term {
        export(&self.formula())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("induction term {0} is not a function application")]
    NotAnApplication(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("{0} is not recursive")]
    NotRecursive(String),
    #[error("{0} takes {1} arguments")]
    Arity(String, usize),
    #[error("arguments of the induction term must be distinct variables of the statement")]
    NotVariableArgs,
}

/// The function and variables of an induction term such as `(qsort x)`.
pub fn induct_target(induct: &Term, statement: &Term, env: &Env) -> Result<(String, Vec<String>), SchemeError> {
    let Term::App(f, args) = induct else {
        return Err(SchemeError::NotAnApplication(induct.to_string()));
    };
    let def = env.function(f).ok_or_else(|| SchemeError::UnknownFunction(f.clone()))?;
    if def.params.len() != args.len() {
        return Err(SchemeError::Arity(f.clone(), def.params.len()));
    }
    if !def.is_recursive() {
        return Err(SchemeError::NotRecursive(f.clone()));
    }
    let in_stmt = statement.vars();
    let mut vars = Vec::new();
    for a in args {
        match a {
            Term::Var(v) if in_stmt.contains(v) && !vars.contains(v) => vars.push(v.clone()),
            _ => return Err(SchemeError::NotVariableArgs),
        }
    }
    Ok((f.clone(), vars))
}

/// One contract obligation, then one obligation per branch of the
/// definition: base cases for branches without recursive calls, induction
/// steps for the others.
pub fn generate_scheme(induct: &Term, statement: &Term, env: &Env) -> Result<Vec<Obligation>, SchemeError> {
    let (f, vars) = induct_target(induct, statement, env)?;
    let def = env.function(&f).expect("checked by induct_target");
    let to_vars: Subst = def.params.iter().zip(&vars).map(|((p, _), v)| (p.clone(), Term::var(v))).collect();
    let recs: Vec<Term> = def
        .params
        .iter()
        .zip(&vars)
        .filter(|((_, r), _)| r != "allp")
        .map(|((_, r), v)| Term::app(r, vec![Term::var(v)]))
        .collect();
    let mut out = vec![Obligation {
        kind: CaseKind::Contract,
        tests: vec![Term::not(Term::and(recs.clone()))],
        ihs: vec![],
        statement: statement.clone(),
    }];
    let mut branches = Vec::new();
    flatten_branches(&apply_subst(&to_vars, &def.body), &mut Vec::new(), &mut branches);
    for (path, leaf) in branches {
        let mut tests = recs.clone();
        tests.extend(path);
        let mut calls = Vec::new();
        calls_of(&leaf, &f, &mut calls);
        let ihs: Vec<Term> = calls
            .into_iter()
            .map(|args| {
                let s: Subst = vars.iter().cloned().zip(args).collect();
                apply_subst(&s, statement)
            })
            .collect();
        let kind = if ihs.is_empty() { CaseKind::Base } else { CaseKind::Induction };
        out.push(Obligation { kind, tests, ihs, statement: statement.clone() });
    }
    Ok(out)
}

/// The statement a user case claims: its completion, else its
/// exportation, else its context implying its goal.
pub fn case_statement(body: &SimpleBody) -> Option<Term> {
    if let Some(c) = &body.completion {
        return Some(export(c));
    }
    if let Some(e) = &body.exportation {
        return Some(e.clone());
    }
    let goal = body.goal.clone()?;
    Some(export(&Term::implies(body.context.iter().map(|c| c.term.clone()).collect(), goal)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no one-to-one match between cases and obligations")]
pub struct MatchError {
    /// Indices into the user cases.
    pub cases: Vec<usize>,
    /// Indices into the generated obligations.
    pub obligations: Vec<usize>,
}

/// For each obligation, the user case proving it, or `None` for a contract
/// obligation that holds trivially and was not written out.
pub type Bijection = Vec<Option<usize>>;

fn equivalent(a: &Term, b: &Term, env: &Env, limits: &CheckLimits) -> bool {
    if a == b {
        return true;
    }
    let rules = env.theory("min").expect("min theory");
    let seq = Sequent { hyps: vec![], concl: Term::app("<=>", vec![a.clone(), b.clone()]) };
    matches!(prover::prove(env, &seq, &rules, &[], &limits.budget), ProofOutcome::Proved(_))
}

/// Whether `ob` is provable in min with no user help.
pub fn trivially_holds(ob: &Obligation, env: &Env, limits: &CheckLimits) -> bool {
    let rules = env.theory("min").expect("min theory");
    let seq = Sequent { hyps: vec![], concl: ob.exported() };
    matches!(prover::prove(env, &seq, &rules, &[], &limits.budget), ProofOutcome::Proved(_))
}

fn augment(u: usize, adj: &[Vec<usize>], seen: &mut BTreeSet<usize>, owner: &mut [Option<usize>]) -> bool {
    for &g in &adj[u] {
        if !seen.insert(g) {
            continue;
        }
        if owner[g].is_none_or(|v| augment(v, adj, seen, owner)) {
            owner[g] = Some(u);
            return true;
        }
    }
    false
}

/// Pairs user cases with generated obligations up to propositional
/// equivalence in min. A contract obligation may stay unpaired when it
/// holds trivially.
pub fn match_cases(
    user: &[Option<Term>],
    generated: &[Obligation],
    env: &Env,
    limits: &CheckLimits,
) -> Result<Bijection, MatchError> {
    let exported: Vec<Term> = generated.iter().map(Obligation::exported).collect();
    let adj: Vec<Vec<usize>> = user
        .iter()
        .map(|s| match s {
            Some(s) => (0..generated.len()).filter(|&g| equivalent(s, &exported[g], env, limits)).collect(),
            None => Vec::new(),
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; generated.len()];
    for u in 0..user.len() {
        augment(u, &adj, &mut BTreeSet::new(), &mut owner);
    }
    let matched: BTreeSet<usize> = owner.iter().flatten().copied().collect();
    let cases: Vec<usize> = (0..user.len()).filter(|u| !matched.contains(u)).collect();
    let obligations: Vec<usize> = (0..generated.len())
        .filter(|&g| {
            owner[g].is_none()
                && !(generated[g].kind == CaseKind::Contract && trivially_holds(&generated[g], env, limits))
        })
        .collect();
    if cases.is_empty() && obligations.is_empty() {
        Ok(owner)
    } else {
        Err(MatchError { cases, obligations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_document, parse_term};
    use crate::prover::Budget;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn limits() -> CheckLimits {
        CheckLimits { budget: Budget::default(), trials: 100, seed: 0 }
    }

    fn with_defs(src: &str) -> Env {
        let (doc, errs) = parse_document(src);
        assert!(errs.is_empty(), "{errs:?}");
        let mut env = Env::new();
        for it in doc.items {
            if let crate::ast::ItemKind::Function(d) = it.kind {
                env = env.define_function(&d).unwrap();
            }
        }
        env
    }

    #[test]
    fn one_if_gives_three_obligations() {
        let env = with_defs("(definec walk (x :tl) :tl (if (endp x) nil (walk (rest x))))");
        let stmt = p("(=> (tlp x) (== (walk x) nil))");
        let obs = generate_scheme(&p("(walk x)"), &stmt, &env).unwrap();
        let kinds: Vec<CaseKind> = obs.iter().map(|o| o.kind).collect();
        assert_eq!(kinds, vec![CaseKind::Contract, CaseKind::Base, CaseKind::Induction]);
        assert_eq!(obs[2].ihs, vec![p("(=> (tlp (rest x)) (== (walk (rest x)) nil))")]);
        assert_eq!(obs[0].formula(), p("(=> (not (tlp x)) (=> (tlp x) (== (walk x) nil)))"));
    }

    #[test]
    fn bad_induction_terms() {
        let env = Env::new();
        let stmt = p("(tlp (bin-app x y))");
        assert_eq!(generate_scheme(&p("(bin-app (bin-app x y) y)"), &stmt, &env), Err(SchemeError::NotVariableArgs));
        assert_eq!(generate_scheme(&p("(consp x)"), &stmt, &env), Err(SchemeError::UnknownFunction("consp".into())));
    }

    #[test]
    fn cases_match_in_any_order() {
        let env = Env::new();
        let stmt = p("(=> (tlp x) (== (len (bin-app x nil)) (len x)))");
        let obs = generate_scheme(&p("(len x)"), &stmt, &env).unwrap();
        let mut user: Vec<Option<Term>> = obs[1..].iter().map(|o| Some(o.exported())).collect();
        user.reverse();
        let b = match_cases(&user, &obs, &env, &limits()).unwrap();
        assert_eq!(b, vec![None, Some(1), Some(0)]);

        let twice = vec![user[1].clone(), user[1].clone()];
        let err = match_cases(&twice, &obs, &env, &limits()).unwrap_err();
        assert_eq!(err.cases, vec![1]);
        assert_eq!(err.obligations, vec![2]);
    }
}
