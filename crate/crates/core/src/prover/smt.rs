//! The CDCL loop: propositional search over the remaining facts, with
//! theory conflicts turned into CC and FARKAS clauses.

use super::sat::{Cnf, Lit, SatResult, Solver};
use super::{arith, cc, Ctx, Res};
use crate::term::Term;
use crate::trace::{FactId, TStep};

fn clause_term(lits: &[Term]) -> Term {
    Term::or(lits.to_vec())
}

/// The clause negating a set of model literals.
fn blocking(lits: &[(Term, bool)]) -> Vec<Term> {
    lits.iter().map(|(t, holds)| if *holds { Term::not(t.clone()) } else { t.clone() }).collect()
}

impl Ctx<'_> {
    fn theory_lemma(&mut self, model: &[(Term, bool)]) -> Option<(FactId, Term)> {
        let env = self.env;
        let exec = &self.rules.exec;
        let can_eval = |f: &str| env.function(f).is_none() || exec.contains(f);
        if cc::inconsistent(env, model, &can_eval) {
            let core = cc::minimize(env, model, &can_eval);
            let lits = blocking(&core);
            let id = self.tb.fresh();
            self.tb.push(TStep::Cc { id, lits: lits.clone() });
            return Some((id, clause_term(&lits)));
        }
        if !self.rules.arith {
            return None;
        }
        let cert = arith::refute(model, self.budget.arith_vars)?;
        // Keep only the literals the certificate mentions, renumbered.
        let mut used: Vec<usize> = Vec::new();
        for c in &cert {
            match c {
                crate::trace::Cert::Lit(k, _) | crate::trace::Cert::MulMono(k, _, _) => used.push(*k),
                crate::trace::Cert::Mul(j, k, _) => used.extend([*j, *k]),
                crate::trace::Cert::Square(..) => {}
            }
        }
        used.sort_unstable();
        used.dedup();
        let index = |k: usize| used.iter().position(|&u| u == k).expect("used literal");
        let cert = cert
            .into_iter()
            .map(|c| match c {
                crate::trace::Cert::Lit(k, q) => crate::trace::Cert::Lit(index(k), q),
                crate::trace::Cert::MulMono(k, m, q) => crate::trace::Cert::MulMono(index(k), m, q),
                crate::trace::Cert::Mul(j, k, q) => crate::trace::Cert::Mul(index(j), index(k), q),
                sq => sq,
            })
            .collect();
        let core: Vec<(Term, bool)> = used.iter().map(|&k| model[k].clone()).collect();
        let lits = blocking(&core);
        let id = self.tb.fresh();
        self.tb.push(TStep::Farkas { id, lits: lits.clone(), cert });
        Some((id, clause_term(&lits)))
    }
}

/// Derives nil from `facts`, or explains why not.
pub(super) fn refute(cx: &mut Ctx<'_>, facts: &[(FactId, Term)]) -> Res<FactId> {
    let mut cnf = Cnf::new();
    let mut premises: Vec<FactId> = Vec::new();
    for (id, f) in facts {
        cnf.assert_term(f);
        premises.push(*id);
    }
    let mut solver = Solver::new();
    let mut fed = 0;
    let feed = |cnf: &Cnf, solver: &mut Solver, fed: &mut usize| {
        for c in &cnf.clauses[*fed..] {
            solver.add_clause(c.clone());
        }
        *fed = cnf.clauses.len();
    };
    feed(&cnf, &mut solver, &mut fed);
    let mut theory_rounds = 0;
    loop {
        let left = cx.budget.sat_conflicts.saturating_sub(solver.conflicts);
        match solver.solve(left) {
            SatResult::Unsat => break,
            SatResult::Unknown => return Err("conflict budget exhausted".into()),
            SatResult::Sat(model) => {
                let lits: Vec<(Term, bool)> = model
                    .iter()
                    .filter(|l| cnf.is_atom[l.unsigned_abs() as usize])
                    .map(|&l: &Lit| (cnf.names[l.unsigned_abs() as usize].clone(), l > 0))
                    .collect();
                theory_rounds += 1;
                if theory_rounds > 500 {
                    return Err("too many theory rounds".into());
                }
                match cx.theory_lemma(&lits) {
                    Some((id, clause)) => {
                        cnf.assert_term(&clause);
                        premises.push(id);
                        feed(&cnf, &mut solver, &mut fed);
                    }
                    None => {
                        let shown: Vec<String> = lits
                            .iter()
                            .take(12)
                            .map(|(t, h)| if *h { t.to_string() } else { format!("(not {t})") })
                            .collect();
                        return Err(format!("no contradiction found; open case: {}", shown.join(" ")));
                    }
                }
            }
        }
    }
    let learned: Vec<Vec<Term>> = solver.learned.iter().map(|c| c.iter().map(|&l| cnf.lit_term(l)).collect()).collect();
    let id = cx.tb.fresh();
    cx.tb.push(TStep::Prop { id, target: Term::nil(), premises, learned });
    cx.record(id, Term::nil());
    Ok(id)
}
