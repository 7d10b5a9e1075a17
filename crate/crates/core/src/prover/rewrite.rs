//! Conditional rewriting to normal form.
//!
//! Normalizing `t` grows a single fact `(== t u)`: it starts as `(REFL t)`
//! and every rewrite acts on a position inside `u`. Conditions of rules are
//! discharged by normalizing them to `t` in a separate chain.

use super::{Ctx, Res};
use crate::eval::eval_logic;
use crate::term::{match_term, Term, Value};
use crate::trace::{FactId, TStep};

/// Fuel for ground evaluation, equal to the kernel's.
const EVAL_FUEL: u64 = 2_000_000;
const MAX_COND_DEPTH: usize = 6;

struct Chain {
    id: FactId,
    cur: Term,
}

fn kpos(p: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(1);
    out.extend_from_slice(p);
    out
}

impl Ctx<'_> {
    fn tick(&mut self) -> Res<()> {
        self.rewrites += 1;
        if self.rewrites > self.budget.rewrite_steps {
            return Err("rewrite budget exhausted".into());
        }
        if self.rewrites.is_multiple_of(256) && self.started.elapsed().as_millis() as u64 > self.budget.wall_ms {
            return Err("time budget exhausted".into());
        }
        Ok(())
    }

    /// Normal form of `t` with the fact `(== t nf)`, or `None` for the
    /// fact when nothing changed.
    pub(super) fn norm_term(&mut self, t: &Term) -> Res<(Term, Option<FactId>)> {
        if let Some(m) = self.memo.get(t) {
            return Ok(m.clone());
        }
        if self.normal.contains(t) {
            return Ok((t.clone(), None));
        }
        let id = self.tb.fresh();
        self.tb.push(TStep::Refl(id, t.clone()));
        let mut ch = Chain { id, cur: t.clone() };
        self.norm_at(&mut ch, &[])?;
        let out = if ch.cur == *t { (t.clone(), None) } else { (ch.cur.clone(), Some(ch.id)) };
        if let Some(eq) = out.1 {
            self.record(eq, Term::eq(t.clone(), ch.cur.clone()));
        }
        self.memo.insert(t.clone(), out.clone());
        Ok(out)
    }

    fn norm_at(&mut self, ch: &mut Chain, p: &[usize]) -> Res<()> {
        let mut budget_left = 64;
        loop {
            let u = ch.cur.at(p).expect("position inside chain").clone();
            if self.normal.contains(&u) {
                return Ok(());
            }
            self.tick()?;
            let n = u.args().len();
            for i in 0..n {
                let mut q = p.to_vec();
                q.push(i);
                self.norm_at(ch, &q)?;
            }
            let u = ch.cur.at(p).expect("position inside chain").clone();
            if !self.top_step(ch, p, &u)? {
                self.normal.insert(u);
                return Ok(());
            }
            budget_left -= 1;
            if budget_left == 0 {
                return Err(format!("rewriting does not settle at {u}"));
            }
        }
    }

    fn replace(
        &mut self,
        ch: &mut Chain,
        p: &[usize],
        new: Term,
        step: impl FnOnce(FactId, FactId, Vec<usize>) -> TStep,
    ) {
        let id = self.tb.fresh();
        self.tb.push(step(id, ch.id, kpos(p)));
        ch.id = id;
        ch.cur = ch.cur.replace_at(p, new);
    }

    fn evaluable(&self, f: &str) -> bool {
        self.env.function(f).is_none() || self.rules.exec.contains(f)
    }

    /// One rewrite at the root of `u`, if any applies.
    fn top_step(&mut self, ch: &mut Chain, p: &[usize], u: &Term) -> Res<bool> {
        if let Some(k) = self.known.get(u).cloned() {
            let (eq, rev) = (k.fact, k.rev);
            self.replace(ch, p, k.to, |id, src, pos| TStep::HypRew { id, src, pos, eq, rev });
            return Ok(true);
        }
        let Term::App(f, a) = u else { return Ok(false) };
        if f == "boolp" && a.len() == 1 && self.env.is_bool_valued(&a[0]) {
            self.replace(ch, p, Term::t(), |id, src, pos| TStep::BoolP { id, src, pos });
            return Ok(true);
        }
        if a.iter().all(|x| matches!(x, Term::Const(_))) && self.evaluable(f) {
            let mut fuel = EVAL_FUEL;
            if let Some(v) = eval_logic(u, self.env, &mut fuel) {
                self.replace(ch, p, Term::Const(v), |id, src, pos| TStep::Eval { id, src, pos });
                return Ok(true);
            }
        }
        let ids: Vec<String> =
            self.env.rules_for_head(f).iter().filter(|id| self.rules.contains(id)).cloned().collect();
        for rid in ids {
            let rule = self.env.rule(&rid).expect("indexed rule").clone();
            let Some(s) = match_term(&rule.lhs, u) else {
                continue;
            };
            let mut conds = Vec::new();
            for c in &rule.conds {
                match self.discharge(&crate::term::apply_subst(&s, c))? {
                    Some(id) => conds.push(id),
                    None => break,
                }
            }
            if conds.len() != rule.conds.len() {
                continue;
            }
            let rhs = crate::term::apply_subst(&s, &rule.rhs);
            if rhs == *u {
                continue;
            }
            self.replace(ch, p, rhs, |id, src, pos| TStep::Rewrite { id, src, pos, rule: rid, subst: s, conds });
            return Ok(true);
        }
        Ok(false)
    }

    /// A fact stating exactly `c`, proved by normalizing `c` to `t`.
    pub(super) fn discharge(&mut self, c: &Term) -> Res<Option<FactId>> {
        if let Some(&id) = self.proven.get(c) {
            return Ok(Some(id));
        }
        if self.depth >= MAX_COND_DEPTH {
            return Ok(None);
        }
        self.depth += 1;
        let r = self.norm_term(c);
        self.depth -= 1;
        let (nf, eq) = r?;
        if nf != Term::Const(Value::True) {
            return Ok(None);
        }
        let eq = match eq {
            Some(eq) => eq,
            None => {
                let id = self.tb.fresh();
                self.tb.push(TStep::Refl(id, c.clone()));
                id
            }
        };
        let id = self.tb.fresh();
        self.tb.push(TStep::True { id, src: eq });
        self.record(id, c.clone());
        Ok(Some(id))
    }
}
