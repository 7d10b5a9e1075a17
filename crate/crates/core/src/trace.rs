//! Proof traces in the kernel's line format.
//!
//! Steps are built with local fact ids and renumbered when traces are
//! spliced together, so independent proofs can be produced in parallel and
//! still merge deterministically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;

use crate::term::{rat_to_string, Subst, Term};

pub type FactId = u64;

#[derive(Debug, Clone, PartialEq)]
pub enum Cert {
    Lit(usize, BigRational),
    Mul(usize, usize, BigRational),
    MulMono(usize, Term, BigRational),
    Square(Term, BigRational),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TStep {
    Subproof(FactId, Term),
    Qed(FactId),
    Inst(FactId, String, Subst),
    Refl(FactId, Term),
    Rewrite { id: FactId, src: FactId, pos: Vec<usize>, rule: String, subst: Subst, conds: Vec<FactId> },
    HypRew { id: FactId, src: FactId, pos: Vec<usize>, eq: FactId, rev: bool },
    Eval { id: FactId, src: FactId, pos: Vec<usize> },
    BoolP { id: FactId, src: FactId, pos: Vec<usize> },
    True { id: FactId, src: FactId },
    Cc { id: FactId, lits: Vec<Term> },
    Farkas { id: FactId, lits: Vec<Term>, cert: Vec<Cert> },
    Prop { id: FactId, target: Term, premises: Vec<FactId>, learned: Vec<Vec<Term>> },
    Induct { id: FactId, target: Term, f: String, vars: Vec<String>, obligations: Vec<FactId> },
    Done(FactId),
}

fn shift_ids(ids: &mut [FactId], off: u64) {
    ids.iter_mut().for_each(|i| *i += off);
}

impl TStep {
    /// The fact this step introduces.
    pub fn defines(&self) -> Option<FactId> {
        match self {
            TStep::Subproof(id, _) | TStep::Qed(id) | TStep::Inst(id, ..) | TStep::Refl(id, _) => Some(*id),
            TStep::Rewrite { id, .. }
            | TStep::HypRew { id, .. }
            | TStep::Eval { id, .. }
            | TStep::BoolP { id, .. }
            | TStep::True { id, .. }
            | TStep::Cc { id, .. }
            | TStep::Farkas { id, .. }
            | TStep::Prop { id, .. }
            | TStep::Induct { id, .. } => Some(*id),
            TStep::Done(_) => None,
        }
    }

    /// Facts this step reads.
    pub fn uses(&self) -> Vec<FactId> {
        match self {
            TStep::Rewrite { src, conds, .. } => std::iter::once(*src).chain(conds.iter().copied()).collect(),
            TStep::HypRew { src, eq, .. } => vec![*src, *eq],
            TStep::Eval { src, .. } | TStep::BoolP { src, .. } | TStep::True { src, .. } => vec![*src],
            TStep::Prop { premises, .. } => premises.clone(),
            TStep::Induct { obligations, .. } => obligations.clone(),
            TStep::Done(id) => vec![*id],
            _ => Vec::new(),
        }
    }

    fn shift(&mut self, off: u64) {
        match self {
            TStep::Subproof(id, _) | TStep::Qed(id) | TStep::Inst(id, ..) | TStep::Refl(id, _) | TStep::Done(id) => {
                *id += off
            }
            TStep::Rewrite { id, src, conds, .. } => {
                *id += off;
                *src += off;
                shift_ids(conds, off);
            }
            TStep::HypRew { id, src, eq, .. } => {
                *id += off;
                *src += off;
                *eq += off;
            }
            TStep::Eval { id, src, .. } | TStep::BoolP { id, src, .. } | TStep::True { id, src } => {
                *id += off;
                *src += off;
            }
            TStep::Cc { id, .. } | TStep::Farkas { id, .. } => *id += off,
            TStep::Prop { id, premises, .. } => {
                *id += off;
                shift_ids(premises, off);
            }
            TStep::Induct { id, obligations, .. } => {
                *id += off;
                shift_ids(obligations, off);
            }
        }
    }
}

struct Pos<'a>(&'a [usize]);

impl fmt::Display for Pos<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(" "))
    }
}

struct Ids<'a>(&'a [FactId]);

impl fmt::Display for Ids<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(" "))
    }
}

struct Terms<'a>(&'a [Term]);

impl fmt::Display for Terms<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Term::to_string).collect();
        write!(f, "({})", parts.join(" "))
    }
}

pub fn render_subst(s: &Subst) -> String {
    let parts: Vec<String> = s.iter().map(|(k, v)| format!("({k} {v})")).collect();
    format!("({})", parts.join(" "))
}

impl fmt::Display for Cert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cert::Lit(k, c) => write!(f, "(lit {k} {})", rat_to_string(c)),
            Cert::Mul(j, k, c) => write!(f, "(mul {j} {k} {})", rat_to_string(c)),
            Cert::MulMono(k, t, c) => write!(f, "(mulmono {k} {t} {})", rat_to_string(c)),
            Cert::Square(t, c) => write!(f, "(square {t} {})", rat_to_string(c)),
        }
    }
}

impl fmt::Display for TStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TStep::Subproof(id, t) => write!(f, "(SUBPROOF {id} {t})"),
            TStep::Qed(id) => write!(f, "(QED {id})"),
            TStep::Inst(id, name, s) => write!(f, "(INST {id} {name} {})", render_subst(s)),
            TStep::Refl(id, t) => write!(f, "(REFL {id} {t})"),
            TStep::Rewrite { id, src, pos, rule, subst, conds } => {
                write!(f, "(REWRITE {id} {src} {} {rule} {} {})", Pos(pos), render_subst(subst), Ids(conds))
            }
            TStep::HypRew { id, src, pos, eq, rev } => {
                write!(f, "(HYPREW {id} {src} {} {eq}{})", Pos(pos), if *rev { " :rev" } else { "" })
            }
            TStep::Eval { id, src, pos } => write!(f, "(EVAL {id} {src} {})", Pos(pos)),
            TStep::BoolP { id, src, pos } => write!(f, "(BOOLP {id} {src} {})", Pos(pos)),
            TStep::True { id, src } => write!(f, "(TRUE {id} {src})"),
            TStep::Cc { id, lits } => write!(f, "(CC {id} {})", Terms(lits)),
            TStep::Farkas { id, lits, cert } => {
                let c: Vec<String> = cert.iter().map(Cert::to_string).collect();
                write!(f, "(FARKAS {id} {} ({}))", Terms(lits), c.join(" "))
            }
            TStep::Prop { id, target, premises, learned } => {
                let l: Vec<String> = learned.iter().map(|c| Terms(c).to_string()).collect();
                write!(f, "(PROP {id} {target} {} ({}))", Ids(premises), l.join(" "))
            }
            TStep::Induct { id, target, f: g, vars, obligations } => {
                write!(f, "(INDUCT {id} {target} {g} ({}) {})", vars.join(" "), Ids(obligations))
            }
            TStep::Done(id) => write!(f, "(DONE {id})"),
        }
    }
}

/// A sequence of steps with a fact-id allocator.
#[derive(Debug, Clone, Default)]
pub struct TraceBuilder {
    pub steps: Vec<TStep>,
    next: FactId,
    /// For each QED, the nil fact that closes its subproof.
    closers: BTreeMap<FactId, FactId>,
}

impl TraceBuilder {
    pub fn new() -> TraceBuilder {
        TraceBuilder { steps: Vec::new(), next: 1, closers: BTreeMap::new() }
    }

    pub fn fresh(&mut self) -> FactId {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn push(&mut self, s: TStep) {
        self.steps.push(s);
    }

    /// Pushes a QED closed by the nil fact `by`.
    pub fn qed(&mut self, id: FactId, by: FactId) {
        self.closers.insert(id, by);
        self.steps.push(TStep::Qed(id));
    }

    /// The steps that `root` depends on, in their original order. Facts
    /// nothing depends on are dropped, as are subproofs whose QED is unused.
    pub fn live_steps(&self, root: FactId) -> Vec<TStep> {
        let mut partner: BTreeMap<usize, usize> = BTreeMap::new();
        let mut open = Vec::new();
        for (i, s) in self.steps.iter().enumerate() {
            match s {
                TStep::Subproof(..) => open.push(i),
                TStep::Qed(_) => {
                    if let Some(j) = open.pop() {
                        partner.insert(i, j);
                    }
                }
                _ => {}
            }
        }
        let mut live: BTreeSet<FactId> = BTreeSet::from([root]);
        let mut keep = vec![false; self.steps.len()];
        for (i, s) in self.steps.iter().enumerate().rev() {
            let needed = match s {
                TStep::Done(_) => true,
                TStep::Subproof(..) => keep[i],
                _ => s.defines().is_some_and(|id| live.contains(&id)),
            };
            if !needed {
                continue;
            }
            keep[i] = true;
            live.extend(s.uses());
            if let TStep::Qed(id) = s {
                live.extend(self.closers.get(id));
                if let Some(&j) = partner.get(&i) {
                    keep[j] = true;
                }
            }
        }
        self.steps.iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s.clone()).collect()
    }

    /// Appends another builder's steps, renumbered past ours. Returns the
    /// offset applied, so callers can translate ids they hold.
    pub fn splice(&mut self, other: TraceBuilder) -> u64 {
        let off = self.next - 1;
        for mut s in other.steps {
            s.shift(off);
            self.steps.push(s);
        }
        self.closers.extend(other.closers.into_iter().map(|(q, n)| (q + off, n + off)));
        self.next += other.next - 1;
        off
    }
}

/// A complete trace: header lines, the theorem, and the steps.
#[derive(Debug, Clone)]
pub struct Trace {
    pub name: String,
    pub header: Vec<String>,
    pub theorem: Term,
    pub steps: Vec<TStep>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(CPC-TRACE 1)")?;
        writeln!(f, "(NAME {})", self.name)?;
        for h in &self.header {
            writeln!(f, "{h}")?;
        }
        writeln!(f, "(THEOREM {})", self.theorem)?;
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splice_renumbers() {
        let mut a = TraceBuilder::new();
        let x = a.fresh();
        a.push(TStep::Refl(x, Term::var("p")));
        let mut b = TraceBuilder::new();
        let y = b.fresh();
        let z = b.fresh();
        b.push(TStep::Refl(y, Term::var("q")));
        b.push(TStep::True { id: z, src: y });
        let off = a.splice(b);
        assert_eq!(off, 1);
        assert_eq!(a.steps[2].to_string(), "(TRUE 3 2)");
        assert_eq!(a.fresh(), 4);
    }
}
