//! Tseitin encoding and a small CDCL solver.
//!
//! The encoding produces exactly the clauses the kernel builds for the same
//! terms, so every clause learned here by conflict analysis is also a
//! reverse-unit-propagation consequence on the kernel side.

use std::collections::HashMap;

use crate::term::{Term, Value};

pub type Lit = i32;

#[derive(Debug, Default)]
pub struct Cnf {
    vars: HashMap<Term, Lit>,
    /// Term behind each variable, indexed by variable number.
    pub names: Vec<Term>,
    /// Whether a variable stands for a theory atom rather than a connective.
    pub is_atom: Vec<bool>,
    pub truth: Lit,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new() -> Cnf {
        let mut c = Cnf { names: vec![Term::nil()], is_atom: vec![false], ..Cnf::default() };
        c.truth = c.fresh(Term::t(), false);
        c.clauses.push(vec![c.truth]);
        c
    }

    fn fresh(&mut self, t: Term, atom: bool) -> Lit {
        self.names.push(t);
        self.is_atom.push(atom);
        (self.names.len() - 1) as Lit
    }

    pub fn num_vars(&self) -> usize {
        self.names.len() - 1
    }

    pub fn lit(&mut self, t: &Term) -> Lit {
        match t {
            Term::Const(Value::Nil) => return -self.truth,
            Term::Const(_) => return self.truth,
            _ => {}
        }
        if let Some(&v) = self.vars.get(t) {
            return v;
        }
        let (f, a) = match t {
            Term::App(f, a) => (f.as_str(), a.as_slice()),
            _ => ("", &[][..]),
        };
        let lit = match (f, a.len()) {
            ("not", 1) => -self.lit(&a[0]),
            ("^", _) | ("v", _) => {
                let kids: Vec<Lit> = a.iter().map(|x| self.lit(x)).collect();
                let v = self.fresh(t.clone(), false);
                if f == "^" {
                    let mut big = vec![v];
                    for &k in &kids {
                        self.clauses.push(vec![-v, k]);
                        big.push(-k);
                    }
                    self.clauses.push(big);
                } else {
                    let mut big = vec![-v];
                    for &k in &kids {
                        self.clauses.push(vec![v, -k]);
                        big.push(k);
                    }
                    self.clauses.push(big);
                }
                v
            }
            ("=>", 2) => {
                let (p, q) = (self.lit(&a[0]), self.lit(&a[1]));
                let v = self.fresh(t.clone(), false);
                self.clauses.push(vec![-v, -p, q]);
                self.clauses.push(vec![v, p]);
                self.clauses.push(vec![v, -q]);
                v
            }
            ("<=>", 2) => {
                let (p, q) = (self.lit(&a[0]), self.lit(&a[1]));
                let v = self.fresh(t.clone(), false);
                self.clauses.push(vec![-v, -p, q]);
                self.clauses.push(vec![-v, p, -q]);
                self.clauses.push(vec![v, p, q]);
                self.clauses.push(vec![v, -p, -q]);
                v
            }
            ("if", 3) => {
                let (c, x, y) = (self.lit(&a[0]), self.lit(&a[1]), self.lit(&a[2]));
                let v = self.fresh(t.clone(), false);
                self.clauses.push(vec![-v, -c, x]);
                self.clauses.push(vec![-v, c, y]);
                self.clauses.push(vec![v, -c, -x]);
                self.clauses.push(vec![v, c, -y]);
                v
            }
            _ => self.fresh(t.clone(), true),
        };
        self.vars.insert(t.clone(), lit);
        lit
    }

    /// Asserts a formula as a unit clause.
    pub fn assert_term(&mut self, t: &Term) -> usize {
        let l = self.lit(t);
        self.clauses.push(vec![l]);
        self.clauses.len() - 1
    }

    /// The term a literal denotes.
    pub fn lit_term(&self, l: Lit) -> Term {
        let t = self.names[l.unsigned_abs() as usize].clone();
        if l > 0 {
            t
        } else {
            Term::not(t)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Vec<Lit>),
    Unsat,
    Unknown,
}

/// CDCL over a growing clause database, with first-UIP learning. Learned
/// clauses are kept in derivation order for the certificate.
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    assign: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    activity: Vec<f64>,
    bump: f64,
    pub learned: Vec<Vec<Lit>>,
    pub conflicts: u64,
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            clauses: Vec::new(),
            assign: vec![0],
            level: vec![0],
            reason: vec![None],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            activity: vec![0.0],
            bump: 1.0,
            learned: Vec::new(),
            conflicts: 0,
        }
    }

    fn ensure(&mut self, n: usize) {
        while self.assign.len() <= n {
            self.assign.push(0);
            self.level.push(0);
            self.reason.push(None);
            self.activity.push(0.0);
        }
    }

    pub fn add_clause(&mut self, mut c: Vec<Lit>) {
        c.sort_unstable();
        c.dedup();
        let m = c.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
        self.ensure(m);
        self.backtrack(0);
        self.clauses.push(c);
    }

    fn value(&self, l: Lit) -> i8 {
        let v = self.assign[l.unsigned_abs() as usize];
        if l > 0 {
            v
        } else {
            -v
        }
    }

    fn set(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.unsigned_abs() as usize;
        self.assign[v] = if l > 0 { 1 } else { -1 };
        self.level[v] = self.trail_lim.len();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn backtrack(&mut self, lvl: usize) {
        if self.trail_lim.len() <= lvl {
            return;
        }
        let keep = self.trail_lim[lvl];
        for l in self.trail.drain(keep..) {
            self.assign[l.unsigned_abs() as usize] = 0;
        }
        self.trail_lim.truncate(lvl);
    }

    /// Naive propagation to fixpoint; returns a conflicting clause.
    fn propagate(&mut self) -> Option<usize> {
        loop {
            let mut changed = false;
            for ci in 0..self.clauses.len() {
                let mut unassigned = None;
                let mut count = 0;
                let mut sat = false;
                for &l in &self.clauses[ci] {
                    match self.value(l) {
                        1 => {
                            sat = true;
                            break;
                        }
                        0 if unassigned != Some(l) => {
                            count += 1;
                            unassigned = Some(l);
                        }
                        _ => {}
                    }
                }
                if sat {
                    continue;
                }
                match count {
                    0 => return Some(ci),
                    1 => {
                        self.set(unassigned.unwrap(), Some(ci));
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return None;
            }
        }
    }

    fn analyze(&mut self, confl: usize) -> (Vec<Lit>, usize) {
        let cur = self.trail_lim.len();
        let mut seen = vec![false; self.assign.len()];
        let mut learnt: Vec<Lit> = Vec::new();
        let mut pending = 0usize;
        let mut clause = self.clauses[confl].clone();
        let mut idx = self.trail.len();
        let mut p: Option<Lit> = None;
        loop {
            for &q in &clause {
                if Some(q) == p {
                    continue;
                }
                let v = q.unsigned_abs() as usize;
                if seen[v] || self.level[v] == 0 {
                    continue;
                }
                seen[v] = true;
                self.activity[v] += self.bump;
                if self.level[v] == cur {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                idx -= 1;
                if seen[self.trail[idx].unsigned_abs() as usize] {
                    break;
                }
            }
            let l = self.trail[idx];
            p = Some(l);
            pending -= 1;
            if pending == 0 {
                learnt.insert(0, -l);
                break;
            }
            let r = self.reason[l.unsigned_abs() as usize].expect("implied literal has a reason");
            clause = self.clauses[r].clone();
        }
        self.bump *= 1.05;
        let back = learnt[1..].iter().map(|l| self.level[l.unsigned_abs() as usize]).max().unwrap_or(0);
        (learnt, back)
    }

    fn decide(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 1..self.assign.len() {
            if self.assign[v] == 0 && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best
    }

    /// Runs until a model, a refutation, or the conflict budget runs out.
    pub fn solve(&mut self, max_conflicts: u64) -> SatResult {
        self.backtrack(0);
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                if self.trail_lim.is_empty() {
                    return SatResult::Unsat;
                }
                if self.conflicts > max_conflicts {
                    return SatResult::Unknown;
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                self.learned.push(learnt.clone());
                self.clauses.push(learnt.clone());
                let ci = self.clauses.len() - 1;
                self.set(learnt[0], Some(ci));
                continue;
            }
            match self.decide() {
                None => {
                    let model = (1..self.assign.len())
                        .map(|v| if self.assign[v] > 0 { v as Lit } else { -(v as Lit) })
                        .collect();
                    return SatResult::Sat(model);
                }
                Some(v) => {
                    self.trail_lim.push(self.trail.len());
                    self.set(-(v as Lit), None);
                }
            }
        }
    }
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn brute_force_sat(clauses: &[Vec<Lit>], n: usize) -> bool {
        (0..1u32 << n).any(|m| {
            clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let bit = m >> (l.unsigned_abs() - 1) & 1 == 1;
                    if l > 0 {
                        bit
                    } else {
                        !bit
                    }
                })
            })
        })
    }

    #[test]
    fn pigeonhole_two_into_one_is_unsat() {
        let mut s = Solver::new();
        for c in [vec![1], vec![2], vec![-1, -2]] {
            s.add_clause(c);
        }
        assert_eq!(s.solve(1000), SatResult::Unsat);
    }

    #[test]
    fn tseitin_of_tautology_negation_is_unsat() {
        let mut cnf = Cnf::new();
        cnf.assert_term(&parse_term("(not (v p (not p)))").unwrap());
        let mut s = Solver::new();
        for c in &cnf.clauses {
            s.add_clause(c.clone());
        }
        assert_eq!(s.solve(100), SatResult::Unsat);
    }

    proptest::proptest! {
        #[test]
        fn agrees_with_brute_force(raw in proptest::collection::vec(proptest::collection::vec((1i32..=5, proptest::bool::ANY), 1..4), 1..14)) {
            let clauses: Vec<Vec<Lit>> = raw.iter().map(|c| c.iter().map(|&(v, s)| if s { v } else { -v }).collect()).collect();
            let mut s = Solver::new();
            for c in &clauses {
                s.add_clause(c.clone());
            }
            let got = s.solve(10_000);
            let expect = brute_force_sat(&clauses, 5);
            match got {
                SatResult::Sat(model) => {
                    proptest::prop_assert!(expect);
                    proptest::prop_assert!(clauses.iter().all(|c| c.iter().any(|l| model.contains(l))));
                }
                SatResult::Unsat => proptest::prop_assert!(!expect),
                SatResult::Unknown => proptest::prop_assert!(false),
            }
        }
    }
}
