//! Congruence closure over literals, with ground evaluation and the
//! `if`/`==` interpretation rules. Mirrors the kernel's CC check so that a
//! conflict found here is accepted there.

use std::collections::{BTreeMap, HashMap};

use crate::env::Env;
use crate::eval::eval_logic;
use crate::term::{Term, Value};

const FUEL: u64 = 200_000;
const ROUNDS: usize = 64;

struct Graph<'a> {
    env: &'a Env,
    can_eval: &'a dyn Fn(&str) -> bool,
    nodes: Vec<Term>,
    ids: HashMap<Term, usize>,
    parent: Vec<usize>,
    diseq: Vec<(usize, usize)>,
    truthy: Vec<usize>,
}

impl Graph<'_> {
    fn node(&mut self, t: &Term) -> usize {
        if let Some(&i) = self.ids.get(t) {
            return i;
        }
        for a in t.args() {
            self.node(a);
        }
        let i = self.nodes.len();
        self.nodes.push(t.clone());
        self.ids.insert(t.clone(), i);
        self.parent.push(i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }

    fn constant_of(&mut self, i: usize) -> Option<Value> {
        let r = self.find(i);
        for k in 0..self.nodes.len() {
            if let Term::Const(v) = self.nodes[k].clone() {
                if self.find(k) == r {
                    return Some(v);
                }
            }
        }
        None
    }

    fn assert_lit(&mut self, t: &Term, pos: bool) {
        match t {
            Term::App(f, a) if f == "not" && a.len() == 1 => self.assert_lit(&a[0], !pos),
            Term::App(f, a) if f == "==" && a.len() == 2 => {
                let (x, y) = (self.node(&a[0]), self.node(&a[1]));
                self.node(t);
                if pos {
                    self.union(x, y);
                } else {
                    self.diseq.push((x, y));
                }
            }
            _ => {
                let i = self.node(t);
                if pos {
                    self.truthy.push(i);
                    if self.env.is_bool_valued(t) {
                        let tt = self.node(&Term::t());
                        self.union(i, tt);
                    }
                } else {
                    let nil = self.node(&Term::nil());
                    self.union(i, nil);
                }
            }
        }
    }

    fn conflict(&mut self) -> bool {
        let mut seen: BTreeMap<usize, Value> = BTreeMap::new();
        for k in 0..self.nodes.len() {
            if let Term::Const(v) = self.nodes[k].clone() {
                let r = self.find(k);
                match seen.get(&r) {
                    Some(w) if *w != v => return true,
                    Some(_) => {}
                    None => {
                        seen.insert(r, v);
                    }
                }
            }
        }
        let diseq = self.diseq.clone();
        if diseq.iter().any(|&(x, y)| self.find(x) == self.find(y)) {
            return true;
        }
        let nil = self.node(&Term::nil());
        let truthy = self.truthy.clone();
        truthy.iter().any(|&i| self.find(i) == self.find(nil))
    }

    fn saturate_once(&mut self, fuel: &mut u64) -> bool {
        let mut changed = false;
        let mut sig: HashMap<(String, Vec<usize>), usize> = HashMap::new();
        let n = self.nodes.len();
        for i in 0..n {
            let Term::App(f, args) = self.nodes[i].clone() else {
                continue;
            };
            let kids: Vec<usize> = args.iter().map(|a| self.ids[a]).collect();
            let roots: Vec<usize> = kids.iter().map(|&k| self.find(k)).collect();
            match sig.get(&(f.clone(), roots.clone())) {
                Some(&j) => changed |= self.union(i, j),
                None => {
                    sig.insert((f.clone(), roots.clone()), i);
                }
            }
            if f == "if" && kids.len() == 3 {
                if let Some(c) = self.constant_of(kids[0]) {
                    let branch = if c.truthy() { kids[1] } else { kids[2] };
                    changed |= self.union(i, branch);
                }
                continue;
            }
            if f == "==" && kids.len() == 2 {
                let same = roots[0] == roots[1];
                let apart = self.diseq.clone().iter().any(|&(x, y)| {
                    let (rx, ry) = (self.find(x), self.find(y));
                    (rx == roots[0] && ry == roots[1]) || (rx == roots[1] && ry == roots[0])
                });
                if same || apart {
                    let c = self.node(&if same { Term::t() } else { Term::nil() });
                    changed |= self.union(i, c);
                    continue;
                }
            }
            if !(self.can_eval)(&f) {
                continue;
            }
            let vals: Option<Vec<Value>> = kids.iter().map(|&k| self.constant_of(k)).collect();
            if let Some(vals) = vals {
                let ground = Term::App(f.clone(), vals.into_iter().map(Term::Const).collect());
                if let Some(v) = eval_logic(&ground, self.env, fuel) {
                    let c = self.node(&Term::Const(v));
                    changed |= self.union(i, c);
                }
            }
        }
        changed
    }
}

/// Whether the literals, read as `(term, holds)`, are jointly
/// inconsistent by congruence reasoning.
pub fn inconsistent(env: &Env, lits: &[(Term, bool)], can_eval: &dyn Fn(&str) -> bool) -> bool {
    let mut g = Graph {
        env,
        can_eval,
        nodes: Vec::new(),
        ids: HashMap::new(),
        parent: Vec::new(),
        diseq: Vec::new(),
        truthy: Vec::new(),
    };
    g.node(&Term::t());
    g.node(&Term::nil());
    for (t, holds) in lits {
        g.assert_lit(t, *holds);
    }
    let mut fuel = FUEL;
    for _ in 0..ROUNDS {
        if g.conflict() {
            return true;
        }
        if !g.saturate_once(&mut fuel) {
            break;
        }
    }
    g.conflict()
}

/// A small inconsistent subset of `lits`, found by deletion.
pub fn minimize(env: &Env, lits: &[(Term, bool)], can_eval: &dyn Fn(&str) -> bool) -> Vec<(Term, bool)> {
    let mut keep = lits.to_vec();
    let mut i = 0;
    while i < keep.len() {
        let mut trial = keep.clone();
        trial.remove(i);
        if inconsistent(env, &trial, can_eval) {
            keep = trial;
        } else {
            i += 1;
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn lits(items: &[(&str, bool)]) -> Vec<(Term, bool)> {
        items.iter().map(|(s, b)| (parse_term(s).unwrap(), *b)).collect()
    }

    #[test]
    fn congruence_conflict() {
        let env = Env::new();
        let all = |_: &str| true;
        let l = lits(&[("(== a b)", true), ("(== (f a) (f b))", false), ("(consp c)", true)]);
        assert!(inconsistent(&env, &l, &all));
        assert_eq!(minimize(&env, &l, &all).len(), 2);
        assert!(!inconsistent(&env, &l[1..], &all));
    }

    #[test]
    fn evaluation_and_if() {
        let env = Env::new();
        let all = |_: &str| true;
        let l = lits(&[("(== x 2)", true), ("(== (+ x 1) 3)", false)]);
        assert!(inconsistent(&env, &l, &all));
        let l = lits(&[("c", false), ("(== (if c a b) b)", false)]);
        assert!(inconsistent(&env, &l, &all));
    }
}
