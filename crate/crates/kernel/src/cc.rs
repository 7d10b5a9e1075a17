//! Congruence closure with ground evaluation, used to check that a clause
//! is a tautology of equality: its negation must close to a conflict.

use std::collections::{BTreeMap, HashMap};

use crate::term::{KTerm, KVal};
use crate::theory::Snapshot;

struct Graph<'a> {
    snap: &'a Snapshot,
    nodes: Vec<KTerm>,
    ids: HashMap<KTerm, usize>,
    parent: Vec<usize>,
    diseq: Vec<(usize, usize)>,
    truthy: Vec<usize>,
}

impl<'a> Graph<'a> {
    fn node(&mut self, t: &KTerm) -> usize {
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

    fn constant_of(&mut self, i: usize) -> Option<KVal> {
        let r = self.find(i);
        for k in 0..self.nodes.len() {
            if let KTerm::Const(v) = self.nodes[k].clone() {
                if self.find(k) == r {
                    return Some(v);
                }
            }
        }
        None
    }

    fn assert_lit(&mut self, t: &KTerm, pos: bool) {
        match t {
            KTerm::App(f, a) if f == "not" && a.len() == 1 => self.assert_lit(&a[0], !pos),
            KTerm::App(f, a) if f == "==" && a.len() == 2 => {
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
                    if self.snap.is_bool_valued(t) {
                        let tt = self.node(&KTerm::t());
                        self.union(i, tt);
                    }
                } else {
                    let nil = self.node(&KTerm::nil());
                    self.union(i, nil);
                }
            }
        }
    }

    fn conflict(&mut self) -> bool {
        let mut seen: BTreeMap<usize, KVal> = BTreeMap::new();
        for k in 0..self.nodes.len() {
            if let KTerm::Const(v) = self.nodes[k].clone() {
                let r = self.find(k);
                if let Some(w) = seen.get(&r) {
                    if *w != v {
                        return true;
                    }
                } else {
                    seen.insert(r, v);
                }
            }
        }
        let diseq = self.diseq.clone();
        if diseq.iter().any(|&(x, y)| self.find(x) == self.find(y)) {
            return true;
        }
        let nil = self.node(&KTerm::nil());
        let truthy = self.truthy.clone();
        truthy.iter().any(|&i| self.find(i) == self.find(nil))
    }

    /// One round of congruence, evaluation and equality-atom propagation.
    fn saturate_once(&mut self, fuel: &mut u64) -> bool {
        let mut changed = false;
        let mut sig: HashMap<(String, Vec<usize>), usize> = HashMap::new();
        let n = self.nodes.len();
        for i in 0..n {
            let KTerm::App(f, args) = self.nodes[i].clone() else { continue };
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
                    let c = self.node(&if same { KTerm::t() } else { KTerm::nil() });
                    changed |= self.union(i, c);
                    continue;
                }
            }
            let vals: Option<Vec<KVal>> = kids.iter().map(|&k| self.constant_of(k)).collect();
            if let Some(vals) = vals {
                let ground = KTerm::App(f.clone(), vals.into_iter().map(KTerm::Const).collect());
                if let Some(v) = self.snap.eval(&ground, fuel) {
                    let c = self.node(&KTerm::Const(v));
                    changed |= self.union(i, c);
                }
            }
        }
        changed
    }
}

/// True when the disjunction of `clause` holds by congruence reasoning.
pub fn clause_valid(snap: &Snapshot, clause: &[KTerm]) -> bool {
    let mut g = Graph {
        snap,
        nodes: Vec::new(),
        ids: HashMap::new(),
        parent: Vec::new(),
        diseq: Vec::new(),
        truthy: Vec::new(),
    };
    g.node(&KTerm::t());
    g.node(&KTerm::nil());
    for lit in clause {
        g.assert_lit(lit, false);
    }
    let mut fuel = 200_000u64;
    for _ in 0..64 {
        if g.conflict() {
            return true;
        }
        if !g.saturate_once(&mut fuel) {
            break;
        }
    }
    g.conflict()
}
