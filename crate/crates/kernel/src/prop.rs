//! Propositional certificates: Tseitin encoding plus reverse unit
//! propagation. A certificate lists learned clauses; each one must follow
//! from the clauses before it by unit propagation alone, and the final set
//! must propagate to a conflict.

use std::collections::HashMap;

use crate::term::{KTerm, KVal};

#[derive(Default)]
pub struct Cnf {
    vars: HashMap<KTerm, i32>,
    next: i32,
    truth: i32,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new() -> Cnf {
        let mut c = Cnf { next: 1, ..Cnf::default() };
        c.truth = c.fresh();
        c.clauses.push(vec![c.truth]);
        c
    }

    fn fresh(&mut self) -> i32 {
        let v = self.next;
        self.next += 1;
        v
    }

    /// The literal standing for "`t` is truthy", adding definitions for any
    /// connective subterm seen for the first time.
    pub fn lit(&mut self, t: &KTerm) -> i32 {
        match t {
            KTerm::Const(KVal::Nil) => return -self.truth,
            KTerm::Const(_) => return self.truth,
            _ => {}
        }
        if let Some(&v) = self.vars.get(t) {
            return v;
        }
        let (f, a) = match t {
            KTerm::App(f, a) => (f.as_str(), a.as_slice()),
            _ => ("", &[][..]),
        };
        let lit = match (f, a.len()) {
            ("not", 1) => -self.lit(&a[0]),
            ("^", _) | ("v", _) => {
                let kids: Vec<i32> = a.iter().map(|x| self.lit(x)).collect();
                let v = self.fresh();
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
                let v = self.fresh();
                self.clauses.push(vec![-v, -p, q]);
                self.clauses.push(vec![v, p]);
                self.clauses.push(vec![v, -q]);
                v
            }
            ("<=>", 2) => {
                let (p, q) = (self.lit(&a[0]), self.lit(&a[1]));
                let v = self.fresh();
                self.clauses.push(vec![-v, -p, q]);
                self.clauses.push(vec![-v, p, -q]);
                self.clauses.push(vec![v, p, q]);
                self.clauses.push(vec![v, -p, -q]);
                v
            }
            ("if", 3) => {
                let (c, x, y) = (self.lit(&a[0]), self.lit(&a[1]), self.lit(&a[2]));
                let v = self.fresh();
                self.clauses.push(vec![-v, -c, x]);
                self.clauses.push(vec![-v, c, y]);
                self.clauses.push(vec![v, -c, -x]);
                self.clauses.push(vec![v, c, -y]);
                v
            }
            _ => self.fresh(),
        };
        self.vars.insert(t.clone(), lit);
        lit
    }

    /// Unit propagation from `assumed`; true when it reaches a conflict.
    pub fn propagates_to_conflict(&self, assumed: &[i32]) -> bool {
        let n = self.next as usize + 1;
        let mut val: Vec<i8> = vec![0; n];
        let set = |val: &mut Vec<i8>, l: i32| -> bool {
            let (i, s) = (l.unsigned_abs() as usize, if l > 0 { 1 } else { -1 });
            if val[i] == -s {
                return false;
            }
            val[i] = s;
            true
        };
        for &l in assumed {
            if !set(&mut val, l) {
                return true;
            }
        }
        loop {
            let mut changed = false;
            for c in &self.clauses {
                let mut unassigned = None;
                let mut count = 0;
                let mut sat = false;
                for &l in c {
                    let v = val[l.unsigned_abs() as usize];
                    let s = if l > 0 { 1 } else { -1 };
                    if v == s {
                        sat = true;
                        break;
                    }
                    // A repeated literal counts once.
                    if v == 0 && unassigned != Some(l) {
                        count += 1;
                        unassigned = Some(l);
                    }
                }
                if sat {
                    continue;
                }
                match count {
                    0 => return true,
                    1 => {
                        set(&mut val, unassigned.unwrap());
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return false;
            }
        }
    }
}

/// Checks that `target` follows from `premises` given the learned clauses.
pub fn check(premises: &[KTerm], target: &KTerm, learned: &[Vec<KTerm>]) -> Result<(), String> {
    let mut cnf = Cnf::new();
    for p in premises {
        let l = cnf.lit(p);
        cnf.clauses.push(vec![l]);
    }
    let l = cnf.lit(target);
    cnf.clauses.push(vec![-l]);
    for (k, clause) in learned.iter().enumerate() {
        let lits: Vec<i32> = clause.iter().map(|t| cnf.lit(t)).collect();
        let negated: Vec<i32> = lits.iter().map(|l| -l).collect();
        if !cnf.propagates_to_conflict(&negated) {
            return Err(format!("learned clause {} is not implied by unit propagation", k + 1));
        }
        cnf.clauses.push(lits);
    }
    if cnf.propagates_to_conflict(&[]) {
        Ok(())
    } else {
        Err("clauses do not propagate to a conflict".into())
    }
}
