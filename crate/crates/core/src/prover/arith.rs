//! Rational arithmetic by Fourier-Motzkin elimination with provenance.
//!
//! Literals are read as rows `P ~ 0` exactly as the kernel reads them.
//! Elimination keeps, for every derived row, the combination of base rows
//! it came from, so a contradiction turns directly into a certificate.
//! Products and squares are added as extra base rows when the linear
//! attempt fails on nonlinear input.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::term::{Term, Value};
use crate::trace::Cert;

pub type Mono = Vec<Term>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly(pub BTreeMap<Mono, BigRational>);

impl Poly {
    pub fn constant(c: BigRational) -> Poly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Vec::new(), c);
        }
        Poly(m)
    }

    pub fn atom(t: Term) -> Poly {
        Poly(BTreeMap::from([(vec![t], BigRational::one())]))
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut m = self.0.clone();
        for (k, v) in &o.0 {
            let e = m.entry(k.clone()).or_insert_with(BigRational::zero);
            *e += v;
            if e.is_zero() {
                m.remove(k);
            }
        }
        Poly(m)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::default();
        }
        Poly(self.0.iter().map(|(k, v)| (k.clone(), v * c)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::default();
        for (k1, v1) in &self.0 {
            for (k2, v2) in &o.0 {
                let mut k = k1.clone();
                k.extend(k2.iter().cloned());
                k.sort();
                out = out.add(&Poly(BTreeMap::from([(k, v1 * v2)])));
            }
        }
        out
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => self.0.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    fn coeff(&self, m: &Mono) -> BigRational {
        self.0.get(m).cloned().unwrap_or_else(BigRational::zero)
    }
}

pub fn poly_of(t: &Term) -> Poly {
    match t {
        Term::Const(Value::Rat(r)) => Poly::constant(r.clone()),
        Term::Const(_) => Poly::default(),
        Term::App(f, a) => match (f.as_str(), a.len()) {
            ("+", 2) => poly_of(&a[0]).add(&poly_of(&a[1])),
            ("*", 2) => poly_of(&a[0]).mul(&poly_of(&a[1])),
            ("-", 1) => poly_of(&a[0]).scale(&-BigRational::one()),
            ("/", 2) => match &a[1] {
                Term::Const(Value::Rat(d)) if !d.is_zero() => poly_of(&a[0]).scale(&d.recip()),
                _ => Poly::atom(t.clone()),
            },
            _ => Poly::atom(t.clone()),
        },
        Term::Var(_) => Poly::atom(t.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Le,
    Lt,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub poly: Poly,
    pub rel: Rel,
}

/// The row asserted by `t` holding (or failing), if it has arithmetic
/// content.
pub fn row_of_literal(t: &Term, holds: bool) -> Option<Row> {
    let Term::App(f, a) = t else { return None };
    let neg1 = -BigRational::one();
    let diff = |x: &Term, y: &Term| poly_of(x).add(&poly_of(y).scale(&neg1));
    match (f.as_str(), a.len(), holds) {
        ("not", 1, _) => row_of_literal(&a[0], !holds),
        ("<", 2, true) => Some(Row { poly: diff(&a[0], &a[1]), rel: Rel::Lt }),
        ("<", 2, false) => Some(Row { poly: diff(&a[1], &a[0]), rel: Rel::Le }),
        ("==", 2, true) => Some(Row { poly: diff(&a[0], &a[1]), rel: Rel::Eq }),
        ("posp", 1, true) => Some(Row { poly: poly_of(&a[0]).scale(&neg1), rel: Rel::Lt }),
        ("natp", 1, true) => Some(Row { poly: poly_of(&a[0]).scale(&neg1), rel: Rel::Le }),
        _ => None,
    }
}

fn product(a: &Row, b: &Row) -> Row {
    let p = a.poly.mul(&b.poly);
    match (a.rel, b.rel) {
        (Rel::Eq, _) | (_, Rel::Eq) => Row { poly: p, rel: Rel::Eq },
        (Rel::Lt, Rel::Lt) => Row { poly: p.scale(&-BigRational::one()), rel: Rel::Lt },
        _ => Row { poly: p.scale(&-BigRational::one()), rel: Rel::Le },
    }
}

/// A base row of the search: its certificate line (with coefficient one)
/// and its content.
#[derive(Debug, Clone)]
struct Base {
    cert: Cert,
    row: Row,
}

#[derive(Debug, Clone)]
struct Derived {
    poly: Poly,
    rel: Rel,
    from: BTreeMap<usize, BigRational>,
}

fn combine(a: &Derived, ca: &BigRational, b: &Derived, cb: &BigRational) -> Derived {
    let mut from = a.from.iter().map(|(k, v)| (*k, v * ca)).collect::<BTreeMap<_, _>>();
    for (k, v) in &b.from {
        let e = from.entry(*k).or_insert_with(BigRational::zero);
        *e += v * cb;
        if e.is_zero() {
            from.remove(k);
        }
    }
    Derived { poly: a.poly.scale(ca).add(&b.poly.scale(cb)), rel: a.rel.max(b.rel), from }
}

fn contradictory(d: &Derived) -> bool {
    match d.poly.as_constant() {
        Some(k) => match d.rel {
            Rel::Eq => !k.is_zero(),
            Rel::Le => k.is_positive(),
            Rel::Lt => !k.is_negative(),
        },
        None => false,
    }
}

const MAX_ROWS: usize = 4000;

/// Fourier-Motzkin refutation of the base rows; the combination found.
fn refute_rows(bases: &[Base]) -> Option<BTreeMap<usize, BigRational>> {
    let mut rows: Vec<Derived> = bases
        .iter()
        .enumerate()
        .map(|(i, b)| Derived {
            poly: b.row.poly.clone(),
            rel: b.row.rel,
            from: BTreeMap::from([(i, BigRational::one())]),
        })
        .collect();
    loop {
        if let Some(d) = rows.iter().find(|d| contradictory(d)) {
            return Some(d.from.clone());
        }
        // Equalities first: substitute them away.
        if let Some(ei) = rows.iter().position(|d| d.rel == Rel::Eq && d.poly.as_constant().is_none()) {
            let e = rows.remove(ei);
            let var = e.poly.0.keys().find(|m| !m.is_empty()).cloned().expect("non-constant row");
            let ce = e.poly.coeff(&var);
            rows = rows
                .into_iter()
                .map(|r| {
                    let c = r.poly.coeff(&var);
                    if c.is_zero() {
                        r
                    } else {
                        combine(&r, &BigRational::one(), &e, &(-c / &ce))
                    }
                })
                .collect();
            continue;
        }
        let mut vars: BTreeMap<Mono, (usize, usize)> = BTreeMap::new();
        for r in &rows {
            for (m, c) in &r.poly.0 {
                if m.is_empty() {
                    continue;
                }
                let e = vars.entry(m.clone()).or_insert((0, 0));
                if c.is_positive() {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let (var, _) = vars.iter().min_by_key(|(_, (p, n))| p * n)?;
        let var = var.clone();
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            let c = r.poly.coeff(&var);
            if c.is_positive() {
                pos.push(r);
            } else if c.is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        for p in &pos {
            for n in &neg {
                let (cp, cn) = (p.poly.coeff(&var), -n.poly.coeff(&var));
                rest.push(combine(p, &cn, n, &cp));
                if rest.len() > MAX_ROWS {
                    return None;
                }
            }
        }
        rows = rest;
    }
}

/// Certificate refuting the literals `(term, holds)`, indexed by position
/// in `lits`. Literals without arithmetic content are ignored.
pub fn refute(lits: &[(Term, bool)], max_vars: usize) -> Option<Vec<Cert>> {
    let mut bases: Vec<Base> = Vec::new();
    for (k, (t, holds)) in lits.iter().enumerate() {
        if let Some(row) = row_of_literal(t, *holds) {
            bases.push(Base { cert: Cert::Lit(k, BigRational::one()), row });
        }
    }
    let monos: std::collections::BTreeSet<Mono> =
        bases.iter().flat_map(|b| b.row.poly.0.keys().filter(|m| !m.is_empty()).cloned()).collect();
    if bases.is_empty() || monos.len() > max_vars {
        return None;
    }
    if let Some(c) = refute_rows(&bases) {
        return Some(certificate(&bases, &c));
    }
    if monos.iter().all(|m| m.len() < 2) {
        return None;
    }
    // Nonlinear input: add squares of atoms, pairwise products of
    // inequalities, and equalities times atoms.
    let atoms: std::collections::BTreeSet<Term> = monos.iter().flatten().cloned().collect();
    let lit_count = bases.len();
    for a in &atoms {
        let p = poly_of(a);
        bases.push(Base {
            cert: Cert::Square(a.clone(), BigRational::one()),
            row: Row { poly: p.mul(&p).scale(&-BigRational::one()), rel: Rel::Le },
        });
    }
    for i in 0..lit_count {
        let Cert::Lit(ki, _) = bases[i].cert else {
            continue;
        };
        if bases[i].row.rel == Rel::Eq {
            for a in &atoms {
                bases.push(Base {
                    cert: Cert::MulMono(ki, a.clone(), BigRational::one()),
                    row: Row { poly: bases[i].row.poly.mul(&poly_of(a)), rel: Rel::Eq },
                });
            }
            continue;
        }
        for j in i..lit_count {
            let Cert::Lit(kj, _) = bases[j].cert else {
                continue;
            };
            if bases[j].row.rel == Rel::Eq {
                continue;
            }
            let row = product(&bases[i].row, &bases[j].row);
            bases.push(Base { cert: Cert::Mul(ki, kj, BigRational::one()), row });
        }
    }
    let monos: std::collections::BTreeSet<Mono> =
        bases.iter().flat_map(|b| b.row.poly.0.keys().filter(|m| !m.is_empty()).cloned()).collect();
    if monos.len() > 2 * max_vars {
        return None;
    }
    refute_rows(&bases).map(|c| certificate(&bases, &c))
}

fn certificate(bases: &[Base], comb: &BTreeMap<usize, BigRational>) -> Vec<Cert> {
    comb.iter()
        .map(|(&i, c)| match &bases[i].cert {
            Cert::Lit(k, _) => Cert::Lit(*k, c.clone()),
            Cert::Mul(j, k, _) => Cert::Mul(*j, *k, c.clone()),
            Cert::MulMono(k, m, _) => Cert::MulMono(*k, m.clone(), c.clone()),
            Cert::Square(m, _) => Cert::Square(m.clone(), c.clone()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn lits(items: &[(&str, bool)]) -> Vec<(Term, bool)> {
        items.iter().map(|(s, b)| (parse_term(s).unwrap(), *b)).collect()
    }

    #[test]
    fn linear_contradiction() {
        let l = lits(&[("(< x y)", true), ("(< y z)", true), ("(< x z)", false)]);
        let cert = refute(&l, 30).expect("refuted");
        assert_eq!(cert.len(), 3);
        assert!(refute(&l[..2], 30).is_none());
    }

    #[test]
    fn equalities_substitute() {
        let l = lits(&[("(== x (+ y 1))", true), ("(< y x)", false)]);
        assert!(refute(&l, 30).is_some());
    }

    #[test]
    fn square_makes_nonlinear_step() {
        // 0 < b*d entails 0 < b*(b + d).
        let l = lits(&[("(< 0 (* b d))", true), ("(< 0 (* b (+ b d)))", false)]);
        let cert = refute(&l, 30).expect("refuted");
        assert!(cert.iter().any(|c| matches!(c, Cert::Square(..))));
    }
}
