//! Polynomial normal forms and Farkas certificate checking.
//!
//! Every arithmetic atom is read through the fixing view (non-rationals are
//! zero), so a polynomial denotes the same rational as the term it came
//! from. A certificate combines rows `P ~ 0` with `~` one of `<`, `<=`, `=`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::term::{KTerm, KVal};

pub type Mono = Vec<KTerm>;

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

    pub fn atom(t: KTerm) -> Poly {
        let mut m = BTreeMap::new();
        m.insert(vec![t], BigRational::one());
        Poly(m)
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
                let mut m = BTreeMap::new();
                m.insert(k, v1 * v2);
                out = out.add(&Poly(m));
            }
        }
        out
    }

    /// Some(k) when the polynomial is the constant k.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => self.0.get(&Vec::new()).cloned(),
            _ => None,
        }
    }
}

pub fn poly_of(t: &KTerm) -> Poly {
    match t {
        KTerm::Const(KVal::Rat(r)) => Poly::constant(r.clone()),
        KTerm::Const(_) => Poly::default(),
        KTerm::App(f, a) => match (f.as_str(), a.len()) {
            ("+", 2) => poly_of(&a[0]).add(&poly_of(&a[1])),
            ("*", 2) => poly_of(&a[0]).mul(&poly_of(&a[1])),
            ("-", 1) => poly_of(&a[0]).scale(&-BigRational::one()),
            ("/", 2) => match &a[1] {
                KTerm::Const(KVal::Rat(d)) if !d.is_zero() => poly_of(&a[0]).scale(&d.recip()),
                _ => Poly::atom(t.clone()),
            },
            _ => Poly::atom(t.clone()),
        },
        KTerm::Var(_) => Poly::atom(t.clone()),
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

/// The row asserted by a literal holding, if it has arithmetic content.
pub fn row_of_literal(t: &KTerm, holds: bool) -> Option<Row> {
    let (f, a) = match t {
        KTerm::App(f, a) => (f.as_str(), a.as_slice()),
        _ => return None,
    };
    let neg1 = -BigRational::one();
    match (f, a.len(), holds) {
        ("not", 1, _) => row_of_literal(&a[0], !holds),
        ("<", 2, true) => Some(Row { poly: poly_of(&a[0]).add(&poly_of(&a[1]).scale(&neg1)), rel: Rel::Lt }),
        ("<", 2, false) => Some(Row { poly: poly_of(&a[1]).add(&poly_of(&a[0]).scale(&neg1)), rel: Rel::Le }),
        ("==", 2, true) => Some(Row { poly: poly_of(&a[0]).add(&poly_of(&a[1]).scale(&neg1)), rel: Rel::Eq }),
        ("posp", 1, true) => Some(Row { poly: poly_of(&a[0]).scale(&neg1), rel: Rel::Lt }),
        ("natp", 1, true) => Some(Row { poly: poly_of(&a[0]).scale(&neg1), rel: Rel::Le }),
        _ => None,
    }
}

/// One line of a certificate.
#[derive(Debug, Clone)]
pub enum CertRow {
    /// Row of the k-th literal, times a coefficient.
    Lit(usize, BigRational),
    /// Product of two literal rows, times a coefficient.
    Mul(usize, usize, BigRational),
    /// An equality row times a polynomial term, times a coefficient.
    MulMono(usize, KTerm, BigRational),
    /// `-(p*p) <= 0`, times a coefficient.
    Square(KTerm, BigRational),
}

fn product(a: &Row, b: &Row) -> Row {
    // P1 ~ 0 and P2 ~ 0 with both on the nonpositive side: P1*P2 >= 0.
    let p = a.poly.mul(&b.poly);
    match (a.rel, b.rel) {
        (Rel::Eq, _) | (_, Rel::Eq) => Row { poly: p, rel: Rel::Eq },
        (Rel::Lt, Rel::Lt) => Row { poly: p.scale(&-BigRational::one()), rel: Rel::Lt },
        _ => Row { poly: p.scale(&-BigRational::one()), rel: Rel::Le },
    }
}

/// Checks that the rows of `lits` are jointly unsatisfiable via `cert`.
pub fn check(lits: &[Option<Row>], cert: &[CertRow]) -> Result<(), String> {
    let get = |k: usize| -> Result<&Row, String> {
        lits.get(k).and_then(|r| r.as_ref()).ok_or_else(|| format!("literal {k} has no arithmetic row"))
    };
    let mut sum = Poly::default();
    let mut strict = false;
    let mut all_eq = true;
    for row in cert {
        let (r, c) = match row {
            CertRow::Lit(k, c) => (get(*k)?.clone(), c),
            CertRow::Mul(j, k, c) => (product(get(*j)?, get(*k)?), c),
            CertRow::MulMono(k, m, c) => {
                let r = get(*k)?;
                if r.rel != Rel::Eq {
                    return Err("only equality rows may be multiplied by a term".into());
                }
                (Row { poly: r.poly.mul(&poly_of(m)), rel: Rel::Eq }, c)
            }
            CertRow::Square(m, c) => {
                let p = poly_of(m);
                (Row { poly: p.mul(&p).scale(&-BigRational::one()), rel: Rel::Le }, c)
            }
        };
        if r.rel != Rel::Eq && c.is_negative() {
            return Err("negative coefficient on an inequality".into());
        }
        if c.is_zero() {
            continue;
        }
        if r.rel == Rel::Lt {
            strict = true;
        }
        if r.rel != Rel::Eq {
            all_eq = false;
        }
        sum = sum.add(&r.poly.scale(c));
    }
    let k = sum.as_constant().ok_or("combination leaves non-constant terms")?;
    let ok = if all_eq {
        !k.is_zero()
    } else if strict {
        !k.is_negative()
    } else {
        k.is_positive()
    };
    if ok {
        Ok(())
    } else {
        Err(format!("combination yields {k}, which is not contradictory"))
    }
}
