//! Sparse Laurent polynomials in numbered variables, and the small ring trait shared with
//! rationals and jets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{fmt_rat, to_f64, Rational};

/// Commutative ring operations needed to assemble brackets generically.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn ring_zero() -> Self;
    fn from_rat(r: &Rational) -> Self;
    fn is_ring_zero(&self) -> bool;
    fn scale_by(&self, c: &Rational) -> Self {
        self.clone() * Self::from_rat(c)
    }
}

impl Ring for Rational {
    fn ring_zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn from_rat(r: &Rational) -> Self {
        r.clone()
    }
    fn is_ring_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Sorted `(variable, exponent)` pairs with nonzero exponents.
pub type Monomial = Vec<(u32, i32)>;

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            let e = a[i].1 + b[j].1;
            if e != 0 {
                out.push((a[i].0, e));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn var(v: usize) -> Self {
        Self::var_pow(v, 1)
    }

    pub fn var_pow(v: usize, e: i32) -> Self {
        let mono = if e == 0 { Vec::new() } else { vec![(v as u32, e)] };
        let mut p = Poly::zero();
        p.add_term(mono, Rational::one());
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        use std::collections::btree_map::Entry;
        if Zero::is_zero(&c) {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if Zero::is_zero(e.get()) {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if Zero::is_zero(c) {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn derivative(&self, v: usize) -> Self {
        let v = v as u32;
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some(pos) = m.iter().position(|&(x, _)| x == v) {
                let e = m[pos].1;
                let mut nm = m.clone();
                if e == 1 {
                    nm.remove(pos);
                } else {
                    nm[pos].1 = e - 1;
                }
                out.add_term(nm, c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.iter().map(|&(v, _)| v as usize)).collect()
    }

    /// Largest total degree counted over the variables selected by `pred`.
    pub fn degree_in(&self, pred: impl Fn(usize) -> bool) -> i32 {
        self.terms.keys().map(|m| m.iter().filter(|(v, _)| pred(*v as usize)).map(|&(_, e)| e).sum()).max().unwrap_or(0)
    }

    /// Exact value; `None` if a negative power meets a zero coordinate.
    pub fn eval(&self, x: &[Rational]) -> Option<Rational> {
        let mut total = <Rational as Zero>::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m {
                let xv = &x[v as usize];
                if e < 0 && Zero::is_zero(xv) {
                    return None;
                }
                t *= num::pow::Pow::pow(xv, e);
            }
            total += t;
        }
        Some(total)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| m.iter().fold(to_f64(c), |acc, &(v, e)| acc * x[v as usize].powi(e))).sum()
    }

    /// `Σ_{v in vars} ∂_v`.
    pub fn directional(&self, vars: &[usize]) -> Self {
        vars.iter().fold(Poly::zero(), |acc, &v| acc + self.derivative(v))
    }

    /// Substitutes `x_v → x_v + c` for every `v` in `vars`; `None` if one of them carries a negative power.
    pub fn translate(&self, vars: &[usize], c: &Rational) -> Option<Self> {
        let mut out = Poly::zero();
        for (m, coef) in &self.terms {
            let mut term = Poly::constant(coef.clone());
            for &(v, e) in m {
                if vars.contains(&(v as usize)) {
                    if e < 0 {
                        return None;
                    }
                    let lin = Poly::var(v as usize) + Poly::constant(c.clone());
                    for _ in 0..e {
                        term = &term * &lin;
                    }
                } else {
                    term = &term * &Poly::var_pow(v as usize, e);
                }
            }
            out = out + term;
        }
        Some(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mono: Vec<String> =
                    m.iter().map(|&(v, e)| if e == 1 { format!("x{v}") } else { format!("x{v}^{e}") }).collect();
                if mono.is_empty() {
                    fmt_rat(c)
                } else {
                    format!("{}*{}", fmt_rat(c), mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Wire form of one term: the monomial as `[[var, exp], ...]` plus a `p/q` coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc(pub Vec<(u32, i32)>, #[serde(with = "crate::rational::serde_rat")] pub Rational);

impl Poly {
    pub fn to_doc(&self) -> Vec<TermDoc> {
        self.terms.iter().map(|(m, c)| TermDoc(m.clone(), c.clone())).collect()
    }

    pub fn from_doc(doc: &[TermDoc]) -> Self {
        let mut p = Poly::zero();
        for TermDoc(m, c) in doc {
            let mut m = m.clone();
            m.sort_unstable();
            p.add_term(m, c.clone());
        }
        p
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, o: Poly) -> Poly {
        for (m, c) in o.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, o: Poly) -> Poly {
        for (m, c) in o.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                *acc.entry(mono_mul(a, b)).or_insert_with(<Rational as Zero>::zero) += x * y;
            }
        }
        acc.retain(|_, v| !Zero::is_zero(v));
        Poly { terms: acc }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.into_iter().map(|(k, v)| (k, -v)).collect() }
    }
}

impl Ring for Poly {
    fn ring_zero() -> Self {
        Poly::zero()
    }
    fn from_rat(r: &Rational) -> Self {
        Poly::constant(r.clone())
    }
    fn is_ring_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn scale_by(&self, c: &Rational) -> Self {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn laurent_arithmetic() {
        let x = Poly::var(0);
        let xi = Poly::var_pow(0, -1);
        assert_eq!(&x * &xi, Poly::one());
        let p = (x.clone() + Poly::one()) * (x.clone() - Poly::one());
        assert_eq!(p, &x * &x - Poly::one());
        assert_eq!(p.derivative(0), x.scale(&int(2)));
        assert_eq!(xi.derivative(0), Poly::var_pow(0, -2).scale(&int(-1)));
        assert_eq!(xi.eval(&[int(0)]), None);
        assert_eq!(xi.eval(&[rat(2, 3)]), Some(rat(3, 2)));
    }

    #[test]
    fn degree_counts_selected_variables() {
        let p = &(&Poly::var(0) * &Poly::var(0)) * &Poly::var(1) + Poly::var(2);
        assert_eq!(p.degree_in(|v| v == 0), 2);
        assert_eq!(p.degree_in(|v| v == 1), 1);
        assert_eq!(p.degree_in(|v| v == 3), 0);
    }

    #[test]
    fn translation_agrees_with_evaluation() {
        let p = &(&Poly::var(0) * &Poly::var(0)) * &Poly::var_pow(1, -1) + Poly::var(0).scale(&int(3));
        let t = p.translate(&[0], &rat(1, 2)).unwrap();
        let x = [rat(2, 3), int(-4)];
        let shifted = [rat(7, 6), int(-4)];
        assert_eq!(t.eval(&x), p.eval(&shifted));
        assert_eq!(p.translate(&[1], &int(1)), None);
    }

    fn poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec((0usize..3, -2i32..=2, -3i64..=3), 0..5)
            .prop_map(|t| t.into_iter().fold(Poly::zero(), |acc, (v, e, c)| acc + Poly::var_pow(v, e).scale(&int(c))))
    }

    fn point() -> impl Strategy<Value = Vec<Rational>> {
        proptest::collection::vec(prop_oneof![(-5i64..=-1, 1i64..=3), (1i64..=5, 1i64..=3)].prop_map(|(p, q)| rat(p, q)), 3)
    }

    proptest! {
        #[test]
        fn evaluation_is_a_ring_map(p in poly(), q in poly(), x in point()) {
            let pv = p.eval(&x).unwrap();
            let qv = q.eval(&x).unwrap();
            prop_assert_eq!((&p * &q).eval(&x).unwrap(), &pv * &qv);
            prop_assert_eq!((p.clone() + q.clone()).eval(&x).unwrap(), &pv + &qv);
        }

        #[test]
        fn leibniz_rule(p in poly(), q in poly(), v in 0usize..3) {
            let lhs = (&p * &q).derivative(v);
            let rhs = &p.derivative(v) * &q + &p * &q.derivative(v);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
