//! First-order forward-mode jets: a value with its exact sparse gradient.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{One, Zero};

use crate::poly::Ring;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    pub value: Rational,
    /// Sorted by variable index, no zero entries.
    pub grad: Vec<(usize, Rational)>,
}

fn merge(a: &[(usize, Rational)], sa: &Rational, b: &[(usize, Rational)], sb: &Rational) -> Vec<(usize, Rational)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (v, c) = if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            i += 1;
            (a[i - 1].0, &a[i - 1].1 * sa)
        } else if i == a.len() || b[j].0 < a[i].0 {
            j += 1;
            (b[j - 1].0, &b[j - 1].1 * sb)
        } else {
            i += 1;
            j += 1;
            (a[i - 1].0, &a[i - 1].1 * sa + &b[j - 1].1 * sb)
        };
        if !c.is_zero() {
            out.push((v, c));
        }
    }
    out
}

impl Jet {
    pub fn constant(value: Rational) -> Self {
        Jet { value, grad: Vec::new() }
    }

    pub fn variable(index: usize, value: Rational) -> Self {
        Jet { value, grad: vec![(index, Rational::one())] }
    }

    /// Dense gradient of length `dim`.
    pub fn dense_grad(&self, dim: usize) -> Vec<Rational> {
        let mut g = vec![Rational::zero(); dim];
        for (i, c) in &self.grad {
            g[*i] = c.clone();
        }
        g
    }

    pub fn recip(&self) -> Option<Jet> {
        if self.value.is_zero() {
            return None;
        }
        let inv = self.value.recip();
        let s = -(&inv * &inv);
        Some(Jet { grad: self.grad.iter().map(|(i, c)| (*i, c * &s)).collect(), value: inv })
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let one = Rational::one();
        Jet { grad: merge(&self.grad, &one, &o.grad, &one), value: self.value + o.value }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { grad: merge(&self.grad, &Rational::one(), &o.grad, &-Rational::one()), value: self.value - o.value }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet { grad: merge(&self.grad, &o.value, &o.grad, &self.value), value: self.value * o.value }
    }
}

impl Div for Jet {
    type Output = Jet;
    /// Panics on a zero denominator; callers check nondegeneracy first.
    fn div(self, o: Jet) -> Jet {
        self * o.recip().expect("jet division by zero")
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { grad: self.grad.into_iter().map(|(i, c)| (i, -c)).collect(), value: -self.value }
    }
}

impl Ring for Jet {
    fn ring_zero() -> Self {
        Jet::constant(Rational::zero())
    }
    fn from_rat(r: &Rational) -> Self {
        Jet::constant(r.clone())
    }
    fn is_ring_zero(&self) -> bool {
        self.value.is_zero() && self.grad.is_empty()
    }
    fn scale_by(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Jet::constant(Rational::zero());
        }
        Jet { value: &self.value * c, grad: self.grad.iter().map(|(i, g)| (*i, g * c)).collect() }
    }
}

/// Determinant of a small square matrix over any ring, by cofactor expansion.
pub fn det<R: Ring>(m: &[Vec<R>]) -> R {
    let n = m.len();
    match n {
        0 => R::from_rat(&Rational::one()),
        1 => m[0][0].clone(),
        2 => m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone(),
        _ => {
            let mut acc = R::ring_zero();
            for j in 0..n {
                if m[0][j].is_ring_zero() {
                    continue;
                }
                let minor: Vec<Vec<R>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let t = m[0][j].clone() * det(&minor);
                acc = if j % 2 == 0 { acc + t } else { acc - t };
            }
            acc
        }
    }
}
