//! Polynomial bivector fields `P = Σ P^{ij} ∂_i ∧ ∂_j` and their Jacobiators.

use num::Zero;
use rayon::prelude::*;

use crate::poly::Poly;
use crate::rational::{max_abs, RatMatrix, Rational};

/// Dense `dim × dim` table of Laurent polynomial entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bivector {
    dim: usize,
    entries: Vec<Poly>,
}

/// Value and first derivatives of a bivector at one point.
pub struct Jet2 {
    pub value: RatMatrix,
    /// For each entry `(j,k)` the nonzero `(s, ∂_s P^{jk})`.
    pub grads: Vec<Vec<(usize, Rational)>>,
}

impl Bivector {
    pub fn new(dim: usize, entries: Vec<Poly>) -> Self {
        assert_eq!(entries.len(), dim * dim, "bivector entry count");
        Bivector { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Bivector { dim, entries: vec![Poly::zero(); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.entries[i * self.dim + j] = p;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly + Sync + Send) -> Self {
        Bivector { dim: self.dim, entries: self.entries.par_iter().map(f).collect() }
    }

    pub fn add_scaled(&self, o: &Self, t: &Rational) -> Self {
        assert_eq!(self.dim, o.dim, "bivector dimension");
        Bivector { dim: self.dim, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.clone() + b.scale(t)).collect() }
    }

    /// Largest `|P^{ij} + P^{ji}|` coefficient, zero iff the table is skew as polynomials.
    pub fn skew_defect(&self) -> Rational {
        let mut worst = Rational::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let s = self.get(i, j).clone() + self.get(j, i).clone();
                let m = max_abs(s.terms().map(|(_, c)| c));
                if m > worst {
                    worst = m;
                }
            }
        }
        worst
    }

    /// Evaluate at a point; `None` if an entry has a pole there.
    pub fn eval(&self, x: &[Rational]) -> Option<RatMatrix> {
        let vals: Option<Vec<Rational>> = self.entries.par_iter().map(|p| p.eval(x)).collect();
        let vals = vals?;
        Some(RatMatrix::from_fn(self.dim, self.dim, |i, j| vals[i * self.dim + j].clone()))
    }

    pub fn jet(&self, x: &[Rational]) -> Option<Jet2> {
        let value = self.eval(x)?;
        let grads: Option<Vec<Vec<(usize, Rational)>>> = self
            .entries
            .par_iter()
            .map(|p| {
                let mut g = Vec::new();
                for s in p.variables() {
                    let d = p.derivative(s).eval(x)?;
                    if !d.is_zero() {
                        g.push((s, d));
                    }
                }
                Some(g)
            })
            .collect();
        Some(Jet2 { value, grads: grads? })
    }

    /// `max_{ijk} |Σ_s P^{is}∂_sP^{jk} + c.p.|` at `x`.
    pub fn jacobiator(&self, x: &[Rational]) -> Option<Rational> {
        let j = self.jet(x)?;
        let n = self.dim;
        // a[i][j][k] = Σ_s P^{is} ∂_s P^{jk}
        let a: Vec<Vec<Rational>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n * n)
                    .map(|jk| {
                        j.grads[jk]
                            .iter()
                            .filter(|(s, _)| !j.value[(i, *s)].is_zero())
                            .fold(Rational::zero(), |acc, (s, d)| acc + &j.value[(i, *s)] * d)
                    })
                    .collect()
            })
            .collect();
        let worst = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut w = Rational::zero();
                for jj in 0..n {
                    for k in 0..n {
                        let t = &a[i][jj * n + k] + &a[jj][k * n + i] + &a[k][i * n + jj];
                        let t = num::Signed::abs(&t);
                        if t > w {
                            w = t;
                        }
                    }
                }
                w
            })
            .reduce(Rational::zero, |p, q| if q > p { q } else { p });
        Some(worst)
    }

    /// `{f,{g,h}} + c.p.` for the linear functions with coefficient vectors `c, d, e`.
    pub fn jacobi_linear(&self, x: &[Rational], c: &[Rational], d: &[Rational], e: &[Rational]) -> Option<Rational> {
        let value = self.eval(x)?;
        let term = |f: &[Rational], g: &[Rational], h: &[Rational]| -> Option<Rational> {
            // {g,h} as a polynomial, then its gradient at x.
            let mut q = Poly::zero();
            for i in 0..self.dim {
                if g[i].is_zero() {
                    continue;
                }
                for j in 0..self.dim {
                    if h[j].is_zero() {
                        continue;
                    }
                    q = q + self.get(i, j).scale(&(&g[i] * &h[j]));
                }
            }
            let mut grad = vec![Rational::zero(); self.dim];
            for s in q.variables() {
                grad[s] = q.derivative(s).eval(x)?;
            }
            let pg = value.mul_vec(&grad);
            Some(f.iter().zip(&pg).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
        };
        Some(term(c, d, e)? + term(d, e, c)? + term(e, c, d)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn x(i: usize) -> Poly {
        Poly::var(i)
    }

    // so(3)* Lie–Poisson: {x0,x1} = x2 and cyclic.
    fn lie_poisson() -> Bivector {
        let mut b = Bivector::zeros(3);
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            b.set(i, j, x(k));
            b.set(j, i, -x(k));
        }
        b
    }

    #[test]
    fn lie_poisson_satisfies_jacobi() {
        let b = lie_poisson();
        let p = [int(2), int(-3), int(5)];
        assert_eq!(b.jacobiator(&p).unwrap(), Rational::zero());
        assert_eq!(b.skew_defect(), Rational::zero());
        let c = [int(1), int(2), int(0)];
        let d = [int(0), int(1), int(-1)];
        let e = [int(3), int(0), int(1)];
        assert_eq!(b.jacobi_linear(&p, &c, &d, &e).unwrap(), Rational::zero());
    }

    #[test]
    fn perturbed_bracket_fails_jacobi() {
        let mut b = lie_poisson();
        b.set(0, 1, &x(0) * &x(2));
        b.set(1, 0, -(&x(0) * &x(2)));
        let p = [int(2), int(-3), int(5)];
        assert!(b.jacobiator(&p).unwrap() > Rational::zero());
    }
}
