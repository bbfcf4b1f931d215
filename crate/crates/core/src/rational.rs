//! Exact rationals and dense matrices over them.

use std::fmt;
use std::ops::{Index, IndexMut};

use num::bigint::BigInt;
use num::integer::Integer;
use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn fmt_rat(r: &Rational) -> String {
    r.to_string()
}

pub fn parse_rat(s: &str) -> Result<Rational> {
    let t = s.trim();
    let parsed = match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
            let q: BigInt = q.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
            if q.is_zero() {
                return Err(Error::Parse(s.to_string()));
            }
            Rational::new(p, q)
        }
        None => Rational::from_integer(t.parse().map_err(|_| Error::Parse(s.to_string()))?),
    };
    Ok(parsed)
}

pub fn max_abs<'a>(it: impl IntoIterator<Item = &'a Rational>) -> Rational {
    it.into_iter().map(|x| x.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

pub fn to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapters writing rationals as strings.
pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rat_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        r.as_ref().map(fmt_rat).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| parse_rat(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

pub mod serde_rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(fmt_rat).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter().map(|s| parse_rat(s).map_err(serde::de::Error::custom)).collect()
    }
}

pub mod serde_rat_rows {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(fmt_rat).collect()).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
        let strs = Vec::<Vec<String>>::deserialize(d)?;
        strs.iter().map(|r| r.iter().map(|s| parse_rat(s).map_err(serde::de::Error::custom)).collect()).collect()
    }
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| fmt_rat(&self[(i, j)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for RatMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_rat_rows::serialize(&self.to_rows(), s)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = serde_rat_rows::deserialize(d)?;
        RatMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        Self::from_rows(v).expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> Rational {
        max_abs(&self.data)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix add shape");
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix sub shape");
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix mul shape");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.rows, v.len(), "vector-matrix shape");
        (0..self.cols)
            .map(|j| (0..self.rows).filter(|&i| !v[i].is_zero()).fold(Rational::zero(), |acc, i| acc + &v[i] * &self[(i, j)]))
            .collect()
    }

    /// Kronecker product, `(A ⊗ B)[(i,k),(j,l)] = A[i,j] B[k,l]`.
    pub fn kron(&self, o: &Self) -> Self {
        Self::from_fn(self.rows * o.rows, self.cols * o.cols, |r, c| {
            let (i, k) = (r / o.rows, r % o.rows);
            let (j, l) = (c / o.cols, c % o.cols);
            &self[(i, j)] * &o[(k, l)]
        })
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Determinant by fraction-free elimination.
    pub fn det(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("det of {}x{} matrix", self.rows, self.cols)));
        }
        let (mut a, scale) = integer_rows(self);
        let n = self.rows;
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != k {
                a.swap(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                    a[i][j] = exact_div(v, &prev);
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        let num = if n == 0 { BigInt::one() } else { sign * &a[n - 1][n - 1] };
        Ok(Rational::new(num, scale))
    }

    pub fn rank(&self) -> usize {
        Echelon::new(self).pivots.len()
    }

    /// Basis of `{x : A x = 0}`, one column per free variable.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        Echelon::new(self).nullspace()
    }

    /// General solution of `A x = b`.
    pub fn solve(&self, b: &[Rational]) -> Result<Solution> {
        if b.len() != self.rows {
            return Err(Error::Dimension(format!("rhs of length {} for {} rows", b.len(), self.rows)));
        }
        let aug = Self::from_fn(self.rows, self.cols + 1, |i, j| if j < self.cols { self[(i, j)].clone() } else { b[i].clone() });
        let ech = Echelon::new(&aug);
        if ech.pivots.last() == Some(&self.cols) {
            return Err(Error::Inconsistent);
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (r, &c) in ech.pivots.iter().enumerate() {
            x[c] = ech.rref[(r, self.cols)].clone();
        }
        let null = Echelon::from_parts(
            ech.rref.submatrix(&(0..ech.pivots.len()).collect::<Vec<_>>(), &(0..self.cols).collect::<Vec<_>>()),
            ech.pivots.clone(),
            self.cols,
        )
        .nullspace();
        Ok(Solution { particular: x, nullspace: null })
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        });
        let ech = Echelon::new(&aug);
        let rank = ech.pivots.iter().filter(|&&c| c < n).count();
        if rank < n {
            return Err(Error::Singular { nullity: n - rank });
        }
        Ok(Self::from_fn(n, n, |i, j| ech.rref[(i, n + j)].clone()))
    }
}

/// Solution set `particular + span(nullspace)`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub particular: Vec<Rational>,
    pub nullspace: Vec<Vec<Rational>>,
}

impl Solution {
    /// The representative orthogonal to the homogeneous space.
    pub fn min_norm(&self) -> Vec<Rational> {
        let k = self.nullspace.len();
        if k == 0 {
            return self.particular.clone();
        }
        let dot = |a: &[Rational], b: &[Rational]| -> Rational { a.iter().zip(b).fold(Rational::zero(), |s, (x, y)| s + x * y) };
        let gram = RatMatrix::from_fn(k, k, |i, j| dot(&self.nullspace[i], &self.nullspace[j]));
        let rhs: Vec<Rational> = self.nullspace.iter().map(|v| dot(v, &self.particular)).collect();
        let c = gram.solve(&rhs).expect("Gram matrix of a basis is nonsingular").particular;
        let mut x = self.particular.clone();
        for (ci, v) in c.iter().zip(&self.nullspace) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi -= ci * vi;
            }
        }
        x
    }
}

fn exact_div(v: BigInt, d: &BigInt) -> BigInt {
    let (q, r) = v.div_rem(d);
    debug_assert!(r.is_zero(), "fraction-free step left a remainder");
    q
}

/// Clears denominators row by row. Returns the integer rows and the product of the row scales.
fn integer_rows(m: &RatMatrix) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut total = BigInt::one();
    let rows = (0..m.rows)
        .map(|i| {
            let l = m.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            total *= &l;
            m.row(i).iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    (rows, total)
}

/// Reduced row echelon form computed through a fraction-free (Bareiss) forward pass.
struct Echelon {
    rref: RatMatrix,
    pivots: Vec<usize>,
    cols: usize,
}

impl Echelon {
    fn new(m: &RatMatrix) -> Self {
        let (mut a, _) = integer_rows(m);
        let (rows, cols) = (m.rows, m.cols);
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(p, r);
            for i in r + 1..rows {
                for j in c + 1..cols {
                    let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                    a[i][j] = exact_div(v, &prev);
                }
                a[i][c] = BigInt::zero();
            }
            prev = a[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        // Back substitution over the rationals on the (already triangular) integer rows.
        let mut rref = RatMatrix::from_fn(pivots.len(), cols, |i, j| Rational::from_integer(a[i][j].clone()));
        for (i, &c) in pivots.iter().enumerate().rev() {
            let p = rref[(i, c)].clone();
            for j in 0..cols {
                let v = &rref[(i, j)] / &p;
                rref[(i, j)] = v;
            }
            for k in 0..i {
                let f = rref[(k, c)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..cols {
                    let v = &rref[(i, j)] * &f;
                    rref[(k, j)] -= v;
                }
            }
        }
        Echelon { rref, pivots, cols }
    }

    fn from_parts(rref: RatMatrix, pivots: Vec<usize>, cols: usize) -> Self {
        Echelon { rref, pivots, cols }
    }

    fn nullspace(&self) -> Vec<Vec<Rational>> {
        let free: Vec<usize> = (0..self.cols).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (r, &c) in self.pivots.iter().enumerate() {
                    v[c] = -self.rref[(r, f)].clone();
                }
                v
            })
            .collect()
    }
}
