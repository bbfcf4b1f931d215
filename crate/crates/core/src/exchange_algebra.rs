//! The quadratic exchange bracket on twisted polygons `V_{m+N} = V_m M`.
//!
//! Coordinates on the space of polygons are the entries of `V_0 … V_{N−1}` followed by
//! the entries of `M`, in the order given by [`v_var`] and [`m_var`]. The bracket is
//!
//! ```text
//! {V_m ⊗ V_n} = (V_m ⊗ V_n) (R + σ_{m−n} Ĉ + φ_{m−n} Id⊗Id)
//! {V_m ⊗ M}   = V_m ⊗ (M² R₋ − R₊ M²)
//! {M ⊗ M}     = (M⊗M) R + R (M⊗M) − M¹ R₊ M² − M² R₋ M¹
//! ```
//!
//! with `Ĉ = C + Id⊗Id/ν` the swap operator and `R_± = R ± Ĉ`.

use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bivector::Bivector;
use crate::error::{Error, Result};
use crate::jet::{det, Jet};
use crate::lattice_ops::{Kernel, OddKernel, PerSeq, SignWindow};
use crate::poly::{Poly, Ring};
use crate::rational::{max_abs, serde_rat_rows, RatMatrix, Rational};
use crate::sample::{random_polygon, random_sl, rational_vec, trial_rng};

/// Coordinate index of `(V_m)_a`.
pub fn v_var(nu: usize, m: usize, a: usize) -> usize {
    m * nu + a
}

/// Coordinate index of `M_{ab}` on a polygon of period `n`.
pub fn m_var(nu: usize, n: usize, a: usize, b: usize) -> usize {
    nu * n + a * nu + b
}

fn row_times<R: Ring>(x: &[R], m: &[Vec<R>]) -> Vec<R> {
    (0..m[0].len()).map(|j| x.iter().zip(m).fold(R::ring_zero(), |acc, (xi, row)| acc + xi.clone() * row[j].clone())).collect()
}

/// `V_i` for any integer `i`, through `V_{i+N} = V_i M`.
fn extend<R: Ring>(v: &[Vec<R>], m: &[Vec<R>], m_inv: &[Vec<R>], i: i64) -> Vec<R> {
    let n = v.len() as i64;
    let (q, r) = (i.div_euclid(n), i.rem_euclid(n) as usize);
    let mut x = v[r].clone();
    let step = if q >= 0 { m } else { m_inv };
    for _ in 0..q.unsigned_abs() {
        x = row_times(&x, step);
    }
    x
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    nu: usize,
    n: usize,
    v: Vec<Vec<Rational>>,
    m: RatMatrix,
    m_inv: RatMatrix,
}

#[derive(Serialize, Deserialize)]
struct PolygonDoc {
    nu: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "V", with = "serde_rat_rows")]
    v: Vec<Vec<Rational>>,
    #[serde(rename = "M")]
    m: RatMatrix,
}

impl Serialize for Polygon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolygonDoc { nu: self.nu, n: self.n, v: self.v.clone(), m: self.m.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PolygonDoc::deserialize(d)?;
        if doc.v.len() != doc.n || doc.m.rows() != doc.nu {
            return Err(serde::de::Error::custom("polygon shape does not match nu and N"));
        }
        Polygon::new(doc.v, doc.m).map_err(serde::de::Error::custom)
    }
}

impl Polygon {
    /// A polygon with monodromy in `SL_ν`.
    pub fn new(v: Vec<Vec<Rational>>, m: RatMatrix) -> Result<Self> {
        let p = Self::twisted(v, m)?;
        let d = p.m.det()?;
        if d != Rational::one() {
            return Err(Error::NotSpecial(crate::rational::fmt_rat(&d)));
        }
        Ok(p)
    }

    /// A polygon with any invertible monodromy. Its Wronskian is only quasi-periodic,
    /// `w_{m+N} = det M · w_m`.
    pub fn twisted(v: Vec<Vec<Rational>>, m: RatMatrix) -> Result<Self> {
        let n = v.len();
        let nu = m.rows();
        if n == 0 || nu < 2 || !m.is_square() || v.iter().any(|x| x.len() != nu) {
            return Err(Error::Dimension(format!("{n} vertices with a {}x{} monodromy", m.rows(), m.cols())));
        }
        let m_inv = m.inverse()?;
        let p = Polygon { nu, n, v, m, m_inv };
        if let Some(site) = p.wronskian().values().iter().position(|w| w.is_zero()) {
            return Err(Error::DegeneratePolygon { site });
        }
        Ok(p)
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn period(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.v
    }

    pub fn monodromy(&self) -> &RatMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.nu * self.n + self.nu * self.nu
    }

    pub fn vertex(&self, i: i64) -> Vec<Rational> {
        extend(&self.v, &self.m.to_rows(), &self.m_inv.to_rows(), i)
    }

    /// Coordinates `(V_0 … V_{N−1}, M)` in [`v_var`]/[`m_var`] order.
    pub fn point(&self) -> Vec<Rational> {
        self.v.iter().flatten().chain(self.m.entries()).cloned().collect()
    }

    /// `det[V_m … V_{m+ν−1}]` for any integer `m`.
    pub fn wronskian_at(&self, m: i64) -> Rational {
        let rows: Vec<Vec<Rational>> = (0..self.nu as i64).map(|r| self.vertex(m + r)).collect();
        RatMatrix::from_rows(rows).and_then(|x| x.det()).expect("square window")
    }

    pub fn wronskian(&self) -> PerSeq {
        PerSeq::from_fn(self.n, |m| self.wronskian_at(m as i64))
    }
}

/// A polygon whose coordinates are jet variables, for exact chain-rule derivatives.
#[derive(Clone, Debug)]
pub struct JetPolygon {
    nu: usize,
    n: usize,
    v: Vec<Vec<Jet>>,
    m: Vec<Vec<Jet>>,
    m_inv: Vec<Vec<Jet>>,
}

fn jet_inverse(m: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
    let n = m.len();
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| Jet::constant(if i == j { Rational::one() } else { Rational::zero() })).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].value.is_zero()).expect("invertible monodromy");
        a.swap(col, p);
        inv.swap(col, p);
        let piv = a[col][col].recip().expect("nonzero pivot");
        a[col] = a[col].iter().map(|x| x.clone() * piv.clone()).collect();
        inv[col] = inv[col].iter().map(|x| x.clone() * piv.clone()).collect();
        for r in 0..n {
            if r == col || a[r][col].is_ring_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                a[r][j] = a[r][j].clone() - f.clone() * a[col][j].clone();
                inv[r][j] = inv[r][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    inv
}

impl JetPolygon {
    pub fn new(w: &Polygon) -> Self {
        let (nu, n) = (w.nu, w.n);
        let v: Vec<Vec<Jet>> =
            (0..n).map(|m| (0..nu).map(|a| Jet::variable(v_var(nu, m, a), w.v[m][a].clone())).collect()).collect();
        let m: Vec<Vec<Jet>> =
            (0..nu).map(|a| (0..nu).map(|b| Jet::variable(m_var(nu, n, a, b), w.m[(a, b)].clone())).collect()).collect();
        let m_inv = jet_inverse(&m);
        JetPolygon { nu, n, v, m, m_inv }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn period(&self) -> usize {
        self.n
    }

    pub fn vertex(&self, i: i64) -> Vec<Jet> {
        extend(&self.v, &self.m, &self.m_inv, i)
    }

    pub fn monodromy(&self) -> &[Vec<Jet>] {
        &self.m
    }

    /// Determinant of the rows `V_m … V_{m+len−1}` with the rows at the offsets in `omit` removed.
    pub fn window_det(&self, m: i64, len: usize, omit: &[usize]) -> Jet {
        let rows: Vec<Vec<Jet>> = (0..len).filter(|r| !omit.contains(r)).map(|r| self.vertex(m + r as i64)).collect();
        det(&rows)
    }

    pub fn wronskian(&self, m: i64) -> Jet {
        self.window_det(m, self.nu, &[])
    }
}

/// The data `(R, C, φ)` of the bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketSpec {
    nu: usize,
    r: RatMatrix,
    c: RatMatrix,
    phi: Kernel,
}

#[derive(Serialize, Deserialize)]
struct BracketSpecDoc {
    nu: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "R")]
    r: RatMatrix,
    #[serde(rename = "C")]
    c: RatMatrix,
    phi: Kernel,
}

impl Serialize for BracketSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BracketSpecDoc { nu: self.nu, n: self.period(), r: self.r.clone(), c: self.c.clone(), phi: self.phi.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BracketSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = BracketSpecDoc::deserialize(d)?;
        let built = OddKernel::new(doc.phi).and_then(|phi| BracketSpec::new(doc.r, doc.c, phi));
        match built {
            Ok(s) if s.nu == doc.nu && s.period() == doc.n => Ok(s),
            Ok(_) => Err(serde::de::Error::custom("nu or N does not match R or phi")),
            Err(e) => Err(serde::de::Error::custom(e)),
        }
    }
}

/// `P = Σ E_ij ⊗ E_ji`.
pub fn swap(nu: usize) -> RatMatrix {
    RatMatrix::from_fn(nu * nu, nu * nu, |row, col| {
        let (i, j) = (row / nu, row % nu);
        if col == j * nu + i {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

fn leg_dim(x: &RatMatrix) -> Result<usize> {
    let d = x.rows();
    let nu = (1..=d).find(|k| k * k >= d).unwrap_or(0);
    if !x.is_square() || nu * nu != d || nu < 2 {
        return Err(Error::Dimension(format!("{}x{} is not an operator on a square of legs", x.rows(), x.cols())));
    }
    Ok(nu)
}

/// The standard skew r-matrix and the `sl_ν` Casimir.
pub fn default_rc(nu: usize) -> Result<(RatMatrix, RatMatrix)> {
    if nu < 2 {
        return Err(Error::InvalidArgument(format!("nu = {nu}; need nu >= 2")));
    }
    let mut r = RatMatrix::zeros(nu * nu, nu * nu);
    for i in 0..nu {
        for j in i + 1..nu {
            r[(i * nu + j, j * nu + i)] = Rational::one();
            r[(j * nu + i, i * nu + j)] = -Rational::one();
        }
    }
    let c = swap(nu).sub(&RatMatrix::identity(nu * nu).scale(&Rational::new(1.into(), (nu as i64).into())));
    Ok((r, c))
}

/// Max-abs entry of `[R¹²,R¹³] + [R¹²,R²³] + [R¹³,R²³] + [C¹²,C¹³]`.
pub fn verify_ybe(r: &RatMatrix, c: &RatMatrix) -> Result<Rational> {
    let nu = leg_dim(r)?;
    if leg_dim(c)? != nu {
        return Err(Error::Dimension("R and C act on different legs".into()));
    }
    let id = RatMatrix::identity(nu);
    let p23 = id.kron(&swap(nu));
    let legs = |x: &RatMatrix| {
        let x12 = x.kron(&id);
        let x23 = id.kron(x);
        let x13 = p23.mul(&x12).mul(&p23);
        (x12, x13, x23)
    };
    let (r12, r13, r23) = legs(r);
    let (c12, c13, _) = legs(c);
    let res = r12.commutator(&r13).add(&r12.commutator(&r23)).add(&r13.commutator(&r23)).add(&c12.commutator(&c13));
    Ok(res.max_abs())
}

impl BracketSpec {
    /// Validates skewness of `R`, the Casimir property of `Ĉ`, the Yang–Baxter identity and oddness of `φ`.
    pub fn new(r: RatMatrix, c: RatMatrix, phi: OddKernel) -> Result<Self> {
        let nu = leg_dim(&r)?;
        if leg_dim(&c)? != nu {
            return Err(Error::Dimension("R and C act on different legs".into()));
        }
        let p = swap(nu);
        if !p.mul(&r).mul(&p).add(&r).is_zero() {
            return Err(Error::InvalidArgument("R is not skew under the leg swap".into()));
        }
        let spec = BracketSpec { nu, r, c, phi: phi.into_kernel() };
        let mut rng = trial_rng(0, 0);
        let ch = spec.c_hat();
        for _ in 0..2 {
            let g = random_sl(nu, &mut rng);
            let h = random_sl(nu, &mut rng);
            if g.kron(&h).mul(&ch) != ch.mul(&h.kron(&g)) {
                return Err(Error::InvalidArgument("C does not intertwine g⊗h with h⊗g".into()));
            }
        }
        if !verify_ybe(&spec.r, &spec.c)?.is_zero() {
            return Err(Error::InvalidArgument("R and C fail the modified Yang–Baxter identity".into()));
        }
        Ok(spec)
    }

    /// [`default_rc`] with the given `φ`.
    ///
    /// The default pair is not re-validated here: the identity check costs `O(ν⁹)`.
    pub fn standard(nu: usize, phi: OddKernel) -> Result<Self> {
        let (r, c) = default_rc(nu)?;
        Ok(BracketSpec { nu, r, c, phi: phi.into_kernel() })
    }

    pub fn with_phi(&self, phi: OddKernel) -> Self {
        BracketSpec { phi: phi.into_kernel(), ..self.clone() }
    }

    /// Replaces `φ` without the oddness check, for negative controls.
    pub fn with_raw_phi(&self, phi: Kernel) -> Self {
        BracketSpec { phi, ..self.clone() }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn period(&self) -> usize {
        self.phi.period()
    }

    pub fn r(&self) -> &RatMatrix {
        &self.r
    }

    pub fn c(&self) -> &RatMatrix {
        &self.c
    }

    pub fn phi(&self) -> &Kernel {
        &self.phi
    }

    /// `Ĉ = C + Id⊗Id/ν`; the swap for the standard `C`.
    pub fn c_hat(&self) -> RatMatrix {
        let d = self.nu * self.nu;
        self.c.add(&RatMatrix::identity(d).scale(&Rational::new(1.into(), (self.nu as i64).into())))
    }

    pub fn r_plus(&self) -> RatMatrix {
        self.r.add(&self.c_hat())
    }

    pub fn r_minus(&self) -> RatMatrix {
        self.r.sub(&self.c_hat())
    }

    /// `T(k) = R + σ_k Ĉ + φ_k Id⊗Id` for `|k| < N`.
    pub fn t(&self, k: i64) -> Result<RatMatrix> {
        let n = self.period();
        let s = SignWindow::new(n).get(k).ok_or(Error::OutOfDomain { index: k, n })?;
        let d = self.nu * self.nu;
        Ok(self.r.add(&self.c_hat().scale(&s)).add(&RatMatrix::identity(d).scale(self.phi.at(k))))
    }

    pub fn dim(&self) -> usize {
        self.nu * self.period() + self.nu * self.nu
    }
}

fn nonzeros(m: &RatMatrix) -> Vec<Vec<(usize, Rational)>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect())
        .collect()
}

fn acc<R: Ring>(slot: &mut R, x: R) {
    let cur = std::mem::replace(slot, R::ring_zero());
    *slot = cur + x;
}

pub(crate) type GMat<R> = Vec<Vec<R>>;

fn gmul<R: Ring>(a: &GMat<R>, b: &GMat<R>) -> GMat<R> {
    let n = a.len();
    let mut out = vec![vec![R::ring_zero(); b[0].len()]; n];
    for i in 0..n {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_ring_zero() {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                if !bkj.is_ring_zero() {
                    acc(&mut out[i][j], aik.clone() * bkj.clone());
                }
            }
        }
    }
    out
}

/// `A · K` with `K` a constant matrix given by its row nonzeros.
pub(crate) fn gmul_const<R: Ring>(a: &GMat<R>, k: &[Vec<(usize, Rational)>]) -> GMat<R> {
    let mut out = vec![vec![R::ring_zero(); k.len()]; a.len()];
    for (i, row) in a.iter().enumerate() {
        for (l, x) in row.iter().enumerate() {
            if x.is_ring_zero() {
                continue;
            }
            for (j, c) in &k[l] {
                acc(&mut out[i][*j], x.scale_by(c));
            }
        }
    }
    out
}

/// `K · A`.
fn const_gmul<R: Ring>(k: &[Vec<(usize, Rational)>], a: &GMat<R>) -> GMat<R> {
    let cols = a[0].len();
    k.iter()
        .map(|row| {
            let mut out = vec![R::ring_zero(); cols];
            for (l, c) in row {
                for (j, x) in a[*l].iter().enumerate() {
                    if !x.is_ring_zero() {
                        acc(&mut out[j], x.scale_by(c));
                    }
                }
            }
            out
        })
        .collect()
}

fn gsub<R: Ring>(a: GMat<R>, b: GMat<R>) -> GMat<R> {
    a.into_iter().zip(b).map(|(x, y)| x.into_iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

fn gadd<R: Ring>(a: GMat<R>, b: GMat<R>) -> GMat<R> {
    a.into_iter().zip(b).map(|(x, y)| x.into_iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

/// The full Poisson matrix over any coefficient ring, row-major `dim × dim`.
fn assemble<R: Ring>(spec: &BracketSpec, v: &[Vec<R>], m: &[Vec<R>]) -> Vec<R> {
    let (nu, n) = (spec.nu, spec.period());
    let dim = spec.dim();
    let d = nu * nu;
    let mut out = vec![R::ring_zero(); dim * dim];
    let ts: Vec<Vec<Vec<(usize, Rational)>>> =
        (-(n as i64 - 1)..n as i64).map(|k| nonzeros(&spec.t(k).expect("window"))).collect();

    for mi in 0..n {
        for ni in 0..n {
            let t = &ts[mi + n - 1 - ni];
            let mut blk = vec![R::ring_zero(); d];
            for c in 0..nu {
                for e in 0..nu {
                    if t[c * nu + e].is_empty() {
                        continue;
                    }
                    let pr = v[mi][c].clone() * v[ni][e].clone();
                    if pr.is_ring_zero() {
                        continue;
                    }
                    for (ab, x) in &t[c * nu + e] {
                        acc(&mut blk[*ab], pr.scale_by(x));
                    }
                }
            }
            for (ab, x) in blk.into_iter().enumerate() {
                out[v_var(nu, mi, ab / nu) * dim + v_var(nu, ni, ab % nu)] = x;
            }
        }
    }

    let rp = spec.r_plus();
    let rm = spec.r_minus();
    // x[(c,b),(a,b')] = Σ_e M_be R₋[(c,e),(a,b')] − Σ_e R₊[(c,b),(a,e)] M_eb'
    let mut x: GMat<R> = vec![vec![R::ring_zero(); d]; d];
    for c in 0..nu {
        for b in 0..nu {
            for a in 0..nu {
                for b2 in 0..nu {
                    let mut s = R::ring_zero();
                    for e in 0..nu {
                        let l = &rm[(c * nu + e, a * nu + b2)];
                        if !l.is_zero() {
                            s = s + m[b][e].scale_by(l);
                        }
                        let r = &rp[(c * nu + b, a * nu + e)];
                        if !r.is_zero() {
                            s = s - m[e][b2].scale_by(r);
                        }
                    }
                    x[c * nu + b][a * nu + b2] = s;
                }
            }
        }
    }
    for mi in 0..n {
        for a in 0..nu {
            for b in 0..nu {
                for b2 in 0..nu {
                    let s = (0..nu).fold(R::ring_zero(), |s, c| {
                        let xc = &x[c * nu + b][a * nu + b2];
                        if xc.is_ring_zero() {
                            s
                        } else {
                            s + v[mi][c].clone() * xc.clone()
                        }
                    });
                    let (i, j) = (v_var(nu, mi, a), m_var(nu, n, b, b2));
                    out[j * dim + i] = -s.clone();
                    out[i * dim + j] = s;
                }
            }
        }
    }

    let kron = |f: &dyn Fn(usize, usize, usize, usize) -> R| -> GMat<R> {
        (0..d).map(|row| (0..d).map(|col| f(row / nu, row % nu, col / nu, col % nu)).collect()).collect()
    };
    let delta = |i: usize, j: usize| if i == j { R::from_rat(&Rational::one()) } else { R::ring_zero() };
    let mm = kron(&|a, b, c, e| m[a][c].clone() * m[b][e].clone());
    let m1 = kron(&|a, b, c, e| if b == e { m[a][c].clone() } else { R::ring_zero() });
    let m2 = kron(&|a, b, c, e| delta(a, c) * m[b][e].clone());
    let r = nonzeros(&spec.r);
    let z = gadd(gmul_const(&mm, &r), const_gmul(&r, &mm));
    let z = gsub(z, gmul(&gmul_const(&m1, &nonzeros(&rp)), &m2));
    let z = gsub(z, gmul(&gmul_const(&m2, &nonzeros(&rm)), &m1));
    for (row, zr) in z.into_iter().enumerate() {
        for (col, val) in zr.into_iter().enumerate() {
            // {M_aa', M_bb'} = Z[(a,b),(a',b')]
            let (a, b, a2, b2) = (row / nu, row % nu, col / nu, col % nu);
            out[m_var(nu, n, a, a2) * dim + m_var(nu, n, b, b2)] = val;
        }
    }
    out
}

/// The bracket as a table of polynomials in the polygon coordinates.
pub fn poisson_bivector(spec: &BracketSpec) -> Bivector {
    let (nu, n) = (spec.nu, spec.period());
    let v: Vec<Vec<Poly>> = (0..n).map(|m| (0..nu).map(|a| Poly::var(v_var(nu, m, a))).collect()).collect();
    let m: Vec<Vec<Poly>> = (0..nu).map(|a| (0..nu).map(|b| Poly::var(m_var(nu, n, a, b))).collect()).collect();
    Bivector::new(spec.dim(), assemble(spec, &v, &m))
}

fn check_shape(spec: &BracketSpec, w: &Polygon) -> Result<()> {
    if spec.nu != w.nu || spec.period() != w.n {
        return Err(Error::PeriodMismatch { left: spec.period(), right: w.n });
    }
    Ok(())
}

/// The Poisson matrix evaluated at a polygon.
pub fn poisson_matrix(spec: &BracketSpec, w: &Polygon) -> Result<RatMatrix> {
    check_shape(spec, w)?;
    let dim = spec.dim();
    let vals = assemble(spec, &w.v, &w.m.to_rows());
    Ok(RatMatrix::from_fn(dim, dim, |i, j| vals[i * dim + j].clone()))
}

/// Brackets of the coordinates at one index pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketBlocks {
    /// `{(V_m)_a, (V_n)_b}` at `(a, b)`.
    pub vv: RatMatrix,
    /// `{(V_m)_a, M_bb'}` at `(a, bν+b')`.
    pub vm: RatMatrix,
    /// `{M_aa', M_bb'}` at `(aν+a', bν+b')`.
    pub mm: RatMatrix,
}

pub fn bracket_blocks(spec: &BracketSpec, w: &Polygon, m: usize, n: usize) -> Result<BracketBlocks> {
    let per = w.n;
    for i in [m, n] {
        if i >= per {
            return Err(Error::OutOfDomain { index: i as i64, n: per });
        }
    }
    let p = poisson_matrix(spec, w)?;
    let nu = w.nu;
    Ok(BracketBlocks {
        vv: RatMatrix::from_fn(nu, nu, |a, b| p[(v_var(nu, m, a), v_var(nu, n, b))].clone()),
        vm: RatMatrix::from_fn(nu, nu * nu, |a, bb| p[(v_var(nu, m, a), m_var(nu, per, bb / nu, bb % nu))].clone()),
        mm: RatMatrix::from_fn(nu * nu, nu * nu, |x, y| {
            p[(m_var(nu, per, x / nu, x % nu), m_var(nu, per, y / nu, y % nu))].clone()
        }),
    })
}

/// `(p V g⁻¹, g M g⁻¹)`.
pub fn group_act(p: &PerSeq, g: &RatMatrix, w: &Polygon) -> Result<Polygon> {
    if p.period() != w.n {
        return Err(Error::PeriodMismatch { left: p.period(), right: w.n });
    }
    if let Some(site) = p.values().iter().position(|x| x.is_zero()) {
        return Err(Error::ZeroEntry { field: "p".into(), site });
    }
    if g.rows() != w.nu || g.det()? != Rational::one() {
        return Err(Error::InvalidArgument("g must lie in SL_nu".into()));
    }
    let gi = g.inverse()?;
    let v = w.v.iter().enumerate().map(|(m, x)| gi.vec_mul(x).into_iter().map(|y| y * p.at(m as i64)).collect()).collect();
    Polygon::twisted(v, g.mul(&w.m).mul(&gi))
}

pub fn wronskian(w: &Polygon) -> PerSeq {
    w.wronskian()
}

/// Evaluates brackets of jet observables against a fixed Poisson matrix.
pub struct ChainOracle {
    pi: RatMatrix,
    jets: JetPolygon,
}

impl ChainOracle {
    pub fn new(spec: &BracketSpec, w: &Polygon) -> Result<Self> {
        Ok(ChainOracle { pi: poisson_matrix(spec, w)?, jets: JetPolygon::new(w) })
    }

    pub fn polygon(&self) -> &JetPolygon {
        &self.jets
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.pi
    }

    pub fn bracket(&self, f: &Jet, g: &Jet) -> Rational {
        let mut s = Rational::zero();
        for (i, fi) in &f.grad {
            let row = self.pi.row(*i);
            let t = g.grad.iter().fold(Rational::zero(), |acc, (j, gj)| acc + &row[*j] * gj);
            s += fi * t;
        }
        s
    }

    /// `{f, x_j}` for the coordinate `x_j`.
    pub fn bracket_coord(&self, f: &Jet, j: usize) -> Rational {
        f.grad.iter().fold(Rational::zero(), |acc, (i, fi)| acc + fi * &self.pi[(*i, j)])
    }
}

pub fn chain_bracket(
    spec: &BracketSpec,
    w: &Polygon,
    f: impl Fn(&JetPolygon) -> Jet,
    g: impl Fn(&JetPolygon) -> Jet,
) -> Result<Rational> {
    let o = ChainOracle::new(spec, w)?;
    Ok(o.bracket(&f(o.polygon()), &g(o.polygon())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureCheck {
    Jacobi,
    Momentum,
    Quasiperiodicity,
    Antisymmetry,
}

impl StructureCheck {
    pub const ALL: [StructureCheck; 4] =
        [StructureCheck::Jacobi, StructureCheck::Momentum, StructureCheck::Quasiperiodicity, StructureCheck::Antisymmetry];
}

impl fmt::Display for StructureCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StructureCheck::Jacobi => "jacobi",
            StructureCheck::Momentum => "momentum",
            StructureCheck::Quasiperiodicity => "quasiperiodicity",
            StructureCheck::Antisymmetry => "antisymmetry",
        };
        f.write_str(s)
    }
}

impl FromStr for StructureCheck {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.to_string() == s).ok_or_else(|| Error::Parse(format!("unknown structure check {s:?}")))
    }
}

/// Largest deviation of `{w_m, (V_n)_a}` from `κ_{mn} w_m (V_n)_a`, where
/// `κ_{mn} = σ_{m−n} + Σ_{r<ν} φ_{m+r−n} + Σ_{0<r<ν} δ_{m+r−n}`.
pub fn momentum_residual(spec: &BracketSpec, w: &Polygon) -> Result<Rational> {
    let o = ChainOracle::new(spec, w)?;
    let (nu, n) = (w.nu, w.n as i64);
    let sigma = SignWindow::new(w.n);
    let mut worst = Rational::zero();
    for m in 0..n {
        let wm = o.polygon().wronskian(m);
        for k in 0..n {
            let mut kappa = sigma.get(m - k).expect("fundamental pair");
            for r in 0..nu as i64 {
                kappa += spec.phi.at(m + r - k);
                if r > 0 && (m + r - k).rem_euclid(n) == 0 {
                    kappa += Rational::one();
                }
            }
            for a in 0..nu {
                let lhs = o.bracket_coord(&wm, v_var(nu, k as usize, a));
                let rhs = &kappa * &wm.value * &w.v[k as usize][a];
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// `{V_{m±N}, V_n}` from the exchange formula versus the chain rule through `V_m M^{±1}`,
/// for every pair that stays inside the sign window.
pub fn quasiperiodicity_residual(spec: &BracketSpec, w: &Polygon) -> Result<Rational> {
    let o = ChainOracle::new(spec, w)?;
    let (nu, n) = (w.nu, w.n as i64);
    let mut worst = Rational::zero();
    for m in 0..n {
        for k in 0..n {
            if m == k {
                continue;
            }
            let i = if m < k { m + n } else { m - n };
            let t = spec.t(i - k)?;
            let vi = w.vertex(i);
            let vk = &w.v[k as usize];
            let ji = o.polygon().vertex(i);
            for a in 0..nu {
                for b in 0..nu {
                    let mut direct = Rational::zero();
                    for c in 0..nu {
                        for d in 0..nu {
                            direct += &vi[c] * &vk[d] * &t[(c * nu + d, a * nu + b)];
                        }
                    }
                    let chained = o.bracket_coord(&ji[a], v_var(nu, k as usize, b));
                    worst = worst.max((direct - chained).abs());
                }
            }
        }
    }
    Ok(worst)
}

pub fn antisymmetry_residual(spec: &BracketSpec, w: &Polygon) -> Result<Rational> {
    let p = poisson_matrix(spec, w)?;
    Ok(p.add(&p.transpose()).max_abs())
}

/// Runs one structural check over `trials` seeded random polygons and returns the largest residual.
pub fn verify_structure(spec: &BracketSpec, check: StructureCheck, trials: usize, seed: u64) -> Result<Rational> {
    let (nu, n) = (spec.nu, spec.period());
    let bivector = (check == StructureCheck::Jacobi).then(|| poisson_bivector(spec));
    let residuals: Result<Vec<Rational>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let w = random_polygon(nu, n, &mut rng);
            match check {
                StructureCheck::Jacobi => {
                    let dim = spec.dim();
                    let [c, d, e] = [0; 3].map(|_| rational_vec(dim, &mut rng));
                    let b = bivector.as_ref().expect("built above");
                    Ok(b.jacobi_linear(&w.point(), &c, &d, &e).expect("polynomial entries").abs())
                }
                StructureCheck::Momentum => momentum_residual(spec, &w),
                StructureCheck::Quasiperiodicity => quasiperiodicity_residual(spec, &w),
                StructureCheck::Antisymmetry => antisymmetry_residual(spec, &w),
            }
        })
        .collect();
    Ok(max_abs(&residuals?))
}

/// A polygon seen in the affine chart `v = (V_1/V_ν, …, V_{ν−1}/V_ν)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjPolygon {
    pub nu: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(with = "serde_rat_rows")]
    pub v: Vec<Vec<Rational>>,
    #[serde(rename = "M")]
    pub m: RatMatrix,
}

impl ProjPolygon {
    pub fn from_polygon(w: &Polygon) -> Result<Self> {
        let nu = w.nu;
        let v =
            w.v.iter()
                .enumerate()
                .map(|(site, x)| {
                    let last = &x[nu - 1];
                    if last.is_zero() {
                        return Err(Error::ChartViolation { site });
                    }
                    Ok(x[..nu - 1].iter().map(|y| y / last).collect())
                })
                .collect::<Result<_>>()?;
        Ok(ProjPolygon { nu, n: w.n, v, m: w.m.clone() })
    }
}

/// Infinitesimal projective action `X·v = vA + c − d v − (v·b) v` of `X = [[A, b],[c, d]]`.
pub fn projective_action(x: &RatMatrix, v: &[Rational]) -> Result<Vec<Rational>> {
    let nu = x.rows();
    if !x.is_square() || v.len() + 1 != nu {
        return Err(Error::Dimension(format!("{}x{} generator on a {}-vector", x.rows(), x.cols(), v.len())));
    }
    let k = nu - 1;
    let vb = (0..k).fold(Rational::zero(), |s, i| s + &v[i] * &x[(i, k)]);
    let d = &x[(k, k)];
    Ok((0..k)
        .map(|j| {
            let va = (0..k).fold(Rational::zero(), |s, i| s + &v[i] * &x[(i, j)]);
            va + &x[(k, j)] - d * &v[j] - &vb * &v[j]
        })
        .collect())
}

fn unit(nu: usize, p: usize, q: usize) -> RatMatrix {
    RatMatrix::from_fn(nu, nu, |i, j| if (i, j) == (p, q) { Rational::one() } else { Rational::zero() })
}

/// `{v_m ⊗ v_n} = (v_m⊗v_n)·R − σ_{m−n}(v_m−v_n)⊗(v_m−v_n)`, with `R` acting through the projective action.
pub fn projective_bracket(r: &RatMatrix, p: &ProjPolygon, m: usize, n: usize) -> Result<RatMatrix> {
    let nu = leg_dim(r)?;
    if nu != p.nu {
        return Err(Error::Dimension("R does not match the polygon dimension".into()));
    }
    for i in [m, n] {
        if i >= p.n {
            return Err(Error::OutOfDomain { index: i as i64, n: p.n });
        }
    }
    let k = nu - 1;
    let (vm, vn) = (&p.v[m], &p.v[n]);
    let mut table = RatMatrix::zeros(k, k);
    for (row, entries) in nonzeros(r).into_iter().enumerate() {
        let (pp, rr) = (row / nu, row % nu);
        for (col, coef) in entries {
            let (qq, ss) = (col / nu, col % nu);
            let x = projective_action(&unit(nu, pp, qq), vm)?;
            let y = projective_action(&unit(nu, rr, ss), vn)?;
            for i in 0..k {
                for j in 0..k {
                    table[(i, j)] += &coef * &x[i] * &y[j];
                }
            }
        }
    }
    let s = SignWindow::new(p.n).get(m as i64 - n as i64).expect("fundamental pair");
    for i in 0..k {
        for j in 0..k {
            table[(i, j)] -= &s * (&vm[i] - &vn[i]) * (&vm[j] - &vn[j]);
        }
    }
    Ok(table)
}

/// The same table computed from the full bracket by the chain rule through `v = V/V_ν`.
pub fn projective_chain_table(spec: &BracketSpec, w: &Polygon, m: usize, n: usize) -> Result<RatMatrix> {
    let o = ChainOracle::new(spec, w)?;
    let nu = w.nu;
    let chart = |i: usize| -> Result<Vec<Jet>> {
        let x = o.polygon().vertex(i as i64);
        let last = x[nu - 1].recip().ok_or(Error::ChartViolation { site: i })?;
        Ok(x[..nu - 1].iter().map(|y| y.clone() * last.clone()).collect())
    };
    let (a, b) = (chart(m)?, chart(n)?);
    Ok(RatMatrix::from_fn(nu - 1, nu - 1, |i, j| o.bracket(&a[i], &b[j])))
}
