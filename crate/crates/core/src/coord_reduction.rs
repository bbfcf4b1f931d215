//! Coordinates `a^(k)` on polygons modulo `SL_ν`, the reduced Poisson tensors on them,
//! and the reductions (Dirac, gauge, pushforward) between those tensors.
//!
//! A polygon determines the difference equation
//! `V_{m+ν} = Σ_r (−1)^{ν−r+1} a^(r)_m V_{m+r}`, so `a^(k)_m = α^(k)_m / w_m` where
//! `α^(k)_m` is the determinant of `V_m … V_{m+ν}` with `V_{m+k}` left out.
//! For `ν = 2` the fields are `(ρ, μ) = (a^(0), a^(1))`, for `ν = 3` they are
//! `(ρ, b, a) = (a^(0), a^(1), a^(2))`.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bivector::Bivector;
use crate::error::{Error, Result};
use crate::exchange_algebra::{gmul_const, group_act, BracketSpec, ChainOracle, GMat, JetPolygon, Polygon};
use crate::jet::Jet;
use crate::lattice_ops::{invert, DPoly, Kernel, OddKernel, PerSeq};
use crate::poly::{Poly, Ring, TermDoc};
use crate::rational::{rat, serde_rat, RatMatrix, Rational};

/// The coordinate sequences `a^(0) … a^(ν−1)` of a polygon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fields {
    nu: usize,
    #[serde(rename = "N")]
    n: usize,
    a: Vec<PerSeq>,
}

impl Fields {
    pub fn new(a: Vec<PerSeq>) -> Result<Self> {
        let nu = a.len();
        if nu < 2 {
            return Err(Error::InvalidArgument(format!("need at least two fields, got {nu}")));
        }
        let n = a[0].period();
        if let Some(x) = a.iter().find(|x| x.period() != n) {
            return Err(Error::PeriodMismatch { left: n, right: x.period() });
        }
        Ok(Fields { nu, n, a })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn period(&self) -> usize {
        self.n
    }

    /// `a^(k)`.
    pub fn a(&self, k: usize) -> &PerSeq {
        &self.a[k]
    }

    pub fn all(&self) -> &[PerSeq] {
        &self.a
    }

    pub fn rho(&self) -> &PerSeq {
        &self.a[0]
    }

    /// Index `k` of the family `a^(k)` called `name`: `rho`, `mu` (ν = 2), `b`, `a` (ν = 3), or `a<k>`.
    pub fn family_index(nu: usize, name: &str) -> Result<usize> {
        let k = match (nu, name) {
            (_, "rho") => Some(0),
            (2, "mu") => Some(1),
            (3, "b") => Some(1),
            (3, "a") => Some(2),
            _ => name.strip_prefix('a').and_then(|s| s.parse().ok()),
        };
        k.filter(|&k| k < nu).ok_or_else(|| Error::InvalidArgument(format!("no field {name:?} for nu = {nu}")))
    }

    pub fn family(&self, name: &str) -> Result<&PerSeq> {
        Ok(&self.a[Self::family_index(self.nu, name)?])
    }

    pub fn select(&self, names: &[String]) -> Result<Vec<PerSeq>> {
        names.iter().map(|s| self.family(s).cloned()).collect()
    }

    /// A polygon with these coordinates: `V_0 … V_{ν−1}` the standard basis, the rest from the
    /// recursion. Its monodromy has determinant `Π a^(0)`, so it is twisted by `GL_ν` in general.
    pub fn polygon(&self) -> Result<Polygon> {
        let (nu, n) = (self.nu, self.n);
        if n < nu {
            return Err(Error::InvalidArgument(format!("need N >= nu to build a polygon, got N = {n}")));
        }
        if let Some(site) = self.rho().values().iter().position(|x| x.is_zero()) {
            return Err(Error::ZeroEntry { field: "rho".into(), site });
        }
        let mut v: Vec<Vec<Rational>> =
            (0..nu).map(|i| (0..nu).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
        for m in 0..n {
            let next = (0..nu).fold(vec![Rational::zero(); nu], |mut acc, r| {
                let sign = if (nu - r + 1) % 2 == 0 { Rational::one() } else { -Rational::one() };
                let c = sign * self.a[r].at(m as i64);
                for (x, y) in acc.iter_mut().zip(&v[m + r]) {
                    *x += &c * y;
                }
                acc
            });
            v.push(next);
        }
        let m = RatMatrix::from_rows(v[n..n + nu].to_vec())?;
        v.truncate(n);
        Polygon::twisted(v, m)
    }
}

/// `a^(k)_m` for every `k` and every `m` in the fundamental domain.
pub fn coords(w: &Polygon) -> Result<Fields> {
    let (nu, n) = (w.nu(), w.period());
    let mut a = vec![Vec::with_capacity(n); nu];
    for m in 0..n as i64 {
        let wm = w.wronskian_at(m);
        if wm.is_zero() {
            return Err(Error::DegeneratePolygon { site: m as usize });
        }
        let rows: Vec<Vec<Rational>> = (0..=nu as i64).map(|r| w.vertex(m + r)).collect();
        for (k, ak) in a.iter_mut().enumerate() {
            let minor: Vec<Vec<Rational>> = rows.iter().enumerate().filter(|(r, _)| *r != k).map(|(_, x)| x.clone()).collect();
            ak.push(RatMatrix::from_rows(minor)?.det()? / &wm);
        }
    }
    Fields::new(a.into_iter().map(PerSeq::new).collect::<Result<_>>()?)
}

/// `a^(k)_m` as jets in the polygon coordinates, indexed `[k][m]`.
pub fn coord_jets(p: &JetPolygon) -> Vec<Vec<Jet>> {
    let (nu, n) = (p.nu(), p.period());
    let winv: Vec<Jet> = (0..n as i64).map(|m| p.wronskian(m).recip().expect("nondegenerate polygon")).collect();
    (0..nu).map(|k| (0..n).map(|m| p.window_det(m as i64, nu + 1, &[k]) * winv[m].clone()).collect()).collect()
}

/// Chain-rule brackets of the coordinate families `ids` (as `a^(k)` indices), ordered by family then site.
pub fn chain_tensor(spec: &BracketSpec, w: &Polygon, ids: &[usize]) -> Result<RatMatrix> {
    let o = ChainOracle::new(spec, w)?;
    let jets = coord_jets(o.polygon());
    let flat: Vec<&Jet> = ids.iter().flat_map(|&k| jets[k].iter()).collect();
    let d = flat.len();
    Ok(RatMatrix::from_fn(d, d, |i, j| o.bracket(flat[i], flat[j])))
}

fn var_index(n: usize, family: usize, site: usize) -> usize {
    family * n + site
}

fn flatten(families: usize, n: usize, point: &[PerSeq]) -> Result<Vec<Rational>> {
    if point.len() != families {
        return Err(Error::Dimension(format!("{} field sequences for {families} families", point.len())));
    }
    if let Some(p) = point.iter().find(|p| p.period() != n) {
        return Err(Error::PeriodMismatch { left: n, right: p.period() });
    }
    Ok(point.iter().flat_map(|p| p.values().iter().cloned()).collect())
}

/// Poisson tensor with Laurent-polynomial entries in `families × N` field variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyTensor {
    families: Vec<String>,
    n: usize,
    bivector: Bivector,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    i: usize,
    j: usize,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct PolyTensorDoc {
    families: Vec<String>,
    #[serde(rename = "N")]
    n: usize,
    entries: Vec<EntryDoc>,
}

impl Serialize for PolyTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let entries = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.bivector.get(i, j).is_empty())
            .map(|(i, j)| EntryDoc { i, j, terms: self.bivector.get(i, j).to_doc() })
            .collect();
        PolyTensorDoc { families: self.families.clone(), n: self.n, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PolyTensorDoc::deserialize(d)?;
        let dim = doc.families.len() * doc.n;
        let mut b = Bivector::zeros(dim);
        for e in doc.entries {
            if e.i >= dim || e.j >= dim {
                return Err(serde::de::Error::custom("entry index out of range"));
            }
            b.set(e.i, e.j, Poly::from_doc(&e.terms));
        }
        PolyTensor::new(doc.families, doc.n, b).map_err(serde::de::Error::custom)
    }
}

impl PolyTensor {
    pub fn new(families: Vec<String>, n: usize, bivector: Bivector) -> Result<Self> {
        if bivector.dim() != families.len() * n {
            return Err(Error::Dimension(format!("{} variables for {} families of period {n}", bivector.dim(), families.len())));
        }
        Ok(PolyTensor { families, n, bivector })
    }

    /// Builds the table from `f(i, m, j, n)`, the bracket `{x^i_m, x^j_n}`; `x^i_m` is `Poly::var(i·N + m)`.
    pub fn from_fn(families: &[&str], n: usize, f: impl Fn(usize, usize, usize, usize) -> Poly) -> Self {
        let fams = families.len();
        let mut b = Bivector::zeros(fams * n);
        for i in 0..fams {
            for m in 0..n {
                for j in 0..fams {
                    for k in 0..n {
                        b.set(var_index(n, i, m), var_index(n, j, k), f(i, m, j, k));
                    }
                }
            }
        }
        PolyTensor { families: families.iter().map(|s| s.to_string()).collect(), n, bivector: b }
    }

    pub fn families(&self) -> &[String] {
        &self.families
    }

    pub fn period(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.bivector.dim()
    }

    pub fn bivector(&self) -> &Bivector {
        &self.bivector
    }

    pub fn var(&self, family: usize, site: usize) -> usize {
        var_index(self.n, family, site)
    }

    pub fn family_position(&self, name: &str) -> Result<usize> {
        self.families
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::InvalidArgument(format!("tensor has no family {name:?}")))
    }

    pub fn flat_point(&self, point: &[PerSeq]) -> Result<Vec<Rational>> {
        flatten(self.families.len(), self.n, point)
    }

    pub fn eval(&self, point: &[PerSeq]) -> Result<RatMatrix> {
        let x = self.flat_point(point)?;
        self.bivector.eval(&x).ok_or_else(|| zero_field(&self.families, self.n, &x))
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly + Sync + Send) -> Self {
        PolyTensor { families: self.families.clone(), n: self.n, bivector: self.bivector.map(f) }
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, other: &Self, t: &Rational) -> Result<Self> {
        if self.families != other.families || self.n != other.n {
            return Err(Error::Dimension("tensors live on different fields".into()));
        }
        Ok(PolyTensor { families: self.families.clone(), n: self.n, bivector: self.bivector.add_scaled(&other.bivector, t) })
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.bivector.skew_defect().is_zero()
    }
}

fn zero_field(families: &[String], n: usize, x: &[Rational]) -> Error {
    let i = x.iter().position(|v| v.is_zero()).unwrap_or(0);
    Error::ZeroEntry { field: families.get(i / n.max(1)).cloned().unwrap_or_default(), site: i % n.max(1) }
}

/// One factor of an operator word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sym {
    /// Multiplication by a field.
    Field(String),
    /// Multiplication by the reciprocal of a field.
    Inv(String),
    /// Multiplication by a fixed sequence.
    Fixed(PerSeq),
    Op(DPoly),
    InvOp(DPoly),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    #[serde(with = "serde_rat")]
    pub coef: Rational,
    pub word: Vec<Sym>,
}

/// Block matrix of operator words acting on `families × N` fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTensor {
    families: Vec<String>,
    #[serde(rename = "N")]
    n: usize,
    blocks: Vec<Vec<Vec<Word>>>,
}

impl OpTensor {
    /// Checks shapes and that every inverted operator is invertible at this period.
    pub fn new(families: Vec<String>, n: usize, blocks: Vec<Vec<Vec<Word>>>) -> Result<Self> {
        let d = families.len();
        if blocks.len() != d || blocks.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension(format!("operator blocks are not {d}x{d}")));
        }
        let t = OpTensor { families, n, blocks };
        for w in t.blocks.iter().flatten().flatten() {
            for s in &w.word {
                match s {
                    Sym::InvOp(p) => {
                        invert(&p.kernel(n))?;
                    }
                    Sym::Field(f) | Sym::Inv(f) => {
                        t.family_position(f)?;
                    }
                    Sym::Fixed(x) if x.period() != n => return Err(Error::PeriodMismatch { left: n, right: x.period() }),
                    _ => {}
                }
            }
        }
        Ok(t)
    }

    pub fn families(&self) -> &[String] {
        &self.families
    }

    pub fn period(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<Vec<Word>>] {
        &self.blocks
    }

    fn family_position(&self, name: &str) -> Result<usize> {
        self.families
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::InvalidArgument(format!("operator word uses unknown field {name:?}")))
    }

    /// Evaluates every block with `diag(sym)` supplying the diagonal of a multiplication symbol.
    fn assemble<R: Ring>(&self, diag: &dyn Fn(&Sym) -> Result<Vec<R>>) -> Result<Vec<Vec<GMat<R>>>> {
        let n = self.n;
        let mut consts: BTreeMap<(bool, Vec<(i64, Rational)>), Vec<Vec<(usize, Rational)>>> = BTreeMap::new();
        let mut constant = |p: &DPoly, inverse: bool| -> Result<Vec<Vec<(usize, Rational)>>> {
            let key = (inverse, p.terms().map(|(r, c)| (r, c.clone())).collect::<Vec<_>>());
            if let Some(c) = consts.get(&key) {
                return Ok(c.clone());
            }
            let k = if inverse { invert(&p.kernel(n))? } else { p.kernel(n) };
            let m = k.matrix();
            let nz: Vec<Vec<(usize, Rational)>> =
                (0..n).map(|i| (0..n).filter(|&j| !m[(i, j)].is_zero()).map(|j| (j, m[(i, j)].clone())).collect()).collect();
            consts.insert(key, nz.clone());
            Ok(nz)
        };
        let mut out = Vec::with_capacity(self.blocks.len());
        for row in &self.blocks {
            let mut out_row = Vec::with_capacity(row.len());
            for words in row {
                let mut total: GMat<R> = vec![vec![R::ring_zero(); n]; n];
                for w in words {
                    let mut acc: Option<GMat<R>> = None;
                    for s in &w.word {
                        acc = Some(match s {
                            Sym::Op(p) | Sym::InvOp(p) => {
                                let c = constant(p, matches!(s, Sym::InvOp(_)))?;
                                match acc {
                                    None => c
                                        .iter()
                                        .map(|r| {
                                            let mut v = vec![R::ring_zero(); n];
                                            for (j, x) in r {
                                                v[*j] = R::from_rat(x);
                                            }
                                            v
                                        })
                                        .collect(),
                                    Some(a) => gmul_const(&a, &c),
                                }
                            }
                            _ => {
                                let d = diag(s)?;
                                match acc {
                                    None => (0..n)
                                        .map(|i| {
                                            let mut v = vec![R::ring_zero(); n];
                                            v[i] = d[i].clone();
                                            v
                                        })
                                        .collect(),
                                    Some(a) => a
                                        .into_iter()
                                        .map(|r| r.into_iter().zip(&d).map(|(x, y)| x * y.clone()).collect())
                                        .collect(),
                                }
                            }
                        });
                    }
                    let a = acc.unwrap_or_else(|| {
                        (0..n)
                            .map(|i| {
                                (0..n).map(|j| if i == j { R::from_rat(&Rational::one()) } else { R::ring_zero() }).collect()
                            })
                            .collect()
                    });
                    for (t, x) in total.iter_mut().zip(a) {
                        for (ti, xi) in t.iter_mut().zip(x) {
                            if !xi.is_ring_zero() {
                                let cur = std::mem::replace(ti, R::ring_zero());
                                *ti = cur + xi.scale_by(&w.coef);
                            }
                        }
                    }
                }
                out_row.push(total);
            }
            out.push(out_row);
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[PerSeq]) -> Result<RatMatrix> {
        let (d, n) = (self.families.len(), self.n);
        flatten(d, n, point)?;
        let diag = |s: &Sym| -> Result<Vec<Rational>> {
            match s {
                Sym::Field(f) => Ok(point[self.family_position(f)?].values().to_vec()),
                Sym::Inv(f) => {
                    let x = &point[self.family_position(f)?];
                    if let Some(site) = x.values().iter().position(|v| v.is_zero()) {
                        return Err(Error::ZeroEntry { field: f.clone(), site });
                    }
                    Ok(x.values().iter().map(|v| v.recip()).collect())
                }
                Sym::Fixed(x) => Ok(x.values().to_vec()),
                _ => unreachable!("operators are handled as matrices"),
            }
        };
        let blocks = self.assemble::<Rational>(&diag)?;
        Ok(RatMatrix::from_fn(d * n, d * n, |r, c| blocks[r / n][c / n][r % n][c % n].clone()))
    }

    pub fn to_poly(&self) -> Result<PolyTensor> {
        let (d, n) = (self.families.len(), self.n);
        let diag = |s: &Sym| -> Result<Vec<Poly>> {
            match s {
                Sym::Field(f) => {
                    let i = self.family_position(f)?;
                    Ok((0..n).map(|m| Poly::var(var_index(n, i, m))).collect())
                }
                Sym::Inv(f) => {
                    let i = self.family_position(f)?;
                    Ok((0..n).map(|m| Poly::var_pow(var_index(n, i, m), -1)).collect())
                }
                Sym::Fixed(x) => Ok(x.values().iter().map(|v| Poly::constant(v.clone())).collect()),
                _ => unreachable!("operators are handled as matrices"),
            }
        };
        let blocks = self.assemble::<Poly>(&diag)?;
        let mut b = Bivector::zeros(d * n);
        for (i, row) in blocks.into_iter().enumerate() {
            for (j, blk) in row.into_iter().enumerate() {
                for (m, r) in blk.into_iter().enumerate() {
                    for (k, p) in r.into_iter().enumerate() {
                        b.set(var_index(n, i, m), var_index(n, j, k), p);
                    }
                }
            }
        }
        PolyTensor::new(self.families.clone(), n, b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Tensor {
    Poly(PolyTensor),
    Op(OpTensor),
}

impl Tensor {
    pub fn families(&self) -> &[String] {
        match self {
            Tensor::Poly(p) => p.families(),
            Tensor::Op(o) => o.families(),
        }
    }

    pub fn period(&self) -> usize {
        match self {
            Tensor::Poly(p) => p.period(),
            Tensor::Op(o) => o.period(),
        }
    }

    pub fn eval(&self, point: &[PerSeq]) -> Result<RatMatrix> {
        match self {
            Tensor::Poly(p) => p.eval(point),
            Tensor::Op(o) => o.eval(point),
        }
    }

    pub fn to_poly(&self) -> Result<PolyTensor> {
        match self {
            Tensor::Poly(p) => Ok(p.clone()),
            Tensor::Op(o) => o.to_poly(),
        }
    }
}

/// A closed-form tensor together with the factor relating it to the chain-rule bracket:
/// `tensor = prefactor · {·,·}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    #[serde(with = "serde_rat")]
    pub prefactor: Rational,
    pub tensor: Tensor,
}

pub const TENSOR_NAMES: [&str; 8] = ["murho", "abrho", "toda", "ftv_u", "ftv_S", "P0", "P1", "P2"];

impl NamedTensor {
    /// `(ν, k)` with `φ = φ^(k)` the choice this tensor belongs to; `None` for the `φ`-generic forms
    /// and for tensors on the normalized fields `u`, `S`.
    pub fn special_phi(&self) -> Option<(usize, usize)> {
        match self.name.as_str() {
            "toda" => Some((2, 1)),
            "P0" => Some((3, 0)),
            "P1" => Some((3, 2)),
            "P2" => Some((3, 1)),
            _ => None,
        }
    }

    /// Dimension `ν` of the polygons this tensor reduces from.
    pub fn nu(&self) -> Option<usize> {
        match self.name.as_str() {
            "murho" | "toda" => Some(2),
            "abrho" | "P0" | "P1" | "P2" => Some(3),
            _ => None,
        }
    }
}

/// Parameters of [`closed_tensor`].
#[derive(Clone, Debug)]
pub struct TensorParams {
    pub n: usize,
    pub phi: Option<OddKernel>,
    pub beta: Option<PerSeq>,
}

impl TensorParams {
    pub fn new(n: usize) -> Self {
        TensorParams { n, phi: None, beta: None }
    }

    pub fn with_phi(mut self, phi: OddKernel) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn with_beta(mut self, beta: PerSeq) -> Self {
        self.beta = Some(beta);
        self
    }
}

fn delta(n: usize, k: i64) -> Rational {
    if k.rem_euclid(n as i64) == 0 {
        Rational::one()
    } else {
        Rational::zero()
    }
}

fn x(n: usize, f: usize, m: usize) -> Poly {
    Poly::var(var_index(n, f, m))
}

fn quad(c: Rational, p: Poly, q: Poly) -> Poly {
    (&p * &q).scale(&c)
}

fn murho(n: usize, phi: &Kernel) -> PolyTensor {
    let f = |k: i64| phi.at(k).clone();
    let d = |k: i64| delta(n, k);
    let (mu, rho) = (0, 1);
    let two = Rational::from_integer(2.into());
    let mu_rho = |k: i64| f(k) + f(k + 1) - f(k - 1) - f(k + 2) - d(k) + d(k - 1) + d(k + 1) - d(k + 2);
    PolyTensor::from_fn(&["mu", "rho"], n, |i, m, j, l| {
        let k = m as i64 - l as i64;
        match (i, j) {
            (0, 0) => {
                let c = &two * f(k) - f(k + 1) - f(k - 1) - d(k + 1) + d(k - 1);
                quad(c, x(n, mu, m), x(n, mu, l)) + x(n, rho, l).scale(&(&two * d(k + 1)))
                    - x(n, rho, m).scale(&(&two * d(k - 1)))
            }
            (0, 1) => quad(mu_rho(k), x(n, mu, m), x(n, rho, l)),
            (1, 0) => -quad(mu_rho(-k), x(n, mu, l), x(n, rho, m)),
            _ => {
                let c = &two * f(k) - f(k + 2) - f(k - 2) - d(k + 2) + d(k - 2);
                quad(c, x(n, rho, m), x(n, rho, l))
            }
        }
    })
}

fn abrho(n: usize, phi: &Kernel) -> PolyTensor {
    let f = |k: i64| phi.at(k).clone();
    let d = |k: i64| delta(n, k);
    let two = Rational::from_integer(2.into());
    let (a, b, r) = (0, 1, 2);
    // Upper-triangular blocks {x^i_m, x^j_l}, i <= j, with k = m - l.
    let upper = |i: usize, m: usize, j: usize, l: usize| -> Poly {
        let k = m as i64 - l as i64;
        match (i, j) {
            (0, 0) => {
                let c = &two * f(k) - f(k + 1) - f(k - 1) - d(k + 1) + d(k - 1);
                quad(c, x(n, a, m), x(n, a, l)) + x(n, b, l).scale(&(&two * d(k + 1))) - x(n, b, m).scale(&(&two * d(k - 1)))
            }
            (0, 1) => {
                let c = f(k) + f(k + 1) - f(k + 2) - f(k - 1) - d(k) + d(k + 1) - d(k + 2) + d(k - 1);
                quad(c, x(n, a, m), x(n, b, l)) + x(n, r, l).scale(&(&two * d(k + 2))) - x(n, r, m).scale(&(&two * d(k - 1)))
            }
            (0, 2) => {
                let c = f(k) + f(k + 2) - f(k + 3) - f(k - 1) - d(k) + d(k + 2) - d(k + 3) + d(k - 1);
                quad(c, x(n, a, m), x(n, r, l))
            }
            (1, 1) => {
                let c = &two * f(k) - f(k + 2) - f(k - 2) - d(k + 2) + d(k - 2);
                quad(c, x(n, b, m), x(n, b, l)) + quad(&two * d(k + 1), x(n, a, m), x(n, r, l))
                    - quad(&two * d(k - 1), x(n, r, m), x(n, a, l))
            }
            (1, 2) => {
                let c = f(k) + f(k + 1) - f(k + 3) - f(k - 2) - d(k) + d(k + 1) - d(k + 3) + d(k - 2);
                quad(c, x(n, b, m), x(n, r, l))
            }
            _ => {
                let c = &two * f(k) - f(k + 3) - f(k - 3) - d(k + 3) + d(k - 3);
                quad(c, x(n, r, m), x(n, r, l))
            }
        }
    };
    PolyTensor::from_fn(&["a", "b", "rho"], n, |i, m, j, l| if i <= j { upper(i, m, j, l) } else { -upper(j, l, i, m) })
}

fn fld(s: &str) -> Sym {
    Sym::Field(s.into())
}

fn finv(s: &str) -> Sym {
    Sym::Inv(s.into())
}

fn op(t: &[(i64, i64)]) -> Sym {
    Sym::Op(DPoly::from_terms(t))
}

fn inv(t: &[(i64, i64)]) -> Sym {
    Sym::InvOp(DPoly::from_terms(t))
}

fn w(c: i64, word: Vec<Sym>) -> Word {
    Word { coef: Rational::from_integer(c.into()), word }
}

fn toda(n: usize) -> Result<OpTensor> {
    let (mu, rho) = ("mu", "rho");
    OpTensor::new(
        vec![mu.into(), rho.into()],
        n,
        vec![
            vec![
                vec![w(1, vec![op(&[(1, 1)]), fld(rho)]), w(-1, vec![fld(rho), op(&[(-1, 1)])])],
                vec![w(1, vec![fld(mu), op(&[(1, 1), (0, -1)]), fld(rho)])],
            ],
            vec![
                vec![w(1, vec![fld(rho), op(&[(0, 1), (-1, -1)]), fld(mu)])],
                vec![w(1, vec![fld(rho), op(&[(1, 1), (-1, -1)]), fld(rho)])],
            ],
        ],
    )
}

fn ftv_u(n: usize, beta: PerSeq) -> Result<OpTensor> {
    let u = "u";
    OpTensor::new(
        vec![u.into()],
        n,
        vec![vec![vec![
            w(1, vec![fld(u), op(&[(0, 1), (1, -1)]), inv(&[(0, 1), (1, 1)]), fld(u)]),
            w(1, vec![op(&[(1, 1)]), Sym::Fixed(beta.clone())]),
            w(-1, vec![Sym::Fixed(beta), op(&[(-1, 1)])]),
        ]]],
    )
}

fn ftv_s(n: usize) -> Result<OpTensor> {
    let s = "S";
    let (d, dm) = (|| op(&[(1, 1)]), || op(&[(-1, 1)]));
    OpTensor::new(
        vec![s.into()],
        n,
        vec![vec![vec![
            w(1, vec![d(), fld(s)]),
            w(1, vec![fld(s), d()]),
            w(-1, vec![dm(), fld(s)]),
            w(-1, vec![fld(s), dm()]),
            w(1, vec![fld(s), dm(), fld(s)]),
            w(-1, vec![fld(s), d(), fld(s)]),
            w(1, vec![fld(s), d(), finv(s), d(), fld(s)]),
            w(-1, vec![fld(s), dm(), finv(s), dm(), fld(s)]),
        ]]],
    )
}

fn p0(n: usize) -> Result<OpTensor> {
    let (a, b) = ("a", "b");
    let g = || inv(&[(0, 1), (1, 1), (2, 1)]);
    OpTensor::new(
        vec![a.into(), b.into()],
        n,
        vec![
            vec![
                vec![
                    w(1, vec![fld(a), g(), op(&[(0, 1), (2, -1)]), fld(a)]),
                    w(1, vec![op(&[(1, 1)]), fld(b)]),
                    w(-1, vec![fld(b), op(&[(-1, 1)])]),
                ],
                vec![w(1, vec![fld(a), g(), op(&[(1, 1), (2, -1)]), fld(b)]), w(1, vec![op(&[(2, 1), (-1, -1)])])],
            ],
            vec![
                vec![w(1, vec![fld(b), g(), op(&[(0, 1), (1, -1)]), fld(a)]), w(1, vec![op(&[(1, 1), (-2, -1)])])],
                vec![
                    w(1, vec![fld(b), g(), op(&[(0, 1), (2, -1)]), fld(b)]),
                    w(1, vec![fld(a), op(&[(1, 1)])]),
                    w(-1, vec![op(&[(-1, 1)]), fld(a)]),
                ],
            ],
        ],
    )
}

fn p1(n: usize) -> Result<OpTensor> {
    let (a, b, r) = ("a", "b", "rho");
    OpTensor::new(
        vec![a.into(), b.into(), r.into()],
        n,
        vec![
            vec![
                vec![w(1, vec![op(&[(1, 1)]), fld(b)]), w(-1, vec![fld(b), op(&[(-1, 1)])])],
                vec![
                    w(1, vec![fld(a), op(&[(1, 1), (0, -1)]), fld(b)]),
                    w(1, vec![op(&[(2, 1)]), fld(r)]),
                    w(-1, vec![fld(r), op(&[(-1, 1)])]),
                ],
                vec![w(1, vec![fld(a), op(&[(2, 1), (0, -1)]), fld(r)])],
            ],
            vec![
                vec![
                    w(1, vec![fld(b), op(&[(0, 1), (-1, -1)]), fld(a)]),
                    w(1, vec![op(&[(1, 1)]), fld(r)]),
                    w(-1, vec![fld(r), op(&[(-2, 1)])]),
                ],
                vec![
                    w(1, vec![fld(b), op(&[(1, 1), (-1, -1)]), fld(b)]),
                    w(1, vec![fld(a), op(&[(1, 1)]), fld(r)]),
                    w(-1, vec![fld(r), op(&[(-1, 1)]), fld(a)]),
                ],
                vec![w(1, vec![fld(b), op(&[(2, 1), (1, 1), (0, -1), (-1, -1)]), fld(r)])],
            ],
            vec![
                vec![w(1, vec![fld(r), op(&[(0, 1), (-2, -1)]), fld(a)])],
                vec![w(1, vec![fld(r), op(&[(1, 1), (0, 1), (-1, -1), (-2, -1)]), fld(b)])],
                vec![w(1, vec![fld(r), op(&[(2, 1), (1, 1), (-1, -1), (-2, -1)]), fld(r)])],
            ],
        ],
    )
}

fn p2(n: usize) -> Result<OpTensor> {
    let (a, b, r) = ("a", "b", "rho");
    let h = || inv(&[(0, 1), (1, 1)]);
    OpTensor::new(
        vec![a.into(), b.into(), r.into()],
        n,
        vec![
            vec![
                vec![
                    w(1, vec![fld(a), op(&[(0, 1), (1, -1)]), h(), fld(a)]),
                    w(1, vec![op(&[(1, 1)]), fld(b)]),
                    w(-1, vec![fld(b), op(&[(-1, 1)])]),
                ],
                vec![w(1, vec![op(&[(2, 1)]), fld(r)]), w(-1, vec![fld(r), op(&[(-1, 1)])])],
                vec![w(1, vec![fld(a), op(&[(2, 1), (1, -1)]), h(), fld(r)])],
            ],
            vec![
                vec![w(1, vec![op(&[(1, 1)]), fld(r)]), w(-1, vec![fld(r), op(&[(-2, 1)])])],
                vec![w(1, vec![fld(a), op(&[(1, 1)]), fld(r)]), w(-1, vec![fld(r), op(&[(-1, 1)]), fld(a)])],
                vec![w(1, vec![fld(b), op(&[(1, 1), (0, -1)]), fld(r)])],
            ],
            vec![
                vec![w(1, vec![fld(r), op(&[(0, 1), (-1, -1)]), h(), fld(a)])],
                vec![w(1, vec![fld(r), op(&[(0, 1), (-1, -1)]), fld(b)])],
                vec![w(1, vec![fld(r), op(&[(2, 1), (-1, -1)]), h(), fld(r)])],
            ],
        ],
    )
}

/// The named closed-form tensors.
pub fn closed_tensor(name: &str, params: &TensorParams) -> Result<NamedTensor> {
    let n = params.n;
    let half = rat(1, 2);
    let need_phi =
        || params.phi.as_ref().map(|p| p.kernel().clone()).ok_or_else(|| Error::InvalidArgument(format!("{name} needs phi")));
    let check_phi = |k: &Kernel| {
        if k.period() != n {
            return Err(Error::PeriodMismatch { left: n, right: k.period() });
        }
        Ok(())
    };
    let (prefactor, tensor) = match name {
        "murho" => {
            let phi = need_phi()?;
            check_phi(&phi)?;
            (Rational::one(), Tensor::Poly(murho(n, &phi)))
        }
        "abrho" => {
            let phi = need_phi()?;
            check_phi(&phi)?;
            (Rational::one(), Tensor::Poly(abrho(n, &phi)))
        }
        "toda" => (half, Tensor::Op(toda(n)?)),
        "ftv_u" => {
            let beta = params.beta.clone().unwrap_or_else(|| PerSeq::constant(n, Rational::one()));
            (half, Tensor::Op(ftv_u(n, beta)?))
        }
        "ftv_S" => (half, Tensor::Op(ftv_s(n)?)),
        "P0" => (half, Tensor::Op(p0(n)?)),
        "P1" => (half, Tensor::Op(p1(n)?)),
        "P2" => (half, Tensor::Op(p2(n)?)),
        _ => return Err(Error::UnknownTensor(name.into())),
    };
    Ok(NamedTensor { name: name.into(), prefactor, tensor })
}

/// Largest `|closed − prefactor · chain|` over all coordinate pairs, at `coords(w)`.
pub fn oracle_match(spec: &BracketSpec, w: &Polygon, named: &NamedTensor) -> Result<Rational> {
    let fields = coords(w)?;
    let families = named.tensor.families();
    let point = fields.select(families)?;
    let ids: Vec<usize> = families.iter().map(|f| Fields::family_index(w.nu(), f)).collect::<Result<_>>()?;
    let closed = named.tensor.eval(&point)?;
    let chain = chain_tensor(spec, w, &ids)?;
    Ok(closed.sub(&chain.scale(&named.prefactor)).max_abs())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `p·V` with `p` periodic chosen so the new coordinate `a^(0)` equals `β`.
///
/// `a^(0)` transforms as `a^(0)_m ↦ a^(0)_m p_{m+ν}/p_m`, so `p_{m+ν} = p_m β_m / a^(0)_m`. This
/// determines `p` up to scale when `gcd(ν, N) = 1` and closes up when `Π β = Π a^(0)`.
pub fn gauge_normalize(w: &Polygon, beta: &PerSeq) -> Result<Polygon> {
    let (nu, n) = (w.nu(), w.period());
    if beta.period() != n {
        return Err(Error::PeriodMismatch { left: n, right: beta.period() });
    }
    if let Some(site) = beta.values().iter().position(|x| x.is_zero()) {
        return Err(Error::ZeroEntry { field: "beta".into(), site });
    }
    let g = gcd(nu, n);
    if g != 1 {
        return Err(Error::NonUniqueGauge { gcd: g });
    }
    let rho = coords(w)?.rho().clone();
    let mut p = vec![Rational::zero(); n];
    let mut m = 0usize;
    p[0] = Rational::one();
    for _ in 0..n - 1 {
        let next = (m + nu) % n;
        p[next] = &p[m] * beta.at(m as i64) / rho.at(m as i64);
        m = next;
    }
    if &p[m] * beta.at(m as i64) / rho.at(m as i64) != p[0] {
        return Err(Error::GaugeUnreachable);
    }
    let id = RatMatrix::identity(nu);
    group_act(&PerSeq::new(p)?, &id, w)
}

/// Dirac bracket on the complement of `constrained`: `A − B X` with `C X = Bᵀ`-side block.
///
/// A singular constraint block is accepted when `C X = P_yx` is solvable and `B` annihilates `ker C`,
/// which makes the result independent of the solution chosen.
pub fn dirac_reduce(p: &RatMatrix, constrained: &[usize]) -> Result<RatMatrix> {
    let d = p.rows();
    if !p.is_square() || constrained.iter().any(|&i| i >= d) {
        return Err(Error::Dimension("constraint index outside the tensor".into()));
    }
    let free: Vec<usize> = (0..d).filter(|i| !constrained.contains(i)).collect();
    let a = p.submatrix(&free, &free);
    let b = p.submatrix(&free, constrained);
    let c = p.submatrix(constrained, constrained);
    let byx = p.submatrix(constrained, &free);
    let ker = c.nullspace();
    for k in &ker {
        if !b.mul_vec(k).iter().all(|x| x.is_zero()) {
            return Err(Error::ConstraintNotSecondClass);
        }
    }
    let mut x = RatMatrix::zeros(constrained.len(), free.len());
    for j in 0..free.len() {
        let col: Vec<Rational> = (0..constrained.len()).map(|i| byx[(i, j)].clone()).collect();
        let sol = c.solve(&col).map_err(|e| match e {
            Error::Inconsistent => Error::ConstraintNotSecondClass,
            e => e,
        })?;
        for (i, v) in sol.particular.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Ok(a.sub(&b.mul(&x)))
}

/// Both sides of the `u ↦ S = u·Du` pushforward of the lattice Virasoro tensor:
/// `J·P(u)·Jᵀ` with `J = diag(Du) + diag(u)·D`, and the closed form at `S`.
pub fn pushforward_sides(u: &PerSeq) -> Result<(RatMatrix, RatMatrix)> {
    let n = u.period();
    let du = u.shift(1);
    let s = u.zip_with(&du, |a, b| a * b)?;
    if let Some(site) = s.values().iter().position(|x| x.is_zero()) {
        return Err(Error::ZeroEntry { field: "S".into(), site });
    }
    let params = TensorParams::new(n);
    let p = closed_tensor("ftv_u", &params)?.tensor.eval(std::slice::from_ref(u))?;
    let d = DPoly::d(1).kernel(n).matrix();
    let diag = |x: &PerSeq| RatMatrix::from_fn(n, n, |i, j| if i == j { x.values()[i].clone() } else { Rational::zero() });
    let j = diag(&du).add(&diag(u).mul(&d));
    let lhs = j.mul(&p).mul(&j.transpose());
    let rhs = closed_tensor("ftv_S", &params)?.tensor.eval(&[s])?;
    Ok((lhs, rhs))
}

pub fn pushforward_check(u: &PerSeq) -> Result<Rational> {
    let (l, r) = pushforward_sides(u)?;
    Ok(l.sub(&r).max_abs())
}

/// Exact `max |Σ_s P^{is}∂_sP^{jk} + c.p.|` at a point.
pub fn jacobiator(t: &PolyTensor, point: &[PerSeq]) -> Result<Rational> {
    let x = t.flat_point(point)?;
    t.bivector().jacobiator(&x).ok_or_else(|| zero_field(t.families(), t.period(), &x))
}

/// Largest Jacobiator of `P + tQ` over the sampled `t` and points. The Jacobiator is quadratic in `t`,
/// so three distinct `t` certify compatibility at a point.
pub fn compatibility(p: &PolyTensor, q: &PolyTensor, points: &[Vec<PerSeq>], ts: &[Rational]) -> Result<Rational> {
    let mut worst = Rational::zero();
    for t in ts {
        let pencil = p.add_scaled(q, t)?;
        for x in points {
            worst = worst.max(jacobiator(&pencil, x)?.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange_algebra::group_act;
    use crate::lattice_ops::phi_special;
    use crate::rational::int;
    use crate::sample::{random_nonvanishing, random_odd_kernel, random_polygon, random_seq, random_sl, trial_rng};

    fn polygon(rows: &[[i64; 2]], m: RatMatrix) -> Polygon {
        Polygon::new(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect(), m).unwrap()
    }

    #[test]
    fn coords_of_unit_recursions() {
        let w = polygon(&[[1, 0], [0, 1], [-1, 1]], RatMatrix::identity(2).scale(&int(-1)));
        let f = coords(&w).unwrap();
        assert_eq!(f.family("mu").unwrap(), &PerSeq::constant(3, int(1)));
        assert_eq!(f.rho(), &PerSeq::constant(3, int(1)));

        let e = |i: usize| (0..3).map(|j| if i == j { int(1) } else { int(0) }).collect::<Vec<_>>();
        let w = Polygon::new(vec![e(0), e(1), e(2)], RatMatrix::identity(3)).unwrap();
        let f = coords(&w).unwrap();
        assert!(f.family("a").unwrap().is_zero());
        assert!(f.family("b").unwrap().is_zero());
        assert_eq!(f.rho(), &PerSeq::constant(3, int(1)));
    }

    #[test]
    fn coords_are_invariant_and_equivariant() {
        let mut rng = trial_rng(21, 0);
        for nu in [2, 3] {
            let w = random_polygon(nu, 5, &mut rng);
            let f = coords(&w).unwrap();
            let g = random_sl(nu, &mut rng);
            assert_eq!(coords(&group_act(&PerSeq::constant(5, int(1)), &g, &w).unwrap()).unwrap(), f);
            let p = random_nonvanishing(5, &mut rng);
            let h = coords(&group_act(&p, &RatMatrix::identity(nu), &w).unwrap()).unwrap();
            for k in 0..nu {
                for m in 0..5i64 {
                    let expect = f.a(k).at(m) * p.at(m + nu as i64) / p.at(m + k as i64);
                    assert_eq!(h.a(k).at(m), &expect);
                }
            }
        }
    }

    #[test]
    fn fields_round_trip_through_polygons() {
        let mut rng = trial_rng(22, 0);
        for nu in [2, 3, 4] {
            let mut a = vec![random_nonvanishing(7, &mut rng)];
            a.extend((1..nu).map(|_| random_seq(7, &mut rng)));
            let f = Fields::new(a).unwrap();
            let w = f.polygon().unwrap();
            assert_eq!(coords(&w).unwrap(), f);
        }
    }

    #[test]
    fn closed_forms_match_the_chain_rule() {
        let mut rng = trial_rng(23, 0);
        let n = 5;
        let w2 = random_polygon(2, n, &mut rng);
        let w3 = random_polygon(3, n, &mut rng);
        let phi = random_odd_kernel(n, &mut rng);
        let spec2 = BracketSpec::standard(2, phi.clone()).unwrap();
        let spec3 = BracketSpec::standard(3, phi.clone()).unwrap();
        let p = TensorParams::new(n).with_phi(phi);
        assert_eq!(oracle_match(&spec2, &w2, &closed_tensor("murho", &p).unwrap()).unwrap(), Rational::zero());
        assert_eq!(oracle_match(&spec3, &w3, &closed_tensor("abrho", &p).unwrap()).unwrap(), Rational::zero());

        let p = TensorParams::new(n);
        for name in ["toda", "P1", "P2"] {
            let t = closed_tensor(name, &p).unwrap();
            let (nu, k) = t.special_phi().unwrap();
            let spec = BracketSpec::standard(nu, phi_special(nu, k, n).unwrap()).unwrap();
            let w = if nu == 2 { &w2 } else { &w3 };
            assert_eq!(oracle_match(&spec, w, &t).unwrap(), Rational::zero(), "{name}");
        }
    }

    #[test]
    fn p0_is_the_leaf_rho_equals_one() {
        let mut rng = trial_rng(24, 0);
        let n = 5;
        let f = Fields::new(vec![PerSeq::constant(n, int(1)), random_seq(n, &mut rng), random_seq(n, &mut rng)]).unwrap();
        let w = f.polygon().unwrap();
        let spec = BracketSpec::standard(3, phi_special(3, 0, n).unwrap()).unwrap();
        let t = closed_tensor("P0", &TensorParams::new(n)).unwrap();
        assert_eq!(oracle_match(&spec, &w, &t).unwrap(), Rational::zero());
    }

    #[test]
    fn rho_is_a_casimir_for_phi_zero_choice() {
        let n = 5;
        let w = random_polygon(2, n, &mut trial_rng(25, 0));
        let spec = BracketSpec::standard(2, phi_special(2, 0, n).unwrap()).unwrap();
        let c = chain_tensor(&spec, &w, &[1, 0]).unwrap();
        for i in 0..2 * n {
            for j in n..2 * n {
                assert!(c[(i, j)].is_zero());
            }
        }
    }

    #[test]
    fn ftv_u_at_zero_is_d_minus_inverse() {
        let t = closed_tensor("ftv_u", &TensorParams::new(5)).unwrap();
        let m = t.tensor.eval(&[PerSeq::zeros(5)]).unwrap();
        let expect = DPoly::from_terms(&[(1, 1), (-1, -1)]).kernel(5).matrix();
        assert_eq!(m, expect);
    }

    #[test]
    fn singular_inverses_are_rejected() {
        assert!(matches!(closed_tensor("ftv_u", &TensorParams::new(4)), Err(Error::SingularOperator { .. })));
        assert!(matches!(closed_tensor("P0", &TensorParams::new(6)), Err(Error::SingularOperator { .. })));
        assert!(matches!(closed_tensor("nope", &TensorParams::new(5)), Err(Error::UnknownTensor(_))));
    }

    #[test]
    fn op_and_poly_forms_agree() {
        let mut rng = trial_rng(26, 0);
        for name in ["toda", "P1", "P2", "ftv_S"] {
            let t = closed_tensor(name, &TensorParams::new(5)).unwrap();
            let point: Vec<PerSeq> = t.tensor.families().iter().map(|_| random_nonvanishing(5, &mut rng)).collect();
            let p = t.tensor.to_poly().unwrap();
            assert!(p.is_antisymmetric(), "{name}");
            assert_eq!(p.eval(&point).unwrap(), t.tensor.eval(&point).unwrap());
        }
    }

    #[test]
    fn dirac_examples() {
        let (b1, b2, c) = (int(2), int(-3), int(5));
        let z = Rational::zero();
        let p = RatMatrix::from_rows(vec![
            vec![z.clone(), b1.clone(), b2.clone()],
            vec![-b1, z.clone(), c.clone()],
            vec![-b2, -c, z],
        ])
        .unwrap();
        assert!(dirac_reduce(&p, &[1, 2]).unwrap().is_zero());

        for (n, seed) in [(3, 0), (5, 1)] {
            let mut rng = trial_rng(27, seed);
            let (mu, beta) = if n == 3 {
                (PerSeq::constant(3, int(1)), PerSeq::constant(3, int(1)))
            } else {
                (random_seq(n, &mut rng), random_nonvanishing(n, &mut rng))
            };
            let toda = closed_tensor("toda", &TensorParams::new(n)).unwrap();
            let at = toda.tensor.eval(&[mu.clone(), beta.clone()]).unwrap();
            let red = dirac_reduce(&at, &(n..2 * n).collect::<Vec<_>>()).unwrap();
            let ftv = closed_tensor("ftv_u", &TensorParams::new(n).with_beta(beta)).unwrap();
            let expect = ftv.tensor.eval(&[mu]).unwrap();
            assert_eq!(red, expect);
            if n == 3 {
                assert!(red.is_zero());
            }
        }
    }

    #[test]
    fn dirac_rejects_first_class_constraints() {
        let p = RatMatrix::from_i64(&[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]]);
        assert_eq!(dirac_reduce(&p, &[1, 2]), Err(Error::ConstraintNotSecondClass));
    }

    #[test]
    fn pushforward_examples() {
        let (l, r) = pushforward_sides(&PerSeq::constant(5, int(1))).unwrap();
        let expect = DPoly::from_terms(&[(1, 1), (2, 1), (-1, -1), (-2, -1)]).kernel(5).matrix();
        assert_eq!(l, expect);
        assert_eq!(r, expect);
        let u = random_nonvanishing(7, &mut trial_rng(28, 0));
        assert_eq!(pushforward_check(&u).unwrap(), Rational::zero());
        assert!(matches!(pushforward_check(&PerSeq::zeros(5)), Err(Error::ZeroEntry { .. })));
    }

    #[test]
    fn gauge_normalization() {
        let mut rng = trial_rng(29, 0);
        let w = random_polygon(2, 5, &mut rng);
        let g = gauge_normalize(&w, &PerSeq::constant(5, int(1))).unwrap();
        let wr = g.wronskian();
        assert!(wr.values().iter().all(|x| x == &wr.values()[0]));
        let w4 = random_polygon(2, 4, &mut rng);
        assert_eq!(gauge_normalize(&w4, &PerSeq::constant(4, int(1))), Err(Error::NonUniqueGauge { gcd: 2 }));
        assert_eq!(gauge_normalize(&w, &PerSeq::constant(5, int(2))), Err(Error::GaugeUnreachable));
        let again = gauge_normalize(&g, &PerSeq::constant(5, int(1))).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn jacobi_holds_for_named_tensors_and_fails_for_a_damaged_one() {
        let mut rng = trial_rng(30, 0);
        for name in ["toda", "P1", "P2", "ftv_u", "ftv_S", "P0"] {
            let t = closed_tensor(name, &TensorParams::new(5)).unwrap().tensor.to_poly().unwrap();
            let point: Vec<PerSeq> = t.families().iter().map(|_| random_nonvanishing(5, &mut rng)).collect();
            assert_eq!(jacobiator(&t, &point).unwrap(), Rational::zero(), "{name}");
        }
        let mut toda = match closed_tensor("toda", &TensorParams::new(5)).unwrap().tensor {
            Tensor::Op(o) => o,
            _ => unreachable!(),
        };
        toda.blocks[0][0].pop();
        let t = toda.to_poly().unwrap();
        let point = vec![random_nonvanishing(5, &mut rng), random_nonvanishing(5, &mut rng)];
        assert!(jacobiator(&t, &point).unwrap() > Rational::zero());
    }

    #[test]
    fn extended_toda_pair_is_compatible() {
        let mut rng = trial_rng(31, 0);
        let p1 = closed_tensor("P1", &TensorParams::new(5)).unwrap().tensor.to_poly().unwrap();
        let p2 = closed_tensor("P2", &TensorParams::new(5)).unwrap().tensor.to_poly().unwrap();
        let points: Vec<Vec<PerSeq>> = (0..2).map(|_| (0..3).map(|_| random_nonvanishing(5, &mut rng)).collect()).collect();
        let ts = [int(1), int(-2), rat(1, 3)];
        assert_eq!(compatibility(&p1, &p2, &points, &ts).unwrap(), Rational::zero());
        assert_eq!(compatibility(&p1, &p1, &points, &ts).unwrap(), Rational::zero());
    }

    #[test]
    fn tensor_json_round_trip() {
        for name in ["toda", "murho"] {
            let p = TensorParams::new(5).with_phi(phi_special(2, 1, 5).unwrap());
            let t = closed_tensor(name, &p).unwrap();
            let s = serde_json::to_string(&t).unwrap();
            assert!(s.contains("\"form\""));
            assert_eq!(serde_json::from_str::<NamedTensor>(&s).unwrap(), t);
        }
    }
}
