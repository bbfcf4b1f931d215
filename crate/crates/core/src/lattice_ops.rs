//! Periodic sequences, shift polynomials and circulant kernels.
//!
//! A kernel `K` acts on periodic sequences by `(K·f)_m = Σ_n K_{m-n} f_n`. The shift `D`,
//! `(Df)_m = f_{m+1}`, has kernel `K_{-1} = 1`, so `Σ c_r D^r` has kernel `K_m = c_{-m mod N}`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{fmt_rat, int, parse_rat, serde_rat_vec, RatMatrix, Rational};

fn residue(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

/// Element of `Fun(Z/NZ, Q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PerSeqDoc")]
pub struct PerSeq {
    #[serde(rename = "N")]
    n: usize,
    #[serde(with = "serde_rat_vec")]
    values: Vec<Rational>,
}

#[derive(Deserialize)]
struct PerSeqDoc {
    #[serde(rename = "N")]
    n: usize,
    #[serde(with = "serde_rat_vec")]
    values: Vec<Rational>,
}

impl TryFrom<PerSeqDoc> for PerSeq {
    type Error = Error;
    fn try_from(d: PerSeqDoc) -> Result<Self> {
        if d.values.len() != d.n {
            return Err(Error::Dimension(format!("N = {} but {} values", d.n, d.values.len())));
        }
        PerSeq::new(d.values)
    }
}

impl PerSeq {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("period must be at least 1".into()));
        }
        Ok(PerSeq { n: values.len(), values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> Rational) -> Self {
        assert!(n >= 1, "period must be at least 1");
        PerSeq { n, values: (0..n).map(f).collect() }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Self::from_fn(n, |_| c.clone())
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, Rational::zero())
    }

    pub fn delta(n: usize, at: i64) -> Self {
        let r = residue(at, n);
        Self::from_fn(n, |m| if m == r { Rational::one() } else { Rational::zero() })
    }

    pub fn from_i64(v: &[i64]) -> Self {
        Self::new(v.iter().map(|&x| int(x)).collect()).expect("non-empty literal")
    }

    pub fn period(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    /// Value at any integer, reduced mod N.
    pub fn at(&self, m: i64) -> &Rational {
        &self.values[residue(m, self.n)]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|x| x.is_zero())
    }

    /// `m -> f_{-m}`.
    pub fn reflect(&self) -> Self {
        Self::from_fn(self.n, |m| self.at(-(m as i64)).clone())
    }

    /// `m -> f_{m+r}`, i.e. `D^r f`.
    pub fn shift(&self, r: i64) -> Self {
        Self::from_fn(self.n, |m| self.at(m as i64 + r).clone())
    }

    pub fn nonvanishing(&self) -> bool {
        self.values.iter().all(|x| !x.is_zero())
    }

    pub fn max_abs(&self) -> Rational {
        crate::rational::max_abs(&self.values)
    }

    pub fn zip_with(&self, o: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        check_period(self.n, o.n)?;
        Ok(Self::from_fn(self.n, |m| f(&self.values[m], &o.values[m])))
    }
}

fn check_period(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::PeriodMismatch { left: a, right: b });
    }
    Ok(())
}

/// Laurent polynomial `Σ c_r D^r` in the shift operator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DPoly {
    terms: BTreeMap<i64, Rational>,
}

impl Serialize for DPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc {
            terms: BTreeMap<i64, String>,
        }
        Doc { terms: self.terms.iter().map(|(k, v)| (*k, fmt_rat(v))).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Doc {
            terms: BTreeMap<String, String>,
        }
        let doc = Doc::deserialize(d)?;
        let mut p = DPoly::zero();
        for (k, v) in doc.terms {
            let k: i64 = k.parse().map_err(serde::de::Error::custom)?;
            p.add_term(k, parse_rat(&v).map_err(serde::de::Error::custom)?);
        }
        Ok(p)
    }
}

impl DPoly {
    pub fn zero() -> Self {
        DPoly::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, Rational::one())
    }

    /// `c D^r`.
    pub fn monomial(r: i64, c: Rational) -> Self {
        let mut p = DPoly::zero();
        p.add_term(r, c);
        p
    }

    /// `D^r`.
    pub fn d(r: i64) -> Self {
        Self::monomial(r, Rational::one())
    }

    pub fn from_terms(terms: &[(i64, i64)]) -> Self {
        let mut p = DPoly::zero();
        for &(r, c) in terms {
            p.add_term(r, int(c));
        }
        p
    }

    pub fn add_term(&mut self, r: i64, c: Rational) {
        let e = self.terms.entry(r).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&r);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn coeff(&self, r: i64) -> Rational {
        self.terms.get(&r).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut p = DPoly::zero();
        for (r, v) in &self.terms {
            p.add_term(*r, v * c);
        }
        p
    }

    /// Value at `D = 1`.
    pub fn at_one(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |a, b| a + b)
    }

    /// `p(D^{-1})`.
    pub fn reflect(&self) -> Self {
        let mut p = DPoly::zero();
        for (r, v) in &self.terms {
            p.add_term(-r, v.clone());
        }
        p
    }

    /// Exact quotient by `D - 1`; `None` unless `p(1) = 0`.
    pub fn div_d_minus_one(&self) -> Option<Self> {
        if !self.at_one().is_zero() {
            return None;
        }
        let (Some(&lo), Some(&hi)) = (self.terms.keys().next(), self.terms.keys().next_back()) else {
            return Some(DPoly::zero());
        };
        // p = (D-1) q gives q_r = -(c_lo + ... + c_r).
        let mut q = DPoly::zero();
        let mut acc = Rational::zero();
        for r in lo..hi {
            acc += self.coeff(r);
            q.add_term(r, -acc.clone());
        }
        Some(q)
    }

    /// The kernel of this operator on sequences of period `n`.
    pub fn kernel(&self, n: usize) -> Kernel {
        kernel_from_dpoly(self, n)
    }
}

impl Add for &DPoly {
    type Output = DPoly;
    fn add(self, o: &DPoly) -> DPoly {
        let mut p = self.clone();
        for (r, v) in &o.terms {
            p.add_term(*r, v.clone());
        }
        p
    }
}

impl Sub for &DPoly {
    type Output = DPoly;
    fn sub(self, o: &DPoly) -> DPoly {
        let mut p = self.clone();
        for (r, v) in &o.terms {
            p.add_term(*r, -v.clone());
        }
        p
    }
}

impl Mul for &DPoly {
    type Output = DPoly;
    fn mul(self, o: &DPoly) -> DPoly {
        let mut p = DPoly::zero();
        for (r, a) in &self.terms {
            for (s, b) in &o.terms {
                p.add_term(r + s, a * b);
            }
        }
        p
    }
}

impl Neg for &DPoly {
    type Output = DPoly;
    fn neg(self) -> DPoly {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for DPoly {
            type Output = DPoly;
            fn $f(self, o: DPoly) -> DPoly {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Periodic kernel of a circulant operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Kernel {
    seq: PerSeq,
}

impl Kernel {
    pub fn new(seq: PerSeq) -> Self {
        Kernel { seq }
    }

    pub fn identity(n: usize) -> Self {
        Kernel { seq: PerSeq::delta(n, 0) }
    }

    pub fn zeros(n: usize) -> Self {
        Kernel { seq: PerSeq::zeros(n) }
    }

    pub fn seq(&self) -> &PerSeq {
        &self.seq
    }

    pub fn period(&self) -> usize {
        self.seq.n
    }

    pub fn at(&self, m: i64) -> &Rational {
        self.seq.at(m)
    }

    pub fn values(&self) -> &[Rational] {
        self.seq.values()
    }

    pub fn is_zero(&self) -> bool {
        self.seq.is_zero()
    }

    pub fn is_odd(&self) -> bool {
        (0..self.period() as i64).all(|m| *self.at(-m) == -self.at(m).clone())
    }

    /// Operator matrix `[K]_{mn} = K_{m-n}`.
    pub fn matrix(&self) -> RatMatrix {
        let n = self.period();
        RatMatrix::from_fn(n, n, |i, j| self.at(i as i64 - j as i64).clone())
    }

    pub fn compose(&self, o: &Kernel) -> Result<Kernel> {
        Ok(Kernel { seq: convolve_apply(self, &o.seq)? })
    }

    pub fn add(&self, o: &Kernel) -> Result<Kernel> {
        Ok(Kernel { seq: self.seq.zip_with(&o.seq, |a, b| a + b)? })
    }

    pub fn sub(&self, o: &Kernel) -> Result<Kernel> {
        Ok(Kernel { seq: self.seq.zip_with(&o.seq, |a, b| a - b)? })
    }

    pub fn scale(&self, c: &Rational) -> Kernel {
        Kernel { seq: PerSeq::from_fn(self.period(), |m| &self.seq.values[m] * c) }
    }

    pub fn invert(&self) -> Result<Kernel> {
        invert(self)
    }

    pub fn max_abs(&self) -> Rational {
        self.seq.max_abs()
    }
}

/// Kernel that is odd: `K_{-m} = -K_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct OddKernel(Kernel);

impl OddKernel {
    pub fn new(k: Kernel) -> Result<Self> {
        if !k.is_odd() {
            return Err(Error::InvalidArgument("kernel is not odd".into()));
        }
        Ok(OddKernel(k))
    }

    pub fn zeros(n: usize) -> Self {
        OddKernel(Kernel::zeros(n))
    }

    pub fn kernel(&self) -> &Kernel {
        &self.0
    }

    pub fn into_kernel(self) -> Kernel {
        self.0
    }
}

impl std::ops::Deref for OddKernel {
    type Target = Kernel;
    fn deref(&self) -> &Kernel {
        &self.0
    }
}

impl<'de> Deserialize<'de> for OddKernel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OddKernel::new(Kernel::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

pub fn kernel_from_dpoly(p: &DPoly, n: usize) -> Kernel {
    assert!(n >= 1, "period must be at least 1");
    let mut v = vec![Rational::zero(); n];
    for (r, c) in p.terms() {
        v[residue(-r, n)] += c;
    }
    Kernel { seq: PerSeq { n, values: v } }
}

pub fn convolve_apply(k: &Kernel, f: &PerSeq) -> Result<PerSeq> {
    check_period(k.period(), f.n)?;
    let n = f.n as i64;
    Ok(PerSeq::from_fn(f.n, |m| {
        (0..n)
            .filter(|&j| !f.values[j as usize].is_zero())
            .fold(Rational::zero(), |acc, j| acc + k.at(m as i64 - j) * &f.values[j as usize])
    }))
}

pub fn invert(k: &Kernel) -> Result<Kernel> {
    let n = k.period();
    let sol = match k.matrix().solve(PerSeq::delta(n, 0).values()) {
        Ok(s) => s,
        Err(Error::Inconsistent) => {
            let nullity = k.matrix().nullspace().len();
            return Err(Error::SingularOperator { nullity });
        }
        Err(e) => return Err(e),
    };
    if !sol.nullspace.is_empty() {
        return Err(Error::SingularOperator { nullity: sol.nullspace.len() });
    }
    Ok(Kernel { seq: PerSeq { n, values: sol.particular } })
}

/// Odd solution together with the dimension of the odd homogeneous solution space.
#[derive(Clone, Debug)]
pub struct PhiSolution {
    pub phi: OddKernel,
    pub nullity: usize,
}

/// Odd periodic `φ` with `A φ = b` as kernels; the min-norm one if not unique.
pub fn solve_phi(a: &DPoly, b: &DPoly, n: usize) -> Result<OddKernel> {
    Ok(solve_phi_detailed(a, b, n)?.phi)
}

pub fn solve_phi_detailed(a: &DPoly, b: &DPoly, n: usize) -> Result<PhiSolution> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("period {n} < 3")));
    }
    let am = kernel_from_dpoly(a, n).matrix();
    let rhs = kernel_from_dpoly(b, n);
    // N convolution equations followed by N oddness equations φ_m + φ_{-m} = 0.
    let sys = RatMatrix::from_fn(2 * n, n, |i, j| {
        if i < n {
            am[(i, j)].clone()
        } else {
            let m = i - n;
            let mut v = Rational::zero();
            if j == m {
                v += Rational::one();
            }
            if j == residue(-(m as i64), n) {
                v += Rational::one();
            }
            v
        }
    });
    let mut b_full = rhs.values().to_vec();
    b_full.extend(std::iter::repeat(Rational::zero()).take(n));
    let sol = match sys.solve(&b_full) {
        Ok(s) => s,
        Err(Error::Inconsistent) => return Err(Error::NoSolution),
        Err(e) => return Err(e),
    };
    let phi = OddKernel::new(Kernel { seq: PerSeq { n, values: sol.min_norm() } })?;
    Ok(PhiSolution { phi, nullity: sol.nullspace.len() })
}

/// The symmetrised equation `(2 - D^j - D^{-j}) φ = D^j - D^{-j}`, `j = ν - k`.
pub fn phi_equation(nu: usize, k: usize) -> (DPoly, DPoly) {
    let j = (nu - k) as i64;
    let a = &(&DPoly::monomial(0, int(2)) - &DPoly::d(j)) - &DPoly::d(-j);
    let b = &DPoly::d(j) - &DPoly::d(-j);
    (a, b)
}

pub fn phi_special(nu: usize, k: usize, n: usize) -> Result<OddKernel> {
    Ok(phi_special_detailed(nu, k, n)?.phi)
}

pub fn phi_special_detailed(nu: usize, k: usize, n: usize) -> Result<PhiSolution> {
    if nu < 2 || k >= nu {
        return Err(Error::InvalidArgument(format!("need nu >= 2 and 0 <= k < nu, got nu={nu}, k={k}")));
    }
    let (a, b) = phi_equation(nu, k);
    solve_phi_detailed(&a, &b, n)
}

/// The discrete sign on Z.
pub fn sign(k: i64) -> i64 {
    k.signum()
}

/// The sign function restricted to the window `|k| < N`.
#[derive(Clone, Copy, Debug)]
pub struct SignWindow {
    n: usize,
}

impl SignWindow {
    pub fn new(n: usize) -> Self {
        SignWindow { n }
    }

    pub fn get(&self, k: i64) -> Option<Rational> {
        (k.unsigned_abs() < self.n as u64).then(|| int(sign(k)))
    }
}

/// Residual of `σ_{k+1} - σ_k = δ_k + δ_{k+1}` over the window.
pub fn sign_window_residual(n: usize) -> Rational {
    let w = SignWindow::new(n);
    let lim = n as i64 - 1;
    let delta = |k: i64| if k == 0 { int(1) } else { int(0) };
    (-lim..lim)
        .map(|k| (w.get(k + 1).unwrap() - w.get(k).unwrap() - delta(k) - delta(k + 1)).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn seq(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(p, q)| rat(p, q)).collect()
    }

    #[test]
    fn shift_kernel_sits_at_minus_one() {
        let k = kernel_from_dpoly(&DPoly::d(1), 5);
        assert_eq!(k.values(), PerSeq::from_i64(&[0, 0, 0, 0, 1]).values());
        assert_eq!(kernel_from_dpoly(&DPoly::one(), 4), Kernel::identity(4));
        let k = kernel_from_dpoly(&DPoly::from_terms(&[(1, 1), (-1, -1)]), 5);
        assert_eq!(k.values(), PerSeq::from_i64(&[0, -1, 0, 0, 1]).values());
    }

    #[test]
    fn convolution_examples() {
        let f = PerSeq::from_i64(&[1, 2, 3, 4, 5]);
        let d = kernel_from_dpoly(&DPoly::d(1), 5);
        assert_eq!(convolve_apply(&d, &f).unwrap(), PerSeq::from_i64(&[2, 3, 4, 5, 1]));
        let di = kernel_from_dpoly(&DPoly::d(-1), 5);
        assert_eq!(d.compose(&di).unwrap(), Kernel::identity(5));
        let saw = phi_special(2, 1, 5).unwrap();
        assert_eq!(convolve_apply(&saw, &PerSeq::delta(5, 0)).unwrap(), saw.seq().clone());
        assert!(matches!(convolve_apply(&d, &PerSeq::zeros(4)), Err(Error::PeriodMismatch { .. })));
    }

    #[test]
    fn inversion_examples() {
        let k = kernel_from_dpoly(&DPoly::from_terms(&[(0, 1), (1, 1)]), 3);
        let want = kernel_from_dpoly(&DPoly::from_terms(&[(0, 1), (1, -1), (2, 1)]).scale(&rat(1, 2)), 3);
        assert_eq!(invert(&k).unwrap(), want);
        let k = kernel_from_dpoly(&DPoly::from_terms(&[(0, 1), (1, -1)]), 5);
        assert_eq!(invert(&k), Err(Error::SingularOperator { nullity: 1 }));
        let k = kernel_from_dpoly(&DPoly::from_terms(&[(0, 1), (1, 1)]), 4);
        assert!(matches!(invert(&k), Err(Error::SingularOperator { .. })));
    }

    #[test]
    fn solve_phi_examples() {
        let a = DPoly::from_terms(&[(0, 1), (1, -2), (2, 1)]);
        let b = DPoly::from_terms(&[(0, 1), (2, -1)]);
        let phi = solve_phi(&a, &b, 5).unwrap();
        assert_eq!(phi.values(), seq(&[(0, 1), (-3, 5), (-1, 5), (1, 5), (3, 5)]).as_slice());
        for m in 0..5i64 {
            let d = |k: i64| if k.rem_euclid(5) == 0 { int(1) } else { int(0) };
            let lhs = int(2) * phi.at(m) - phi.at(m + 1) - phi.at(m - 1);
            assert_eq!(lhs, d(m + 1) - d(m - 1));
        }

        let a = DPoly::from_terms(&[(3, 1), (2, -1), (1, -1), (0, 1)]);
        let b = DPoly::from_terms(&[(3, -1), (2, 1), (1, -1), (0, 1)]);
        let phi = solve_phi(&a, &b, 5).unwrap();
        assert_eq!(phi.values(), seq(&[(0, 1), (1, 5), (-3, 5), (3, 5), (-1, 5)]).as_slice());

        let a = DPoly::from_terms(&[(0, 1), (1, -1)]);
        assert_eq!(solve_phi(&a, &DPoly::monomial(0, int(2)), 5), Err(Error::NoSolution));
    }

    #[test]
    fn phi_special_examples() {
        let p = phi_special(2, 1, 5).unwrap();
        assert_eq!(p.values(), seq(&[(0, 1), (-3, 5), (-1, 5), (1, 5), (3, 5)]).as_slice());
        let p = phi_special(2, 0, 5).unwrap();
        assert_eq!(p.values(), seq(&[(0, 1), (1, 5), (-3, 5), (3, 5), (-1, 5)]).as_slice());
        let p = phi_special_detailed(3, 1, 4).unwrap();
        assert!(p.phi.is_zero());
        assert_eq!(p.nullity, 0);
        assert!(phi_special(1, 0, 5).is_err());
    }

    #[test]
    fn odd_kernel_rejects_even_input() {
        assert!(OddKernel::new(Kernel::identity(5)).is_err());
        assert!(OddKernel::new(Kernel::zeros(4)).is_ok());
    }

    #[test]
    fn dpoly_json_round_trip() {
        let p = DPoly::from_terms(&[(-2, 3), (1, -1)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"terms":{"-2":"3","1":"-1"}}"#);
        assert_eq!(serde_json::from_str::<DPoly>(&s).unwrap(), p);
        let k = phi_special(2, 1, 5).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"N":5,"values":["0","-3/5","-1/5","1/5","3/5"]}"#);
        assert_eq!(serde_json::from_str::<OddKernel>(&s).unwrap(), k);
    }

    #[test]
    fn division_by_d_minus_one() {
        let p = &DPoly::d(-3) - &DPoly::d(-1);
        let q = p.div_d_minus_one().unwrap();
        assert_eq!(&q * &(&DPoly::d(1) - &DPoly::one()), p);
        assert!(DPoly::one().div_d_minus_one().is_none());
    }

    fn dpoly() -> impl Strategy<Value = DPoly> {
        proptest::collection::vec((-4i64..=4, -3i64..=3), 0..5).prop_map(|t| DPoly::from_terms(&t))
    }

    proptest! {
        #[test]
        fn kernel_map_is_a_ring_homomorphism(p in dpoly(), q in dpoly(), n in 1usize..9) {
            let lhs = kernel_from_dpoly(&(&p * &q), n);
            let rhs = kernel_from_dpoly(&p, n).compose(&kernel_from_dpoly(&q, n)).unwrap();
            prop_assert_eq!(lhs, rhs);
            let sum = kernel_from_dpoly(&(&p + &q), n);
            prop_assert_eq!(sum, kernel_from_dpoly(&p, n).add(&kernel_from_dpoly(&q, n)).unwrap());
        }

        #[test]
        fn inverse_is_two_sided(p in dpoly(), n in 1usize..8) {
            let k = kernel_from_dpoly(&p, n);
            if let Ok(inv) = invert(&k) {
                prop_assert_eq!(k.compose(&inv).unwrap(), Kernel::identity(n));
                prop_assert_eq!(inv.compose(&k).unwrap(), Kernel::identity(n));
            }
        }

        #[test]
        fn special_phi_is_odd_and_solves_its_equation(nu in 2usize..7, kk in 0usize..6, n in 3usize..13) {
            let k = kk % nu;
            let sol = phi_special_detailed(nu, k, n).unwrap();
            prop_assert!(sol.phi.is_odd());
            let (a, b) = phi_equation(nu, k);
            let lhs = kernel_from_dpoly(&a, n).compose(sol.phi.kernel()).unwrap();
            prop_assert_eq!(lhs, kernel_from_dpoly(&b, n));
            if num::integer::gcd(nu - k, n) == 1 {
                prop_assert_eq!(sol.nullity, 0);
            }
        }

        #[test]
        fn sign_window_steps_by_deltas(n in 1usize..40) {
            prop_assert_eq!(sign_window_residual(n), Rational::zero());
        }
    }
}
