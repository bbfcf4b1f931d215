//! Kernels of the brackets among `w` and `α^(k)` for general `ν`, the quadratic
//! coefficient of `{a^(k), a^(k)}`, the Casimir coefficients of `a^(0)`, and the
//! checks that the special `φ^(k)` do what they should.
//!
//! A kernel here is kept formal: `σ·P_σ + φ·P_φ + P_1` with `P_*` Laurent polynomials in `D`.
//! The sign function is the kernel of `(D+1)/(D−1)`, so a combination whose `P_σ` vanishes at
//! `D = 1` folds into `φ·A + B` with `A`, `B` Laurent polynomials, which then has an honest
//! periodic realization.

use num::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coord_reduction::{chain_tensor, coords, Fields};
use crate::error::{Error, Result};
use crate::exchange_algebra::BracketSpec;
use crate::lattice_ops::{phi_special_detailed, DPoly, Kernel, PerSeq};
use crate::rational::{serde_rat_opt, RatMatrix, Rational};
use crate::sample::{nonzero_rational, random_polygon, trial_rng};

/// Largest `ν` for which the polygon-level checks run; above it only kernel identities are checked.
pub const NUMERIC_NU_MAX: usize = 5;

/// `σ·sigma + φ·phi + one`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HatExpr {
    pub sigma: DPoly,
    pub phi: DPoly,
    pub one: DPoly,
}

/// `φ·phi + one` with no sign part left.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folded {
    pub phi: DPoly,
    pub one: DPoly,
}

impl HatExpr {
    pub fn add(&self, o: &Self) -> Self {
        HatExpr { sigma: &self.sigma + &o.sigma, phi: &self.phi + &o.phi, one: &self.one + &o.one }
    }

    pub fn sub(&self, o: &Self) -> Self {
        HatExpr { sigma: &self.sigma - &o.sigma, phi: &self.phi - &o.phi, one: &self.one - &o.one }
    }

    /// `p·self`.
    pub fn apply(&self, p: &DPoly) -> Self {
        HatExpr { sigma: p * &self.sigma, phi: p * &self.phi, one: p * &self.one }
    }

    /// Replaces `σ` by `(D+1)/(D−1)`; `None` unless the sign part is divisible by `D − 1`.
    pub fn fold(&self) -> Option<Folded> {
        let q = self.sigma.div_d_minus_one()?;
        let one = &self.one + &(&q * &(&DPoly::one() + &DPoly::d(1)));
        Some(Folded { phi: self.phi.clone(), one })
    }
}

impl Folded {
    /// The periodic kernel `A∘φ + B`.
    pub fn realize(&self, phi: &Kernel) -> Result<Kernel> {
        let n = phi.period();
        self.phi.kernel(n).compose(phi)?.add(&self.one.kernel(n))
    }
}

/// Kernels of `{w,w}`, `{w,α^(k)}`, `{α^(k),w}` and the `α^(k)α^(k)` part of `{α^(k),α^(k)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HatKernels {
    pub nu: usize,
    pub k: usize,
    pub ww: HatExpr,
    pub w_alk: HatExpr,
    pub alk_w: HatExpr,
    pub alk_alk: HatExpr,
}

fn sum(terms: impl IntoIterator<Item = i64>) -> DPoly {
    terms.into_iter().fold(DPoly::zero(), |acc, r| &acc + &DPoly::d(r))
}

/// The four hat kernels, written as the literal finite sums.
pub fn bracket_hats(nu: usize, k: usize) -> Result<HatKernels> {
    if nu < 2 || k >= nu {
        return Err(Error::InvalidArgument(format!("need nu >= 2 and 0 <= k < nu, got nu={nu}, k={k}")));
    }
    let (nu_i, k_i) = (nu as i64, k as i64);
    let all: Vec<i64> = (0..nu_i).collect();
    let ell: Vec<i64> = (0..=nu_i).filter(|&l| l != k_i).collect();
    let pairs = |ls: &[i64], rs: &[i64], f: &dyn Fn(i64, i64) -> i64| {
        sum(ls.iter().flat_map(|&l| rs.iter().map(move |&r| (l, r))).map(|(l, r)| f(l, r)))
    };
    let inner: Vec<i64> = (1..nu_i).collect();
    let ell_pos: Vec<i64> = (1..=nu_i).filter(|&r| r != k_i).collect();
    let ww = HatExpr {
        sigma: sum(all.iter().map(|l| -l)),
        phi: pairs(&all, &all, &|l, r| r - l),
        one: pairs(&all, &inner, &|l, r| r - l),
    };
    let w_alk = HatExpr {
        sigma: sum(ell.iter().map(|l| -l)),
        phi: pairs(&ell, &all, &|l, r| r - l),
        one: pairs(&ell, &inner, &|l, r| r - l),
    };
    let alk_w = HatExpr {
        sigma: sum(ell.iter().copied()),
        phi: pairs(&ell, &all, &|l, r| l - r),
        one: -&pairs(&ell, &inner, &|l, r| l - r),
    };
    let alk_alk = HatExpr {
        sigma: sum(ell.iter().map(|l| -l)),
        phi: pairs(&ell, &ell, &|l, r| r - l),
        one: &pairs(&ell, &ell_pos, &|l, r| r - l) + &sum((1..=nu_i - k_i).map(|l| -l)).scale(&Rational::from_integer(2.into())),
    };
    Ok(HatKernels { nu, k, ww, w_alk, alk_w, alk_alk })
}

impl HatKernels {
    /// `{a^(k),a^(k)}` quadratic part: `αα − wα − αw + ww`.
    pub fn quad(&self) -> HatExpr {
        self.alk_alk.sub(&self.w_alk).sub(&self.alk_w).add(&self.ww)
    }

    /// `{a^(0),a^(k)}`: `(D−1)(wα − ww)`.
    pub fn casimir_cross(&self) -> HatExpr {
        self.w_alk.sub(&self.ww).apply(&(&DPoly::d(1) - &DPoly::one()))
    }

    /// `{a^(0),a^(0)}`: `(2 − D − D⁻¹) ww`.
    pub fn casimir_self(&self) -> HatExpr {
        let p = &(&DPoly::monomial(0, Rational::from_integer(2.into())) - &DPoly::d(1)) - &DPoly::d(-1);
        self.ww.apply(&p)
    }
}

/// `(D^{−ν} − D^{−k})[(D^ν − D^k)φ + (D^ν + D^k)]`.
pub fn quad_coeff_closed(nu: usize, k: usize) -> Folded {
    let (nu, k) = (nu as i64, k as i64);
    let pre = &DPoly::d(-nu) - &DPoly::d(-k);
    Folded { phi: &pre * &(&DPoly::d(nu) - &DPoly::d(k)), one: &pre * &(&DPoly::d(nu) + &DPoly::d(k)) }
}

/// `(D^{−ν} − D^{−k})[(D^ν − 1)φ + (D^ν + 1)]`; `k = 0` gives the `{a^(0),a^(0)}` kernel.
pub fn casimir_closed(nu: usize, k: usize) -> Folded {
    let (nu, k) = (nu as i64, k as i64);
    let pre = &DPoly::d(-nu) - &DPoly::d(-k);
    Folded { phi: &pre * &(&DPoly::d(nu) - &DPoly::one()), one: &pre * &(&DPoly::d(nu) + &DPoly::one()) }
}

fn folded(e: &HatExpr) -> Result<Folded> {
    e.fold().ok_or_else(|| Error::InvalidArgument("sign part does not cancel".into()))
}

/// Kernel `K` with `{a^(k)_m, a^(k)_n} = a^(k)_m K_{m−n} a^(k)_n + (terms linear in a^(k))`.
pub fn quad_coeff(nu: usize, k: usize, phi: &Kernel) -> Result<Kernel> {
    if k == 0 || k >= nu {
        return Err(Error::InvalidArgument(format!("need 1 <= k < nu, got nu={nu}, k={k}")));
    }
    folded(&bracket_hats(nu, k)?.quad())?.realize(phi)
}

/// Coefficient kernels of `{a^(0), a^(0)}` and `{a^(0), a^(k)}`, `k = 1 … ν−1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CasimirKernels {
    pub rho_rho: Kernel,
    pub rho_a: Vec<Kernel>,
}

impl CasimirKernels {
    pub fn max_abs(&self) -> Rational {
        self.rho_a.iter().map(Kernel::max_abs).fold(self.rho_rho.max_abs(), |a, b| a.max(b))
    }
}

pub fn casimir_coeffs(nu: usize, phi: &Kernel) -> Result<CasimirKernels> {
    let rho_rho = folded(&bracket_hats(nu, 0)?.casimir_self())?.realize(phi)?;
    let rho_a = (1..nu).map(|k| folded(&bracket_hats(nu, k)?.casimir_cross())?.realize(phi)).collect::<Result<_>>()?;
    Ok(CasimirKernels { rho_rho, rho_a })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    fn of(residual: &Rational) -> Self {
        if residual.is_zero() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub k: usize,
    pub verdict: Verdict,
    /// Kernel residual: `quad_coeff` for `k ≥ 1`, the Casimir kernels for `k = 0`.
    #[serde(with = "serde_rat_opt")]
    pub residual: Option<Rational>,
    /// `max |{a^(0)_m, a^(j)_n}|` over random polygons, `k = 0` only.
    #[serde(with = "serde_rat_opt")]
    pub polygon_residual: Option<Rational>,
    pub spectral: Verdict,
    #[serde(with = "serde_rat_opt")]
    pub spectral_residual: Option<Rational>,
    pub phi_nullity: Option<usize>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub nu: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub cases: Vec<CaseReport>,
    pub casimir: Verdict,
    pub spectral: Verdict,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.verdict != Verdict::Fail && c.spectral != Verdict::Fail)
    }
}

/// `max |{a^(0)_m, a^(j)_n}|` over all `m, n, j` at `trials` random polygons.
pub fn casimir_residual(spec: &BracketSpec, trials: usize, seed: u64) -> Result<Rational> {
    let (nu, n) = (spec.nu(), spec.period());
    let ids: Vec<usize> = (0..nu).collect();
    let per: Vec<Rational> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let w = random_polygon(nu, n, &mut trial_rng(seed, t));
            let c = chain_tensor(spec, &w, &ids)?;
            Ok((0..n)
                .flat_map(|i| (0..nu * n).map(move |j| (i, j)))
                .map(|(i, j)| c[(i, j)].abs())
                .fold(Rational::zero(), |a, b| a.max(b)))
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(Rational::zero(), |a, b| a.max(b)))
}

fn chain_at(spec: &BracketSpec, f: &Fields) -> Result<RatMatrix> {
    let ids: Vec<usize> = (0..f.nu()).collect();
    chain_tensor(spec, &f.polygon()?, &ids)
}

fn shifted(f: &Fields, k: usize, lambda: &Rational) -> Result<Fields> {
    let mut a = f.all().to_vec();
    a[k] = PerSeq::from_fn(f.period(), |m| a[k].at(m as i64) + lambda);
    Fields::new(a)
}

/// Affinity of the reduced tensor under `a^(k) → a^(k) + λ`: the largest entry of
/// `P(a + λ_i ξ) − P(a) − (λ_i/λ_1)(P(a + λ_1 ξ) − P(a))` over three random `λ`.
pub fn spectral_residual(spec: &BracketSpec, k: usize, seed: u64, trial: u64) -> Result<Rational> {
    let (nu, n) = (spec.nu(), spec.period());
    let mut rng = trial_rng(seed, trial);
    let f = coords(&random_polygon(nu, n, &mut rng))?;
    let mut lambdas: Vec<Rational> = Vec::new();
    while lambdas.len() < 3 {
        let l = nonzero_rational(&mut rng) + Rational::from_integer(rng.gen_range(-2..=2).into());
        let ok = !l.is_zero() && !lambdas.contains(&l) && (k != 0 || f.a(0).values().iter().all(|x| !(x + &l).is_zero()));
        if ok {
            lambdas.push(l);
        }
    }
    let p0 = chain_at(spec, &f)?;
    let ps: Vec<RatMatrix> = lambdas.iter().map(|l| chain_at(spec, &shifted(&f, k, l)?)).collect::<Result<_>>()?;
    let d1 = ps[0].sub(&p0);
    let mut worst = Rational::zero();
    for (l, p) in lambdas.iter().zip(&ps).skip(1) {
        let r = p.sub(&p0).sub(&d1.scale(&(l / &lambdas[0]))).max_abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

fn check_case(nu: usize, n: usize, k: usize, seed: u64, trials: usize) -> Result<CaseReport> {
    let mut notes = Vec::new();
    let sol = match phi_special_detailed(nu, k, n) {
        Ok(s) => s,
        Err(Error::NoSolution) => {
            return Ok(CaseReport {
                k,
                verdict: Verdict::Skipped,
                residual: None,
                polygon_residual: None,
                spectral: Verdict::Skipped,
                spectral_residual: None,
                phi_nullity: None,
                notes: vec![format!("no odd periodic phi^({k}) exists for N = {n}")],
            })
        }
        Err(e) => return Err(e),
    };
    if sol.nullity > 0 {
        notes.push(format!("phi^({k}) is not unique (nullity {}); the min-norm solution is used", sol.nullity));
    }
    let phi = sol.phi.kernel();
    let residual = if k == 0 { casimir_coeffs(nu, phi)?.max_abs() } else { quad_coeff(nu, k, phi)?.max_abs() };
    let g = gcd(nu, n);
    if k == 0 && g > 1 {
        // At an eigenvalue ω ≠ 1 of D with ω^ν = 1 the Cayley condition reads 0 = 2.
        notes.push(format!(
            "gcd(nu, N) = {g}: (1 - D^nu) phi = 1 + D^nu has no solution, so no phi makes a^(0) a Casimir; \
             the symmetrised phi^(0) leaves the recorded residual"
        ));
        return Ok(CaseReport {
            k,
            verdict: Verdict::Skipped,
            residual: Some(residual),
            polygon_residual: None,
            spectral: Verdict::Skipped,
            spectral_residual: None,
            phi_nullity: Some(sol.nullity),
            notes,
        });
    }
    let numeric = nu <= NUMERIC_NU_MAX;
    let spec = BracketSpec::standard(nu, sol.phi.clone())?;
    let polygon_residual = if k == 0 && numeric {
        Some(casimir_residual(&spec, trials.max(1), seed)?)
    } else {
        if k == 0 {
            notes.push(format!("polygon Casimir check skipped for nu > {NUMERIC_NU_MAX}"));
        }
        None
    };
    let (spectral, spectral_residual) = if !numeric {
        notes.push(format!("spectral check skipped for nu > {NUMERIC_NU_MAX}"));
        (Verdict::Skipped, None)
    } else if n < nu {
        notes.push("spectral check skipped: N < nu, fields do not determine a polygon".into());
        (Verdict::Skipped, None)
    } else {
        let r = spectral_residual(&spec, k, seed, 1000 + k as u64)?;
        (Verdict::of(&r), Some(r))
    };
    let total = polygon_residual.clone().unwrap_or_else(Rational::zero).max(residual.clone());
    Ok(CaseReport {
        k,
        verdict: Verdict::of(&total),
        residual: Some(residual),
        polygon_residual,
        spectral,
        spectral_residual,
        phi_nullity: Some(sol.nullity),
        notes,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Runs every `k` for the given `(ν, N)`.
pub fn check_theorem(nu: usize, n: usize, seed: u64, trials: usize) -> Result<TheoremReport> {
    if nu < 2 || n < 3 {
        return Err(Error::InvalidArgument(format!("need nu >= 2 and N >= 3, got nu={nu}, N={n}")));
    }
    let cases: Vec<CaseReport> = (0..nu).into_par_iter().map(|k| check_case(nu, n, k, seed, trials)).collect::<Result<_>>()?;
    let casimir = cases[0].verdict;
    let spectral = if cases.iter().any(|c| c.spectral == Verdict::Fail) {
        Verdict::Fail
    } else if cases.iter().all(|c| c.spectral == Verdict::Skipped) {
        Verdict::Skipped
    } else {
        Verdict::Pass
    };
    Ok(TheoremReport { nu, n, seed, trials, cases, casimir, spectral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord_reduction::{closed_tensor, TensorParams};
    use crate::lattice_ops::phi_special;
    use crate::poly::Poly;
    use crate::rational::int;
    use crate::sample::random_odd_kernel;

    fn d(r: i64) -> DPoly {
        DPoly::d(r)
    }

    #[test]
    fn folded_identities_hold_for_all_small_nu() {
        for nu in 2..=6 {
            for k in 0..nu {
                let h = bracket_hats(nu, k).unwrap();
                assert_eq!(h.casimir_cross().fold().unwrap(), casimir_closed(nu, k), "cross nu={nu} k={k}");
                if k > 0 {
                    assert_eq!(h.quad().fold().unwrap(), quad_coeff_closed(nu, k), "quad nu={nu} k={k}");
                }
            }
            assert_eq!(bracket_hats(nu, 0).unwrap().casimir_self().fold().unwrap(), casimir_closed(nu, 0));
        }
    }

    #[test]
    fn single_hats_keep_their_sign_part() {
        let h = bracket_hats(3, 1).unwrap();
        assert!(h.ww.fold().is_none());
        assert_eq!(h.ww.sigma.at_one(), int(3));
        assert_eq!(h.w_alk.sigma, &(&DPoly::one() + &d(-2)) + &d(-3));
        assert_eq!(h.alk_w.sigma.reflect(), h.w_alk.sigma);
    }

    #[test]
    fn shifted_w_hats_agree_at_k_zero() {
        // alpha^(0) is w shifted by one site.
        for nu in 2..=5 {
            let h = bracket_hats(nu, 0).unwrap();
            assert_eq!(h.w_alk.sub(&h.ww.apply(&d(-1))).fold().unwrap(), Folded::default());
        }
    }

    #[test]
    fn ww_for_nu_two_and_zero_phi() {
        let h = bracket_hats(2, 0).unwrap();
        assert_eq!(h.ww.sigma, &DPoly::one() + &d(-1));
        assert_eq!(h.ww.one, &DPoly::d(1) + &DPoly::one());
        let c = casimir_coeffs(2, &Kernel::zeros(5)).unwrap();
        let expect = Kernel::new(PerSeq::delta(5, 2)).sub(&Kernel::new(PerSeq::delta(5, -2))).unwrap();
        assert_eq!(c.rho_rho, expect);
    }

    #[test]
    fn quad_coeff_examples() {
        let k = quad_coeff(2, 1, &Kernel::zeros(5)).unwrap();
        assert_eq!(k, (&d(-1) - &d(1)).kernel(5));
        assert!(quad_coeff(2, 1, &phi_special(2, 1, 5).unwrap()).unwrap().is_zero());
        assert!(quad_coeff(5, 3, &phi_special(5, 3, 7).unwrap()).unwrap().is_zero());
        assert!(quad_coeff(3, 0, &Kernel::zeros(5)).is_err());
    }

    #[test]
    fn special_phi_kills_the_coefficients() {
        for nu in 2..=5 {
            for n in [7, 9, 11] {
                let c = casimir_coeffs(nu, &phi_special(nu, 0, n).unwrap()).unwrap().max_abs();
                assert_eq!(c.is_zero(), gcd(nu, n) == 1, "{nu} {n}");
                for k in 1..nu {
                    assert!(quad_coeff(nu, k, &phi_special(nu, k, n).unwrap()).unwrap().is_zero(), "{nu} {k} {n}");
                }
            }
        }
    }

    fn quad_monomial_coeff(p: &Poly, v: usize, w: usize) -> Rational {
        let mono: Vec<(u32, i32)> = if v == w { vec![(v as u32, 2)] } else { vec![(v.min(w) as u32, 1), (v.max(w) as u32, 1)] };
        p.terms().find(|(m, _)| **m == mono).map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero)
    }

    #[test]
    fn general_kernels_reproduce_low_rank_tables() {
        let n = 7;
        let phi = random_odd_kernel(n, &mut trial_rng(40, 0));
        let p = TensorParams::new(n).with_phi(phi.clone());
        // (name, nu, [(family position, k)]) with the rho family last.
        let cases: [(&str, usize, Vec<(usize, usize)>); 2] =
            [("murho", 2, vec![(0, 1), (1, 0)]), ("abrho", 3, vec![(0, 2), (1, 1), (2, 0)])];
        for (name, nu, fams) in cases {
            let t = closed_tensor(name, &p).unwrap().tensor.to_poly().unwrap();
            for (pos, k) in fams {
                let kern = if k == 0 { casimir_coeffs(nu, &phi).unwrap().rho_rho } else { quad_coeff(nu, k, &phi).unwrap() };
                for m in 0..n {
                    for l in 0..n {
                        let (vm, vl) = (t.var(pos, m), t.var(pos, l));
                        let c = quad_monomial_coeff(t.bivector().get(vm, vl), vm, vl);
                        let expect = if m == l { kern.at(0).clone() } else { kern.at(m as i64 - l as i64).clone() };
                        assert_eq!(c, expect, "{name} k={k} m={m} l={l}");
                    }
                }
            }
            // {rho, a^(k)}: coefficient of rho_m a^(k)_n.
            let rho = t.families().len() - 1;
            let fams: Vec<(usize, usize)> = if nu == 2 { vec![(0, 1)] } else { vec![(0, 2), (1, 1)] };
            let ck = casimir_coeffs(nu, &phi).unwrap();
            for (pos, k) in fams {
                for m in 0..n {
                    for l in 0..n {
                        let (vm, vl) = (t.var(rho, m), t.var(pos, l));
                        let c = quad_monomial_coeff(t.bivector().get(vm, vl), vm, vl);
                        assert_eq!(c, ck.rho_a[k - 1].at(m as i64 - l as i64).clone(), "{name} rho-a{k} m={m} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn theorem_small_cases_pass() {
        for (nu, n) in [(2, 7), (3, 5)] {
            let r = check_theorem(nu, n, 3, 2).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.casimir, Verdict::Pass);
            assert_eq!(r.spectral, Verdict::Pass);
            assert!(r.cases.iter().all(|c| c.verdict == Verdict::Pass));
        }
    }

    #[test]
    fn spectral_shift_fails_for_a_generic_phi() {
        let n = 5;
        let phi = random_odd_kernel(n, &mut trial_rng(41, 0));
        let spec = BracketSpec::standard(2, phi).unwrap();
        assert!(spectral_residual(&spec, 1, 7, 0).unwrap() > Rational::zero());
    }

    #[test]
    fn casimir_case_is_skipped_when_nu_divides_into_n() {
        let r = check_theorem(3, 9, 2, 1).unwrap();
        assert_eq!(r.casimir, Verdict::Skipped);
        assert!(r.cases[0].residual.as_ref().unwrap() > &Rational::zero());
        assert!(r.cases[1..].iter().all(|c| c.verdict == Verdict::Pass && c.spectral == Verdict::Pass));
        assert!(r.passed());
    }

    #[test]
    fn large_nu_reports_skips() {
        let r = check_theorem(17, 4, 1, 1).unwrap();
        assert_eq!(r.cases.len(), 17);
        assert!(r.passed());
        assert_eq!(r.spectral, Verdict::Skipped);
        assert!(r.cases.iter().all(|c| !c.notes.is_empty()));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"skipped\""));
    }
}
