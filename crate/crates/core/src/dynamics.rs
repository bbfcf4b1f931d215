//! Hamiltonian vector fields on field space, the lifted Toda flow on polygons, transfer
//! matrices and their invariants, and the Lie-derivative deformation of a Poisson tensor.

use std::fmt::Write as _;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::coord_reduction::{compatibility, coord_jets, jacobiator, Fields, PolyTensor, Tensor};
use crate::error::{Error, Result};
use crate::exchange_algebra::{JetPolygon, Polygon};
use crate::lattice_ops::PerSeq;
use crate::poly::{Poly, Ring};
use crate::rational::{rat, to_f64, Rational};

/// A polynomial function of `families × N` field values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observable {
    pub name: String,
    families: Vec<String>,
    n: usize,
    poly: Poly,
}

fn var(n: usize, family: usize, site: usize) -> usize {
    family * n + site
}

impl Observable {
    pub fn new(name: &str, families: &[&str], n: usize, poly: Poly) -> Self {
        Observable { name: name.into(), families: families.iter().map(|s| s.to_string()).collect(), n, poly }
    }

    fn position(families: &[&str], family: &str) -> Result<usize> {
        families.iter().position(|f| *f == family).ok_or_else(|| Error::InvalidArgument(format!("no family {family:?}")))
    }

    /// `Σ_m x_m` for the family `family`.
    pub fn sum(families: &[&str], n: usize, family: &str) -> Result<Self> {
        let i = Self::position(families, family)?;
        let p = (0..n).fold(Poly::zero(), |acc, m| acc + Poly::var(var(n, i, m)));
        Ok(Self::new(&format!("sum {family}"), families, n, p))
    }

    /// `Π_m x_m` for the family `family`.
    pub fn product(families: &[&str], n: usize, family: &str) -> Result<Self> {
        let i = Self::position(families, family)?;
        let p = (0..n).fold(Poly::one(), |acc, m| &acc * &Poly::var(var(n, i, m)));
        Ok(Self::new(&format!("prod {family}"), families, n, p))
    }

    /// `e_j` of the transfer monodromy: the `j`-th elementary symmetric function of its eigenvalues.
    /// The families are read as `a^(k)` through their names.
    pub fn transfer(families: &[&str], n: usize, j: usize) -> Result<Self> {
        let nu = families.len();
        if j == 0 || j > nu {
            return Err(Error::InvalidArgument(format!("invariant index {j} outside 1..={nu}")));
        }
        let mut fam_of = vec![0; nu];
        for (pos, f) in families.iter().enumerate() {
            fam_of[Fields::family_index(nu, f)?] = pos;
        }
        let vars: Vec<Vec<Poly>> = (0..nu).map(|k| (0..n).map(|m| Poly::var(var(n, fam_of[k], m))).collect()).collect();
        let t = monodromy(nu, n, |k, m| vars[k][m].clone());
        let e = char_coeffs(&t);
        Ok(Self::new(&format!("e{j}(T)"), families, n, e[j - 1].clone()))
    }

    pub fn families(&self) -> &[String] {
        &self.families
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    fn flat(&self, point: &[PerSeq]) -> Result<Vec<Rational>> {
        if point.len() != self.families.len() {
            return Err(Error::Dimension(format!("{} sequences for {} families", point.len(), self.families.len())));
        }
        if let Some(p) = point.iter().find(|p| p.period() != self.n) {
            return Err(Error::PeriodMismatch { left: self.n, right: p.period() });
        }
        Ok(point.iter().flat_map(|p| p.values().iter().cloned()).collect())
    }

    pub fn value(&self, point: &[PerSeq]) -> Result<Rational> {
        let x = self.flat(point)?;
        self.poly.eval(&x).ok_or_else(|| Error::InvalidArgument("observable has a pole at the point".into()))
    }

    pub fn gradient(&self, point: &[PerSeq]) -> Result<Vec<Rational>> {
        let x = self.flat(point)?;
        let mut g = vec![Rational::zero(); x.len()];
        for s in self.poly.variables() {
            g[s] = self
                .poly
                .derivative(s)
                .eval(&x)
                .ok_or_else(|| Error::InvalidArgument("observable has a pole at the point".into()))?;
        }
        Ok(g)
    }
}

/// Companion matrix of the recursion at one site: ones below the diagonal and
/// `(−1)^{ν−i+1} a^(i)_m` in the last column.
fn companion<R: Ring>(nu: usize, a: impl Fn(usize) -> R) -> Vec<Vec<R>> {
    let mut l = vec![vec![R::ring_zero(); nu]; nu];
    for i in 0..nu {
        let x = a(i);
        l[i][nu - 1] = if (nu - i + 1) % 2 == 0 { x } else { -x };
        if i + 1 < nu {
            l[i + 1][i] = R::from_rat(&Rational::one());
        }
    }
    l
}

fn matmul<R: Ring>(a: &[Vec<R>], b: &[Vec<R>]) -> Vec<Vec<R>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(R::ring_zero(), |acc, k| {
                        if a[i][k].is_ring_zero() || b[k][j].is_ring_zero() {
                            acc
                        } else {
                            acc + a[i][k].clone() * b[k][j].clone()
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// `T = L_0 L_1 ⋯ L_{N−1}` with `a(k, m) = a^(k)_m`.
fn monodromy<R: Ring>(nu: usize, n: usize, a: impl Fn(usize, usize) -> R) -> Vec<Vec<R>> {
    (0..n).fold(
        (0..nu).map(|i| (0..nu).map(|j| if i == j { R::from_rat(&Rational::one()) } else { R::ring_zero() }).collect()).collect(),
        |acc: Vec<Vec<R>>, m| matmul(&acc, &companion(nu, |k| a(k, m))),
    )
}

/// `e_1 … e_ν` of a square matrix, by the Faddeev–LeVerrier recursion.
fn char_coeffs<R: Ring>(t: &[Vec<R>]) -> Vec<R> {
    let n = t.len();
    let mut m: Vec<Vec<R>> = vec![vec![R::ring_zero(); n]; n];
    let mut c = R::from_rat(&Rational::one());
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        // M_k = T M_{k−1} + c_{k−1} I, c_k = −tr(T M_k)/k.
        let mut mk = matmul(t, &m);
        for (i, row) in mk.iter_mut().enumerate() {
            let cur = std::mem::replace(&mut row[i], R::ring_zero());
            row[i] = cur + c.clone();
        }
        let tm = matmul(t, &mk);
        let tr = (0..n).fold(R::ring_zero(), |acc, i| acc + tm[i][i].clone());
        c = -tr.scale_by(&rat(1, k as i64));
        // Characteristic polynomial Σ c_k x^{n−k} with c_k = (−1)^k e_k.
        out.push(if k % 2 == 0 { c.clone() } else { -c.clone() });
        m = mk;
    }
    out
}

/// Transfer monodromy of the fields.
pub fn transfer_matrix(fields: &Fields) -> Vec<Vec<Rational>> {
    monodromy(fields.nu(), fields.period(), |k, m| fields.a(k).at(m as i64).clone())
}

/// `[e_1(T), …, e_ν(T)]`: the trace first, the determinant last.
pub fn transfer_invariants(fields: &Fields) -> Vec<Rational> {
    char_coeffs(&transfer_matrix(fields))
}

fn unflatten(n: usize, v: Vec<Rational>) -> Result<Vec<PerSeq>> {
    v.chunks(n).map(|c| PerSeq::new(c.to_vec())).collect()
}

fn check_families(t: &[String], h: &Observable) -> Result<()> {
    if t != h.families() {
        return Err(Error::InvalidArgument(format!("observable fields {:?} differ from tensor fields {t:?}", h.families())));
    }
    Ok(())
}

/// `P·dH` at the point, one sequence per family.
pub fn ham_vf(p: &Tensor, h: &Observable, point: &[PerSeq]) -> Result<Vec<PerSeq>> {
    check_families(p.families(), h)?;
    let m = p.eval(point)?;
    unflatten(p.period(), m.mul_vec(&h.gradient(point)?))
}

/// `{I1, I2} = dI1ᵀ P dI2` at the point.
pub fn commute_check(p: &Tensor, i1: &Observable, i2: &Observable, point: &[PerSeq]) -> Result<Rational> {
    check_families(p.families(), i1)?;
    check_families(p.families(), i2)?;
    let m = p.eval(point)?;
    let g2 = m.mul_vec(&i2.gradient(point)?);
    Ok(i1.gradient(point)?.iter().zip(&g2).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
}

/// `V̇_m = (w_m / w_{m−1}) V_{m−1}` for `m` in the fundamental domain; the monodromy is fixed.
pub fn lifted_vf(w: &Polygon) -> Result<Vec<Vec<Rational>>> {
    if w.nu() != 2 {
        return Err(Error::InvalidArgument(format!("the lifted flow is defined for nu = 2, got {}", w.nu())));
    }
    (0..w.period() as i64)
        .map(|m| {
            let prev = w.wronskian_at(m - 1);
            if prev.is_zero() {
                return Err(Error::DegeneratePolygon { site: (m - 1).rem_euclid(w.period() as i64) as usize });
            }
            let ratio = w.wronskian_at(m) / prev;
            Ok(w.vertex(m - 1).iter().map(|x| x * &ratio).collect())
        })
        .collect()
}

/// `d/dt (μ, ρ)` along [`lifted_vf`], by the chain rule through the coordinates.
pub fn lifted_pushforward(w: &Polygon) -> Result<Vec<PerSeq>> {
    let vel = lifted_vf(w)?;
    let (nu, n) = (w.nu(), w.period());
    let jets = coord_jets(&JetPolygon::new(w));
    let speed = |j: &crate::jet::Jet| {
        j.grad.iter().fold(Rational::zero(), |acc, (i, d)| {
            // Vertex variables come first, `m·ν + a`; the monodromy does not move.
            if *i < nu * n {
                acc + d * &vel[i / nu][i % nu]
            } else {
                acc
            }
        })
    };
    // Families in (mu, rho) order.
    [1usize, 0].iter().map(|&k| PerSeq::new(jets[k].iter().map(speed).collect())).collect()
}

/// `L_ξ P` for `ξ` the constant unit shift of every site of `family`.
pub fn lie_deform(p: &PolyTensor, family: &str) -> Result<PolyTensor> {
    let f = p.family_position(family)?;
    let n = p.period();
    let in_family = |v: usize| v / n == f;
    let quadratic = p.bivector().entries().iter().any(|e| e.degree_in(in_family) >= 2);
    if quadratic {
        return Err(Error::LinearityViolated { family: family.into() });
    }
    let vars: Vec<usize> = (0..n).map(|m| p.var(f, m)).collect();
    Ok(p.map(|e| e.directional(&vars)))
}

/// Residuals of `(L_ξ)²P = 0`, of the Jacobi identity for `L_ξP`, and of compatibility of `P` with `L_ξP`.
pub fn gf_check(p: &PolyTensor, family: &str, points: &[Vec<PerSeq>]) -> Result<(Rational, Rational, Rational)> {
    let q = lie_deform(p, family)?;
    let f = p.family_position(family)?;
    let vars: Vec<usize> = (0..p.period()).map(|m| p.var(f, m)).collect();
    let qq = q.map(|e| e.directional(&vars));
    let second =
        qq.bivector().entries().iter().flat_map(|e| e.terms().map(|(_, c)| c.abs())).fold(Rational::zero(), |a, b| a.max(b));
    let mut jac = Rational::zero();
    for x in points {
        jac = jac.max(jacobiator(&q, x)?);
    }
    let ts = [Rational::one(), rat(-2, 1), rat(1, 3)];
    let comp = compatibility(p, &q, points, &ts)?;
    Ok((second, jac, comp))
}

/// The tensor with `family` shifted by `λ` at every site.
pub fn spectral_shift(p: &PolyTensor, family: &str, lambda: &Rational) -> Result<PolyTensor> {
    let f = p.family_position(family)?;
    let vars: Vec<usize> = (0..p.period()).map(|m| p.var(f, m)).collect();
    let entries: Option<Vec<Poly>> = p.bivector().entries().iter().map(|e| e.translate(&vars, lambda)).collect();
    let entries = entries.ok_or_else(|| Error::InvalidArgument(format!("{family} appears with a negative power")))?;
    PolyTensor::new(p.families().to_vec(), p.period(), crate::bivector::Bivector::new(p.dim(), entries))
}

/// Hamiltonian flow `ẋ = P(x)·dH(x)` in floating point.
pub struct HamFlow {
    tensor: PolyTensor,
    grad: Vec<(usize, Poly)>,
}

impl HamFlow {
    pub fn new(tensor: PolyTensor, h: &Observable) -> Result<Self> {
        check_families(tensor.families(), h)?;
        let grad = h.poly().variables().into_iter().map(|s| (s, h.poly().derivative(s))).collect();
        Ok(HamFlow { tensor, grad })
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn velocity(&self, x: &[f64]) -> Vec<f64> {
        let b = self.tensor.bivector();
        let g: Vec<(usize, f64)> = self.grad.iter().map(|(s, p)| (*s, p.eval_f64(x))).collect();
        (0..self.dim())
            .map(|i| g.iter().map(|(s, gs)| if b.get(i, *s).is_empty() { 0.0 } else { b.get(i, *s).eval_f64(x) * gs }).sum())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Fixed-step classical RK4.
pub fn integrate(vf: impl Fn(&[f64]) -> Vec<f64>, start: &[f64], dt: f64, steps: usize) -> Result<Trajectory> {
    let mut times = vec![0.0];
    let mut states = vec![start.to_vec()];
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let mut x = start.to_vec();
    for step in 1..=steps {
        let k1 = vf(&x);
        let k2 = vf(&axpy(&x, &k1, dt / 2.0));
        let k3 = vf(&axpy(&x, &k2, dt / 2.0));
        let k4 = vf(&axpy(&x, &k3, dt));
        x = x.iter().enumerate().map(|(i, xi)| xi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        let t = step as f64 * dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!("{t}")));
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

/// `e_1 … e_ν` of the transfer monodromy at a float state laid out as `a^(k)` families.
pub fn transfer_invariants_f64(nu: usize, n: usize, state: &[f64], family_of: &[usize]) -> Vec<f64> {
    let t = (0..n).fold(
        (0..nu).map(|i| (0..nu).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>()).collect::<Vec<_>>(),
        |acc, m| {
            let mut l = vec![vec![0.0; nu]; nu];
            for i in 0..nu {
                let x = state[var(n, family_of[i], m)];
                l[i][nu - 1] = if (nu - i + 1) % 2 == 0 { x } else { -x };
                if i + 1 < nu {
                    l[i + 1][i] = 1.0;
                }
            }
            (0..nu).map(|i| (0..nu).map(|j| (0..nu).map(|k| acc[i][k] * l[k][j]).sum()).collect()).collect()
        },
    );
    let mut m = vec![vec![0.0; nu]; nu];
    let mut c = 1.0;
    let mut out = Vec::with_capacity(nu);
    for k in 1..=nu {
        let mut mk: Vec<Vec<f64>> =
            (0..nu).map(|i| (0..nu).map(|j| (0..nu).map(|l| t[i][l] * m[l][j]).sum()).collect()).collect();
        for (i, row) in mk.iter_mut().enumerate() {
            row[i] += c;
        }
        let tr: f64 = (0..nu).map(|i| (0..nu).map(|l| t[i][l] * mk[l][i]).sum::<f64>()).sum();
        c = -tr / k as f64;
        out.push(if k % 2 == 0 { c } else { -c });
        m = mk;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub dt: f64,
    pub steps: usize,
    pub initial: Vec<f64>,
    /// `max_t |I(t) − I(0)| / |I(0)|` per invariant.
    pub max_relative_drift: Vec<f64>,
}

pub fn invariant_drift(traj: &Trajectory, dt: f64, invariants: impl Fn(&[f64]) -> Vec<f64>) -> DriftReport {
    let initial = invariants(&traj.states[0]);
    let mut drift = vec![0.0f64; initial.len()];
    for s in &traj.states {
        for (d, (a, b)) in drift.iter_mut().zip(invariants(s).iter().zip(&initial)) {
            let scale = if *b == 0.0 { 1.0 } else { b.abs() };
            *d = d.max((a - b).abs() / scale);
        }
    }
    DriftReport { dt, steps: traj.states.len() - 1, initial, max_relative_drift: drift }
}

/// Toda flow of `H = Σμ` from `(μ, ρ)`, with the drift of the transfer invariants.
pub fn toda_drift(mu: &PerSeq, rho: &PerSeq, dt: f64, time: f64) -> Result<(Trajectory, DriftReport)> {
    let n = mu.period();
    let toda = crate::coord_reduction::closed_tensor("toda", &crate::coord_reduction::TensorParams::new(n))?;
    let flow = HamFlow::new(toda.tensor.to_poly()?, &Observable::sum(&["mu", "rho"], n, "mu")?)?;
    let start: Vec<f64> = mu.values().iter().chain(rho.values()).map(to_f64).collect();
    let steps = (time / dt).round() as usize;
    let traj = integrate(|x| flow.velocity(x), &start, dt, steps)?;
    // a^(0) = rho is family 1, a^(1) = mu is family 0.
    let report = invariant_drift(&traj, dt, |x| transfer_invariants_f64(2, n, x, &[1, 0]));
    Ok((traj, report))
}

/// Trajectory as CSV with header `t,field,site,value`.
pub fn trajectory_csv(traj: &Trajectory, families: &[&str], n: usize) -> String {
    let mut out = String::from("t,field,site,value\n");
    for (t, s) in traj.times.iter().zip(&traj.states) {
        for (f, name) in families.iter().enumerate() {
            for m in 0..n {
                let _ = writeln!(out, "{t},{name},{m},{}", s[var(n, f, m)]);
            }
        }
    }
    out
}

/// Point of the given families as a flat rational vector, in tensor variable order.
pub fn flatten_point(point: &[PerSeq]) -> Vec<Rational> {
    point.iter().flat_map(|p| p.values().iter().cloned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord_reduction::{closed_tensor, coords, TensorParams};
    use crate::lattice_ops::DPoly;
    use crate::rational::int;
    use crate::sample::{random_nonvanishing, random_polygon, random_seq, trial_rng};

    fn toda(n: usize) -> Tensor {
        closed_tensor("toda", &TensorParams::new(n)).unwrap().tensor
    }

    const MR: [&str; 2] = ["mu", "rho"];

    #[test]
    fn toda_flow_of_sum_mu() {
        let n = 5;
        let mut rng = trial_rng(50, 0);
        let (mu, rho) = (random_seq(n, &mut rng), random_nonvanishing(n, &mut rng));
        let h = Observable::sum(&MR, n, "mu").unwrap();
        let v = ham_vf(&toda(n), &h, &[mu.clone(), rho.clone()]).unwrap();
        for m in 0..n as i64 {
            assert_eq!(v[0].at(m), &(rho.at(m + 1) - rho.at(m)));
            assert_eq!(v[1].at(m), &(rho.at(m) * (mu.at(m) - mu.at(m - 1))));
        }
        let c = Observable::new("c", &MR, n, Poly::constant(int(3)));
        assert!(ham_vf(&toda(n), &c, &[mu, rho]).unwrap().iter().all(|s| s.is_zero()));
    }

    #[test]
    fn rho_is_frozen_under_the_casimir_choice() {
        let n = 5;
        let phi = crate::lattice_ops::phi_special(2, 0, n).unwrap();
        let t = closed_tensor("murho", &TensorParams::new(n).with_phi(phi)).unwrap().tensor;
        let mut rng = trial_rng(51, 0);
        let point = vec![random_seq(n, &mut rng), random_nonvanishing(n, &mut rng)];
        let h = Observable::new("h", &MR, n, &Poly::var(0) * &Poly::var(n + 2) + Poly::var(3).scale(&int(2)));
        assert!(ham_vf(&t, &h, &point).unwrap()[1].is_zero());
    }

    #[test]
    fn lifted_flow_matches_toda() {
        for (n, seed) in [(5, 0), (7, 1)] {
            let w = random_polygon(2, n, &mut trial_rng(52, seed));
            let f = coords(&w).unwrap();
            let point = vec![f.family("mu").unwrap().clone(), f.rho().clone()];
            let expect = ham_vf(&toda(n), &Observable::sum(&MR, n, "mu").unwrap(), &point).unwrap();
            assert_eq!(lifted_pushforward(&w).unwrap(), expect);
        }
    }

    #[test]
    fn lifted_flow_at_constant_wronskian_and_scaling() {
        let w =
            crate::coord_reduction::gauge_normalize(&random_polygon(2, 5, &mut trial_rng(53, 0)), &PerSeq::constant(5, int(1)))
                .unwrap();
        let v = lifted_vf(&w).unwrap();
        for m in 0..5 {
            assert_eq!(v[m], w.vertex(m as i64 - 1));
        }
        let s = int(3);
        let scaled =
            Polygon::new(w.vertices().iter().map(|x| x.iter().map(|y| y * &s).collect()).collect(), w.monodromy().clone())
                .unwrap();
        let vs = lifted_vf(&scaled).unwrap();
        for m in 0..5 {
            assert_eq!(vs[m], v[m].iter().map(|y| y * &s).collect::<Vec<_>>());
        }
    }

    #[test]
    fn transfer_examples() {
        let f = Fields::new(vec![PerSeq::constant(3, int(1)), PerSeq::constant(3, int(1))]).unwrap();
        assert_eq!(transfer_invariants(&f), vec![int(-2), int(1)]);
        let f = Fields::new(vec![PerSeq::from_i64(&[2]), PerSeq::from_i64(&[5])]).unwrap();
        assert_eq!(transfer_matrix(&f), vec![vec![int(0), int(-2)], vec![int(1), int(5)]]);
        let mut rng = trial_rng(54, 0);
        for (nu, n) in [(2, 6), (3, 5), (4, 3)] {
            let a: Vec<PerSeq> = (0..nu).map(|_| random_seq(n, &mut rng)).collect();
            let f = Fields::new(a).unwrap();
            let det = f.rho().values().iter().fold(Rational::one(), |acc, x| acc * x);
            assert_eq!(transfer_invariants(&f)[nu - 1], det);
        }
    }

    #[test]
    fn transfer_observable_agrees_with_numeric_invariants() {
        let mut rng = trial_rng(55, 0);
        let f = Fields::new(vec![random_nonvanishing(4, &mut rng), random_seq(4, &mut rng), random_seq(4, &mut rng)]).unwrap();
        let fams = ["a", "b", "rho"];
        let point = f.select(&fams.map(String::from)).unwrap();
        let inv = transfer_invariants(&f);
        for j in 1..=3 {
            assert_eq!(Observable::transfer(&fams, 4, j).unwrap().value(&point).unwrap(), inv[j - 1]);
        }
    }

    #[test]
    fn toda_integrals_commute() {
        let n = 5;
        let mut rng = trial_rng(56, 0);
        let sum = Observable::sum(&MR, n, "mu").unwrap();
        let prod = Observable::product(&MR, n, "rho").unwrap();
        let tr = Observable::transfer(&MR, n, 1).unwrap();
        let det = Observable::transfer(&MR, n, 2).unwrap();
        for _ in 0..3 {
            let point = vec![random_seq(n, &mut rng), random_nonvanishing(n, &mut rng)];
            for o in [&sum, &prod, &tr, &det] {
                assert_eq!(commute_check(&toda(n), &sum, o, &point).unwrap(), Rational::zero(), "{}", o.name);
            }
        }
    }

    #[test]
    fn gradient_is_exact_for_quadratics() {
        let n = 4;
        let mut rng = trial_rng(57, 0);
        let o = Observable::new("q", &MR, n, &Poly::var(1) * &Poly::var(6) + Poly::var(2).scale(&rat(1, 3)));
        let point = vec![random_seq(n, &mut rng), random_seq(n, &mut rng)];
        let g = o.gradient(&point).unwrap();
        let h = rat(1, 7);
        let x = flatten_point(&point);
        for i in 0..2 * n {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[i] += &h;
            dn[i] -= &h;
            let q = (o.poly().eval(&up).unwrap() - o.poly().eval(&dn).unwrap()) / (&h * int(2));
            assert_eq!(q, g[i]);
        }
    }

    #[test]
    fn lie_deformation_of_toda() {
        let n = 5;
        let t = toda(n).to_poly().unwrap();
        let q = lie_deform(&t, "mu").unwrap();
        let mut rng = trial_rng(58, 0);
        let point = vec![random_seq(n, &mut rng), random_nonvanishing(n, &mut rng)];
        let m = q.eval(&point).unwrap();
        let rho = &point[1];
        let dm1 = DPoly::from_terms(&[(1, 1), (0, -1)]).kernel(n).matrix();
        let dm2 = DPoly::from_terms(&[(0, 1), (-1, -1)]).kernel(n).matrix();
        for i in 0..n {
            for j in 0..n {
                assert!(m[(i, j)].is_zero() && m[(n + i, n + j)].is_zero());
                assert_eq!(m[(i, n + j)], &dm1[(i, j)] * rho.at(j as i64));
                assert_eq!(m[(n + i, j)], rho.at(i as i64) * &dm2[(i, j)]);
            }
        }
        let points: Vec<Vec<PerSeq>> = (0..2).map(|_| vec![random_seq(n, &mut rng), random_nonvanishing(n, &mut rng)]).collect();
        assert_eq!(gf_check(&t, "mu", &points).unwrap(), (Rational::zero(), Rational::zero(), Rational::zero()));
    }

    #[test]
    fn lattice_virasoro_is_not_linear() {
        let t = closed_tensor("ftv_u", &TensorParams::new(5)).unwrap().tensor.to_poly().unwrap();
        assert_eq!(lie_deform(&t, "u"), Err(Error::LinearityViolated { family: "u".into() }));
    }

    #[test]
    fn integrator_trivia() {
        let start = [1.0, -2.0];
        let t = integrate(|x| vec![x[1], -x[0]], &start, 0.1, 0).unwrap();
        assert_eq!(t.states, vec![start.to_vec()]);
        let t = integrate(|x| vec![0.0; x.len()], &start, 0.1, 10).unwrap();
        assert!(t.states.iter().all(|s| s == &start));
        let t = integrate(|x| vec![x[0] * x[0]], &[1.0], 0.5, 10);
        assert!(matches!(t, Err(Error::Degenerate(_))));
    }

    #[test]
    fn toda_drift_is_small_and_fourth_order() {
        let mu = PerSeq::new(vec![rat(1, 2), rat(-1, 3), int(1)]).unwrap();
        let rho = PerSeq::new(vec![int(1), rat(3, 2), rat(2, 3)]).unwrap();
        let (_, fine) = toda_drift(&mu, &rho, 1e-3, 1.0).unwrap();
        let (_, coarse) = toda_drift(&mu, &rho, 1e-2, 1.0).unwrap();
        assert!(fine.max_relative_drift[0] < 1e-8, "{fine:?}");
        let ratio = coarse.max_relative_drift[0] / fine.max_relative_drift[0];
        assert!((2500.0..=40000.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn csv_layout() {
        let t = Trajectory { times: vec![0.0], states: vec![vec![1.0, 2.0, 3.0, 4.0]] };
        let csv = trajectory_csv(&t, &MR, 2);
        assert_eq!(csv, "t,field,site,value\n0,mu,0,1\n0,mu,1,2\n0,rho,0,3\n0,rho,1,4\n");
    }
}
