use std::path::Path;

use num::{Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use polypoisson::coord_reduction::{
    closed_tensor, compatibility, dirac_reduce, jacobiator, oracle_match, pushforward_check, TensorParams, TENSOR_NAMES,
};
use polypoisson::dynamics::{toda_drift, trajectory_csv};
use polypoisson::exchange_algebra::{default_rc, verify_structure, BracketSpec, StructureCheck};
use polypoisson::gen_nu::{check_theorem, Verdict};
use polypoisson::lattice_ops::{phi_equation, phi_special_detailed};
use polypoisson::rational::fmt_rat;
use polypoisson::report::ReportDoc;
use polypoisson::sample::{random_nonvanishing, random_odd_kernel, random_polygon, random_seq, trial_rng};
use polypoisson::{Error, Fields, OddKernel, PerSeq, Rational};

use crate::Common;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub struct Outcome {
    pub preamble: Vec<String>,
    pub docs: Vec<ReportDoc>,
}

impl Outcome {
    pub fn docs(docs: Vec<ReportDoc>) -> Self {
        Outcome { preamble: Vec::new(), docs }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn validate(c: &Common) -> CliResult<()> {
    if c.n < 3 {
        return Err(usage(format!("--N must be at least 3, got {}", c.n)));
    }
    if c.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if c.nu < 2 {
        return Err(usage(format!("--nu must be at least 2, got {}", c.nu)));
    }
    Ok(())
}

/// Errors from bad input are usage errors; anything else is a failed check.
fn checked(check: &str, params: Value, seed: u64, f: impl FnOnce() -> polypoisson::Result<Rational>) -> CliResult<ReportDoc> {
    match f() {
        Ok(r) => Ok(ReportDoc::exact(check, params, r, seed)),
        Err(e @ (Error::InvalidArgument(_) | Error::UnknownTensor(_) | Error::Parse(_) | Error::PeriodMismatch { .. })) => {
            Err(e.into())
        }
        Err(e) => Ok(ReportDoc::failed(check, params, &e, seed)),
    }
}

fn read_file<T: serde::de::DeserializeOwned>(spec: &str, what: &str) -> CliResult<T> {
    let path = spec.strip_prefix("file:").ok_or_else(|| usage(format!("{what} must be file:PATH, got {spec:?}")))?;
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("cannot parse {what} from {path}: {e}")))
}

fn phi_label(c: &Common, k: usize) -> String {
    match c.phi.as_str() {
        "special" => format!("special:{k}"),
        other => other.to_string(),
    }
}

fn resolve_phi(c: &Common) -> CliResult<(OddKernel, usize)> {
    let k = c.k.unwrap_or(c.nu - 1);
    let phi = match c.phi.as_str() {
        "special" => phi_special_detailed(c.nu, k, c.n)?.phi,
        "zero" => OddKernel::zeros(c.n),
        other => read_file(other, "--phi")?,
    };
    if phi.period() != c.n {
        return Err(usage(format!("phi has period {} but --N is {}", phi.period(), c.n)));
    }
    Ok((phi, k))
}

fn resolve_beta(c: &Common) -> CliResult<PerSeq> {
    let beta = match &c.beta {
        None => PerSeq::constant(c.n, Rational::from_integer(1.into())),
        Some(s) => read_file(s, "--beta")?,
    };
    if beta.period() != c.n {
        return Err(usage(format!("beta has period {} but --N is {}", beta.period(), c.n)));
    }
    if !beta.nonvanishing() {
        return Err(usage("beta must not vanish"));
    }
    Ok(beta)
}

fn max_all(it: impl IntoIterator<Item = Rational>) -> Rational {
    it.into_iter().fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

pub fn verify_ybe(c: &Common) -> CliResult<Outcome> {
    if c.nu < 2 {
        return Err(usage("--nu must be at least 2"));
    }
    let doc = checked("verify-ybe", json!({"nu": c.nu}), c.seed, || {
        let (r, cc) = default_rc(c.nu)?;
        polypoisson::exchange_algebra::verify_ybe(&r, &cc)
    })?;
    Ok(Outcome::docs(vec![doc]))
}

pub fn verify_w(c: &Common) -> CliResult<Outcome> {
    validate(c)?;
    let (phi, k) = resolve_phi(c)?;
    let spec = BracketSpec::standard(c.nu, phi)?;
    let checks = [
        ("jacobi", StructureCheck::Jacobi),
        ("momentum", StructureCheck::Momentum),
        ("quasiperiodicity", StructureCheck::Quasiperiodicity),
        ("antisymmetry", StructureCheck::Antisymmetry),
    ];
    let params = json!({"nu": c.nu, "N": c.n, "phi": phi_label(c, k), "trials": c.trials});
    let docs = checks
        .par_iter()
        .map(|(name, check)| {
            checked(&format!("verify-w-{name}"), params.clone(), c.seed, || verify_structure(&spec, *check, c.trials, c.seed))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Outcome::docs(docs))
}

pub fn derive(c: &Common, name: &str, emit: Option<&Path>) -> CliResult<Outcome> {
    validate(c)?;
    if !TENSOR_NAMES.contains(&name) {
        return Err(usage(format!("unknown tensor {name:?}; expected one of {}", TENSOR_NAMES.join(", "))));
    }
    let mut params = TensorParams::new(c.n);
    let generic_phi = matches!(name, "murho" | "abrho");
    if generic_phi {
        let phi = match c.phi.as_str() {
            "special" => random_odd_kernel(c.n, &mut trial_rng(c.seed, u64::MAX)),
            _ => resolve_phi(&Common { nu: if name == "murho" { 2 } else { 3 }, ..c.clone() })?.0,
        };
        params = params.with_phi(phi);
    }
    if name == "ftv_u" || name == "ftv_S" {
        params = params.with_beta(resolve_beta(c)?);
    }
    let named = match closed_tensor(name, &params) {
        Ok(t) => t,
        Err(e @ Error::SingularOperator { .. }) => {
            return Ok(Outcome::docs(vec![ReportDoc::failed(&format!("derive-{name}"), json!({"N": c.n}), &e, c.seed)]))
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = emit {
        let text = serde_json::to_string_pretty(&named.tensor).map_err(|e| usage(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
    }
    let check = format!("derive-{name}");
    let doc = match named.nu() {
        Some(nu) => {
            let phi = match named.special_phi() {
                Some((nu, k)) => phi_special_detailed(nu, k, c.n)?.phi,
                None => params.phi.clone().expect("generic tensors carry phi"),
            };
            let spec = BracketSpec::standard(nu, phi)?;
            let p = json!({"N": c.n, "nu": nu, "trials": c.trials, "oracle": "chain rule"});
            checked(&check, p, c.seed, || {
                let res = (0..c.trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(c.seed, t);
                        let w = if name == "P0" {
                            let one = PerSeq::constant(c.n, Rational::from_integer(1.into()));
                            Fields::new(vec![one, random_seq(c.n, &mut rng), random_seq(c.n, &mut rng)])?.polygon()?
                        } else {
                            random_polygon(nu, c.n, &mut rng)
                        };
                        oracle_match(&spec, &w, &named)
                    })
                    .collect::<polypoisson::Result<Vec<_>>>()?;
                Ok(max_all(res))
            })?
        }
        None => {
            let p = json!({"N": c.n, "trials": c.trials, "oracle": "jacobiator"});
            checked(&check, p, c.seed, || {
                let poly = named.tensor.to_poly()?;
                let res = (0..c.trials as u64)
                    .map(|t| {
                        let mut rng = trial_rng(c.seed, t);
                        let point: Vec<PerSeq> = poly.families().iter().map(|_| random_nonvanishing(c.n, &mut rng)).collect();
                        jacobiator(&poly, &point)
                    })
                    .collect::<polypoisson::Result<Vec<_>>>()?;
                Ok(max_all(res))
            })?
        }
    };
    Ok(Outcome::docs(vec![doc]))
}

pub fn phi(c: &Common) -> CliResult<Outcome> {
    validate(c)?;
    let k = c.k.ok_or_else(|| usage("phi needs --k"))?;
    let sol = phi_special_detailed(c.nu, k, c.n)?;
    let values: Vec<String> = sol.phi.values().iter().map(fmt_rat).collect();
    let (a, b) = phi_equation(c.nu, k);
    let residual = a.kernel(c.n).compose(sol.phi.kernel())?.sub(&b.kernel(c.n))?.max_abs();
    let params = json!({"nu": c.nu, "k": k, "N": c.n, "kernel": values, "nullity": sol.nullity});
    let doc = ReportDoc::exact("phi", params, residual, c.seed);
    let mut out = Outcome::docs(vec![doc]);
    if c.format == polypoisson::Format::Text {
        out.preamble.push(format!("({})", values.join(", ")));
    }
    Ok(out)
}

pub fn reduce_dirac(c: &Common) -> CliResult<Outcome> {
    validate(c)?;
    let beta = resolve_beta(c)?;
    let n = c.n;
    let params = json!({"N": n, "beta": beta.values().iter().map(fmt_rat).collect::<Vec<_>>(), "trials": c.trials});
    let doc = checked("reduce-dirac", params, c.seed, || {
        let toda = closed_tensor("toda", &TensorParams::new(n))?.tensor;
        let ftv = closed_tensor("ftv_u", &TensorParams::new(n).with_beta(beta.clone()))?.tensor;
        let constrained: Vec<usize> = (n..2 * n).collect();
        let res = (0..c.trials as u64)
            .into_par_iter()
            .map(|t| {
                let mu = random_seq(n, &mut trial_rng(c.seed, t));
                let red = dirac_reduce(&toda.eval(&[mu.clone(), beta.clone()])?, &constrained)?;
                Ok(red.sub(&ftv.eval(&[mu])?).max_abs())
            })
            .collect::<polypoisson::Result<Vec<_>>>()?;
        Ok(max_all(res))
    })?;
    Ok(Outcome::docs(vec![doc]))
}

pub fn pushforward(c: &Common) -> CliResult<Outcome> {
    validate(c)?;
    let params = json!({"N": c.n, "trials": c.trials});
    let doc = checked("pushforward", params, c.seed, || {
        let res = (0..c.trials as u64)
            .into_par_iter()
            .map(|t| pushforward_check(&random_nonvanishing(c.n, &mut trial_rng(c.seed, t))))
            .collect::<polypoisson::Result<Vec<_>>>()?;
        Ok(max_all(res))
    })?;
    Ok(Outcome::docs(vec![doc]))
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Skipped => "skipped",
    }
}

pub fn theorem(c: &Common) -> CliResult<Outcome> {
    validate(c)?;
    let report = check_theorem(c.nu, c.n, c.seed, c.trials)?;
    let docs = report
        .cases
        .iter()
        .map(|case| {
            let skipped = case.verdict == Verdict::Skipped;
            let kernel_residual = case.residual.clone().unwrap_or_else(Rational::zero);
            let params = json!({
                "nu": report.nu,
                "N": report.n,
                "k": case.k,
                "verdict": verdict_str(case.verdict),
                "spectral": verdict_str(case.spectral),
                "kernel_residual": case.residual.as_ref().map(fmt_rat),
                "polygon_residual": case.polygon_residual.as_ref().map(fmt_rat),
                "spectral_residual": case.spectral_residual.as_ref().map(fmt_rat),
                "phi_nullity": case.phi_nullity,
                "notes": case.notes,
            });
            // A skipped case is reported, not failed; its residual stays in the params.
            let residual = if skipped { Rational::zero() } else { kernel_residual };
            let mut doc = ReportDoc::exact(&format!("theorem-k{}", case.k), params, residual, c.seed);
            if case.spectral == Verdict::Fail {
                doc.pass = false;
            }
            doc
        })
        .collect();
    Ok(Outcome::docs(docs))
}

pub fn compat(c: &Common) -> CliResult<Outcome> {
    validate(c)?;
    let n = c.n;
    let params = json!({"N": n, "trials": c.trials, "t": ["1", "-2", "1/3"]});
    let doc = checked("compat", params, c.seed, || {
        let p1 = closed_tensor("P1", &TensorParams::new(n))?.tensor.to_poly()?;
        let p2 = closed_tensor("P2", &TensorParams::new(n))?.tensor.to_poly()?;
        let mut rng = trial_rng(c.seed, 0);
        let points: Vec<Vec<PerSeq>> =
            (0..c.trials).map(|_| (0..3).map(|_| random_nonvanishing(n, &mut rng)).collect()).collect();
        let ts = ["1", "-2", "1/3"].map(|s| polypoisson::rational::parse_rat(s).expect("literal"));
        compatibility(&p1, &p2, &points, &ts)
    })?;
    Ok(Outcome::docs(vec![doc]))
}

pub fn flow(c: &Common, dt: f64, time: f64, tol: f64, trajectory: Option<&Path>) -> CliResult<Outcome> {
    validate(c)?;
    if !(dt > 0.0 && time >= dt) {
        return Err(usage("need --dt > 0 and --time >= --dt"));
    }
    let mut rng = trial_rng(c.seed, 0);
    let mu = random_seq(c.n, &mut rng);
    let rho = PerSeq::from_fn(c.n, |_| {
        Rational::new(1.into(), 1.into()) + polypoisson::sample::small_rational(&mut rng).abs() / Rational::from_integer(4.into())
    });
    let mut params = json!({
        "N": c.n, "dt": dt, "time": time, "tol": tol,
        "start": {"mu": mu.values().iter().map(fmt_rat).collect::<Vec<_>>(), "rho": rho.values().iter().map(fmt_rat).collect::<Vec<_>>()},
    });
    let doc = match toda_drift(&mu, &rho, dt, time) {
        Ok((traj, report)) => {
            if let Some(path) = trajectory {
                std::fs::write(path, trajectory_csv(&traj, &["mu", "rho"], c.n))?;
            }
            let drift = report.max_relative_drift.iter().cloned().fold(0.0f64, f64::max);
            params["drift"] = json!(report.max_relative_drift);
            let residual = Rational::from_float(drift).unwrap_or_else(Rational::zero);
            let mut doc = ReportDoc::exact("flow-drift", params, residual, c.seed);
            doc.pass = drift.is_finite() && drift < tol;
            doc
        }
        Err(e) => ReportDoc::failed("flow-drift", params, &e, c.seed),
    };
    Ok(Outcome::docs(vec![doc]))
}
