use polypoisson::rational::fmt_rat;
use polypoisson::report::{run_criterion, CRITERIA};

const SEED: u64 = 20240611;

fn check(id: u8) {
    let c = CRITERIA[id as usize - 1];
    let d = run_criterion(c.id, SEED);
    assert_eq!(d.check, c.check_id());
    let status = if d.pass { "PASS" } else { "FAIL" };
    println!("{status} {} residual={}", d.check, fmt_rat(&d.residual));
    if !d.pass {
        println!("    params: {}", serde_json::to_string(&d.params).unwrap());
    }
    assert!(d.pass, "{} failed", d.check);
}

macro_rules! criteria {
    ($($name:ident = $id:literal),* $(,)?) => {
        $(#[test] fn $name() { check($id) })*
    };
}

criteria! {
    c01_ybe = 1,
    c02_jacobi = 2,
    c03_momentum = 3,
    c04_quasiperiodicity = 4,
    c05_closed_forms = 5,
    c06_projective_phi_independence = 6,
    c07_casimir_choice = 7,
    c08_linearity_choice = 8,
    c09_toda_to_ftv = 9,
    c10_frs_to_ftv = 10,
    c11_extended_toda_compatibility = 11,
    c12_lie_deformation = 12,
    c13_flow_consistency = 13,
    c14_integrator_drift = 14,
}
