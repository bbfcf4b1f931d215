use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use polypoisson::coord_reduction::{chain_tensor, closed_tensor, pushforward_check, TensorParams};
use polypoisson::dynamics::toda_drift;
use polypoisson::exchange_algebra::{default_rc, verify_ybe};
use polypoisson::gen_nu::{check_theorem, quad_coeff};
use polypoisson::lattice_ops::phi_special;
use polypoisson::rational::rat;
use polypoisson::sample::{random_nonvanishing, trial_rng};
use polypoisson::PerSeq;
use polypoisson_bench::{random_setup, special};

fn ybe(c: &mut Criterion) {
    let mut g = c.benchmark_group("ybe");
    for nu in [2usize, 3] {
        let (r, cc) = default_rc(nu).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(nu), &nu, |b, _| b.iter(|| verify_ybe(black_box(&r), black_box(&cc))));
    }
    g.finish();
}

fn phi(c: &mut Criterion) {
    let mut g = c.benchmark_group("phi_special");
    for n in [7usize, 15, 31] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| phi_special(3, 1, black_box(n))));
    }
    g.finish();
}

fn chain(c: &mut Criterion) {
    let mut g = c.benchmark_group("chain_tensor");
    g.sample_size(10);
    for (nu, n) in [(2usize, 5usize), (3, 5), (3, 7)] {
        let (spec, w) = random_setup(nu, n, 1);
        let ids: Vec<usize> = (0..nu).collect();
        g.bench_function(format!("nu{nu}_N{n}"), |b| b.iter(|| chain_tensor(&spec, black_box(&w), &ids)));
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let phi = special(5, 2, 11);
    c.bench_function("quad_coeff_nu5_N11", |b| b.iter(|| quad_coeff(5, 2, black_box(phi.kernel()))));
    let u = random_nonvanishing(7, &mut trial_rng(3, 0));
    c.bench_function("pushforward_N7", |b| b.iter(|| pushforward_check(black_box(&u))));
    let p = closed_tensor("P2", &TensorParams::new(7)).unwrap();
    c.bench_function("to_poly_P2_N7", |b| b.iter(|| p.tensor.to_poly()));
}

fn theorem(c: &mut Criterion) {
    let mut g = c.benchmark_group("theorem");
    g.sample_size(10);
    g.bench_function("nu3_N7", |b| b.iter(|| check_theorem(3, 7, 0, 1)));
    g.finish();
}

fn flow(c: &mut Criterion) {
    let mu = PerSeq::new(vec![rat(1, 2), rat(-1, 3), rat(1, 1)]).unwrap();
    let rho = PerSeq::new(vec![rat(1, 1), rat(3, 2), rat(2, 3)]).unwrap();
    let mut g = c.benchmark_group("toda_rk4");
    g.sample_size(10);
    g.bench_function("dt1e-3_T1", |b| b.iter(|| toda_drift(&mu, &rho, 1e-3, 1.0)));
    g.finish();
}

criterion_group!(benches, ybe, phi, chain, kernels, theorem, flow);
criterion_main!(benches);
