//! Fixtures shared by the benchmarks in `benches/`.

use polypoisson::lattice_ops::phi_special;
use polypoisson::sample::{random_odd_kernel, random_polygon, trial_rng};
use polypoisson::{BracketSpec, OddKernel, Polygon};

/// A bracket with a random odd `φ` and a random polygon of the same shape.
pub fn random_setup(nu: usize, n: usize, seed: u64) -> (BracketSpec, Polygon) {
    let mut rng = trial_rng(seed, 0);
    let phi = random_odd_kernel(n, &mut rng);
    let w = random_polygon(nu, n, &mut rng);
    (BracketSpec::standard(nu, phi).expect("standard bracket"), w)
}

pub fn special(nu: usize, k: usize, n: usize) -> OddKernel {
    phi_special(nu, k, n).expect("special phi exists")
}
