//! Exact-arithmetic Poisson geometry on twisted polygons.
//!
//! The space of twisted polygons `V_{m+N} = V_m M` carries a quadratic bracket built
//! from an r-matrix, the discrete sign function and an odd periodic function `φ`.
//! This crate evaluates that bracket exactly over the rationals, pushes it down to the
//! coordinates `a^(k)` of the difference operator `V^(ν) = Σ ± a^(k) V^(k)`, and checks
//! the resulting Toda, lattice Virasoro and extended Toda tensors against their closed forms.
//!
//! Every identity is checked with [`Rational`] arithmetic. The only floating point code is
//! the Runge–Kutta integrator in [`dynamics`].

pub mod bivector;
pub mod coord_reduction;
pub mod dynamics;
pub mod error;
pub mod exchange_algebra;
pub mod gen_nu;
pub mod jet;
pub mod lattice_ops;
pub mod poly;
pub mod rational;
pub mod report;
pub mod sample;

pub use coord_reduction::{Fields, NamedTensor, OpTensor, PolyTensor, Tensor};
pub use error::{Error, Result};
pub use exchange_algebra::{BracketSpec, Polygon, ProjPolygon};
pub use lattice_ops::{DPoly, Kernel, OddKernel, PerSeq};
pub use poly::Poly;
pub use rational::{RatMatrix, Rational};
pub use report::{Criterion, Format, ReportDoc};
