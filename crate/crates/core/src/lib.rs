//! Mass-conservative finite-volume solver for weighted porous medium
//! equations ρ_ν u_t = div(ρ_μ ∇(u^m)) on an interval, with homogeneous
//! Neumann or Dirichlet boundary conditions, together with the reference
//! objects needed to verify its sharp smoothing and decay behaviour:
//! exact Barenblatt profiles, weighted Neumann eigenvalues, Sobolev- and
//! Poincaré-constant estimates, and rate-fitting utilities.
//!
//! All numerical kernels are generic over the scalar type (see
//! [`scalar::Real`]); the `*64` aliases below fix `f64`, which is what the
//! verification tolerances assume.

// negated comparisons like `!(m > T::one())` are used on purpose: they
// reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod mesh;
pub mod quad;
pub mod rates;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod tridiag;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` aliases for the main domain types.
pub type WeightSpec64 = weights::WeightSpec<f64>;
pub type SigmaRange64 = weights::SigmaRange<f64>;
pub type Mesh64 = mesh::Mesh1D<f64>;
pub type Field64 = mesh::Field<f64>;
pub type Ops64 = mesh::DiscreteOperators<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type Trajectory64 = solver::Trajectory<f64>;
pub type BarenblattParams64 = exact::BarenblattParams<f64>;
pub type EigResult64 = spectral::EigResult<f64>;
pub type SobolevEstimate64 = spectral::SobolevEstimate<f64>;
pub type RateFit64 = rates::RateFit<f64>;
pub type ExpFit64 = rates::ExpFit<f64>;
