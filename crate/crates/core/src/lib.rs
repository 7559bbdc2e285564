//! Second-order effective viscosity of dilute suspensions of spheres.
//!
//! The core types are generic over the scalar where that makes sense ([`TraceFreeSym3`],
//! [`ViscosityTensor4`], the closed-form kernels); the aliases below fix `f64`.

pub mod acceptance;
pub mod configurations;
pub mod corrector;
pub mod error;
pub mod estimate;
pub mod extrapolate;
pub mod kernels;
pub mod meanfield;
pub mod quadrature;
pub mod regularized;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};
pub use tensor::{Mat3, OrthoBasis5, TraceFreeSym3, Vec3, ViscosityTensor4};

pub type Sym3 = TraceFreeSym3<f64>;
pub type Tensor4 = ViscosityTensor4<f64>;
pub type Point3 = Vec3<f64>;
pub type Basis5 = OrthoBasis5<f64>;
