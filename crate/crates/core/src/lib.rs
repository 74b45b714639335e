//! Random quantum-state ensembles, state metrics, training-set engineering
//! and Pauli tomography simulation.
//!
//! Everything is generic over the scalar type through [`Real`], implemented
//! for `f32` and `f64`. The aliases at the crate root fix the precision.

// `!(x > 0)` guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engineer;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod qcore;
pub mod scalar;
pub mod tomography;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DensityMatrix64 = qcore::DensityMatrix<f64>;
pub type DensityMatrix32 = qcore::DensityMatrix<f32>;
pub type PureState64 = qcore::PureState<f64>;
pub type PureState32 = qcore::PureState<f32>;
pub type UnitaryMatrix64 = qcore::UnitaryMatrix<f64>;
pub type UnitaryMatrix32 = qcore::UnitaryMatrix<f32>;
pub type TauVector64 = qcore::TauVector<f64>;
pub type TauVector32 = qcore::TauVector<f32>;
pub type TomographyRecord64 = tomography::TomographyRecord<f64>;
pub type TomographyRecord32 = tomography::TomographyRecord<f32>;
