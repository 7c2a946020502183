//! Zero-Hopf bifurcation analysis of the Chua system.
//!
//! Equilibria and zero-Hopf detection live in [`model`]; [`transform`] reduces
//! an ε-unfolding to a periodic standard form; [`averaging`] and [`solve`]
//! predict limit cycles from its first- or second-order average; [`verify`]
//! confirms them by shooting on the full system.

pub mod averaging;
pub mod linalg;
pub mod model;
pub mod reconcile;
pub mod scalar;
pub mod series;
pub mod solve;
pub mod transform;
pub mod verify;

use thiserror::Error;

pub use averaging::{AveragedField, AveragingError};
pub use model::{ChuaParams, Equilibrium, EquilibriumKind, ModelError, ZeroHopfPoint};
pub use scalar::Scalar;
pub use series::{Jet, JetError};
pub use solve::{AveragedZero, Classification, Domain, Prediction, SolveError, SolveOptions};
pub use transform::{
    Branch, Family, PerturbationOrigin, PerturbationPMinus, StandardForm, TransformError,
};
pub use verify::{CycleCount, OrbitResult, SweepTable, VerifyError, VerifyOptions};

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Averaging(#[from] AveragingError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

pub type ChuaParams64 = ChuaParams<f64>;
pub type ChuaParams32 = ChuaParams<f32>;
pub type Jet64 = Jet<f64>;
pub type Family64 = Family<f64>;
pub type Family32 = Family<f32>;
pub type OriginFamily64 = PerturbationOrigin<f64>;
pub type PMinusFamily64 = PerturbationPMinus<f64>;
pub type AveragedZero64 = AveragedZero<f64>;
pub type OrbitResult64 = OrbitResult<f64>;
