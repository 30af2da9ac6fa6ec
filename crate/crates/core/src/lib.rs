//! Entanglement distillation versus nonlocality distillation for noisy
//! Bell states. The crate computes closed-form CHSH figures of merit and
//! certifies them with Bell operator algebra, a see-saw search and a small
//! statevector simulator.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`; [`single`] holds the
//! `f32` counterparts.

// `!(a < b)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod distill;
pub mod error;
pub mod matkernel;
pub mod scalar;
pub mod sim;
pub mod states;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex = scalar::Complex<f64>;
pub type ComplexMatrix = matkernel::ComplexMatrix<f64>;
pub type StateVector = matkernel::StateVector<f64>;
pub type HermitianEigen = matkernel::HermitianEigen<f64>;
pub type NoiseParameter = states::NoiseParameter<f64>;
pub type SchmidtSpectrum = states::SchmidtSpectrum<f64>;
pub type WeightVector = states::WeightVector<f64>;
pub type SweepRecord = distill::SweepRecord<f64>;
pub type CrossoverReport = distill::CrossoverReport<f64>;
pub type IntervalProbe = distill::IntervalProbe<f64>;
pub type ObservableQuad = bell::ObservableQuad<f64>;
pub type KlMatrix = bell::KlMatrix<f64>;
pub type BellBundle = bell::BellBundle<f64>;
pub type SeesawResult = bell::SeesawResult<f64>;

/// Single precision aliases.
pub mod single {
    use super::*;

    pub type Complex = scalar::Complex<f32>;
    pub type ComplexMatrix = matkernel::ComplexMatrix<f32>;
    pub type StateVector = matkernel::StateVector<f32>;
    pub type HermitianEigen = matkernel::HermitianEigen<f32>;
    pub type NoiseParameter = states::NoiseParameter<f32>;
    pub type SchmidtSpectrum = states::SchmidtSpectrum<f32>;
    pub type WeightVector = states::WeightVector<f32>;
    pub type SweepRecord = distill::SweepRecord<f32>;
    pub type CrossoverReport = distill::CrossoverReport<f32>;
    pub type ObservableQuad = bell::ObservableQuad<f32>;
    pub type KlMatrix = bell::KlMatrix<f32>;
    pub type BellBundle = bell::BellBundle<f32>;
}
