// SPDX-License-Identifier: Apache-2.0

//! Simulation and reconstruction toolkit for qubit-magnon Bell states.
//!
//! The crate models a two-level qubit coupled to a truncated bosonic (magnon)
//! mode through a Jaynes-Cummings interaction, runs the pulse protocols that
//! prepare and probe entanglement between the two, synthesizes joint
//! tomography datasets, and reconstructs the joint density matrix by
//! projected-gradient least squares.
//!
//! All numerics are generic over the real scalar type (see [`Real`]); the
//! aliases at the crate root fix the common `f64` instantiations.

pub mod dynamics;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod qop;
pub mod scalar;
pub mod sequences;
pub mod tomography;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex scalar over the crate's real type.
pub type Complex<T> = num_complex::Complex<T>;

pub type Operator = qop::Operator<f64>;
pub type DensityMatrix = qop::DensityMatrix<f64>;
pub type PureState = qop::PureState<f64>;
pub type Superoperator = dynamics::Superoperator<f64>;
pub type SystemParams = dynamics::SystemParams<f64>;
pub type DecoherenceParams = dynamics::DecoherenceParams<f64>;
pub type Simulator = sequences::Simulator<f64>;
pub type SettingGrid = tomography::SettingGrid<f64>;
pub type TomographySetting = tomography::TomographySetting<f64>;
pub type MeasurementRecord = tomography::MeasurementRecord<f64>;
pub type ForwardModel = tomography::ForwardModel<f64>;
pub type DesignMatrix = tomography::DesignMatrix<f64>;
pub type ReconstructionResult = tomography::ReconstructionResult<f64>;

pub type Operator32 = qop::Operator<f32>;
pub type DensityMatrix32 = qop::DensityMatrix<f32>;
