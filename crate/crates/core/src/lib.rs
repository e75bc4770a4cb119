//! Dissipative preparation of maximally entangled states by stabilizer pumping.
//!
//! The crate simulates two-operator Kraus "pump" maps that transfer population
//! from the wrong eigenspace of a stabilizer into the target eigenspace with
//! probability `p`, the ancilla-mediated circuits that realize them on a
//! gate-based machine, and the continuous-time Lindblad limit of repeated
//! pumping. On top of those sit a gate/readout noise model with
//! calibration-matrix mitigation and an experiment runner that sweeps `p` and
//! records population curves for the four Bell states and the sixteen
//! GHZ-family states.

pub mod channel;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod lindblad;
pub mod noise;
pub mod pauli;

pub use channel::KrausMap;
pub use circuit::{Circuit, Gate};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, PopulationCurve};
pub use linalg::{CMatrix, CVector, DensityMatrix, PureState, C64};
pub use lindblad::LindbladModel;
pub use noise::{ConfusionMatrix, NoiseModel};
pub use pauli::{Pauli, PauliString, Sign};
