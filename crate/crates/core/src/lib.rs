//! Pairwise tomography networks.
//!
//! Schedule `6⌈log₃N⌉ + 3` local measurement settings that cover every Pauli
//! correlator of every qubit pair, simulate their readout on exact
//! statevectors, reconstruct all two-qubit reduced states, and unfold them
//! into a filtered multiplex of six pairwise quantities.

pub mod density;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod network;
pub mod pipeline;
pub mod quantifiers;
pub mod sampler;
pub mod scheduler;
pub mod states;

pub use density::DensityMatrix2Q;
pub use error::{Error, Result};
pub use estimator::{reconstruct, PairCorrelators, PairState, TomographyNetwork};
pub use network::{apply_filter, build_multiplex, calibrate_filter, FilterCalibration, Layer, Multiplex};
pub use quantifiers::{metrics, PairMetrics};
pub use sampler::{exact_counts, sample, CountsRecord};
pub use scheduler::{generate_plan, Basis, CoverageReport, MeasurementPlan, Setting};
pub use states::StateVector;
