//! State reconstruction, witness evaluation, phase-scan fitting, and
//! bootstrap error propagation.

mod bootstrap;
mod inversion;
mod mle;
mod sinusoid;
mod witness;

pub use bootstrap::{bootstrap_metrics, poisson_resample, MIN_REPLICAS};
pub use inversion::linear_inversion;
pub use mle::{mle_reconstruct, MleOptions, TomographyMetrics, TomographyResult};
pub use sinusoid::{fit_sinusoid, PhasePoint, SinusoidFit};
pub use witness::{ghz_witness, ghz_witness_from_records, witness_observable, WitnessResult};

use thiserror::Error;

use crate::measurement::MeasurementError;
use crate::qcore::QcoreError;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("missing tomography settings: {missing:?}")]
    MissingSettings { missing: Vec<String> },
    #[error("records cover {got} photons, expected {want}")]
    ArityMismatch { got: usize, want: usize },
    #[error("at least {MIN_REPLICAS} bootstrap replicas required, got {0}")]
    TooFewReplicas(usize),
    #[error("{failed} of {total} bootstrap replicas failed (more than 10%)")]
    ExcessiveReplicaFailures { failed: usize, total: usize },
    #[error("sinusoid fit needs at least 3 points with distinct phases")]
    TooFewPoints,
    #[error("sinusoid fit is degenerate: phases coincide modulo pi")]
    DegeneratePhases,
    #[error("witness needs an {want:?} record, got {got:?}")]
    WrongSetting { want: &'static str, got: String },
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}
