//! Dense complex linear algebra for one to three polarization qubits.
//!
//! Basis convention, fixed crate-wide: `H` is bit 0 and `V` is bit 1, and a
//! multi-photon ket is indexed lexicographically with photon 1 most
//! significant, so `|HHH>` is index 0 and `|VVV>` is index 7. Photon 1 is the
//! 846 nm photon of the first pair source, photons 2 and 3 are the 1530 nm
//! and 1570 nm photons of the cascade.
//!
//! The X eigenbasis is `|D> = (|H>+|V>)/sqrt(2)` for +1 and `|A>` for −1; the
//! Y eigenbasis is `|R> = (|H>+i|V>)/sqrt(2)` for +1 and `|L>` for −1.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything here is safe to share across threads.

mod metrics;
mod operator;
mod random;
mod state;

pub use metrics::{
    expectation, fidelity, hermitian_eigenvalues, partial_trace, purity, sqrtm_psd, tangle,
    trace_distance,
};
pub use operator::Observable;
pub use random::{random_density_matrix, random_pure_state};
pub use state::{
    ghz_state, ket_a, ket_d, ket_h, ket_l, ket_r, ket_v, DensityMatrix, PureState,
};

use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = nalgebra::DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;

/// Largest supported register. Everything in this crate is at most a photon
/// triplet; dense 8x8 algebra is exact and fast at that size.
pub const MAX_QUBITS: usize = 3;

/// Tolerance below which eigenvalues are clipped to zero in metric
/// computations; linear inversion and MLE produce residues of this size.
pub const EIGENVALUE_CLIP: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QcoreError {
    #[error("operand dimensions do not match: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{requested} qubits requested, supported range is 1..={MAX_QUBITS}")]
    QubitCountOutOfRange { requested: usize },
    #[error("amplitude vector length {len} is not a power of two in range")]
    BadAmplitudeLength { len: usize },
    #[error("state norm {norm:.3e} is too small to normalize")]
    NotNormalizable { norm: f64 },
    #[error("matrix is not Hermitian (largest asymmetry {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("trace is {trace:.12} instead of 1")]
    TraceNotOne { trace: f64 },
    #[error("matrix has eigenvalue {eigenvalue:.3e} below the PSD tolerance")]
    NotPositiveSemidefinite { eigenvalue: f64 },
    #[error("partial trace must keep a nonempty strict subset of qubit indices")]
    BadKeepSet,
    #[error("tangle is defined for two-qubit states, got {n_qubits} qubits")]
    TangleArity { n_qubits: usize },
    #[error("invalid Pauli word label {label:?}")]
    BadPauliLabel { label: String },
    #[error("mixture weights must be nonnegative and sum to a positive value")]
    BadMixture,
}

pub(crate) fn qubits_for_dim(dim: usize) -> Option<usize> {
    (1..=MAX_QUBITS).find(|&n| 1usize << n == dim)
}
