use num_complex::Complex64;

use super::{qubits_for_dim, CMatrix, CVector, QcoreError, EIGENVALUE_CLIP, MAX_QUBITS};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// Normalized complex amplitudes of a pure polarization state on 1–3 qubits.
///
/// Amplitudes are stored in the crate-wide lexicographic basis order
/// (`|H..H>` first, `|V..V>` last).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: CVector,
}

impl PureState {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, QcoreError> {
        let n_qubits = qubits_for_dim(amplitudes.len())
            .ok_or(QcoreError::BadAmplitudeLength { len: amplitudes.len() })?;
        let mut v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm < NORM_TOL {
            return Err(QcoreError::NotNormalizable { norm });
        }
        v /= Complex64::new(norm, 0.0);
        Ok(Self { n_qubits, amplitudes: v })
    }

    /// The computational basis ket `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, QcoreError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QcoreError::QubitCountOutOfRange { requested: n_qubits });
        }
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index {index} out of range for {n_qubits} qubits");
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes: v })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    pub(crate) fn vector(&self) -> &CVector {
        &self.amplitudes
    }

    /// Kronecker product; `self` takes the most significant basis slots.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, QcoreError> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(QcoreError::QubitCountOutOfRange { requested: n });
        }
        Ok(PureState { n_qubits: n, amplitudes: self.amplitudes.kronecker(&other.amplitudes) })
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64, QcoreError> {
        if self.dim() != other.dim() {
            return Err(QcoreError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|H>`
pub fn ket_h() -> PureState {
    PureState::basis(1, 0).expect("single qubit")
}

/// `|V>`
pub fn ket_v() -> PureState {
    PureState::basis(1, 1).expect("single qubit")
}

/// `|D> = (|H>+|V>)/sqrt(2)`, the +1 eigenstate of X.
pub fn ket_d() -> PureState {
    PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).expect("normalizable")
}

/// `|A> = (|H>-|V>)/sqrt(2)`, the −1 eigenstate of X.
pub fn ket_a() -> PureState {
    PureState::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]).expect("normalizable")
}

/// `|R> = (|H>+i|V>)/sqrt(2)`, the +1 eigenstate of Y.
pub fn ket_r() -> PureState {
    PureState::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).expect("normalizable")
}

/// `|L> = (|H>-i|V>)/sqrt(2)`, the −1 eigenstate of Y.
pub fn ket_l() -> PureState {
    PureState::new(vec![c(1.0, 0.0), c(0.0, -1.0)]).expect("normalizable")
}

/// The three-photon GHZ target state `(|HHH> + |VVV>)/sqrt(2)`.
pub fn ghz_state() -> PureState {
    let mut amps = vec![c(0.0, 0.0); 8];
    amps[0] = c(1.0, 0.0);
    amps[7] = c(1.0, 0.0);
    PureState::new(amps).expect("normalizable")
}

/// Hermitian, unit-trace, positive-semidefinite operator on 1–3 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates and wraps a matrix: Hermitian within 1e-10 elementwise,
    /// trace 1 within 1e-10, eigenvalues ≥ −1e-9.
    pub fn new(matrix: CMatrix) -> Result<Self, QcoreError> {
        if !matrix.is_square() {
            return Err(QcoreError::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        let n_qubits = qubits_for_dim(matrix.nrows())
            .ok_or(QcoreError::BadAmplitudeLength { len: matrix.nrows() })?;

        let mut residual = 0.0f64;
        for i in 0..matrix.nrows() {
            for j in i..matrix.ncols() {
                let d = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                residual = residual.max(d);
            }
        }
        if residual > HERMITIAN_TOL {
            return Err(QcoreError::NotHermitian { residual });
        }

        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(QcoreError::TraceNotOne { trace: trace.re });
        }

        // Symmetrize before the eigenvalue check so the validated value is
        // exactly Hermitian for downstream eigensolvers.
        let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = sym
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -EIGENVALUE_CLIP {
            return Err(QcoreError::NotPositiveSemidefinite { eigenvalue: min_eig });
        }

        Ok(Self { n_qubits, matrix: sym })
    }

    /// Rank-1 projector `|psi><psi|`.
    pub fn from_pure(state: &PureState) -> Self {
        let v = state.vector();
        let matrix = v * v.adjoint();
        Self { n_qubits: state.n_qubits(), matrix }
    }

    /// The maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self, QcoreError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QcoreError::QubitCountOutOfRange { requested: n_qubits });
        }
        let dim = 1usize << n_qubits;
        let matrix = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self { n_qubits, matrix })
    }

    /// Convex mixture of density matrices. Weights must be nonnegative and
    /// are normalized to sum to one.
    pub fn mix(components: &[(f64, DensityMatrix)]) -> Result<Self, QcoreError> {
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if components.is_empty() || components.iter().any(|(w, _)| *w < 0.0) || total <= 0.0 {
            return Err(QcoreError::BadMixture);
        }
        let dim = components[0].1.dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for (w, rho) in components {
            if rho.dim() != dim {
                return Err(QcoreError::DimensionMismatch { left: dim, right: rho.dim() });
            }
            acc += &rho.matrix * Complex64::new(*w / total, 0.0);
        }
        Ok(Self { n_qubits: components[0].1.n_qubits, matrix: acc })
    }

    /// Wraps a matrix that is Hermitian/unit-trace/PSD by construction.
    pub(crate) fn from_valid(n_qubits: usize, matrix: CMatrix) -> Self {
        Self { n_qubits, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        super::metrics::hermitian_eigenvalues(&self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn new_normalizes() {
        let s = PureState::new(vec![c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert_relative_eq!(s.amplitudes()[0].re, 0.6, epsilon = 1e-12);
        assert_relative_eq!(s.amplitudes()[1].re, 0.8, epsilon = 1e-12);
        let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_vector_rejected() {
        let e = PureState::new(vec![c(0.0, 0.0); 2]).unwrap_err();
        assert!(matches!(e, QcoreError::NotNormalizable { .. }));
    }

    #[test]
    fn bad_lengths_rejected() {
        assert!(PureState::new(vec![c(1.0, 0.0); 3]).is_err());
        assert!(PureState::new(vec![c(1.0, 0.0); 16]).is_err());
        assert!(PureState::new(vec![c(1.0, 0.0); 1]).is_err());
    }

    #[test]
    fn ghz_amplitudes_match_target() {
        let g = ghz_state();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(g.n_qubits(), 3);
        assert_relative_eq!(g.amplitudes()[0].re, r, epsilon = 1e-15);
        assert_relative_eq!(g.amplitudes()[7].re, r, epsilon = 1e-15);
        for k in 1..7 {
            assert_eq!(g.amplitudes()[k], c(0.0, 0.0));
        }
    }

    #[test]
    fn tensor_basis_ordering() {
        // |H> ⊗ |V> puts the 1 at index 1 of 4.
        let hv = ket_h().tensor(&ket_v()).unwrap();
        assert_eq!(hv.amplitudes()[1], c(1.0, 0.0));
        assert_eq!(hv.amplitudes()[0], c(0.0, 0.0));
        // and four qubits total is rejected
        let hh = ket_h().tensor(&ket_h()).unwrap();
        assert!(hh.tensor(&hh).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let rho = DensityMatrix::from_pure(&ghz_state());
        assert_relative_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-14);
        // non-unit trace rejected
        let bad = rho.matrix() * Complex64::new(1.1, 0.0);
        assert!(matches!(DensityMatrix::new(bad), Err(QcoreError::TraceNotOne { .. })));
        // non-Hermitian rejected
        let mut m = rho.matrix().clone();
        m[(0, 1)] = c(0.3, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        // negative eigenvalue rejected
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = c(1.2, 0.0);
        neg[(1, 1)] = c(-0.2, 0.0);
        assert!(matches!(
            DensityMatrix::new(neg),
            Err(QcoreError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn mixing_preserves_validity() {
        let a = DensityMatrix::from_pure(&ghz_state());
        let b = DensityMatrix::maximally_mixed(3).unwrap();
        let m = DensityMatrix::mix(&[(0.9, a), (0.1, b)]).unwrap();
        assert!(DensityMatrix::new(m.matrix().clone()).is_ok());
        assert!(DensityMatrix::mix(&[]).is_err());
    }
}
