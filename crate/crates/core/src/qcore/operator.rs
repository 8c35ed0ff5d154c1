use num_complex::Complex64;

use super::{qubits_for_dim, CMatrix, PureState, QcoreError, MAX_QUBITS};

const HERMITIAN_TOL: f64 = 1e-10;

/// Hermitian observable on 1–3 qubits with a text label such as `"XXX"` or
/// `"1ZZ"` (`1` marks an identity factor).
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    n_qubits: usize,
    matrix: CMatrix,
    label: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Observable {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self, QcoreError> {
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
                residual = residual.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if residual > HERMITIAN_TOL {
            return Err(QcoreError::NotHermitian { residual });
        }
        Ok(Self { n_qubits, matrix, label: label.into() })
    }

    /// Identity on `n_qubits`, labeled with `1` per slot.
    pub fn identity(n_qubits: usize) -> Result<Self, QcoreError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QcoreError::QubitCountOutOfRange { requested: n_qubits });
        }
        let dim = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: CMatrix::identity(dim, dim),
            label: "1".repeat(n_qubits),
        })
    }

    pub fn sigma_x() -> Self {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        Self { n_qubits: 1, matrix: m, label: "X".into() }
    }

    pub fn sigma_y() -> Self {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        Self { n_qubits: 1, matrix: m, label: "Y".into() }
    }

    pub fn sigma_z() -> Self {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        Self { n_qubits: 1, matrix: m, label: "Z".into() }
    }

    /// Tensor product of single-qubit factors named by `label`, e.g. `"XXX"`
    /// or `"Z1Z"`. Accepted characters: `X`, `Y`, `Z`, `1`.
    pub fn pauli_word(label: &str) -> Result<Self, QcoreError> {
        let bad = || QcoreError::BadPauliLabel { label: label.to_string() };
        if label.is_empty() || label.len() > MAX_QUBITS {
            return Err(bad());
        }
        let mut word: Option<Observable> = None;
        for ch in label.chars() {
            let factor = match ch {
                'X' => Self::sigma_x(),
                'Y' => Self::sigma_y(),
                'Z' => Self::sigma_z(),
                '1' => Self::identity(1).expect("single qubit"),
                _ => return Err(bad()),
            };
            word = Some(match word {
                None => factor,
                Some(w) => w.tensor(&factor)?,
            });
        }
        Ok(word.expect("nonempty label"))
    }

    /// Rank-1 projector `|psi><psi|` as an observable.
    pub fn projector(state: &PureState, label: impl Into<String>) -> Self {
        let v = state.vector();
        Self { n_qubits: state.n_qubits(), matrix: v * v.adjoint(), label: label.into() }
    }

    /// Kronecker product; `self` takes the most significant slots. Labels
    /// concatenate. More than three qubits total is rejected.
    pub fn tensor(&self, other: &Observable) -> Result<Observable, QcoreError> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(QcoreError::QubitCountOutOfRange { requested: n });
        }
        Ok(Observable {
            n_qubits: n,
            matrix: self.matrix.kronecker(&other.matrix),
            label: format!("{}{}", self.label, other.label),
        })
    }

    /// Scales the observable by a real factor (labels untouched).
    pub fn scale(&self, factor: f64) -> Observable {
        Observable {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * c(factor, 0.0),
            label: self.label.clone(),
        }
    }

    /// Sum of two observables of equal dimension.
    pub fn add(&self, other: &Observable, label: impl Into<String>) -> Result<Observable, QcoreError> {
        if self.dim() != other.dim() {
            return Err(QcoreError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(Observable {
            n_qubits: self.n_qubits,
            matrix: &self.matrix + &other.matrix,
            label: label.into(),
        })
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

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Spectral range `(min, max)` of the observable.
    pub fn eigen_range(&self) -> (f64, f64) {
        let eigs = super::metrics::hermitian_eigenvalues(&self.matrix);
        (*eigs.last().expect("nonempty"), eigs[0])
    }
}
