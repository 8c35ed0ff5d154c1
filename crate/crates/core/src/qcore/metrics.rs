use num_complex::Complex64;

use super::{CMatrix, DensityMatrix, Observable, PureState, QcoreError};

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(matrix: &CMatrix) -> Vec<f64> {
    let mut eigs: Vec<f64> = matrix.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    eigs
}

/// Hermitian square root of a PSD matrix. Eigenvalues in `[-1e-9, 0)` are
/// clipped to zero; anything more negative indicates a caller bug.
pub fn sqrtm_psd(matrix: &CMatrix) -> CMatrix {
    let eig = matrix.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|x| {
        debug_assert!(x > -1e-6, "sqrtm_psd called on non-PSD matrix (eigenvalue {x})");
        Complex64::new(x.max(0.0).sqrt(), 0.0)
    });
    &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Expectation value `Tr(rho O)`. The imaginary residue (floating-point
/// noise for Hermitian inputs) is discarded.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64, QcoreError> {
    if rho.dim() != obs.dim() {
        return Err(QcoreError::DimensionMismatch { left: rho.dim(), right: obs.dim() });
    }
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..rho.dim() {
        for k in 0..rho.dim() {
            tr += rho.matrix()[(i, k)] * obs.matrix()[(k, i)];
        }
    }
    debug_assert!(tr.im.abs() < 1e-9, "expectation has imaginary residue {}", tr.im);
    Ok(tr.re)
}

/// Overlap `<psi| rho |psi>` with a pure target.
pub fn fidelity(rho: &DensityMatrix, target: &PureState) -> Result<f64, QcoreError> {
    if rho.dim() != target.dim() {
        return Err(QcoreError::DimensionMismatch { left: rho.dim(), right: target.dim() });
    }
    let v = target.vector();
    let f = (v.adjoint() * rho.matrix() * v)[(0, 0)];
    debug_assert!(f.im.abs() < 1e-10, "fidelity has imaginary residue {}", f.im);
    Ok(f.re)
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Squared Wootters concurrence of a two-qubit state.
///
/// `C = max(0, l1 - l2 - l3 - l4)` with `l_i` the decreasing square roots of
/// the eigenvalues of `rho * (Y⊗Y) * conj(rho) * (Y⊗Y)`, computed here
/// through the Hermitian form `sqrt(rho) * rho_tilde * sqrt(rho)`.
pub fn tangle(rho: &DensityMatrix) -> Result<f64, QcoreError> {
    // Eigenvalues of the product matrix below this floor are floating-point
    // residue; the square root would blow the noise up to ~1e-8 otherwise.
    const EIGEN_FLOOR: f64 = 1e-12;
    if rho.n_qubits() != 2 {
        return Err(QcoreError::TangleArity { n_qubits: rho.n_qubits() });
    }
    let yy = Observable::sigma_y().tensor(&Observable::sigma_y()).expect("two qubits");
    let conj = rho.matrix().map(|z| z.conj());
    let tilde = yy.matrix() * conj * yy.matrix();
    let root = sqrtm_psd(rho.matrix());
    let m = &root * tilde * &root;
    let lambdas: Vec<f64> = hermitian_eigenvalues(&m)
        .into_iter()
        .map(|x| if x < EIGEN_FLOOR { 0.0 } else { x.sqrt() })
        .collect();
    let concurrence = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    Ok(concurrence * concurrence)
}

/// Reduced density matrix on the kept qubits (0-based indices, photon 1 is
/// index 0). `keep` must be a nonempty strict subset.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, QcoreError> {
    let n = rho.n_qubits();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.len() >= n || keep.iter().any(|&q| q >= n) {
        return Err(QcoreError::BadKeepSet);
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let m = keep.len();
    let dim_out = 1usize << m;
    let dim_tr = 1usize << traced.len();

    // Photon q occupies bit weight 2^(n-1-q) in the full index.
    let weight = |q: usize| 1usize << (n - 1 - q);
    let embed = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0;
        for (pos, &q) in keep.iter().enumerate() {
            if kept_bits >> (m - 1 - pos) & 1 == 1 {
                idx += weight(q);
            }
        }
        for (pos, &q) in traced.iter().enumerate() {
            if traced_bits >> (traced.len() - 1 - pos) & 1 == 1 {
                idx += weight(q);
            }
        }
        idx
    };

    let mut out = CMatrix::zeros(dim_out, dim_out);
    for i in 0..dim_out {
        for j in 0..dim_out {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..dim_tr {
                acc += rho.matrix()[(embed(i, t), embed(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_valid(m, out))
}

/// Trace distance `0.5 * Tr|a - b|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, QcoreError> {
    if a.dim() != b.dim() {
        return Err(QcoreError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let diff = a.matrix() - b.matrix();
    Ok(hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>() / 2.0)
}
