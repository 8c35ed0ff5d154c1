use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{linear_inversion, EstimationError};
use crate::exec;
use crate::measurement::{sample_std, CountRecord, Estimate};
use crate::qcore::{
    fidelity, purity, tangle, CMatrix, DensityMatrix, PureState,
};
use crate::rng::{self, domain};

use super::bootstrap::poisson_resample;

/// Options for [`mle_reconstruct`].
#[derive(Debug, Clone)]
pub struct MleOptions {
    /// Iteration cap; hitting it reports `converged = false`.
    pub max_iterations: usize,
    /// Convergence threshold on the absolute log-likelihood improvement.
    pub tolerance: f64,
    /// Start from the PSD-projected linear inversion instead of the
    /// maximally mixed state.
    pub warm_start: bool,
    /// Poisson-bootstrap replicas behind the metric error bars; 0 disables
    /// resampling (sigmas come out 0).
    pub bootstrap_replicas: usize,
    pub seed: u64,
    /// Pure target for the fidelity metric; without it no fidelity is
    /// reported.
    pub fidelity_target: Option<PureState>,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-9,
            warm_start: false,
            bootstrap_replicas: 100,
            seed: 0xC5CADE,
            fidelity_target: None,
        }
    }
}

/// Reconstruction metrics with bootstrap error bars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyMetrics {
    pub fidelity: Option<Estimate>,
    pub purity: Estimate,
    /// Two-qubit states only.
    pub tangle: Option<Estimate>,
}

/// Output of a maximum-likelihood reconstruction.
#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub metrics: TomographyMetrics,
}

/// Maximum-likelihood tomography on the Cholesky-style parametrization
/// `rho = T^dagger T / Tr(T^dagger T)` with `T` lower triangular, which keeps
/// every iterate (and hence the result) positive semidefinite with unit
/// trace by construction.
///
/// The optimizer is a monotone gradient ascent on the entries of `T` with an
/// adaptive backtracking step: accepted iterates never decrease the
/// multinomial log-likelihood, and the search stops once the improvement
/// falls below `tolerance` (or the iteration cap is hit, which is reported
/// through `converged`, never silently).
pub fn mle_reconstruct(
    records: &[CountRecord],
    initial: Option<&CMatrix>,
    options: &MleOptions,
) -> Result<TomographyResult, EstimationError> {
    let problem = Problem::build(records)?;
    let t0 = match initial {
        Some(matrix) => cholesky_point(matrix),
        None if options.warm_start => cholesky_point(&linear_inversion(records)?),
        None => {
            let scale = Complex64::new(1.0 / (problem.dim as f64).sqrt(), 0.0);
            CMatrix::identity(problem.dim, problem.dim) * scale
        }
    };

    let fit = optimize(&problem, t0, options.max_iterations, options.tolerance);
    let rho = DensityMatrix::new(fit.rho.clone()).map_err(EstimationError::Qcore)?;
    let metrics = bootstrap_metric_sigmas(&rho, records, options)?;

    Ok(TomographyResult {
        rho,
        log_likelihood: fit.log_likelihood,
        iterations: fit.iterations,
        converged: fit.converged,
        metrics,
    })
}

struct Problem {
    dim: usize,
    /// Per outcome: rank-1 vector or dense projector, with its count.
    terms: Vec<(OutcomeOp, f64)>,
    total: f64,
}

enum OutcomeOp {
    Vector(nalgebra::DVector<Complex64>),
    Matrix(CMatrix),
}

impl Problem {
    fn build(records: &[CountRecord]) -> Result<Self, EstimationError> {
        let n = records
            .first()
            .map(|r| r.setting().n_photons())
            .ok_or(EstimationError::MissingSettings { missing: vec!["all".into()] })?;
        let dim = 1usize << n;
        let mut terms = Vec::new();
        let mut total = 0.0;
        for record in records {
            if record.setting().n_photons() != n {
                return Err(EstimationError::ArityMismatch {
                    got: record.setting().n_photons(),
                    want: n,
                });
            }
            if record.total() == 0 {
                return Err(EstimationError::Measurement(
                    crate::measurement::MeasurementError::EmptyRecord,
                ));
            }
            let vectors = record.setting().outcome_vectors();
            for (k, &count) in record.counts().iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let op = match &vectors {
                    Some(vs) => OutcomeOp::Vector(vs[k].vector().clone()),
                    None => OutcomeOp::Matrix(
                        record.setting().outcome_projector(k)?.matrix().clone(),
                    ),
                };
                terms.push((op, count as f64));
                total += count as f64;
            }
        }
        Ok(Self { dim, terms, total })
    }

    /// Log-likelihood and the `A = sum (n_k / p_k) Pi_k` matrix at `rho`.
    fn evaluate(&self, rho: &CMatrix, with_gradient: bool) -> (f64, Option<CMatrix>) {
        let mut ll = 0.0;
        let mut a = if with_gradient { Some(CMatrix::zeros(self.dim, self.dim)) } else { None };
        for (op, count) in &self.terms {
            let p = match op {
                OutcomeOp::Vector(v) => (v.adjoint() * rho * v)[(0, 0)].re,
                OutcomeOp::Matrix(m) => {
                    let mut tr = Complex64::new(0.0, 0.0);
                    for i in 0..self.dim {
                        for j in 0..self.dim {
                            tr += rho[(i, j)] * m[(j, i)];
                        }
                    }
                    tr.re
                }
            };
            let p_safe = p.max(1e-300);
            ll += count * p_safe.ln();
            if let Some(acc) = &mut a {
                let w = Complex64::new(count / p_safe, 0.0);
                match op {
                    OutcomeOp::Vector(v) => {
                        // acc += w * v v^dagger
                        for i in 0..self.dim {
                            let vi = v[i] * w;
                            for j in 0..self.dim {
                                acc[(i, j)] += vi * v[j].conj();
                            }
                        }
                    }
                    OutcomeOp::Matrix(m) => {
                        *acc += m * w;
                    }
                }
            }
        }
        (ll, a)
    }
}

struct Fit {
    rho: CMatrix,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
}

fn optimize(problem: &Problem, t_init: CMatrix, max_iterations: usize, tolerance: f64) -> Fit {
    let mut t = normalize(t_init);
    let mut rho = rho_of(&t);
    let (mut ll, _) = problem.evaluate(&rho, false);
    let mut alpha = 0.5;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iterations {
        iterations += 1;
        let (_, a) = problem.evaluate(&rho, true);
        let a = a.expect("gradient requested");
        // Wirtinger ascent direction: T (A - N I) / tau, masked to the
        // lower-triangular parametrization with a real diagonal.
        let tau = t.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut shifted = a;
        for i in 0..problem.dim {
            shifted[(i, i)] -= Complex64::new(problem.total, 0.0);
        }
        let mut grad = &t * shifted * Complex64::new(1.0 / tau, 0.0);
        mask_lower(&mut grad);

        let mut improved = false;
        let mut step = alpha;
        for _ in 0..48 {
            let trial = normalize(&t + &grad * Complex64::new(step, 0.0));
            let trial_rho = rho_of(&trial);
            let (trial_ll, _) = problem.evaluate(&trial_rho, false);
            if trial_ll > ll {
                let delta = trial_ll - ll;
                t = trial;
                rho = trial_rho;
                ll = trial_ll;
                alpha = (step * 1.6).min(1e4);
                improved = true;
                if delta < tolerance {
                    converged = true;
                }
                break;
            }
            step *= 0.35;
        }
        if !improved {
            // No ascent step representable: improvement below tolerance.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    Fit { rho, log_likelihood: ll, iterations, converged }
}

fn rho_of(t: &CMatrix) -> CMatrix {
    let gram = t.adjoint() * t;
    let tau = gram.trace().re;
    gram * Complex64::new(1.0 / tau, 0.0)
}

fn normalize(t: CMatrix) -> CMatrix {
    let tau = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    t * Complex64::new(1.0 / tau, 0.0)
}

fn mask_lower(m: &mut CMatrix) {
    let dim = m.nrows();
    for i in 0..dim {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..dim {
            m[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Projects an arbitrary Hermitian matrix onto a strictly positive density
/// matrix and factors it as `T^dagger T` with `T` lower triangular, the
/// starting point for warm starts.
fn cholesky_point(matrix: &CMatrix) -> CMatrix {
    let dim = matrix.nrows();
    let sym = (matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let floor = 1e-6;
    let clipped = eig.eigenvalues.map(|x| x.max(floor));
    let total: f64 = clipped.iter().sum();
    let diag = CMatrix::from_diagonal(&clipped.map(|x| Complex64::new(x / total, 0.0)));
    let psd = &eig.eigenvectors * diag * eig.eigenvectors.adjoint();
    // A lower-triangular T with T^dagger T = rho is the Cholesky factor of
    // the index-reversed matrix, un-reversed and conjugated.
    let flipped = reverse_index(&psd);
    let chol = flipped.clone().cholesky().unwrap_or_else(|| {
        let ridge = CMatrix::identity(dim, dim) * Complex64::new(1e-9, 0.0);
        (flipped + ridge).cholesky().expect("ridged matrix is positive definite")
    });
    reverse_index(&chol.l()).adjoint()
}

/// Conjugation by the index-reversal permutation.
fn reverse_index(m: &CMatrix) -> CMatrix {
    let dim = m.nrows();
    CMatrix::from_fn(dim, dim, |i, j| m[(dim - 1 - i, dim - 1 - j)])
}

fn bootstrap_metric_sigmas(
    rho: &DensityMatrix,
    records: &[CountRecord],
    options: &MleOptions,
) -> Result<TomographyMetrics, EstimationError> {
    let point_fidelity = match &options.fidelity_target {
        Some(target) => Some(fidelity(rho, target)?),
        None => None,
    };
    let point_purity = purity(rho);
    let point_tangle = if rho.n_qubits() == 2 { Some(tangle(rho)?) } else { None };

    let replicas = options.bootstrap_replicas;
    if replicas == 0 {
        return Ok(TomographyMetrics {
            fidelity: point_fidelity.map(|value| Estimate { value, sigma: 0.0 }),
            purity: Estimate { value: point_purity, sigma: 0.0 },
            tangle: point_tangle.map(|value| Estimate { value, sigma: 0.0 }),
        });
    }

    let replica_options = MleOptions {
        bootstrap_replicas: 0,
        warm_start: true,
        fidelity_target: options.fidelity_target.clone(),
        ..options.clone()
    };
    let rows = exec::map_indexed(replicas, |i| {
        let mut rng = rng::rng_for(options.seed, domain::TOMO, i as u64);
        let resampled: Vec<CountRecord> =
            records.iter().map(|r| poisson_resample(r, &mut rng)).collect();
        let fit = mle_reconstruct(&resampled, None, &replica_options).ok()?;
        let f = match &replica_options.fidelity_target {
            Some(target) => Some(fidelity(&fit.rho, target).ok()?),
            None => None,
        };
        let t = if fit.rho.n_qubits() == 2 { Some(tangle(&fit.rho).ok()?) } else { None };
        Some((f, purity(&fit.rho), t))
    });
    let kept: Vec<(Option<f64>, f64, Option<f64>)> = rows.into_iter().flatten().collect();
    let failed = replicas - kept.len();
    if failed * 10 > replicas {
        return Err(EstimationError::ExcessiveReplicaFailures { failed, total: replicas });
    }

    let column_sigma = |values: Vec<f64>| -> f64 {
        if values.len() > 1 {
            sample_std(&values)
        } else {
            0.0
        }
    };
    let fidelity_sigma =
        column_sigma(kept.iter().filter_map(|(f, _, _)| *f).collect::<Vec<f64>>());
    let purity_sigma = column_sigma(kept.iter().map(|(_, p, _)| *p).collect());
    let tangle_sigma = column_sigma(kept.iter().filter_map(|(_, _, t)| *t).collect::<Vec<f64>>());

    Ok(TomographyMetrics {
        fidelity: point_fidelity.map(|value| Estimate { value, sigma: fidelity_sigma }),
        purity: Estimate { value: point_purity, sigma: purity_sigma },
        tangle: point_tangle.map(|value| Estimate { value, sigma: tangle_sigma }),
    })
}
