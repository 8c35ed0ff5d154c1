//! Seeded random states for simulation studies and property tests.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{DensityMatrix, PureState};

/// Haar-ish random pure state: complex standard normal amplitudes,
/// normalized.
pub fn random_pure_state<R: Rng>(n_qubits: usize, rng: &mut R) -> PureState {
    let dim = 1usize << n_qubits;
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    PureState::new(amps).expect("normal amplitudes are normalizable")
}

/// Random mixture of `components` random pure states with Dirichlet(1)
/// weights.
pub fn random_density_matrix<R: Rng>(
    n_qubits: usize,
    components: usize,
    rng: &mut R,
) -> DensityMatrix {
    let k = components.max(1);
    let weights: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let parts: Vec<(f64, DensityMatrix)> = weights
        .into_iter()
        .map(|w| (w, DensityMatrix::from_pure(&random_pure_state(n_qubits, rng))))
        .collect();
    DensityMatrix::mix(&parts).expect("positive weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    #[test]
    fn random_states_are_valid() {
        let mut rng = SimRng::seed_from_u64(3);
        for n in 1..=3 {
            for k in 1..=4 {
                let rho = random_density_matrix(n, k, &mut rng);
                assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
            }
        }
    }

    #[test]
    fn seeded_reproducibility() {
        let a = random_pure_state(3, &mut SimRng::seed_from_u64(5));
        let b = random_pure_state(3, &mut SimRng::seed_from_u64(5));
        assert_eq!(a.amplitudes(), b.amplitudes());
    }
}
