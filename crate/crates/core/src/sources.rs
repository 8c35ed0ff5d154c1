//! Parametrized ideal and noisy states for the two pair sources and the
//! cascaded triplet source, plus the rate bookkeeping used by the CLI.
//!
//! The first source emits `cos(theta)|HV> + e^{i phi} sin(theta)|VH>` pairs;
//! the second emits `cos(theta')|HH> + e^{i phi'} sin(theta')|VV>`. Cascading
//! them produces `cos(theta)|HHH> + e^{i Phi} sin(theta)|VVV>` where the
//! triplet phase `Phi` collects both pump phases; only their sum is
//! observable, so the default mode takes `Phi = phi + phi'`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{DensityMatrix, PureState, QcoreError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SourceError {
    #[error("parameter {name} = {value} outside [0, 1]")]
    UnitInterval { name: &'static str, value: f64 },
    #[error("parameter {name} = {value} must be nonnegative")]
    Negative { name: &'static str, value: f64 },
    #[error("coincidence window must be positive, got {0}")]
    BadWindow(f64),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

/// Which relative phase the triplet state carries: the sum of the two pump
/// phases, or an explicit override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripletPhaseMode {
    Combined,
    Explicit,
}

/// Every physical parameter of the cascaded source in one place.
///
/// Channel ordering follows the photon convention: index 0 is the 846 nm
/// photon, 1 the 1530 nm photon, 2 the 1570 nm photon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Pair amplitude balance of the first source, radians.
    pub theta: f64,
    /// Pair phase of the first source, radians.
    pub phi: f64,
    /// Pair amplitude balance of the second source, radians.
    pub theta_prime: f64,
    /// Pair phase of the second source, radians.
    pub phi_prime: f64,
    pub triplet_phase_mode: TripletPhaseMode,
    /// Triplet phase used in `Explicit` mode, radians.
    pub triplet_phase: f64,
    /// White-noise admixture `p` in `[0, 1]`.
    pub white_noise: f64,
    /// Coherence survival factor `v` in `[0, 1]`.
    pub dephasing_visibility: f64,
    /// Detected pairs per second from the first source.
    pub pair_rate_1: f64,
    /// Detected pairs per second from the second source.
    pub pair_rate_2: f64,
    /// Detected triplets per second from the cascade.
    pub triplet_rate: f64,
    /// Dark counts per second on each detector channel.
    pub dark_rate: f64,
    /// Combined coupling and detection efficiency per photon.
    pub channel_efficiency: [f64; 3],
    /// Coupling between the two sources, in `[0, 1]`.
    pub cascade_coupling: f64,
    /// Coincidence window, seconds.
    pub coincidence_window: f64,
    /// Detector timing jitter sigma, seconds. Zero disables jitter.
    #[serde(default)]
    pub timing_jitter: f64,
}

impl SourceConfig {
    pub fn validate(&self) -> Result<(), SourceError> {
        let unit = |name: &'static str, value: f64| {
            if !(0.0..=1.0).contains(&value) {
                Err(SourceError::UnitInterval { name, value })
            } else {
                Ok(())
            }
        };
        let nonneg = |name: &'static str, value: f64| {
            if value < 0.0 || !value.is_finite() {
                Err(SourceError::Negative { name, value })
            } else {
                Ok(())
            }
        };
        unit("white_noise", self.white_noise)?;
        unit("dephasing_visibility", self.dephasing_visibility)?;
        unit("cascade_coupling", self.cascade_coupling)?;
        for (i, eta) in self.channel_efficiency.iter().enumerate() {
            if !(0.0..=1.0).contains(eta) {
                return Err(SourceError::UnitInterval {
                    name: ["channel_efficiency[0]", "channel_efficiency[1]", "channel_efficiency[2]"][i],
                    value: *eta,
                });
            }
        }
        nonneg("pair_rate_1", self.pair_rate_1)?;
        nonneg("pair_rate_2", self.pair_rate_2)?;
        nonneg("triplet_rate", self.triplet_rate)?;
        nonneg("dark_rate", self.dark_rate)?;
        nonneg("timing_jitter", self.timing_jitter)?;
        if !(self.coincidence_window > 0.0) {
            return Err(SourceError::BadWindow(self.coincidence_window));
        }
        Ok(())
    }

    /// The triplet phase after resolving the phase mode.
    pub fn resolved_triplet_phase(&self) -> f64 {
        match self.triplet_phase_mode {
            TripletPhaseMode::Combined => self.phi + self.phi_prime,
            TripletPhaseMode::Explicit => self.triplet_phase,
        }
    }

    /// Ideal triplet state for this configuration.
    pub fn triplet_state(&self) -> PureState {
        ghz_exp_state(self.theta, self.resolved_triplet_phase())
    }

    /// Noisy triplet state for this configuration.
    pub fn noisy_triplet(&self) -> Result<DensityMatrix, SourceError> {
        noisy_state(&self.triplet_state(), self.white_noise, self.dephasing_visibility)
    }

    /// Ideal first-source pair state.
    pub fn psi_pair(&self) -> PureState {
        psi_pair_state(self.theta, self.phi)
    }

    /// Ideal second-source pair state.
    pub fn phi_pair(&self) -> PureState {
        phi_pair_state(self.theta_prime, self.phi_prime)
    }

    /// Noisy pair state for the given source.
    pub fn noisy_pair(&self, which: PairSource) -> Result<DensityMatrix, SourceError> {
        let ideal = match which {
            PairSource::Psi => self.psi_pair(),
            PairSource::Phi => self.phi_pair(),
        };
        noisy_state(&ideal, self.white_noise, self.dephasing_visibility)
    }

    /// Detected rate for the given pair source.
    pub fn pair_rate(&self, which: PairSource) -> f64 {
        match which {
            PairSource::Psi => self.pair_rate_1,
            PairSource::Phi => self.pair_rate_2,
        }
    }

    /// Emission rate before detection losses, inferred from the detected
    /// rate by undoing the per-photon efficiencies: detected = emitted *
    /// prod(eta_i) over the participating photons.
    pub fn emission_rate(&self, n_photons: usize) -> f64 {
        let detected = match n_photons {
            3 => self.triplet_rate,
            2 => self.pair_rate_1,
            _ => self.pair_rate_1,
        };
        let eta: f64 = self.channel_efficiency.iter().take(n_photons).product();
        if eta <= 0.0 {
            0.0
        } else {
            detected / eta
        }
    }

    /// Expected singles rate per photon analyzer (signal plus the dark rate
    /// of its two detector ports).
    pub fn singles_rates(&self, n_photons: usize) -> Vec<f64> {
        let emission = self.emission_rate(n_photons);
        (0..n_photons)
            .map(|i| emission * self.channel_efficiency[i] + 2.0 * self.dark_rate)
            .collect()
    }
}

/// Which of the two pair sources is under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSource {
    /// First source, emitting `|HV>`/`|VH>` superpositions.
    Psi,
    /// Second source, emitting `|HH>`/`|VV>` superpositions.
    Phi,
}

/// Parent polarization entering the cascade crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `cos(theta)|HV> + e^{i phi} sin(theta)|VH>`
pub fn psi_pair_state(theta: f64, phi: f64) -> PureState {
    let amps = vec![
        c(0.0, 0.0),
        c(theta.cos(), 0.0),
        Complex64::from_polar(theta.sin(), phi),
        c(0.0, 0.0),
    ];
    PureState::new(amps).expect("normalized by construction")
}

/// `cos(theta')|HH> + e^{i phi'} sin(theta')|VV>`
pub fn phi_pair_state(theta_prime: f64, phi_prime: f64) -> PureState {
    let amps = vec![
        c(theta_prime.cos(), 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        Complex64::from_polar(theta_prime.sin(), phi_prime),
    ];
    PureState::new(amps).expect("normalized by construction")
}

/// Polarization map of the downconversion cascade: an `H` parent converts to
/// `|VV>` children, a `V` parent to `|HH>` (relative phases are absorbed
/// into the triplet phase).
pub fn cascade_map(parent: Polarization) -> PureState {
    match parent {
        Polarization::H => ket_vv(),
        Polarization::V => ket_hh(),
    }
}

fn ket_vv() -> PureState {
    PureState::basis(2, 3).expect("two qubits")
}

fn ket_hh() -> PureState {
    PureState::basis(2, 0).expect("two qubits")
}

/// Triplet state produced by the cascade after the collimator swap:
/// `cos(theta)|HHH> + e^{i Phi} sin(theta)|VVV>`.
pub fn ghz_exp_state(theta: f64, phase: f64) -> PureState {
    let mut amps = vec![c(0.0, 0.0); 8];
    amps[0] = c(theta.cos(), 0.0);
    amps[7] = Complex64::from_polar(theta.sin(), phase);
    PureState::new(amps).expect("normalized by construction")
}

/// Two-parameter noise channel: coherences (off-diagonal elements of the
/// pure-state projector) are scaled by `v`, then a white-noise admixture `p`
/// of the maximally mixed state is blended in.
pub fn noisy_state(ideal: &PureState, p: f64, v: f64) -> Result<DensityMatrix, SourceError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SourceError::UnitInterval { name: "white_noise", value: p });
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(SourceError::UnitInterval { name: "dephasing_visibility", value: v });
    }
    let dim = ideal.dim();
    let pure = DensityMatrix::from_pure(ideal);
    let mut m = pure.matrix().clone();
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                m[(i, j)] *= c(v, 0.0);
            }
        }
    }
    let white = c(p / dim as f64, 0.0);
    let keep = c(1.0 - p, 0.0);
    let mut out = m * keep;
    for i in 0..dim {
        out[(i, i)] += white;
    }
    Ok(DensityMatrix::from_valid(ideal.n_qubits(), out))
}

/// Order-of-magnitude estimate of the detected triplet rate:
/// `pair_rate_1 / eta_845 * cascade_coupling * conversion_efficiency
///  * eta_1530 * eta_1570`.
pub fn predicted_triplet_rate(config: &SourceConfig, conversion_efficiency: f64) -> f64 {
    let [eta_845, eta_1530, eta_1570] = config.channel_efficiency;
    if eta_845 <= 0.0 {
        return 0.0;
    }
    config.pair_rate_1 / eta_845
        * config.cascade_coupling
        * conversion_efficiency
        * eta_1530
        * eta_1570
}

/// Conversion efficiency implied by the reference operating point
/// (3e6 detected pairs/s, 0.30 coupling, efficiencies 0.30/0.16/0.13,
/// ~10 detected triplets per hour). Recorded for rate studies, not a claim
/// about any particular crystal.
pub const REFERENCE_CONVERSION_EFFICIENCY: f64 = 4.451566951566952e-8;

/// Half-wave-plate angle compensating a clockwise/counter-clockwise coupling
/// imbalance `r`: `theta = arctan(sqrt(r))` restores equal `|H..H>` and
/// `|V..V>` weights.
pub fn compensated_theta(efficiency_ratio: f64) -> f64 {
    efficiency_ratio.max(0.0).sqrt().atan()
}
