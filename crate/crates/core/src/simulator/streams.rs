use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::SimulatorError;
use crate::exec;
use crate::measurement::{born_probabilities, MeasurementSetting};
use crate::qcore::DensityMatrix;
use crate::rng::{self, domain};
use crate::sources::SourceConfig;

pub const PS_PER_SECOND: f64 = 1.0e12;

/// Provenance of the clicks in a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClickOrigin {
    Signal,
    Dark,
    /// Streams that merged signal and dark clicks (e.g. after regrouping).
    Mixed,
}

/// Click times of one detector channel, strictly increasing, in integer
/// picoseconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimestampStream {
    pub channel: u8,
    pub times: Vec<u64>,
    pub origin: ClickOrigin,
}

impl TimestampStream {
    pub fn new(channel: u8, times: Vec<u64>, origin: ClickOrigin) -> Result<Self, SimulatorError> {
        let stream = Self { channel, times, origin };
        stream.validate()?;
        Ok(stream)
    }

    pub fn validate(&self) -> Result<(), SimulatorError> {
        for (i, pair) in self.times.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(SimulatorError::UnsortedStream { channel: self.channel, index: i + 1 });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Simulates detector click streams for one measurement block.
///
/// Emission epochs form a Poisson process at the configured emission rate
/// (the detected rate corrected for per-photon efficiencies). Each emission
/// is assigned an outcome from the Born distribution; every photon then
/// survives to its analyzer port with its channel efficiency, picking up
/// Gaussian timing jitter when configured. Independent dark-count processes
/// are returned as separate streams per channel so click provenance is
/// preserved.
///
/// Channels generate concurrently under the `parallel` feature; every
/// channel derives its own seed, so the output is schedule-independent.
pub fn generate_streams(
    config: &SourceConfig,
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
    duration: f64,
    seed: u64,
) -> Result<Vec<TimestampStream>, SimulatorError> {
    config.validate()?;
    if !(duration > 0.0) {
        return Err(SimulatorError::BadDuration(duration));
    }
    if !setting.is_full() || setting.n_photons() != rho.n_qubits() {
        return Err(SimulatorError::PartialSetting { label: setting.label().to_string() });
    }
    let n_photons = rho.n_qubits();
    let probs = born_probabilities(rho, setting)?;

    // Emission epochs and outcomes come from one stream so that channel
    // generation can fan out afterwards.
    let emission_rate = config.emission_rate(n_photons);
    let mut emissions: Vec<(f64, usize)> = Vec::new();
    if emission_rate > 0.0 {
        let mut rng = rng::rng_for(seed, domain::EMISSION, 0);
        let gap = Exp::new(emission_rate).expect("positive rate");
        let mut t = gap.sample(&mut rng);
        while t < duration {
            emissions.push((t, sample_outcome(&mut rng, &probs)));
            t += gap.sample(&mut rng);
        }
    }

    let n_channels = 2 * n_photons;
    let streams = exec::map_indexed(n_channels, |ch| {
        let channel = ch as u8;
        let photon = ch / 2;
        let port = (ch & 1) as usize;
        let eta = config.channel_efficiency[photon];
        let m = setting.n_measured();

        let mut signal_times: Vec<u64> = Vec::new();
        let mut thin_rng = rng::rng_for(seed, domain::THINNING, ch as u64);
        let jitter = if config.timing_jitter > 0.0 {
            Some(Normal::new(0.0, config.timing_jitter).expect("positive sigma"))
        } else {
            None
        };
        for &(t, outcome) in &emissions {
            let bit = outcome >> (m - 1 - photon) & 1;
            if bit != port {
                continue;
            }
            if thin_rng.random::<f64>() >= eta {
                continue;
            }
            let mut arrival = t;
            if let Some(dist) = &jitter {
                arrival += dist.sample(&mut thin_rng);
            }
            if arrival < 0.0 {
                arrival = 0.0;
            }
            signal_times.push((arrival * PS_PER_SECOND).round() as u64);
        }
        enforce_strictly_increasing(&mut signal_times);

        let mut dark_times: Vec<u64> = Vec::new();
        if config.dark_rate > 0.0 {
            let mut dark_rng = rng::rng_for(seed, domain::DARK, ch as u64);
            let gap = Exp::new(config.dark_rate).expect("positive rate");
            let mut t = gap.sample(&mut dark_rng);
            while t < duration {
                dark_times.push((t * PS_PER_SECOND).round() as u64);
                t += gap.sample(&mut dark_rng);
            }
            enforce_strictly_increasing(&mut dark_times);
        }

        (
            TimestampStream { channel, times: signal_times, origin: ClickOrigin::Signal },
            TimestampStream { channel, times: dark_times, origin: ClickOrigin::Dark },
        )
    });

    let mut out = Vec::with_capacity(2 * n_channels);
    for (signal, dark) in streams {
        out.push(signal);
        if !dark.is_empty() {
            out.push(dark);
        }
    }
    Ok(out)
}

fn sample_outcome<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &p) in probs.iter().enumerate() {
        if u < p {
            return k;
        }
        u -= p;
    }
    probs.len() - 1
}

fn enforce_strictly_increasing(times: &mut [u64]) {
    times.sort_unstable();
    for i in 1..times.len() {
        if times[i] <= times[i - 1] {
            times[i] = times[i - 1] + 1;
        }
    }
}
