use rand::Rng;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution, Poisson};

use super::SimulatorError;
use crate::measurement::{born_probabilities, CountRecord, MeasurementSetting};
use crate::qcore::DensityMatrix;
use crate::rng::SimRng;

/// Samples one counting run: `Poisson(true_rate * duration)` events
/// distributed multinomially over the Born probabilities, plus
/// `Poisson(accidental_rate * duration)` accidentals spread uniformly over
/// the outcomes. Bit-identical for identical seeds.
pub fn sample_counts(
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
    true_rate: f64,
    duration: f64,
    accidental_rate: f64,
    seed: u64,
) -> Result<CountRecord, SimulatorError> {
    if !(true_rate >= 0.0) || !true_rate.is_finite() {
        return Err(SimulatorError::BadRate(true_rate));
    }
    if !(accidental_rate >= 0.0) || !accidental_rate.is_finite() {
        return Err(SimulatorError::BadRate(accidental_rate));
    }
    if !(duration > 0.0) {
        return Err(SimulatorError::BadDuration(duration));
    }

    let probs = born_probabilities(rho, setting)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut record = CountRecord::zeroed(setting.clone(), duration);

    let n_true = poisson_draw(&mut rng, true_rate * duration);
    for (k, n) in sample_multinomial(&mut rng, n_true, &probs).into_iter().enumerate() {
        record.add_counts(k, n);
    }

    let n_acc = poisson_draw(&mut rng, accidental_rate * duration);
    let uniform = vec![1.0 / probs.len() as f64; probs.len()];
    for (k, n) in sample_multinomial(&mut rng, n_acc, &uniform).into_iter().enumerate() {
        record.add_counts(k, n);
    }

    Ok(record)
}

fn poisson_draw<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Conditional-binomial multinomial sampler.
fn sample_multinomial<R: Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut rest: f64 = probs.iter().sum();
    for k in 0..probs.len() {
        if remaining == 0 {
            break;
        }
        if k == probs.len() - 1 {
            out[k] = remaining;
            break;
        }
        let p = if rest > 0.0 { (probs[k] / rest).clamp(0.0, 1.0) } else { 0.0 };
        let draw = if p >= 1.0 {
            remaining
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(remaining, p).expect("p in unit interval").sample(rng)
        };
        out[k] = draw;
        remaining -= draw;
        rest = (rest - probs[k]).max(0.0);
    }
    out
}
