use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::EstimationError;
use crate::exec;
use crate::measurement::{sample_std, CountRecord, Estimate};
use crate::rng::{self, domain};

/// Minimum replica count accepted by [`bootstrap_metrics`].
pub const MIN_REPLICAS: usize = 100;

/// Resamples every outcome count as an independent Poisson variable with the
/// observed count as mean.
pub fn poisson_resample<R: Rng>(record: &CountRecord, rng: &mut R) -> CountRecord {
    let mut out = CountRecord::zeroed(record.setting().clone(), record.duration());
    for (k, &n) in record.counts().iter().enumerate() {
        if n == 0 {
            continue;
        }
        let draw = Poisson::new(n as f64).expect("positive mean").sample(rng) as u64;
        out.add_counts(k, draw);
    }
    *out.metadata_mut() = record.metadata().clone();
    out
}

/// Poisson-bootstrap propagation of counting noise through an arbitrary
/// statistic.
///
/// Every replica resamples all records, evaluates `statistic`, and failures
/// (`None`) are dropped; more than 10% failures is an error. Returns the
/// replica mean and standard deviation. Deterministic for a given seed, and
/// independent of whether replicas run in parallel.
pub fn bootstrap_metrics<F>(
    records: &[CountRecord],
    statistic: F,
    replicas: usize,
    seed: u64,
) -> Result<Estimate, EstimationError>
where
    F: Fn(&[CountRecord]) -> Option<f64> + Sync + Send,
{
    if replicas < MIN_REPLICAS {
        return Err(EstimationError::TooFewReplicas(replicas));
    }
    let values = exec::map_indexed(replicas, |i| {
        let mut rng = rng::rng_for(seed, domain::BOOTSTRAP, i as u64);
        let resampled: Vec<CountRecord> =
            records.iter().map(|r| poisson_resample(r, &mut rng)).collect();
        statistic(&resampled)
    });
    let kept: Vec<f64> = values.into_iter().flatten().collect();
    let failed = replicas - kept.len();
    if failed * 10 > replicas {
        return Err(EstimationError::ExcessiveReplicaFailures { failed, total: replicas });
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let sigma = if kept.len() > 1 { sample_std(&kept) } else { 0.0 };
    Ok(Estimate { value: mean, sigma })
}
