use serde::{Deserialize, Serialize};

use super::EstimationError;
use crate::exec;
use crate::measurement::{sample_std, outcome_parity, CountRecord, Estimate};
use crate::qcore::Observable;
use crate::rng::{self, domain};

use super::bootstrap::poisson_resample;

/// GHZ witness evaluation: the four expectation values, the witness value
/// `W = 3/2 - E_xxx - (E_1zz + E_z1z + E_zz1)/2`, and the fidelity lower
/// bound `(1 - W)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub e_xxx: Estimate,
    pub e_1zz: Estimate,
    pub e_z1z: Estimate,
    pub e_zz1: Estimate,
    pub w_value: Estimate,
    pub fidelity_lower_bound: Estimate,
}

fn witness_value(e_xxx: f64, e_1zz: f64, e_z1z: f64, e_zz1: f64) -> f64 {
    1.5 - e_xxx - 0.5 * (e_1zz + e_z1z + e_zz1)
}

/// Builds the witness from four independent expectation estimates; the
/// witness sigma combines the inputs in quadrature.
pub fn ghz_witness(
    e_xxx: Estimate,
    e_1zz: Estimate,
    e_z1z: Estimate,
    e_zz1: Estimate,
) -> WitnessResult {
    let w = witness_value(e_xxx.value, e_1zz.value, e_z1z.value, e_zz1.value);
    let w_sigma = (e_xxx.sigma.powi(2)
        + 0.25 * (e_1zz.sigma.powi(2) + e_z1z.sigma.powi(2) + e_zz1.sigma.powi(2)))
    .sqrt();
    WitnessResult {
        e_xxx,
        e_1zz,
        e_z1z,
        e_zz1,
        w_value: Estimate { value: w, sigma: w_sigma },
        fidelity_lower_bound: Estimate { value: (1.0 - w) / 2.0, sigma: w_sigma / 2.0 },
    }
}

/// Witness from the raw X- and Z-basis records.
///
/// The three Z-pair expectations all come from the single `ZZZ` record by
/// marginalizing parities, so one Z run covers three witness terms. Error
/// bars are Poisson-bootstrap: each replica resamples both records once and
/// recomputes everything, which keeps the correlations between the three
/// Z words (and hence the witness sigma) honest.
pub fn ghz_witness_from_records(
    x_record: &CountRecord,
    z_record: &CountRecord,
    replicas: usize,
    seed: u64,
) -> Result<WitnessResult, EstimationError> {
    if x_record.setting().label() != "XXX" {
        return Err(EstimationError::WrongSetting {
            want: "XXX",
            got: x_record.setting().label().to_string(),
        });
    }
    if z_record.setting().label() != "ZZZ" {
        return Err(EstimationError::WrongSetting {
            want: "ZZZ",
            got: z_record.setting().label().to_string(),
        });
    }

    let point = witness_point(x_record, z_record)?;

    let replica_values = exec::map_indexed(replicas, |i| {
        let mut rng = rng::rng_for(seed, domain::WITNESS, i as u64);
        let x = poisson_resample(x_record, &mut rng);
        let z = poisson_resample(z_record, &mut rng);
        witness_point(&x, &z).ok()
    });
    let kept: Vec<[f64; 5]> = replica_values.into_iter().flatten().collect();

    let sigma_of = |pick: fn(&[f64; 5]) -> f64| -> f64 {
        if kept.len() > 1 {
            let column: Vec<f64> = kept.iter().map(pick).collect();
            sample_std(&column)
        } else {
            0.0
        }
    };

    let e_xxx = Estimate { value: point[0], sigma: sigma_of(|r| r[0]) };
    let e_1zz = Estimate { value: point[1], sigma: sigma_of(|r| r[1]) };
    let e_z1z = Estimate { value: point[2], sigma: sigma_of(|r| r[2]) };
    let e_zz1 = Estimate { value: point[3], sigma: sigma_of(|r| r[3]) };
    let w_sigma = sigma_of(|r| r[4]);
    let w = witness_value(e_xxx.value, e_1zz.value, e_z1z.value, e_zz1.value);
    Ok(WitnessResult {
        e_xxx,
        e_1zz,
        e_z1z,
        e_zz1,
        w_value: Estimate { value: w, sigma: w_sigma },
        fidelity_lower_bound: Estimate { value: (1.0 - w) / 2.0, sigma: w_sigma / 2.0 },
    })
}

/// `[E_xxx, E_1zz, E_z1z, E_zz1, W]` from one pair of records.
fn witness_point(
    x_record: &CountRecord,
    z_record: &CountRecord,
) -> Result<[f64; 5], EstimationError> {
    let e_xxx = plain_parity(x_record)?;
    let e_1zz = plain_parity(&z_record.marginal_to("1ZZ")?)?;
    let e_z1z = plain_parity(&z_record.marginal_to("Z1Z")?)?;
    let e_zz1 = plain_parity(&z_record.marginal_to("ZZ1")?)?;
    Ok([e_xxx, e_1zz, e_z1z, e_zz1, witness_value(e_xxx, e_1zz, e_z1z, e_zz1)])
}

fn plain_parity(record: &CountRecord) -> Result<f64, EstimationError> {
    let total = record.total();
    if total == 0 {
        return Err(EstimationError::Measurement(
            crate::measurement::MeasurementError::EmptyRecord,
        ));
    }
    let signed: f64 =
        record.counts().iter().enumerate().map(|(k, &n)| outcome_parity(k) * n as f64).sum();
    Ok(signed / total as f64)
}

/// The witness operator `3/2 * 1 - XXX - (1ZZ + Z1Z + ZZ1)/2` as a dense
/// observable, for direct expectation-value checks.
pub fn witness_observable() -> Observable {
    let identity = Observable::identity(3).expect("three qubits").scale(1.5);
    let xxx = Observable::pauli_word("XXX").expect("valid word");
    let zz_sum = Observable::pauli_word("1ZZ")
        .expect("valid word")
        .add(&Observable::pauli_word("Z1Z").expect("valid word"), "zz-pairs")
        .expect("same dims")
        .add(&Observable::pauli_word("ZZ1").expect("valid word"), "zz-pairs")
        .expect("same dims");
    identity
        .add(&xxx.scale(-1.0), "w-ghz")
        .expect("same dims")
        .add(&zz_sum.scale(-0.5), "w-ghz")
        .expect("same dims")
}
