//! Pauli measurement settings, outcome projectors, Born-rule distributions,
//! and parity estimation from recorded counts.
//!
//! Outcomes of a setting are indexed over the measured photons only, most
//! significant bit first, with bit 0 for the +1 port and bit 1 for the −1
//! port; `"+-+"` is the matching text form. Ignored slots (`1` in a setting
//! label) contribute an identity factor to projectors and parity +1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::qcore::{
    ket_a, ket_d, ket_h, ket_l, ket_r, ket_v, DensityMatrix, Observable, PureState, QcoreError,
};
use crate::rng::{self, domain};
use rand_distr::{Distribution, Poisson};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeasurementError {
    #[error("invalid setting label {label:?}")]
    BadLabel { label: String },
    #[error("invalid outcome {outcome:?} for {measured} measured photons")]
    BadOutcome { outcome: String, measured: usize },
    #[error("counts vector has length {got}, setting requires {want}")]
    CountsLength { got: usize, want: usize },
    #[error("record has zero total counts")]
    EmptyRecord,
    #[error("setting {setting:?} cannot be marginalized to {target:?}")]
    IncompatibleMarginal { setting: String, target: String },
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

/// Per-photon basis choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisChoice {
    X,
    Y,
    Z,
    /// Identity slot, written `1` in labels.
    Ignore,
}

impl BasisChoice {
    fn from_char(ch: char) -> Option<Self> {
        match ch {
            'X' => Some(Self::X),
            'Y' => Some(Self::Y),
            'Z' => Some(Self::Z),
            '1' => Some(Self::Ignore),
            _ => None,
        }
    }

    fn eigenstate(self, bit: u8) -> PureState {
        match (self, bit) {
            (Self::Z, 0) => ket_h(),
            (Self::Z, _) => ket_v(),
            (Self::X, 0) => ket_d(),
            (Self::X, _) => ket_a(),
            (Self::Y, 0) => ket_r(),
            (Self::Y, _) => ket_l(),
            (Self::Ignore, _) => unreachable!("ignored slots have no eigenstate"),
        }
    }
}

/// A per-photon basis assignment such as `"XXX"` or `"1ZZ"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurementSetting {
    bases: Vec<BasisChoice>,
    label: String,
}

impl MeasurementSetting {
    /// Parses labels over the alphabet `X Y Z 1`, one character per photon.
    /// At least one slot must be measured.
    pub fn from_label(label: &str) -> Result<Self, MeasurementError> {
        let bad = || MeasurementError::BadLabel { label: label.to_string() };
        if label.is_empty() || label.len() > crate::qcore::MAX_QUBITS {
            return Err(bad());
        }
        let bases: Vec<BasisChoice> =
            label.chars().map(BasisChoice::from_char).collect::<Option<_>>().ok_or_else(bad)?;
        if bases.iter().all(|b| *b == BasisChoice::Ignore) {
            return Err(bad());
        }
        Ok(Self { bases, label: label.to_string() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bases(&self) -> &[BasisChoice] {
        &self.bases
    }

    /// Photon count including ignored slots.
    pub fn n_photons(&self) -> usize {
        self.bases.len()
    }

    /// Indices of measured (non-ignored) photons, in photon order.
    pub fn measured_photons(&self) -> Vec<usize> {
        (0..self.bases.len()).filter(|&i| self.bases[i] != BasisChoice::Ignore).collect()
    }

    pub fn n_measured(&self) -> usize {
        self.bases.iter().filter(|b| **b != BasisChoice::Ignore).count()
    }

    pub fn n_outcomes(&self) -> usize {
        1usize << self.n_measured()
    }

    /// True when every photon is measured.
    pub fn is_full(&self) -> bool {
        self.n_measured() == self.n_photons()
    }

    /// Projector for one outcome: rank-1 eigenprojectors on measured slots,
    /// identity on ignored slots.
    pub fn outcome_projector(&self, outcome: usize) -> Result<Observable, MeasurementError> {
        if outcome >= self.n_outcomes() {
            return Err(MeasurementError::BadOutcome {
                outcome: format!("{outcome}"),
                measured: self.n_measured(),
            });
        }
        let m = self.n_measured();
        let mut measured_seen = 0usize;
        let mut op: Option<Observable> = None;
        for basis in &self.bases {
            let factor = match basis {
                BasisChoice::Ignore => Observable::identity(1).expect("single qubit"),
                b => {
                    let bit = (outcome >> (m - 1 - measured_seen) & 1) as u8;
                    measured_seen += 1;
                    let sign = if bit == 0 { '+' } else { '-' };
                    Observable::projector(&b.eigenstate(bit), format!("P{sign}"))
                }
            };
            op = Some(match op {
                None => factor,
                Some(acc) => acc.tensor(&factor)?,
            });
        }
        let op = op.expect("nonempty setting");
        Ok(Observable::new(op.matrix().clone(), format!("{}:{}", self.label, outcome_label(outcome, m)))?)
    }

    /// All outcome projectors in outcome-index order.
    pub fn projectors(&self) -> Result<Vec<Observable>, MeasurementError> {
        (0..self.n_outcomes()).map(|k| self.outcome_projector(k)).collect()
    }

    /// Rank-1 outcome vectors; available only for full settings.
    pub(crate) fn outcome_vectors(&self) -> Option<Vec<PureState>> {
        if !self.is_full() {
            return None;
        }
        let m = self.n_measured();
        let mut out = Vec::with_capacity(self.n_outcomes());
        for outcome in 0..self.n_outcomes() {
            let mut state: Option<PureState> = None;
            for (pos, basis) in self.bases.iter().enumerate() {
                let bit = (outcome >> (m - 1 - pos) & 1) as u8;
                let factor = basis.eigenstate(bit);
                state = Some(match state {
                    None => factor,
                    Some(acc) => acc.tensor(&factor).expect("within qubit budget"),
                });
            }
            out.push(state.expect("nonempty setting"));
        }
        Some(out)
    }
}

/// Text form of an outcome index, e.g. `"+-+"`.
pub fn outcome_label(outcome: usize, measured: usize) -> String {
    (0..measured)
        .map(|pos| if outcome >> (measured - 1 - pos) & 1 == 0 { '+' } else { '-' })
        .collect()
}

/// Parses `"+-+"` into an outcome index.
pub fn parse_outcome_label(text: &str, measured: usize) -> Result<usize, MeasurementError> {
    if text.len() != measured {
        return Err(MeasurementError::BadOutcome { outcome: text.to_string(), measured });
    }
    let mut idx = 0usize;
    for ch in text.chars() {
        idx <<= 1;
        match ch {
            '+' => {}
            '-' => idx |= 1,
            _ => return Err(MeasurementError::BadOutcome { outcome: text.to_string(), measured }),
        }
    }
    Ok(idx)
}

/// Parity (+1/−1 as f64) of an outcome index: product of the measured
/// photons' eigenvalues.
pub fn outcome_parity(outcome: usize) -> f64 {
    if (outcome.count_ones() & 1) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Integer outcome counts accumulated under one measurement setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CountRecordWire", into = "CountRecordWire")]
pub struct CountRecord {
    setting: MeasurementSetting,
    counts: Vec<u64>,
    duration: f64,
    metadata: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct CountRecordWire {
    setting: String,
    counts: BTreeMap<String, u64>,
    duration: f64,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

impl From<CountRecord> for CountRecordWire {
    fn from(record: CountRecord) -> Self {
        let m = record.setting.n_measured();
        let counts = record
            .counts
            .iter()
            .enumerate()
            .map(|(k, &n)| (outcome_label(k, m), n))
            .collect();
        CountRecordWire {
            setting: record.setting.label.clone(),
            counts,
            duration: record.duration,
            metadata: record.metadata,
        }
    }
}

impl TryFrom<CountRecordWire> for CountRecord {
    type Error = MeasurementError;

    fn try_from(wire: CountRecordWire) -> Result<Self, Self::Error> {
        let setting = MeasurementSetting::from_label(&wire.setting)?;
        let m = setting.n_measured();
        let mut counts = vec![0u64; setting.n_outcomes()];
        for (key, n) in wire.counts {
            counts[parse_outcome_label(&key, m)?] = n;
        }
        Ok(CountRecord { setting, counts, duration: wire.duration, metadata: wire.metadata })
    }
}

impl CountRecord {
    pub fn new(
        setting: MeasurementSetting,
        counts: Vec<u64>,
        duration: f64,
    ) -> Result<Self, MeasurementError> {
        if counts.len() != setting.n_outcomes() {
            return Err(MeasurementError::CountsLength {
                got: counts.len(),
                want: setting.n_outcomes(),
            });
        }
        Ok(Self { setting, counts, duration, metadata: BTreeMap::new() })
    }

    pub fn zeroed(setting: MeasurementSetting, duration: f64) -> Self {
        let counts = vec![0u64; setting.n_outcomes()];
        Self { setting, counts, duration, metadata: BTreeMap::new() }
    }

    pub fn setting(&self) -> &MeasurementSetting {
        &self.setting
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut BTreeMap<String, String> {
        &mut self.metadata
    }

    pub fn add_counts(&mut self, outcome: usize, n: u64) {
        self.counts[outcome] += n;
    }

    /// Merges another record taken under the same setting.
    pub fn absorb(&mut self, other: &CountRecord) -> Result<(), MeasurementError> {
        if self.setting != other.setting {
            return Err(MeasurementError::IncompatibleMarginal {
                setting: other.setting.label.clone(),
                target: self.setting.label.clone(),
            });
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        self.duration += other.duration;
        Ok(())
    }

    /// Collapses this record onto a coarser Pauli word by summing counts
    /// over the dropped photons. The target label must ignore (`1`) a subset
    /// of slots and agree with this record's bases everywhere else; e.g. a
    /// `"ZZZ"` record marginalizes to `"1ZZ"`, `"Z1Z"`, or `"ZZ1"`.
    pub fn marginal_to(&self, target_label: &str) -> Result<CountRecord, MeasurementError> {
        let target = MeasurementSetting::from_label(target_label)?;
        let incompatible = || MeasurementError::IncompatibleMarginal {
            setting: self.setting.label.clone(),
            target: target_label.to_string(),
        };
        if target.n_photons() != self.setting.n_photons() {
            return Err(incompatible());
        }
        for (mine, theirs) in self.setting.bases.iter().zip(target.bases.iter()) {
            match (mine, theirs) {
                (_, BasisChoice::Ignore) => {}
                (a, b) if a == b => {}
                _ => return Err(incompatible()),
            }
        }
        // Positions of target-kept photons within this record's measured list.
        let mine = self.setting.measured_photons();
        let kept: Vec<usize> = target
            .measured_photons()
            .iter()
            .map(|photon| mine.iter().position(|p| p == photon).expect("validated subset"))
            .collect();
        let m_in = self.setting.n_measured();
        let m_out = target.n_measured();
        let mut counts = vec![0u64; target.n_outcomes()];
        for (k, &n) in self.counts.iter().enumerate() {
            let mut out = 0usize;
            for (pos, &src) in kept.iter().enumerate() {
                let bit = k >> (m_in - 1 - src) & 1;
                out |= bit << (m_out - 1 - pos);
            }
            counts[out] += n;
        }
        let mut record = CountRecord::new(target, counts, self.duration)?;
        record.metadata = self.metadata.clone();
        Ok(record)
    }
}

/// Born-rule outcome probabilities `p_k = Tr(rho Pi_k)`, clipped at zero and
/// summing to one for full settings (to the trace of the kept subspace
/// otherwise, which is 1 as well since projectors sum to identity).
pub fn born_probabilities(
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
) -> Result<Vec<f64>, MeasurementError> {
    if setting.n_photons() != rho.n_qubits() {
        return Err(MeasurementError::Qcore(QcoreError::DimensionMismatch {
            left: rho.dim(),
            right: 1 << setting.n_photons(),
        }));
    }
    let probs: Vec<f64> = if let Some(vectors) = setting.outcome_vectors() {
        vectors
            .iter()
            .map(|phi| {
                let v = phi.vector();
                (v.adjoint() * rho.matrix() * v)[(0, 0)].re
            })
            .collect()
    } else {
        setting
            .projectors()?
            .iter()
            .map(|pi| crate::qcore::expectation(rho, pi))
            .collect::<Result<_, _>>()?
    };
    Ok(probs.into_iter().map(|p| p.max(0.0)).collect())
}

/// A scalar estimate with a one-standard-deviation error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

/// Parity expectation `E = sum_k s_k n_k / N` with the Monte Carlo error
/// model: every outcome count is resampled as an independent Poisson
/// variable with mean `n_k` over `replicas` replicas (seeded), and `sigma`
/// is the standard deviation of the resampled estimates.
pub fn parity_expectation(
    record: &CountRecord,
    replicas: usize,
    seed: u64,
) -> Result<Estimate, MeasurementError> {
    let value = parity_point_estimate(record)?;
    let resampled = exec::map_indexed(replicas, |i| {
        let mut rng = rng::rng_for(seed, domain::BOOTSTRAP, i as u64);
        let mut signed = 0.0f64;
        let mut total = 0u64;
        for (k, &n) in record.counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let draw = Poisson::new(n as f64).expect("positive mean").sample(&mut rng) as u64;
            total += draw;
            signed += outcome_parity(k) * draw as f64;
        }
        if total == 0 {
            None
        } else {
            Some(signed / total as f64)
        }
    });
    let kept: Vec<f64> = resampled.into_iter().flatten().collect();
    let sigma = if kept.len() > 1 { sample_std(&kept) } else { 0.0 };
    Ok(Estimate { value, sigma })
}

/// Parity expectation with the closed-form multinomial error
/// `sigma = sqrt((1 - E^2) / N)`, exposed for comparison with the Monte
/// Carlo model.
pub fn parity_expectation_multinomial(record: &CountRecord) -> Result<Estimate, MeasurementError> {
    let value = parity_point_estimate(record)?;
    let n = record.total() as f64;
    Ok(Estimate { value, sigma: ((1.0 - value * value).max(0.0) / n).sqrt() })
}

fn parity_point_estimate(record: &CountRecord) -> Result<f64, MeasurementError> {
    let total = record.total();
    if total == 0 {
        return Err(MeasurementError::EmptyRecord);
    }
    let signed: f64 =
        record.counts.iter().enumerate().map(|(k, &n)| outcome_parity(k) * n as f64).sum();
    Ok(signed / total as f64)
}

pub(crate) fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// All full settings over `{X, Y, Z}` for `n` photons, in lexicographic
/// order — the 3^n tomography set.
pub fn tomography_settings(n_photons: usize) -> Vec<MeasurementSetting> {
    let axes = ['X', 'Y', 'Z'];
    let mut labels = vec![String::new()];
    for _ in 0..n_photons {
        labels = labels
            .into_iter()
            .flat_map(|prefix| axes.iter().map(move |ch| format!("{prefix}{ch}")))
            .collect();
    }
    labels
        .into_iter()
        .map(|label| MeasurementSetting::from_label(&label).expect("valid label"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{expectation, ghz_state, random_density_matrix, DensityMatrix};
    use crate::rng::SimRng;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::SeedableRng;

    #[test]
    fn setting_parsing() {
        let s = MeasurementSetting::from_label("1ZZ").unwrap();
        assert_eq!(s.n_photons(), 3);
        assert_eq!(s.n_measured(), 2);
        assert_eq!(s.measured_photons(), vec![1, 2]);
        assert!(MeasurementSetting::from_label("111").is_err());
        assert!(MeasurementSetting::from_label("").is_err());
        assert!(MeasurementSetting::from_label("XQZ").is_err());
        assert!(MeasurementSetting::from_label("XXXX").is_err());
    }

    #[test]
    fn projector_examples() {
        // Z, outcome +1 on one photon -> |H><H|.
        let z = MeasurementSetting::from_label("Z").unwrap();
        let p = z.outcome_projector(0).unwrap();
        assert_relative_eq!(p.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.matrix()[(1, 1)].re, 0.0, epsilon = 1e-15);
        // X, outcome −1 -> |A><A| with off-diagonal −1/2.
        let x = MeasurementSetting::from_label("X").unwrap();
        let a = x.outcome_projector(1).unwrap();
        assert_relative_eq!(a.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(a.matrix()[(0, 1)].re, -0.5, epsilon = 1e-15);
        // "1ZZ", outcome (+1, +1) -> identity ⊗ |H><H| ⊗ |H><H|.
        let s = MeasurementSetting::from_label("1ZZ").unwrap();
        let pi = s.outcome_projector(0).unwrap();
        assert_relative_eq!(pi.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(pi.matrix()[(4, 4)].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(pi.matrix()[(1, 1)].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn projectors_complete() {
        for label in ["Z", "X1", "1ZZ", "XYZ", "YYY"] {
            let s = MeasurementSetting::from_label(label).unwrap();
            let identity = crate::qcore::Observable::identity(s.n_photons()).unwrap();
            let mut sum = identity.matrix().clone();
            sum.fill(Complex64::new(0.0, 0.0));
            for pi in s.projectors().unwrap() {
                sum += pi.matrix();
            }
            assert!(
                (sum - identity.matrix()).norm() < 1e-12,
                "projectors of {label} do not sum to identity"
            );
        }
    }

    #[test]
    fn born_probability_examples() {
        let ghz = DensityMatrix::from_pure(&ghz_state());
        let zzz = MeasurementSetting::from_label("ZZZ").unwrap();
        let p = born_probabilities(&ghz, &zzz).unwrap();
        assert_relative_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(p[7], 0.5, epsilon = 1e-12);
        assert!(p[1..7].iter().all(|&x| x.abs() < 1e-12));

        // In the X basis the GHZ state populates the four even-parity
        // outcomes uniformly.
        let xxx = MeasurementSetting::from_label("XXX").unwrap();
        let px = born_probabilities(&ghz, &xxx).unwrap();
        for (k, &prob) in px.iter().enumerate() {
            let want = if outcome_parity(k) > 0.0 { 0.25 } else { 0.0 };
            assert_relative_eq!(prob, want, epsilon = 1e-12);
        }

        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let pm = born_probabilities(&mixed, &xxx).unwrap();
        for &prob in &pm {
            assert_relative_eq!(prob, 0.125, epsilon = 1e-12);
        }
    }

    #[test]
    fn born_parity_reconstructs_expectation() {
        // sum_k s_k p_k equals Tr(rho P) for every full Pauli word.
        let mut rng = SimRng::seed_from_u64(21);
        for _ in 0..5 {
            let rho = random_density_matrix(3, 3, &mut rng);
            for setting in tomography_settings(3) {
                let word = crate::qcore::Observable::pauli_word(setting.label()).unwrap();
                let p = born_probabilities(&rho, &setting).unwrap();
                let from_probs: f64 =
                    p.iter().enumerate().map(|(k, &pk)| outcome_parity(k) * pk).sum();
                let direct = expectation(&rho, &word).unwrap();
                assert!(
                    (from_probs - direct).abs() < 1e-10,
                    "{}: {from_probs} vs {direct}",
                    setting.label()
                );
            }
        }
    }

    #[test]
    fn parity_examples() {
        // 3 even counts, 1 odd count -> E = 0.5.
        let z = MeasurementSetting::from_label("Z").unwrap();
        let record = CountRecord::new(z, vec![3, 1], 1.0).unwrap();
        let e = parity_expectation_multinomial(&record).unwrap();
        assert_relative_eq!(e.value, 0.5, epsilon = 1e-12);

        // All counts even parity -> E = 1 and multinomial sigma 0; the
        // Poisson model agrees since every resample keeps parity +1.
        let z = MeasurementSetting::from_label("Z").unwrap();
        let sure = CountRecord::new(z, vec![1000, 0], 1.0).unwrap();
        let e = parity_expectation_multinomial(&sure).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.sigma, 0.0, epsilon = 1e-12);
        let mc = parity_expectation(&sure, 500, 1).unwrap();
        assert_relative_eq!(mc.value, 1.0, epsilon = 1e-12);
        assert_relative_eq!(mc.sigma, 0.0, epsilon = 1e-12);

        // 43 even / 1 odd of 44 in the X basis: E = 42/44 ≈ 0.9545 with a
        // one-sigma bar near 0.045 under both error models.
        let xxx = MeasurementSetting::from_label("XXX").unwrap();
        let mut counts = vec![0u64; 8];
        counts[0] = 43;
        counts[1] = 1;
        let record = CountRecord::new(xxx, counts, 8.0 * 3600.0).unwrap();
        let mult = parity_expectation_multinomial(&record).unwrap();
        assert_relative_eq!(mult.value, 42.0 / 44.0, epsilon = 1e-12);
        assert!((mult.value - 0.95).abs() < 0.05);
        let mc = parity_expectation(&record, 20_000, 7).unwrap();
        assert_relative_eq!(mc.value, 42.0 / 44.0, epsilon = 1e-12);
        assert!((mc.sigma - 0.045).abs() < 0.012, "sigma {} not near 0.045", mc.sigma);
        assert!((mult.sigma - 0.045).abs() < 0.012);
    }

    #[test]
    fn parity_converges_with_statistics() {
        // counts = N * p_k reproduces the exact expectation.
        let ghz = DensityMatrix::from_pure(&ghz_state());
        let xxx = MeasurementSetting::from_label("XXX").unwrap();
        let p = born_probabilities(&ghz, &xxx).unwrap();
        let n = 1_000_000u64;
        let counts: Vec<u64> = p.iter().map(|&pk| (pk * n as f64).round() as u64).collect();
        let record = CountRecord::new(xxx, counts, 1.0).unwrap();
        let e = parity_expectation_multinomial(&record).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_counts_flagged() {
        let z = MeasurementSetting::from_label("Z").unwrap();
        let record = CountRecord::zeroed(z, 1.0);
        assert!(matches!(
            parity_expectation_multinomial(&record),
            Err(MeasurementError::EmptyRecord)
        ));
        assert!(matches!(
            parity_expectation(&record, 200, 0),
            Err(MeasurementError::EmptyRecord)
        ));
    }

    #[test]
    fn parity_bootstrap_is_deterministic() {
        let xxx = MeasurementSetting::from_label("XXX").unwrap();
        let mut counts = vec![0u64; 8];
        counts[0] = 20;
        counts[3] = 18;
        counts[1] = 3;
        let record = CountRecord::new(xxx, counts, 1.0).unwrap();
        let a = parity_expectation(&record, 2_000, 99).unwrap();
        let b = parity_expectation(&record, 2_000, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn marginal_parities_from_full_record() {
        // Build a ZZZ record with a known composition and check the three
        // two-photon marginals against direct arithmetic.
        let zzz = MeasurementSetting::from_label("ZZZ").unwrap();
        let mut counts = vec![0u64; 8];
        counts[0] = 30; // HHH, every pair parity +1
        counts[7] = 26; // VVV, every pair parity +1
        counts[1] = 4; // HHV: 1ZZ −, Z1Z −, ZZ1 +
        let record = CountRecord::new(zzz, counts, 1.0).unwrap();
        let total = 60.0;

        let m_1zz = record.marginal_to("1ZZ").unwrap();
        let e = parity_expectation_multinomial(&m_1zz).unwrap();
        assert_relative_eq!(e.value, (56.0 - 4.0) / total, epsilon = 1e-12);

        let m_zz1 = record.marginal_to("ZZ1").unwrap();
        let e = parity_expectation_multinomial(&m_zz1).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-12);

        // Incompatible targets rejected.
        assert!(record.marginal_to("1XZ").is_err());
        assert!(record.marginal_to("ZZ").is_err());
    }

    #[test]
    fn record_json_round_trip() {
        let xxx = MeasurementSetting::from_label("1ZZ").unwrap();
        let mut record = CountRecord::new(xxx, vec![8, 1, 0, 3], 120.0).unwrap();
        record.metadata_mut().insert("block".into(), "2".into());
        let text = serde_json::to_string(&record).unwrap();
        assert!(text.contains("\"1ZZ\""));
        assert!(text.contains("\"+-\""));
        let back: CountRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn tomography_setting_count() {
        assert_eq!(tomography_settings(1).len(), 3);
        assert_eq!(tomography_settings(2).len(), 9);
        assert_eq!(tomography_settings(3).len(), 27);
        assert_eq!(tomography_settings(2)[0].label(), "XX");
        assert_eq!(tomography_settings(2)[8].label(), "ZZ");
    }
}
