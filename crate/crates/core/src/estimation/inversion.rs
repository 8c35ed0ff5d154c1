use num_complex::Complex64;

use super::EstimationError;
use crate::measurement::{outcome_parity, tomography_settings, CountRecord};
use crate::qcore::{CMatrix, Observable};

/// Linear-inversion tomography over the complete `3^n` setting set:
/// `rho = sum_P E_P * P / 2^n` with the identity-word coefficient fixed at 1.
///
/// Every non-identity Pauli word pools the marginalized parities of all
/// compatible settings, weighted by their counts. The result has unit trace
/// and is Hermitian, but finite statistics can push eigenvalues slightly
/// negative — this is the raw inversion, not a density matrix.
pub fn linear_inversion(records: &[CountRecord]) -> Result<CMatrix, EstimationError> {
    let n = records
        .first()
        .map(|r| r.setting().n_photons())
        .ok_or(EstimationError::MissingSettings { missing: vec!["all".into()] })?;
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
    }

    // Merge duplicates onto the canonical setting list; every full setting
    // must be present.
    let settings = tomography_settings(n);
    let mut merged: Vec<Option<CountRecord>> = vec![None; settings.len()];
    let mut extras: Vec<&CountRecord> = Vec::new();
    for record in records {
        match settings.iter().position(|s| s == record.setting()) {
            Some(idx) => match &mut merged[idx] {
                Some(acc) => acc.absorb(record)?,
                slot => *slot = Some(record.clone()),
            },
            None => extras.push(record),
        }
    }
    let missing: Vec<String> = settings
        .iter()
        .zip(merged.iter())
        .filter(|(_, m)| m.is_none())
        .map(|(s, _)| s.label().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(EstimationError::MissingSettings { missing });
    }
    let merged: Vec<CountRecord> = merged.into_iter().map(|m| m.expect("checked")).collect();

    let dim = 1usize << n;
    let mut rho = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
    for word in pauli_words(n) {
        let mut signed = 0.0f64;
        let mut total = 0.0f64;
        for record in &merged {
            if compatible(record.setting().label(), &word) {
                let marginal = record.marginal_to(&word)?;
                for (k, &count) in marginal.counts().iter().enumerate() {
                    signed += outcome_parity(k) * count as f64;
                    total += count as f64;
                }
            }
        }
        debug_assert!(total > 0.0, "complete setting set always covers {word}");
        let coefficient = signed / total;
        let op = Observable::pauli_word(&word)?;
        rho += op.matrix() * Complex64::new(coefficient / dim as f64, 0.0);
    }
    Ok(rho)
}

/// All non-identity Pauli words over `{1, X, Y, Z}` for `n` photons.
fn pauli_words(n: usize) -> Vec<String> {
    let axes = ['1', 'X', 'Y', 'Z'];
    let mut labels = vec![String::new()];
    for _ in 0..n {
        labels = labels
            .into_iter()
            .flat_map(|prefix| axes.iter().map(move |ch| format!("{prefix}{ch}")))
            .collect();
    }
    labels.retain(|l| l.chars().any(|c| c != '1'));
    labels
}

fn compatible(setting_label: &str, word: &str) -> bool {
    setting_label.chars().zip(word.chars()).all(|(s, w)| w == '1' || w == s)
}
