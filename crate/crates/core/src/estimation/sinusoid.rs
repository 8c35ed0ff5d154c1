use serde::{Deserialize, Serialize};

use super::EstimationError;

/// One phase-scan point: scanned phase, measured expectation value, and its
/// one-sigma bar (zero or negative sigmas switch the fit to unweighted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub phase: f64,
    pub value: f64,
    pub sigma: f64,
}

/// Result of fitting `A cos(phase + phase_offset)` — no vertical offset and
/// no free frequency; amplitude and phase are the only parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub amplitude: f64,
    pub phase_offset: f64,
    pub residual_rms: f64,
    pub amplitude_sigma: f64,
}

/// Weighted least-squares fit of `A cos(phi + phi0)` via the linearization
/// `a cos(phi) + b sin(phi)` with `A = sqrt(a^2 + b^2)`,
/// `phi0 = atan2(-b, a)`. With per-point sigmas the parameter covariance is
/// the inverse normal matrix; without them it is scaled by the residual
/// variance (n − 2 degrees of freedom).
pub fn fit_sinusoid(points: &[PhasePoint]) -> Result<SinusoidFit, EstimationError> {
    let mut distinct: Vec<f64> = Vec::new();
    for p in points {
        if !distinct.iter().any(|&q| (q - p.phase).abs() < 1e-12) {
            distinct.push(p.phase);
        }
    }
    if points.len() < 3 || distinct.len() < 3 {
        return Err(EstimationError::TooFewPoints);
    }

    let weighted = points.iter().all(|p| p.sigma > 0.0);
    let weight =
        |p: &PhasePoint| if weighted { 1.0 / (p.sigma * p.sigma) } else { 1.0 };

    // Normal equations for [a, b].
    let (mut scc, mut scs, mut sss, mut scy, mut ssy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in points {
        let w = weight(p);
        let (s, c) = p.phase.sin_cos();
        scc += w * c * c;
        scs += w * c * s;
        sss += w * s * s;
        scy += w * c * p.value;
        ssy += w * s * p.value;
    }
    let det = scc * sss - scs * scs;
    let scale = (scc.abs() + sss.abs()).max(f64::MIN_POSITIVE);
    if det.abs() < 1e-12 * scale * scale {
        return Err(EstimationError::DegeneratePhases);
    }
    let a = (sss * scy - scs * ssy) / det;
    let b = (scc * ssy - scs * scy) / det;

    // Covariance of (a, b): inverse normal matrix, rescaled for the
    // unweighted case.
    let mut caa = sss / det;
    let mut cab = -scs / det;
    let mut cbb = scc / det;
    let residuals: Vec<f64> =
        points.iter().map(|p| p.value - a * p.phase.cos() - b * p.phase.sin()).collect();
    let residual_rms =
        (residuals.iter().map(|r| r * r).sum::<f64>() / points.len() as f64).sqrt();
    if !weighted {
        let dof = (points.len() - 2).max(1) as f64;
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / dof;
        caa *= s2;
        cab *= s2;
        cbb *= s2;
    }

    let amplitude = a.hypot(b);
    let (phase_offset, amplitude_sigma) = if amplitude > 0.0 {
        let var = (a * a * caa + 2.0 * a * b * cab + b * b * cbb) / (amplitude * amplitude);
        ((-b).atan2(a), var.max(0.0).sqrt())
    } else {
        // a = b = 0: report zero amplitude with zero offset.
        (0.0, caa.max(cbb).max(0.0).sqrt())
    };

    Ok(SinusoidFit { amplitude, phase_offset, residual_rms, amplitude_sigma })
}
