//! Experiment runners: each takes a resolved [`ExperimentPlan`], simulates
//! the corresponding measurement campaign, analyzes it, and returns a typed
//! output that the emit functions turn into JSON/CSV files.
//!
//! Every random draw is derived from the plan seed, so any runner called
//! twice with the same plan produces identical results.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use cspdc_core::estimation::{
    fit_sinusoid, ghz_witness, ghz_witness_from_records, mle_reconstruct, MleOptions, PhasePoint,
    SinusoidFit, TomographyResult, WitnessResult,
};
use cspdc_core::measurement::{
    parity_expectation, parity_expectation_multinomial, CountRecord, MeasurementSetting,
};
use cspdc_core::qcore::{expectation, Observable, PureState};
use cspdc_core::rng::{self, domain};
use cspdc_core::simulator::{
    accidental_rate, find_coincidences, generate_streams, reference_find_coincidences,
    sample_counts, write_streams_to_path, ClickOrigin, TimestampStream, PS_PER_SECOND,
};
use cspdc_core::sources::{phi_pair_state, psi_pair_state, PairSource, SourceConfig};
use rand::SeedableRng;
use rand_distr::{Distribution, Exp, Normal};

use crate::output::{format_float, RunArtifacts};
use crate::plan::{ExperimentKind, ExperimentPlan, StatisticsMode};

fn setting(label: &str) -> MeasurementSetting {
    MeasurementSetting::from_label(label).expect("static label")
}

/// Accidental k-fold rate implied by a source config: per-analyzer singles
/// (signal plus both dark ports) through the analytic formula.
pub fn triplet_accidental_rate(source: &SourceConfig) -> f64 {
    accidental_rate(&source.singles_rates(3), source.coincidence_window)
}

fn explicit_phase(source: &SourceConfig, phase: f64) -> SourceConfig {
    let mut s = source.clone();
    s.triplet_phase_mode = cspdc_core::sources::TripletPhaseMode::Explicit;
    s.triplet_phase = phase;
    s
}

// ---------------------------------------------------------------------------
// phase scan

#[derive(Debug, Clone, Serialize)]
pub struct PhaseScanPoint {
    pub phase: f64,
    pub e_xxx: f64,
    pub sigma: f64,
    pub counts: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseScanOutput {
    pub points: Vec<PhaseScanPoint>,
    pub fit: Option<SinusoidFit>,
    pub fit_error: Option<String>,
}

/// Scans the triplet phase, estimating `<XXX>` at every point, and fits the
/// sinusoid. In `exact` statistics mode the points are infinite-statistics
/// expectation values instead of Monte Carlo counts.
pub fn run_phase_scan(plan: &ExperimentPlan) -> Result<PhaseScanOutput> {
    if plan.kind != ExperimentKind::PhaseScan {
        bail!("plan kind {} is not phase_scan", plan.kind.as_str());
    }
    plan.validate()?;
    let entry = &plan.schedule[0];
    if entry.setting != "XXX" {
        bail!("phase scans measure XXX, got {:?}", entry.setting);
    }
    let xxx_setting = setting("XXX");
    let xxx_word = Observable::pauli_word("XXX").expect("valid word");
    let acc = triplet_accidental_rate(&plan.source);

    let mut points = Vec::with_capacity(plan.phases.len());
    for (i, &phase) in plan.phases.iter().enumerate() {
        let source = explicit_phase(&plan.source, phase);
        let rho = source.noisy_triplet()?;
        let point = match plan.statistics {
            StatisticsMode::Exact => PhaseScanPoint {
                phase,
                e_xxx: expectation(&rho, &xxx_word)?,
                sigma: 0.0,
                counts: 0,
            },
            StatisticsMode::Sampled => {
                let record = sample_counts(
                    &rho,
                    &xxx_setting,
                    source.triplet_rate,
                    entry.duration,
                    acc,
                    rng::derive_seed(plan.seed, domain::PHASE_SCAN, i as u64),
                )?;
                let est = parity_expectation(
                    &record,
                    plan.witness_replicas(),
                    rng::derive_seed(plan.seed, domain::PHASE_SCAN, 1_000_000 + i as u64),
                )
                .with_context(|| format!("no counts at phase {phase}"))?;
                PhaseScanPoint { phase, e_xxx: est.value, sigma: est.sigma, counts: record.total() }
            }
        };
        points.push(point);
    }

    let fit_points: Vec<PhasePoint> = points
        .iter()
        .map(|p| PhasePoint { phase: p.phase, value: p.e_xxx, sigma: p.sigma })
        .collect();
    let (fit, fit_error) = match fit_sinusoid(&fit_points) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(PhaseScanOutput { points, fit, fit_error })
}

pub fn emit_phase_scan(artifacts: &mut RunArtifacts, output: &PhaseScanOutput) -> Result<()> {
    let rows: Vec<Vec<String>> = output
        .points
        .iter()
        .map(|p| {
            vec![
                format_float(p.phase),
                format_float(p.e_xxx),
                format_float(p.sigma),
                p.counts.to_string(),
            ]
        })
        .collect();
    artifacts.write_csv("phase_scan", "phase_rad,e_xxx,sigma,counts", &rows)?;
    artifacts.write_json(
        "phase_scan",
        json!({
            "points": output.points,
            "fit": output.fit,
            "fit_error": output.fit_error,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// witness

#[derive(Debug, Clone, Serialize)]
pub struct SigmaModels {
    /// Count-level Poisson bootstrap on the raw records (the shipped model).
    pub w_sigma_poisson_bootstrap: f64,
    /// Closed-form multinomial sigmas combined in quadrature, for
    /// comparison.
    pub w_sigma_multinomial_quadrature: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRunOutput {
    pub witness: Option<WitnessResult>,
    pub records: Vec<CountRecord>,
    pub sigma_models: Option<SigmaModels>,
    pub accidental_rate_hz: f64,
    pub diagnostics: Vec<String>,
}

/// Simulates the two measurement blocks (one per basis) and evaluates the
/// witness. The three Z-pair expectations all come from the single ZZZ
/// record. Zero counts in a basis yields diagnostics instead of a witness.
pub fn run_witness(plan: &ExperimentPlan) -> Result<WitnessRunOutput> {
    if plan.kind != ExperimentKind::TripletWitness {
        bail!("plan kind {} is not triplet_witness", plan.kind.as_str());
    }
    plan.validate()?;
    let (x_entry, z_entry) = match &plan.schedule[..] {
        [a, b] if a.setting == "XXX" && b.setting == "ZZZ" => (a, b),
        [a, b] if a.setting == "ZZZ" && b.setting == "XXX" => (b, a),
        _ => bail!("witness schedule must cover exactly the XXX and ZZZ settings"),
    };

    let rho = plan.source.noisy_triplet()?;
    let acc = triplet_accidental_rate(&plan.source);
    let x_record = sample_counts(
        &rho,
        &setting("XXX"),
        plan.source.triplet_rate,
        x_entry.duration,
        acc,
        rng::derive_seed(plan.seed, domain::WITNESS, 0),
    )?;
    let z_record = sample_counts(
        &rho,
        &setting("ZZZ"),
        plan.source.triplet_rate,
        z_entry.duration,
        acc,
        rng::derive_seed(plan.seed, domain::WITNESS, 1),
    )?;

    let mut diagnostics = Vec::new();
    if x_record.total() == 0 {
        diagnostics.push("zero counts in the XXX basis; witness not computed".to_string());
    }
    if z_record.total() == 0 {
        diagnostics.push("zero counts in the ZZZ basis; witness not computed".to_string());
    }
    if !diagnostics.is_empty() {
        return Ok(WitnessRunOutput {
            witness: None,
            records: vec![x_record, z_record],
            sigma_models: None,
            accidental_rate_hz: acc,
            diagnostics,
        });
    }

    let witness = ghz_witness_from_records(
        &x_record,
        &z_record,
        plan.witness_replicas(),
        rng::derive_seed(plan.seed, domain::WITNESS, 2),
    )?;

    // Closed-form comparison: multinomial sigmas per term, quadrature on W.
    let quad = ghz_witness(
        parity_expectation_multinomial(&x_record)?,
        parity_expectation_multinomial(&z_record.marginal_to("1ZZ")?)?,
        parity_expectation_multinomial(&z_record.marginal_to("Z1Z")?)?,
        parity_expectation_multinomial(&z_record.marginal_to("ZZ1")?)?,
    );
    let sigma_models = SigmaModels {
        w_sigma_poisson_bootstrap: witness.w_value.sigma,
        w_sigma_multinomial_quadrature: quad.w_value.sigma,
    };

    Ok(WitnessRunOutput {
        witness: Some(witness),
        records: vec![x_record, z_record],
        sigma_models: Some(sigma_models),
        accidental_rate_hz: acc,
        diagnostics,
    })
}

pub fn emit_witness(artifacts: &mut RunArtifacts, output: &WitnessRunOutput) -> Result<()> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    if let Some(w) = &output.witness {
        for (label, est) in [
            ("e_xxx", w.e_xxx),
            ("e_1zz", w.e_1zz),
            ("e_z1z", w.e_z1z),
            ("e_zz1", w.e_zz1),
            ("w", w.w_value),
            ("fidelity_lower_bound", w.fidelity_lower_bound),
        ] {
            rows.push(vec![label.to_string(), format_float(est.value), format_float(est.sigma)]);
        }
    }
    artifacts.write_csv("witness", "term,value,sigma", &rows)?;
    artifacts.write_json(
        "witness",
        json!({
            "witness": output.witness,
            "sigma_models": output.sigma_models,
            "accidental_rate_hz": output.accidental_rate_hz,
            "records": output.records,
            "diagnostics": output.diagnostics,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// stability

#[derive(Debug, Clone, Serialize)]
pub struct StabilityPoint {
    pub cycle: usize,
    pub t_hours: f64,
    pub w: f64,
    pub w_sigma: f64,
    pub f_bound: f64,
    pub f_sigma: f64,
    pub counts_x: u64,
    pub counts_z: u64,
    /// True (simulated) triplet phase at the start of the cycle.
    pub phase_at_start: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityOutput {
    pub series: Vec<StabilityPoint>,
}

/// Runs repeated witness cycles while the triplet phase random-walks (and
/// the visibility optionally slides). Each cycle measures the scheduled
/// blocks back to back, then idles until the cycle period elapses.
pub fn run_stability(plan: &ExperimentPlan) -> Result<StabilityOutput> {
    if plan.kind != ExperimentKind::Stability {
        bail!("plan kind {} is not stability", plan.kind.as_str());
    }
    plan.validate()?;
    let drift = plan.drift.as_ref().expect("validated");
    let (x_entry, z_entry) = match &plan.schedule[..] {
        [a, b] if a.setting == "XXX" && b.setting == "ZZZ" => (a, b),
        [a, b] if a.setting == "ZZZ" && b.setting == "XXX" => (b, a),
        _ => bail!("stability schedule must cover exactly the XXX and ZZZ settings"),
    };

    let acc = triplet_accidental_rate(&plan.source);
    let v0 = plan.source.dephasing_visibility;
    let mut phase = plan.source.resolved_triplet_phase();
    let mut t_hours = 0.0f64;
    let mut walk_rng = rng::rng_for(plan.seed, domain::DRIFT, 0);
    let mut step_index = 0u64;

    let mut series = Vec::with_capacity(plan.cycles);
    for cycle in 0..plan.cycles {
        let cycle_start_hours = t_hours;
        let phase_at_start = phase;
        let mut records: Vec<CountRecord> = Vec::with_capacity(2);
        for entry in [x_entry, z_entry] {
            let block_setting = setting(&entry.setting);
            let mut record = CountRecord::zeroed(block_setting.clone(), entry.duration);
            let mut remaining = entry.duration;
            while remaining > 0.0 {
                let dt = remaining.min(drift.resample_interval);
                let visibility = match drift.visibility_drift {
                    Some(coef) => (v0 + coef * t_hours).clamp(0.0, 1.0),
                    None => v0,
                };
                let mut source = explicit_phase(&plan.source, phase);
                source.dephasing_visibility = visibility;
                let rho = source.noisy_triplet()?;
                let step = sample_counts(
                    &rho,
                    &block_setting,
                    source.triplet_rate,
                    dt,
                    acc,
                    rng::derive_seed(plan.seed, domain::STABILITY, step_index),
                )?;
                record.absorb(&step).expect("same setting");
                step_index += 1;
                let dt_hours = dt / 3600.0;
                phase += walk_step(&mut walk_rng, drift.phase_walk_sigma, dt_hours);
                t_hours += dt_hours;
                remaining -= dt;
            }
            // absorb() accumulates durations across steps on top of the
            // preset duration; restore the block duration.
            let counts = record.counts().to_vec();
            let mut fixed = CountRecord::new(block_setting, counts, entry.duration)?;
            fixed.metadata_mut().insert("cycle".into(), cycle.to_string());
            records.push(fixed);
        }

        let counts_x = records[0].total();
        let counts_z = records[1].total();
        if counts_x == 0 || counts_z == 0 {
            bail!("cycle {cycle} collected zero counts in a basis; cannot evaluate the witness");
        }
        let witness = ghz_witness_from_records(
            &records[0],
            &records[1],
            plan.witness_replicas(),
            rng::derive_seed(plan.seed, domain::STABILITY, 1_000_000 + cycle as u64),
        )?;
        series.push(StabilityPoint {
            cycle,
            t_hours: cycle_start_hours,
            w: witness.w_value.value,
            w_sigma: witness.w_value.sigma,
            f_bound: witness.fidelity_lower_bound.value,
            f_sigma: witness.fidelity_lower_bound.sigma,
            counts_x,
            counts_z,
            phase_at_start,
        });

        // Downtime until the next cycle: the walk keeps going.
        let elapsed = t_hours - cycle_start_hours;
        let downtime_hours = plan.cycle_period_hours - elapsed;
        if downtime_hours > 0.0 {
            phase += walk_step(&mut walk_rng, drift.phase_walk_sigma, downtime_hours);
            t_hours = cycle_start_hours + plan.cycle_period_hours;
        }
    }

    Ok(StabilityOutput { series })
}

fn walk_step<R: rand::Rng>(rng: &mut R, sigma_per_sqrt_hour: f64, dt_hours: f64) -> f64 {
    if sigma_per_sqrt_hour <= 0.0 || dt_hours <= 0.0 {
        // Keep the stream position fixed so zero-drift runs stay comparable.
        return 0.0;
    }
    Normal::new(0.0, sigma_per_sqrt_hour * dt_hours.sqrt())
        .expect("positive sigma")
        .sample(rng)
}

pub fn emit_stability(artifacts: &mut RunArtifacts, output: &StabilityOutput) -> Result<()> {
    let rows: Vec<Vec<String>> = output
        .series
        .iter()
        .map(|p| {
            vec![
                p.cycle.to_string(),
                format_float(p.t_hours),
                format_float(p.w),
                format_float(p.w_sigma),
                format_float(p.f_bound),
                format_float(p.f_sigma),
                p.counts_x.to_string(),
                p.counts_z.to_string(),
            ]
        })
        .collect();
    artifacts.write_csv(
        "stability",
        "cycle,t_hours,w,w_sigma,f_bound,f_sigma,counts_x,counts_z",
        &rows,
    )?;
    artifacts.write_json("stability", json!({ "series": output.series }))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// pair tomography

#[derive(Debug, Clone, Serialize)]
pub struct PairTomoOutput {
    pub pair_source: PairSource,
    pub target: String,
    pub rho_real: Vec<Vec<f64>>,
    pub rho_imag: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub metrics: cspdc_core::estimation::TomographyMetrics,
    pub records: Vec<CountRecord>,
}

/// Simulates the 36 pair measurements (9 settings x 4 outcomes),
/// reconstructs the state by MLE with a linear-inversion warm start, and
/// reports fidelity/purity/tangle with bootstrap error bars.
pub fn run_pair_tomography(plan: &ExperimentPlan) -> Result<PairTomoOutput> {
    if plan.kind != ExperimentKind::PairTomography {
        bail!("plan kind {} is not pair_tomography", plan.kind.as_str());
    }
    plan.validate()?;
    let which = plan.pair_source.unwrap_or(PairSource::Psi);
    let rho_truth = plan.source.noisy_pair(which)?;
    let rate = plan.source.pair_rate(which);
    let (target, target_label): (PureState, &str) = match which {
        PairSource::Psi => (psi_pair_state(std::f64::consts::FRAC_PI_4, std::f64::consts::PI), "psi_minus"),
        PairSource::Phi => (phi_pair_state(std::f64::consts::FRAC_PI_4, 0.0), "phi_plus"),
    };

    let required = cspdc_core::measurement::tomography_settings(2);
    let mut records = Vec::with_capacity(required.len());
    for (i, s) in required.iter().enumerate() {
        let entry = plan
            .schedule
            .iter()
            .find(|e| e.setting == s.label())
            .with_context(|| format!("pair tomography schedule is missing setting {}", s.label()))?;
        records.push(sample_counts(
            &rho_truth,
            s,
            rate,
            entry.duration,
            0.0,
            rng::derive_seed(plan.seed, domain::COUNTS, i as u64),
        )?);
    }

    let options = MleOptions {
        warm_start: true,
        bootstrap_replicas: plan.tomo_replicas(),
        seed: rng::derive_seed(plan.seed, domain::TOMO, 0),
        fidelity_target: Some(target),
        ..MleOptions::default()
    };
    let result: TomographyResult = mle_reconstruct(&records, None, &options)?;

    let dim = result.rho.dim();
    let matrix = result.rho.matrix();
    let rho_real: Vec<Vec<f64>> =
        (0..dim).map(|i| (0..dim).map(|j| matrix[(i, j)].re).collect()).collect();
    let rho_imag: Vec<Vec<f64>> =
        (0..dim).map(|i| (0..dim).map(|j| matrix[(i, j)].im).collect()).collect();

    Ok(PairTomoOutput {
        pair_source: which,
        target: target_label.to_string(),
        rho_real,
        rho_imag,
        log_likelihood: result.log_likelihood,
        iterations: result.iterations,
        converged: result.converged,
        metrics: result.metrics,
        records,
    })
}

pub fn emit_pair_tomography(artifacts: &mut RunArtifacts, output: &PairTomoOutput) -> Result<()> {
    let basis = ["HH", "HV", "VH", "VV"];
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (part, matrix) in [("real", &output.rho_real), ("imag", &output.rho_imag)] {
        for (row_label, row) in basis.iter().zip(matrix.iter()) {
            let mut cells = vec![part.to_string(), row_label.to_string()];
            cells.extend(row.iter().map(|v| format_float(*v)));
            rows.push(cells);
        }
    }
    artifacts.write_csv("pair_tomo_matrix", "part,basis,HH,HV,VH,VV", &rows)?;
    artifacts.write_json(
        "pair_tomo",
        serde_json::to_value(output).context("encoding tomography output")?,
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// coincidence bench

#[derive(Debug, Clone, Serialize)]
pub struct CoincBenchOutput {
    pub n_clicks: u64,
    pub events: u64,
    pub expected_accidentals: f64,
    pub zscore: f64,
    pub fold: usize,
    pub window_s: f64,
    pub rates_hz: Vec<f64>,
    pub duration_s: f64,
    pub slice_clicks: u64,
    pub slice_events: u64,
    pub reference_agreement: bool,
    /// Wall-clock timing; excluded from the deterministic payload files.
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

/// Generates independent Poisson click streams, times the single-pass
/// finder over them, compares the event count against the analytic
/// accidental rate, and cross-checks the engine against the quadratic
/// reference on a 10^4-click slice.
pub fn run_coincidence_bench(plan: &ExperimentPlan) -> Result<CoincBenchOutput> {
    if plan.kind != ExperimentKind::CoincidenceBench {
        bail!("plan kind {} is not coincidence_bench", plan.kind.as_str());
    }
    plan.validate()?;
    let window = plan.source.coincidence_window;
    let streams: Vec<TimestampStream> = plan
        .bench_rates
        .iter()
        .enumerate()
        .map(|(i, &rate)| {
            poisson_stream(
                (2 * i) as u8,
                rate,
                plan.bench_duration,
                rng::derive_seed(plan.seed, domain::BENCH, i as u64),
            )
        })
        .collect();
    let n_clicks: u64 = streams.iter().map(|s| s.len() as u64).sum();

    let start = Instant::now();
    let tally = find_coincidences(&streams, window, plan.bench_fold)?;
    let elapsed_seconds = start.elapsed().as_secs_f64();

    let expected_accidentals =
        accidental_rate(&plan.bench_rates, window) * plan.bench_duration;
    let zscore = if expected_accidentals > 0.0 {
        (tally.events.len() as f64 - expected_accidentals) / expected_accidentals.sqrt()
    } else {
        0.0
    };

    // Cross-check on the first 1e4 clicks (merged order).
    let slice = truncate_streams(&streams, 10_000);
    let slice_clicks: u64 = slice.iter().map(|s| s.len() as u64).sum();
    let fast = find_coincidences(&slice, window, plan.bench_fold)?;
    let slow = reference_find_coincidences(&slice, window, plan.bench_fold)?;
    let reference_agreement = fast == slow;

    Ok(CoincBenchOutput {
        n_clicks,
        events: tally.events.len() as u64,
        expected_accidentals,
        zscore,
        fold: plan.bench_fold,
        window_s: window,
        rates_hz: plan.bench_rates.clone(),
        duration_s: plan.bench_duration,
        slice_clicks,
        slice_events: fast.events.len() as u64,
        reference_agreement,
        elapsed_seconds,
    })
}

fn poisson_stream(channel: u8, rate: f64, duration: f64, seed: u64) -> TimestampStream {
    let mut times = Vec::new();
    if rate > 0.0 {
        let mut rng = rng::SimRng::seed_from_u64(seed);
        let gap = Exp::new(rate).expect("positive rate");
        let mut t = gap.sample(&mut rng);
        while t < duration {
            times.push((t * PS_PER_SECOND).round() as u64);
            t += gap.sample(&mut rng);
        }
        times.dedup();
    }
    TimestampStream { channel, times, origin: ClickOrigin::Signal }
}

/// Keeps the earliest `limit` clicks in global time order.
fn truncate_streams(streams: &[TimestampStream], limit: usize) -> Vec<TimestampStream> {
    let mut all_times: Vec<u64> = streams.iter().flat_map(|s| s.times.iter().copied()).collect();
    if all_times.len() <= limit {
        return streams.to_vec();
    }
    all_times.sort_unstable();
    let cutoff = all_times[limit - 1];
    streams
        .iter()
        .map(|s| TimestampStream {
            channel: s.channel,
            times: s.times.iter().copied().take_while(|&t| t <= cutoff).collect(),
            origin: s.origin,
        })
        .collect()
}

pub fn emit_coincidence_bench(
    artifacts: &mut RunArtifacts,
    output: &CoincBenchOutput,
) -> Result<()> {
    let payload = serde_json::to_value(output).context("encoding bench output")?;
    artifacts.write_json("coinc_bench", payload)?;
    artifacts.write_csv(
        "coinc_bench",
        "n_clicks,events,expected_accidentals,zscore,reference_agreement",
        &[vec![
            output.n_clicks.to_string(),
            output.events.to_string(),
            format_float(output.expected_accidentals),
            format_float(output.zscore),
            output.reference_agreement.to_string(),
        ]],
    )?;
    // Wall-clock numbers are inherently non-reproducible; they live in a
    // separate diagnostics file.
    artifacts.write_json(
        "coinc_bench_timing",
        json!({
            "elapsed_seconds": output.elapsed_seconds,
            "clicks_per_second": output.n_clicks as f64 / output.elapsed_seconds.max(1e-12),
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// stream simulation

#[derive(Debug, Clone, Serialize)]
pub struct StreamsOutput {
    pub n_photons: usize,
    pub setting: String,
    pub duration_s: f64,
    pub channel_clicks: Vec<ChannelClicks>,
    pub file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelClicks {
    pub channel: u8,
    pub origin: String,
    pub clicks: u64,
}

/// Generates event-level click streams for one measurement block and writes
/// them to the binary timestamp file.
pub fn run_simulate_streams(
    plan: &ExperimentPlan,
    artifacts: &mut RunArtifacts,
) -> Result<StreamsOutput> {
    if plan.kind != ExperimentKind::SimulateStreams {
        bail!("plan kind {} is not simulate_streams", plan.kind.as_str());
    }
    plan.validate()?;
    let entry = &plan.schedule[0];
    let (rho, n_photons) = match plan.pair_source {
        Some(which) => (plan.source.noisy_pair(which)?, 2usize),
        None => (plan.source.noisy_triplet()?, 3usize),
    };
    let block_setting = MeasurementSetting::from_label(&entry.setting)?;
    if block_setting.n_photons() != n_photons {
        bail!(
            "setting {:?} does not match the {}-photon source",
            entry.setting,
            n_photons
        );
    }
    let streams = generate_streams(&plan.source, &rho, &block_setting, entry.duration, plan.seed)?;

    let path = artifacts.path("streams.cgts");
    write_streams_to_path(&path, &streams)?;
    artifacts.note_written(path.clone());

    let channel_clicks: Vec<ChannelClicks> = streams
        .iter()
        .map(|s| ChannelClicks {
            channel: s.channel,
            origin: match s.origin {
                ClickOrigin::Signal => "signal".to_string(),
                ClickOrigin::Dark => "dark".to_string(),
                ClickOrigin::Mixed => "mixed".to_string(),
            },
            clicks: s.len() as u64,
        })
        .collect();

    let output = StreamsOutput {
        n_photons,
        setting: entry.setting.clone(),
        duration_s: entry.duration,
        channel_clicks,
        file: "streams.cgts".to_string(),
    };
    artifacts.write_json(
        "streams_summary",
        serde_json::to_value(&output).context("encoding stream summary")?,
    )?;
    Ok(output)
}

/// Clamps an expectation value into the observable's spectral range for
/// human-readable reporting; stored values stay raw.
pub fn clamp_for_display(value: f64) -> f64 {
    value.clamp(-1.0, 1.0)
}

/// One-line console summaries, with expectation values clamped for display.
pub fn describe(output: &RunSummary) -> Vec<String> {
    match output {
        RunSummary::PhaseScan(o) => {
            let mut lines = vec![format!("phase scan: {} points", o.points.len())];
            if let Some(fit) = &o.fit {
                lines.push(format!(
                    "fit: amplitude {:.4} +- {:.4}, phase offset {:.4} rad",
                    fit.amplitude, fit.amplitude_sigma, fit.phase_offset
                ));
            }
            if let Some(err) = &o.fit_error {
                lines.push(format!("fit failed: {err}"));
            }
            lines
        }
        RunSummary::Witness(o) => match &o.witness {
            Some(w) => vec![
                format!(
                    "E_XXX = {:.3} +- {:.3}, Z pairs = {:.3}/{:.3}/{:.3}",
                    clamp_for_display(w.e_xxx.value),
                    w.e_xxx.sigma,
                    clamp_for_display(w.e_1zz.value),
                    clamp_for_display(w.e_z1z.value),
                    clamp_for_display(w.e_zz1.value),
                ),
                format!(
                    "W = {:.3} +- {:.3}, fidelity bound = {:.3} +- {:.3}",
                    w.w_value.value,
                    w.w_value.sigma,
                    w.fidelity_lower_bound.value,
                    w.fidelity_lower_bound.sigma
                ),
            ],
            None => o.diagnostics.clone(),
        },
        RunSummary::Stability(o) => {
            let mean =
                o.series.iter().map(|p| p.f_bound).sum::<f64>() / o.series.len().max(1) as f64;
            vec![format!(
                "stability: {} cycles, mean fidelity bound {:.3}, min {:.3}",
                o.series.len(),
                mean,
                o.series.iter().map(|p| p.f_bound).fold(f64::INFINITY, f64::min)
            )]
        }
        RunSummary::PairTomo(o) => {
            let mut line = format!(
                "pair tomography ({}): purity {:.4} +- {:.4}",
                o.target, o.metrics.purity.value, o.metrics.purity.sigma
            );
            if let Some(f) = &o.metrics.fidelity {
                line.push_str(&format!(", fidelity {:.4} +- {:.4}", f.value, f.sigma));
            }
            if let Some(t) = &o.metrics.tangle {
                line.push_str(&format!(", tangle {:.4} +- {:.4}", t.value, t.sigma));
            }
            vec![line, format!("converged: {} in {} iterations", o.converged, o.iterations)]
        }
        RunSummary::CoincBench(o) => vec![
            format!(
                "{} clicks -> {} events in {:.3} s ({:.2e} clicks/s)",
                o.n_clicks,
                o.events,
                o.elapsed_seconds,
                o.n_clicks as f64 / o.elapsed_seconds.max(1e-12)
            ),
            format!(
                "expected accidentals {:.1} (z = {:+.2}), reference agreement: {}",
                o.expected_accidentals, o.zscore, o.reference_agreement
            ),
        ],
        RunSummary::Streams(o) => vec![format!(
            "wrote {} channels ({} clicks) to {}",
            o.channel_clicks.len(),
            o.channel_clicks.iter().map(|c| c.clicks).sum::<u64>(),
            o.file
        )],
    }
}

pub enum RunSummary {
    PhaseScan(PhaseScanOutput),
    Witness(WitnessRunOutput),
    Stability(StabilityOutput),
    PairTomo(PairTomoOutput),
    CoincBench(CoincBenchOutput),
    Streams(StreamsOutput),
}
