//! Acceptance suite: every shipped claim of the toolkit, one test per
//! criterion, each printing a PASS line with its measured numbers
//! (`cargo test --test acceptance -- --nocapture` to see them).

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use cspdc_cli::plan::{ExperimentKind, StatisticsMode};
use cspdc_cli::presets;
use cspdc_cli::runs;
use cspdc_core::estimation::{ghz_witness, mle_reconstruct, witness_observable, MleOptions};
use cspdc_core::measurement::{tomography_settings, Estimate};
use cspdc_core::qcore::{
    expectation, fidelity, ghz_state, random_density_matrix, trace_distance, DensityMatrix,
    Observable,
};
use cspdc_core::rng::SimRng;
use cspdc_core::simulator::{
    accidental_rate, find_coincidences, reference_find_coincidences, sample_counts, ClickOrigin,
    TimestampStream, PS_PER_SECOND,
};
use cspdc_core::sources::ghz_exp_state;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp};

fn est(value: f64, sigma: f64) -> Estimate {
    Estimate { value, sigma }
}

#[test]
fn criterion_1_witness_arithmetic() {
    let r = ghz_witness(est(0.95, 0.05), est(0.97, 0.03), est(1.00, 0.04), est(0.97, 0.03));
    assert!(
        (r.w_value.value - (-0.92)).abs() < 1e-15,
        "W = {} is not -0.92 at machine precision",
        r.w_value.value
    );
    assert!(
        (r.fidelity_lower_bound.value - 0.96).abs() < 1e-15,
        "F bound = {} is not 0.96 at machine precision",
        r.fidelity_lower_bound.value
    );
    println!(
        "ACCEPTANCE 1 witness arithmetic: PASS (W = {}, F >= {})",
        r.w_value.value, r.fidelity_lower_bound.value
    );
}

#[test]
fn criterion_2_ideal_state_identities() {
    let ghz = DensityMatrix::from_pure(&ghz_state());
    let e_xxx = expectation(&ghz, &Observable::pauli_word("XXX").unwrap()).unwrap();
    assert!((e_xxx - 1.0).abs() < 1e-10);
    let mut z_parities = Vec::new();
    for label in ["1ZZ", "Z1Z", "ZZ1"] {
        let e = expectation(&ghz, &Observable::pauli_word(label).unwrap()).unwrap();
        assert!((e - 1.0).abs() < 1e-10, "{label} parity {e}");
        z_parities.push(e);
    }
    let w = ghz_witness(
        est(e_xxx, 0.0),
        est(z_parities[0], 0.0),
        est(z_parities[1], 0.0),
        est(z_parities[2], 0.0),
    );
    assert!((w.w_value.value - (-1.0)).abs() < 1e-10);
    assert!((w.fidelity_lower_bound.value - 1.0).abs() < 1e-10);
    // Direct operator route agrees.
    let w_direct = expectation(&ghz, &witness_observable()).unwrap();
    assert!((w_direct - (-1.0)).abs() < 1e-10);

    let flipped = DensityMatrix::from_pure(&ghz_exp_state(std::f64::consts::FRAC_PI_4, std::f64::consts::PI));
    let e_flip = expectation(&flipped, &Observable::pauli_word("XXX").unwrap()).unwrap();
    assert!((e_flip - (-1.0)).abs() < 1e-10);
    println!(
        "ACCEPTANCE 2 ideal-state identities: PASS (XXX {e_xxx}, W {}, flipped XXX {e_flip})",
        w.w_value.value
    );
}

#[test]
fn criterion_3_calibrated_witness_runs() {
    let start = Instant::now();
    let base = presets::load("cascade-paper", ExperimentKind::TripletWitness).unwrap();
    let n_seeds = 120usize;
    let mut w_values = Vec::with_capacity(n_seeds);
    let mut w_sigmas = Vec::with_capacity(n_seeds);
    for k in 0..n_seeds {
        let mut plan = base.clone();
        plan.seed = 10_000 + k as u64;
        let output = runs::run_witness(&plan).unwrap();
        let witness = output.witness.expect("calibrated runs always collect counts");
        w_values.push(witness.w_value.value);
        w_sigmas.push(witness.w_value.sigma);
    }
    let mean = w_values.iter().sum::<f64>() / n_seeds as f64;
    let empirical_std = {
        let m = mean;
        (w_values.iter().map(|w| (w - m).powi(2)).sum::<f64>() / (n_seeds as f64 - 1.0)).sqrt()
    };
    let mean_bootstrap_sigma = w_sigmas.iter().sum::<f64>() / n_seeds as f64;
    let elapsed = start.elapsed().as_secs_f64();

    assert!(
        (mean - (-0.92)).abs() < 0.02,
        "mean W over {n_seeds} seeds is {mean}, more than 0.02 from -0.92"
    );
    let ratio = empirical_std / mean_bootstrap_sigma;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "empirical std {empirical_std} vs bootstrap sigma {mean_bootstrap_sigma} (ratio {ratio})"
    );
    assert!(elapsed < 60.0, "witness study took {elapsed:.1} s, budget is 60 s");
    println!(
        "ACCEPTANCE 3 calibrated witness: PASS (mean W {mean:.4}, empirical std {empirical_std:.4}, \
         bootstrap sigma {mean_bootstrap_sigma:.4}, {elapsed:.1} s)"
    );
}

#[test]
fn criterion_4_pair_tomography_oracle() {
    let start = Instant::now();

    // (a) 20 random two-qubit states, noiseless large-N counts.
    let mut rng = SimRng::seed_from_u64(0xACCE9);
    let settings = tomography_settings(2);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let truth = random_density_matrix(2, 1 + k % 4, &mut rng);
        let records: Vec<_> = settings
            .iter()
            .enumerate()
            .map(|(i, s)| {
                sample_counts(&truth, s, 1.0e6, 1.0, 0.0, 777 + (k * 100 + i) as u64).unwrap()
            })
            .collect();
        let options = MleOptions {
            warm_start: true,
            bootstrap_replicas: 0,
            ..MleOptions::default()
        };
        let result = mle_reconstruct(&records, None, &options).unwrap();
        let distance = trace_distance(&result.rho, &truth).unwrap();
        worst = worst.max(distance);
        assert!(distance < 0.01, "state {k}: trace distance {distance}");
        let min_eig = *result.rho.eigenvalues().last().unwrap();
        assert!(min_eig > -1e-12, "state {k}: eigenvalue {min_eig}");
        let trace = result.rho.matrix().trace().re;
        assert!((trace - 1.0).abs() < 1e-12, "state {k}: trace {trace}");
    }

    // (b) the two shipped pair presets recover their reference triples.
    let mut summaries = Vec::new();
    for (name, targets) in
        [("ppktp", (0.9645, 0.9561, 0.9147)), ("ppln", (0.9506, 0.937, 0.866))]
    {
        let plan = presets::load(name, ExperimentKind::PairTomography).unwrap();
        let output = runs::run_pair_tomography(&plan).unwrap();
        let f = output.metrics.fidelity.clone().unwrap();
        let p = output.metrics.purity.clone();
        let t = output.metrics.tangle.clone().unwrap();
        for (label, got, want) in
            [("fidelity", &f, targets.0), ("purity", &p, targets.1), ("tangle", &t, targets.2)]
        {
            assert!(
                (got.value - want).abs() < 3.0 * got.sigma,
                "{name} {label}: {} +- {} vs reference {want}",
                got.value,
                got.sigma
            );
        }
        summaries.push(format!(
            "{name}: F {:.4}+-{:.4} P {:.4}+-{:.4} T {:.4}+-{:.4}",
            f.value, f.sigma, p.value, p.sigma, t.value, t.sigma
        ));
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "tomography oracle took {elapsed:.1} s, budget is 120 s");
    println!(
        "ACCEPTANCE 4 pair tomography: PASS (worst random-state distance {worst:.5}; {}; {elapsed:.1} s)",
        summaries.join("; ")
    );
}

#[test]
fn criterion_5_phase_scan() {
    let start = Instant::now();

    let plan = presets::load("phase-scan-paper", ExperimentKind::PhaseScan).unwrap();
    let sampled = runs::run_phase_scan(&plan).unwrap();
    let fit = sampled.fit.expect("sampled scan fits");
    assert!(
        (fit.amplitude - 0.92).abs() < 3.0 * fit.amplitude_sigma,
        "sampled amplitude {} +- {} vs 0.92",
        fit.amplitude,
        fit.amplitude_sigma
    );

    let mut noiseless = plan.clone();
    noiseless.source.white_noise = 0.0;
    noiseless.source.dephasing_visibility = 1.0;
    noiseless.statistics = StatisticsMode::Exact;
    let exact = runs::run_phase_scan(&noiseless).unwrap();
    let exact_fit = exact.fit.expect("exact scan fits");
    assert!(
        (exact_fit.amplitude - 1.0).abs() < 1e-9,
        "noiseless amplitude {} not 1.0 within 1e-9",
        exact_fit.amplitude
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "phase scan took {elapsed:.1} s, budget is 30 s");
    println!(
        "ACCEPTANCE 5 phase scan: PASS (sampled {:.4} +- {:.4}, noiseless {:.12}, {elapsed:.1} s)",
        fit.amplitude, exact_fit.amplitude, elapsed
    );
}

fn poisson_stream(channel: u8, rate: f64, duration: f64, seed: u64) -> TimestampStream {
    let mut rng = SimRng::seed_from_u64(seed);
    let gap = Exp::new(rate).unwrap();
    let mut t = gap.sample(&mut rng);
    let mut times = Vec::new();
    while t < duration {
        times.push((t * PS_PER_SECOND).round() as u64);
        t += gap.sample(&mut rng);
    }
    times.dedup();
    TimestampStream { channel, times, origin: ClickOrigin::Signal }
}

#[test]
fn criterion_6_coincidence_engine() {
    // (a) exact agreement with the quadratic reference on 1e4-click
    // instances over 100 random seeds.
    let mut rng = SimRng::seed_from_u64(0xC01C);
    for case in 0..100u64 {
        let groups = 2 + (case % 3) as u8; // 2..=4 channel groups
        let duration = 1.0;
        let mut streams = Vec::new();
        for g in 0..groups {
            for port in 0..2u8 {
                let rate = 3.0e3 * (1.0 + 2.0 * rng.random::<f64>());
                streams.push(poisson_stream(
                    2 * g + port,
                    rate,
                    duration,
                    0xBEEF + case * 100 + (2 * g + port) as u64,
                ));
            }
        }
        let clicks: usize = streams.iter().map(|s| s.len()).sum();
        assert!(clicks >= 10_000, "case {case} has too few clicks ({clicks})");
        let window = (0.3 + 0.4 * rng.random::<f64>()) * 1e-6; // 0.3-0.7 us
        let fold = groups as usize;
        let fast = find_coincidences(&streams, window, fold).unwrap();
        let slow = reference_find_coincidences(&streams, window, fold).unwrap();
        assert_eq!(fast, slow, "engines disagree in case {case}");
    }

    // (b) accidental rates on independent streams match R1*R2*tau.
    let duration = 30.0;
    let streams = vec![
        poisson_stream(0, 1.0e5, duration, 11),
        poisson_stream(2, 1.0e5, duration, 12),
    ];
    let tally = find_coincidences(&streams, 1.0e-9, 2).unwrap();
    let expected = accidental_rate(&[1.0e5, 1.0e5], 1.0e-9) * duration;
    let got = tally.events.len() as f64;
    assert!(
        (got - expected).abs() < 3.0 * expected.sqrt(),
        "accidentals {got} vs analytic {expected}"
    );

    // (c) 1e7 clicks in under a minute through the full bench runner.
    let plan = presets::load("coinc-bench", ExperimentKind::CoincidenceBench).unwrap();
    let output = runs::run_coincidence_bench(&plan).unwrap();
    assert!(output.n_clicks >= 10_000_000, "bench produced {} clicks", output.n_clicks);
    assert!(
        output.elapsed_seconds < 60.0,
        "bench took {:.1} s, budget is 60 s",
        output.elapsed_seconds
    );
    assert!(output.reference_agreement, "bench slice disagrees with the reference finder");
    assert!(output.zscore.abs() < 3.0, "bench accidental z-score {}", output.zscore);

    println!(
        "ACCEPTANCE 6 coincidence engine: PASS (100 reference matches, accidentals {got}/{expected:.1}, \
         {} clicks in {:.2} s)",
        output.n_clicks, output.elapsed_seconds
    );
}

#[test]
fn criterion_7_witness_bound_soundness() {
    let ghz = ghz_state();
    let w_op = witness_observable();
    let mut rng = SimRng::seed_from_u64(0x50F7);
    let mut tightest = f64::INFINITY;
    for k in 0..1000usize {
        let rho = random_density_matrix(3, 1 + k % 6, &mut rng);
        let bound = (1.0 - expectation(&rho, &w_op).unwrap()) / 2.0;
        let exact = fidelity(&rho, &ghz).unwrap();
        assert!(
            exact >= bound - 1e-9,
            "state {k}: fidelity {exact} below bound {bound}"
        );
        tightest = tightest.min(exact - bound);
    }
    println!(
        "ACCEPTANCE 7 witness-bound soundness: PASS (1000 states, smallest slack {tightest:.3e})"
    );
}

fn strip_nondeterministic(name: &str, bytes: &[u8]) -> Vec<u8> {
    if name.ends_with(".cgts") {
        return bytes.to_vec();
    }
    let text = String::from_utf8_lossy(bytes);
    text.lines()
        .filter(|line| !line.contains("generated_at"))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_cspdc"))
        .args(args)
        .status()
        .expect("spawning the cspdc binary");
    assert!(status.success(), "cspdc {args:?} failed");
}

fn assert_dirs_match(a: &Path, b: &Path) {
    let mut names: Vec<String> = std::fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert!(!names.is_empty(), "no outputs in {}", a.display());
    for name in names {
        if name == "coinc_bench_timing.json" {
            // Wall-clock diagnostics are non-reproducible by design.
            continue;
        }
        let first = std::fs::read(a.join(&name)).unwrap();
        let second = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(
            strip_nondeterministic(&name, &first),
            strip_nondeterministic(&name, &second),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn criterion_8_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config_dir = dir.path().join("configs");
    std::fs::create_dir_all(&config_dir).unwrap();

    let witness_cfg = config_dir.join("witness.toml");
    std::fs::write(
        &witness_cfg,
        "triplet_rate = 0.05\nsettings = [\"XXX\", \"ZZZ\"]\ndurations = [600.0, 600.0]\nreplicas = 400\n",
    )
    .unwrap();
    let scan_cfg = config_dir.join("scan.toml");
    std::fs::write(
        &scan_cfg,
        "triplet_rate = 0.05\nphases = [0.0, 1.0, 2.0, 3.0, 4.0]\nphase_duration = 400.0\nreplicas = 400\ndephasing_visibility = 0.9\n",
    )
    .unwrap();
    let stability_cfg = config_dir.join("stability.toml");
    std::fs::write(
        &stability_cfg,
        "triplet_rate = 0.05\nsettings = [\"XXX\", \"ZZZ\"]\ndurations = [1800.0, 1800.0]\ncycles = 2\ncycle_period_hours = 2.0\ndrift_phase_walk_sigma = 0.3\ndrift_resample_interval = 300.0\nreplicas = 400\n",
    )
    .unwrap();
    let tomo_cfg = config_dir.join("tomo.toml");
    let mut tomo_text = String::from("pair_rate_1 = 3.0e6\nreplicas = 25\nsettings = [");
    let labels: Vec<String> =
        tomography_settings(2).iter().map(|s| format!("\"{}\"", s.label())).collect();
    tomo_text.push_str(&labels.join(", "));
    tomo_text.push_str("]\ndurations = [0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001]\n");
    std::fs::write(&tomo_cfg, &tomo_text).unwrap();
    let bench_cfg = config_dir.join("bench.toml");
    std::fs::write(&bench_cfg, "bench_rates = [2.0e4, 2.0e4]\nbench_duration = 5.0\n").unwrap();
    let streams_cfg = config_dir.join("streams.toml");
    std::fs::write(
        &streams_cfg,
        "triplet_rate = 2.0\ndark_rate = 20.0\nsettings = [\"ZZZ\"]\ndurations = [30.0]\n",
    )
    .unwrap();

    let cases: Vec<(&str, &Path)> = vec![
        ("witness", &witness_cfg),
        ("phase-scan", &scan_cfg),
        ("stability", &stability_cfg),
        ("pair-tomo", &tomo_cfg),
        ("coinc-bench", &bench_cfg),
        ("simulate-streams", &streams_cfg),
    ];
    for (command, config) in cases {
        let out_a = dir.path().join(format!("{command}-a"));
        let out_b = dir.path().join(format!("{command}-b"));
        let config_str = config.to_string_lossy();
        for out in [&out_a, &out_b] {
            run_cli(&[
                command,
                "--config",
                &config_str,
                "--seed",
                "4242",
                "--out",
                &out.to_string_lossy(),
            ]);
        }
        assert_dirs_match(&out_a, &out_b);
    }
    println!("ACCEPTANCE 8 determinism: PASS (6 commands, byte-identical payloads)");
}

/// Weighted least-squares line fit returning (slope, slope_sigma).
fn weighted_slope(points: &[(f64, f64, f64)]) -> (f64, f64) {
    let w: Vec<f64> = points.iter().map(|(_, _, s)| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let swx: f64 = points.iter().zip(&w).map(|((x, _, _), w)| w * x).sum();
    let swy: f64 = points.iter().zip(&w).map(|((_, y, _), w)| w * y).sum();
    let swxx: f64 = points.iter().zip(&w).map(|((x, _, _), w)| w * x * x).sum();
    let swxy: f64 = points.iter().zip(&w).map(|((x, y, _), w)| w * x * y).sum();
    let det = sw * swxx - swx * swx;
    ((sw * swxy - swx * swy) / det, (sw / det).sqrt())
}

#[test]
fn criterion_9_stability_presets() {
    // Shipped drift calibration.
    let plan = presets::load("stability-paper", ExperimentKind::Stability).unwrap();
    let output = runs::run_stability(&plan).unwrap();
    assert_eq!(output.series.len(), 7);
    let mean: f64 =
        output.series.iter().map(|p| p.f_bound).sum::<f64>() / output.series.len() as f64;
    let min = output.series.iter().map(|p| p.f_bound).fold(f64::INFINITY, f64::min);
    assert!(
        (0.76..=0.92).contains(&mean),
        "shipped stability mean {mean} outside [0.76, 0.92]"
    );
    assert!(min > 0.72, "shipped stability min {min} not above 0.72");

    // Zero drift: no trend at 3 sigma.
    let mut still = plan.clone();
    still.drift.as_mut().unwrap().phase_walk_sigma = 0.0;
    let flat = runs::run_stability(&still).unwrap();
    let points: Vec<(f64, f64, f64)> =
        flat.series.iter().map(|p| (p.t_hours, p.f_bound, p.f_sigma.max(1e-6))).collect();
    let (slope, slope_sigma) = weighted_slope(&points);
    assert!(
        slope.abs() < 3.0 * slope_sigma,
        "zero-drift slope {slope} +- {slope_sigma} inconsistent with 0"
    );
    println!(
        "ACCEPTANCE 9 stability: PASS (mean {mean:.3}, min {min:.3}, zero-drift slope {slope:.2e} +- {slope_sigma:.2e})"
    );
}
