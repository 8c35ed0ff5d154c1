//! Experiment plans and the flat TOML config format.
//!
//! A config file is a flat key set (documented in the README); unknown keys
//! are rejected. Every key is optional — anything unset falls back to the
//! default in [`ExperimentPlan::default_for`] — except that the `kind` key,
//! when present, must match the subcommand.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cspdc_core::sources::{PairSource, SourceConfig, TripletPhaseMode};

/// Which experiment a plan drives. `simulate_streams` shares the plan format
/// with the five analysis experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PairTomography,
    TripletWitness,
    PhaseScan,
    Stability,
    CoincidenceBench,
    SimulateStreams,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PairTomography => "pair_tomography",
            Self::TripletWitness => "triplet_witness",
            Self::PhaseScan => "phase_scan",
            Self::Stability => "stability",
            Self::CoincidenceBench => "coincidence_bench",
            Self::SimulateStreams => "simulate_streams",
        }
    }
}

/// Slow drift applied during stability runs: a random walk on the triplet
/// phase, optionally a linear visibility slide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    /// Random-walk scale in radians per sqrt(hour).
    pub phase_walk_sigma: f64,
    /// Linear visibility change per hour (clamped to [0, 1] on evaluation).
    pub visibility_drift: Option<f64>,
    /// Seconds between drift updates during a measurement block.
    pub resample_interval: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub setting: String,
    pub duration: f64,
}

/// Statistics mode for the phase scan: Monte Carlo counts or exact
/// infinite-statistics expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsMode {
    Sampled,
    Exact,
}

/// One reproducible experiment: everything a runner needs, and everything
/// that gets echoed into the output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub kind: ExperimentKind,
    pub source: SourceConfig,
    pub schedule: Vec<ScheduleEntry>,
    pub seed: u64,
    pub drift: Option<DriftModel>,
    /// Scanned triplet phases (phase_scan only).
    pub phases: Vec<f64>,
    /// Witness cycles (stability only).
    pub cycles: usize,
    /// Length of one stability cycle; the remainder after the scheduled
    /// blocks is downtime.
    pub cycle_period_hours: f64,
    pub statistics: StatisticsMode,
    /// Bootstrap replicas; `None` uses the per-command default (10000 for
    /// parity/witness errors, 100 for tomography metrics).
    pub replicas: Option<usize>,
    /// Which pair source a pair tomography or pair stream run models;
    /// `None` means the cascaded triplet source.
    pub pair_source: Option<PairSource>,
    /// Per-channel singles rates for the coincidence bench.
    pub bench_rates: Vec<f64>,
    pub bench_fold: usize,
    pub bench_duration: f64,
}

pub const DEFAULT_SEED: u64 = 0xC5CADE;
pub const DEFAULT_WITNESS_REPLICAS: usize = 10_000;
pub const DEFAULT_TOMO_REPLICAS: usize = 100;

/// Reference operating point used as the baseline for configs that do not
/// override the source: balanced pair sources, 3e6 and 1.5e4 detected
/// pairs/s, 6.4 triplets/h, 5/s dark counts, 0.30/0.16/0.13 efficiencies,
/// 0.30 cascade coupling, 0.5 ns window.
pub fn baseline_source() -> SourceConfig {
    SourceConfig {
        theta: FRAC_PI_4,
        phi: 0.0,
        theta_prime: FRAC_PI_4,
        phi_prime: 0.0,
        triplet_phase_mode: TripletPhaseMode::Combined,
        triplet_phase: 0.0,
        white_noise: 0.0,
        dephasing_visibility: 1.0,
        pair_rate_1: 3.0e6,
        pair_rate_2: 1.5e4,
        triplet_rate: 6.4 / 3600.0,
        dark_rate: 5.0,
        channel_efficiency: [0.30, 0.16, 0.13],
        cascade_coupling: 0.30,
        coincidence_window: 0.5e-9,
        timing_jitter: 0.0,
    }
}

const EIGHT_HOURS: f64 = 8.0 * 3600.0;

impl ExperimentPlan {
    /// Command defaults; a config file or preset overlays these.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let mut plan = ExperimentPlan {
            kind,
            source: baseline_source(),
            schedule: vec![
                ScheduleEntry { setting: "XXX".into(), duration: EIGHT_HOURS },
                ScheduleEntry { setting: "ZZZ".into(), duration: EIGHT_HOURS },
            ],
            seed: DEFAULT_SEED,
            drift: None,
            phases: (0..12).map(|k| 2.0 * PI * k as f64 / 12.0).collect(),
            cycles: 7,
            cycle_period_hours: 24.0,
            statistics: StatisticsMode::Sampled,
            replicas: None,
            pair_source: None,
            bench_rates: vec![1.0e5, 1.0e5],
            bench_fold: 2,
            bench_duration: 50.0,
        };
        match kind {
            ExperimentKind::PairTomography => {
                plan.pair_source = Some(PairSource::Psi);
                plan.schedule = pair_tomography_schedule(0.01);
            }
            ExperimentKind::PhaseScan => {
                plan.schedule = vec![ScheduleEntry { setting: "XXX".into(), duration: 7200.0 }];
                plan.source.triplet_rate = 10.0 / 3600.0;
            }
            ExperimentKind::Stability => {
                plan.drift = Some(DriftModel {
                    phase_walk_sigma: 0.08,
                    visibility_drift: None,
                    resample_interval: 600.0,
                });
            }
            ExperimentKind::SimulateStreams => {
                plan.schedule = vec![ScheduleEntry { setting: "ZZZ".into(), duration: 3600.0 }];
            }
            _ => {}
        }
        plan
    }

    pub fn from_file(path: &Path, kind: ExperimentKind) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let raw: RawConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let mut plan = Self::default_for(kind);
        plan.apply(raw, kind)?;
        plan.validate()?;
        Ok(plan)
    }

    fn apply(&mut self, raw: RawConfig, kind: ExperimentKind) -> Result<()> {
        if let Some(k) = &raw.kind {
            let parsed: ExperimentKind = serde_json::from_value(serde_json::json!(k))
                .map_err(|_| anyhow::anyhow!("unknown kind {k:?}"))?;
            if parsed != kind {
                bail!("config kind {k:?} does not match the {} subcommand", kind.as_str());
            }
        }
        if let Some(v) = raw.seed {
            self.seed = v;
        }
        match (raw.settings, raw.durations) {
            (Some(settings), Some(durations)) => {
                if settings.len() != durations.len() {
                    bail!("settings and durations must have equal length");
                }
                self.schedule = settings
                    .into_iter()
                    .zip(durations)
                    .map(|(setting, duration)| ScheduleEntry { setting, duration })
                    .collect();
            }
            (None, None) => {}
            _ => bail!("settings and durations must be given together"),
        }
        if let Some(phases) = raw.phases {
            self.phases = phases;
        }
        if let Some(d) = raw.phase_duration {
            if kind == ExperimentKind::PhaseScan {
                self.schedule = vec![ScheduleEntry { setting: "XXX".into(), duration: d }];
            } else {
                bail!("phase_duration only applies to phase-scan runs");
            }
        }
        if let Some(v) = raw.cycles {
            self.cycles = v;
        }
        if let Some(v) = raw.cycle_period_hours {
            self.cycle_period_hours = v;
        }
        if let Some(s) = raw.statistics {
            self.statistics = match s.as_str() {
                "sampled" => StatisticsMode::Sampled,
                "exact" => StatisticsMode::Exact,
                other => bail!("unknown statistics mode {other:?}"),
            };
        }
        if let Some(v) = raw.replicas {
            self.replicas = Some(v);
        }
        if let Some(s) = raw.pair_source {
            self.pair_source = Some(match s.as_str() {
                "psi" => PairSource::Psi,
                "phi" => PairSource::Phi,
                other => bail!("unknown pair_source {other:?} (expected psi or phi)"),
            });
        }
        if let Some(v) = raw.bench_rates {
            self.bench_rates = v;
        }
        if let Some(v) = raw.bench_fold {
            self.bench_fold = v;
        }
        if let Some(v) = raw.bench_duration {
            self.bench_duration = v;
        }

        let drift_given = raw.drift_phase_walk_sigma.is_some()
            || raw.drift_visibility_per_hour.is_some()
            || raw.drift_resample_interval.is_some();
        if drift_given {
            let mut drift = self.drift.clone().unwrap_or(DriftModel {
                phase_walk_sigma: 0.0,
                visibility_drift: None,
                resample_interval: 600.0,
            });
            if let Some(v) = raw.drift_phase_walk_sigma {
                drift.phase_walk_sigma = v;
            }
            if let Some(v) = raw.drift_visibility_per_hour {
                drift.visibility_drift = Some(v);
            }
            if let Some(v) = raw.drift_resample_interval {
                drift.resample_interval = v;
            }
            self.drift = Some(drift);
        }

        let s = &mut self.source;
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = raw.$field { s.$field = v; })*
            };
        }
        overlay!(
            theta, phi, theta_prime, phi_prime, triplet_phase, white_noise,
            dephasing_visibility, pair_rate_1, pair_rate_2, triplet_rate, dark_rate,
            channel_efficiency, cascade_coupling, coincidence_window, timing_jitter
        );
        if let Some(mode) = raw.triplet_phase_mode {
            s.triplet_phase_mode = match mode.as_str() {
                "combined" => TripletPhaseMode::Combined,
                "explicit" => TripletPhaseMode::Explicit,
                other => bail!("unknown triplet_phase_mode {other:?}"),
            };
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate().map_err(|e| anyhow::anyhow!("source config: {e}"))?;
        if self.schedule.is_empty() {
            bail!("schedule must not be empty");
        }
        for entry in &self.schedule {
            if !(entry.duration > 0.0) {
                bail!("schedule duration for {:?} must be positive", entry.setting);
            }
            cspdc_core::measurement::MeasurementSetting::from_label(&entry.setting)
                .map_err(|e| anyhow::anyhow!("schedule setting: {e}"))?;
        }
        match self.kind {
            ExperimentKind::PhaseScan => {
                if self.phases.is_empty() {
                    bail!("phase scan needs at least one phase");
                }
            }
            ExperimentKind::Stability => {
                if self.cycles == 0 {
                    bail!("stability needs at least one cycle");
                }
                if !(self.cycle_period_hours > 0.0) {
                    bail!("cycle period must be positive");
                }
                let block_hours: f64 =
                    self.schedule.iter().map(|e| e.duration).sum::<f64>() / 3600.0;
                if block_hours > self.cycle_period_hours {
                    bail!(
                        "scheduled blocks ({block_hours} h) exceed the cycle period ({} h)",
                        self.cycle_period_hours
                    );
                }
                let drift = self.drift.as_ref().context("stability runs need a drift model")?;
                if drift.phase_walk_sigma < 0.0 {
                    bail!("phase_walk_sigma must be nonnegative");
                }
                if !(drift.resample_interval > 0.0) {
                    bail!("resample_interval must be positive");
                }
            }
            ExperimentKind::CoincidenceBench => {
                if self.bench_rates.len() < 2 {
                    bail!("coincidence bench needs at least two channel rates");
                }
                if self.bench_rates.iter().any(|r| !(*r >= 0.0)) {
                    bail!("bench rates must be nonnegative");
                }
                if self.bench_fold < 2 || self.bench_fold > self.bench_rates.len() {
                    bail!(
                        "bench fold {} outside 2..={}",
                        self.bench_fold,
                        self.bench_rates.len()
                    );
                }
                if !(self.bench_duration > 0.0) {
                    bail!("bench duration must be positive");
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Bootstrap replica count for witness-style estimates.
    pub fn witness_replicas(&self) -> usize {
        self.replicas.unwrap_or(DEFAULT_WITNESS_REPLICAS)
    }

    /// Bootstrap replica count for tomography metrics.
    pub fn tomo_replicas(&self) -> usize {
        self.replicas.unwrap_or(DEFAULT_TOMO_REPLICAS)
    }
}

/// The nine full two-photon settings, each measured for `duration` seconds.
pub fn pair_tomography_schedule(duration: f64) -> Vec<ScheduleEntry> {
    cspdc_core::measurement::tomography_settings(2)
        .into_iter()
        .map(|s| ScheduleEntry { setting: s.label().to_string(), duration })
        .collect()
}

/// Flat config-file keys. Everything is optional; unknown keys fail.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Option<String>,
    seed: Option<u64>,
    settings: Option<Vec<String>>,
    durations: Option<Vec<f64>>,
    phases: Option<Vec<f64>>,
    phase_duration: Option<f64>,
    cycles: Option<usize>,
    cycle_period_hours: Option<f64>,
    statistics: Option<String>,
    replicas: Option<usize>,
    pair_source: Option<String>,
    bench_rates: Option<Vec<f64>>,
    bench_fold: Option<usize>,
    bench_duration: Option<f64>,
    drift_phase_walk_sigma: Option<f64>,
    drift_visibility_per_hour: Option<f64>,
    drift_resample_interval: Option<f64>,
    theta: Option<f64>,
    phi: Option<f64>,
    theta_prime: Option<f64>,
    phi_prime: Option<f64>,
    triplet_phase_mode: Option<String>,
    triplet_phase: Option<f64>,
    white_noise: Option<f64>,
    dephasing_visibility: Option<f64>,
    pair_rate_1: Option<f64>,
    pair_rate_2: Option<f64>,
    triplet_rate: Option<f64>,
    dark_rate: Option<f64>,
    channel_efficiency: Option<[f64; 3]>,
    cascade_coupling: Option<f64>,
    coincidence_window: Option<f64>,
    timing_jitter: Option<f64>,
}
