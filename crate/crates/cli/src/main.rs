use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use cspdc_cli::output::{OutputFormat, RunArtifacts};
use cspdc_cli::plan::{ExperimentKind, ExperimentPlan};
use cspdc_cli::presets;
use cspdc_cli::runs::{self, RunSummary};

/// Simulation and analysis toolkit for a cascaded-downconversion source of
/// three-photon polarization entanglement.
#[derive(Parser)]
#[command(name = "cspdc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the triplet phase and fit the <XXX> sinusoid.
    PhaseScan(CommonArgs),
    /// Run the two-basis GHZ witness measurement.
    Witness(CommonArgs),
    /// Repeat the witness over drifting cycles.
    Stability(CommonArgs),
    /// Reconstruct a pair source by maximum-likelihood tomography.
    PairTomo(CommonArgs),
    /// Throughput and accuracy report for the coincidence engine.
    CoincBench(CommonArgs),
    /// Write event-level timestamp streams to a binary file.
    SimulateStreams(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat TOML config file (mutually exclusive with --preset).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset (mutually exclusive with --config).
    #[arg(long)]
    preset: Option<String>,
    /// Master seed override (default 0xC5CADE, always echoed to outputs).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
    /// Bootstrap replica override.
    #[arg(long)]
    replicas: Option<usize>,
}

fn resolve_plan(args: &CommonArgs, kind: ExperimentKind) -> Result<ExperimentPlan> {
    let mut plan = match (&args.config, &args.preset) {
        (Some(_), Some(_)) => bail!("--config and --preset are mutually exclusive"),
        (Some(path), None) => ExperimentPlan::from_file(path, kind)?,
        (None, Some(name)) => presets::load(name, kind)?,
        (None, None) => bail!(
            "provide --config FILE or --preset NAME (presets: {})",
            presets::available().join(", ")
        ),
    };
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    if let Some(replicas) = args.replicas {
        plan.replicas = Some(replicas);
    }
    plan.validate()?;
    Ok(plan)
}

fn execute(kind: ExperimentKind, args: &CommonArgs) -> Result<()> {
    let plan = resolve_plan(args, kind)?;
    let mut artifacts = RunArtifacts::new(&args.out, args.format, plan.seed, &plan)?;
    let summary = match kind {
        ExperimentKind::PhaseScan => {
            let output = runs::run_phase_scan(&plan)?;
            runs::emit_phase_scan(&mut artifacts, &output)?;
            RunSummary::PhaseScan(output)
        }
        ExperimentKind::TripletWitness => {
            let output = runs::run_witness(&plan)?;
            runs::emit_witness(&mut artifacts, &output)?;
            RunSummary::Witness(output)
        }
        ExperimentKind::Stability => {
            let output = runs::run_stability(&plan)?;
            runs::emit_stability(&mut artifacts, &output)?;
            RunSummary::Stability(output)
        }
        ExperimentKind::PairTomography => {
            let output = runs::run_pair_tomography(&plan)?;
            runs::emit_pair_tomography(&mut artifacts, &output)?;
            RunSummary::PairTomo(output)
        }
        ExperimentKind::CoincidenceBench => {
            let output = runs::run_coincidence_bench(&plan)?;
            runs::emit_coincidence_bench(&mut artifacts, &output)?;
            RunSummary::CoincBench(output)
        }
        ExperimentKind::SimulateStreams => {
            let output = runs::run_simulate_streams(&plan, &mut artifacts)?;
            RunSummary::Streams(output)
        }
    };
    for line in runs::describe(&summary) {
        println!("{line}");
    }
    for path in artifacts.written() {
        println!("wrote {}", path.display());
    }
    // A failed sinusoid fit still writes its data, then surfaces the error.
    if let RunSummary::PhaseScan(output) = &summary {
        if let Some(err) = &output.fit_error {
            bail!("sinusoid fit failed: {err}");
        }
    }
    if let RunSummary::Witness(output) = &summary {
        if output.witness.is_none() {
            bail!("witness not computed: {}", output.diagnostics.join("; "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::PhaseScan(a) => (ExperimentKind::PhaseScan, a),
        Command::Witness(a) => (ExperimentKind::TripletWitness, a),
        Command::Stability(a) => (ExperimentKind::Stability, a),
        Command::PairTomo(a) => (ExperimentKind::PairTomography, a),
        Command::CoincBench(a) => (ExperimentKind::CoincidenceBench, a),
        Command::SimulateStreams(a) => (ExperimentKind::SimulateStreams, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
