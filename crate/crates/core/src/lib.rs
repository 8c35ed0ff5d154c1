//! Desk-scale simulator and estimation toolkit for a cascaded-downconversion
//! source of three-photon polarization entanglement.
//!
//! The crate is organized around the life cycle of a photon-counting
//! experiment:
//!
//! * [`qcore`] — dense complex linear algebra for 1–3 polarization qubits:
//!   states, observables, tensor products, and entanglement metrics.
//! * [`sources`] — parametrized ideal and noisy states for the two pair
//!   sources and the cascaded triplet source, plus rate bookkeeping.
//! * [`measurement`] — Pauli measurement settings, projectors, Born-rule
//!   outcome distributions, and parity estimation from counts.
//! * [`simulator`] — Monte Carlo detection data at two fidelities: direct
//!   per-setting count sampling, and event-level timestamp streams with a
//!   k-fold coincidence finder.
//! * [`estimation`] — linear-inversion and maximum-likelihood tomography,
//!   the GHZ witness with its fidelity lower bound, sinusoidal phase-scan
//!   fits, and Poisson bootstrap error bars.
//!
//! All stochastic components are seeded explicitly and produce identical
//! results for identical seeds, independent of thread scheduling. The
//! `parallel` feature (enabled by default) runs bootstrap replicas and
//! per-channel stream generation on the rayon pool; disabling it yields a
//! fully sequential build with the same outputs.

pub mod estimation;
pub mod exec;
pub mod measurement;
pub mod qcore;
pub mod rng;
pub mod simulator;
pub mod sources;
