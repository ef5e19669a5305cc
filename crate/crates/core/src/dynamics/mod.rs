//! Hamiltonian assembly, propagation and observables.

mod hamiltonian;
mod integrate;
mod lindblad;
mod observables;
pub mod sparse;

pub use hamiltonian::{
    hamiltonian_single, hamiltonian_superposed, interaction_operator, Coefficient, FnHamiltonian, Hamiltonian,
    ModelParams, ModulatedHamiltonian,
};
pub use integrate::{
    evolve_lindblad, evolve_unitary, EvolutionOptions, EvolutionResult, DRIFT_FAILURE, LEAKAGE_LIMIT, POSITIVITY_FLOOR,
};
pub use lindblad::{JumpOperator, LindbladSpec};
pub use observables::{coherence_decompose, local_number, local_sigma_z, observables, projected, ObservableSet};

use crate::trajectory::TrajectorySpec;
use crate::{Error, Result, TWO_PI};

/// Steps per period of the fastest frequency in the problem.
pub const STEPS_PER_FASTEST_PERIOD: f64 = 200.0;

/// Default sampling interval for observable traces (2 µs).
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 2e-6;

/// Largest of ω_p, ω_q, ω_p + ω_q and the trajectories' modulation
/// frequencies.
pub fn fastest_frequency(params: &ModelParams, trajectories: &[TrajectorySpec]) -> f64 {
    trajectories
        .iter()
        .map(|t| t.modulation_frequency())
        .chain([
            params.mode_frequency(),
            params.detector_frequency(),
            params.mode_frequency() + params.detector_frequency(),
        ])
        .fold(0.0, f64::max)
}

/// 2π / (200 ω_max).
pub fn max_step(params: &ModelParams, trajectories: &[TrajectorySpec]) -> f64 {
    TWO_PI / (STEPS_PER_FASTEST_PERIOD * fastest_frequency(params, trajectories))
}

/// Largest step not above [`max_step`] that divides `sample_interval`.
pub fn default_step(params: &ModelParams, trajectories: &[TrajectorySpec], sample_interval: f64) -> f64 {
    let limit = max_step(params, trajectories);
    // Tolerate round-off when the ratio is already an integer.
    let n = (sample_interval / limit * (1.0 - 1e-12)).ceil().max(1.0);
    sample_interval / n
}

/// Reject steps coarser than [`max_step`].
pub fn check_step(params: &ModelParams, trajectories: &[TrajectorySpec], dt: f64) -> Result<()> {
    let limit = max_step(params, trajectories);
    if dt > limit * (1.0 + 1e-9) {
        return Err(Error::invalid(format!("dt = {dt:.3e} s exceeds 2π/(200 ω_max) = {limit:.3e} s")));
    }
    Ok(())
}
