//! Numerical simulator for a two-level detector that moves through a cavity
//! standing wave and couples to a single cavity mode.
//!
//! The crate is split along the physics pipeline:
//!
//! * [`hilbert`]: dense operators and states on control ⊗ detector ⊗ mode.
//! * [`trajectory`]: detector worldlines and the coupling modulation they induce.
//! * [`dynamics`]: time-dependent Hamiltonians, unitary and Lindblad evolution,
//!   and the projected observables used for superposed trajectories.
//! * [`floquet`]: Bessel functions, Jacobi-Anger harmonics and the resonant
//!   effective (JC / anti-JC) couplings they produce.
//! * [`tomography`]: red/blue sideband scan synthesis and constrained fitting of
//!   the phonon distribution.
//! * [`scenario`]: declarative configs, CSV traces, SVG plots and the
//!   direct-observation feasibility estimate.
//!
//! Units: times in seconds, frequencies as angular frequencies in rad/s, with
//! ħ = 1 so energies are angular frequencies.

// `!(x > 0.0)` is used on purpose so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod floquet;
pub mod hilbert;
pub mod scenario;
pub mod tomography;
pub mod trajectory;

pub use error::{Error, Result};
pub use exec::Execution;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// 2π, spelled out because most inputs are quoted as `f/2π`.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
