//! Fixed-step classical Runge–Kutta (RK4) propagation of pure states and
//! density matrices.
//!
//! The static diagonal part E of the Hamiltonian is removed exactly by
//! working with ψ_I = e^{iEt} ψ (or ρ_I = e^{iEt} ρ e^{−iEt}); RK4 then
//! integrates the remaining time-dependent part, sampled at the stage
//! times t, t + h/2 and t + h. States are rotated back before observables
//! are taken. Norm and trace are never renormalized; drift is measured.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::hamiltonian::Hamiltonian;
use super::lindblad::LindbladSpec;
use super::observables::ObservableSet;
use super::sparse::SparseOperator;
use crate::hilbert::{sorted_eigenvalues, QuantumState, StateData, SystemLayout};
use crate::{Error, Result, C64};

/// Norm (or trace) drift that aborts a run.
pub const DRIFT_FAILURE: f64 = 1e-6;
/// Population allowed in the top two Fock levels before the run is flagged.
pub const LEAKAGE_LIMIT: f64 = 1e-6;
/// Most negative density-matrix eigenvalue tolerated.
pub const POSITIVITY_FLOOR: f64 = -1e-7;

/// Step, sampling and storage options for a propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionOptions {
    pub t_final: f64,
    pub dt: f64,
    pub sample_interval: f64,
    pub store_states: bool,
}

impl EvolutionOptions {
    pub fn new(t_final: f64, dt: f64, sample_interval: f64) -> Self {
        Self { t_final, dt, sample_interval, store_states: false }
    }

    pub fn storing_states(mut self) -> Self {
        self.store_states = true;
        self
    }

    /// (steps per sample, number of sample intervals).
    fn grid(&self) -> Result<(usize, usize)> {
        if !(self.dt > 0.0) || !(self.sample_interval > 0.0) || !(self.t_final >= 0.0) {
            return Err(Error::invalid("dt, sample interval and t_final must be positive"));
        }
        let per_sample = whole_ratio(self.sample_interval, self.dt)
            .ok_or_else(|| Error::invalid("dt must divide the sample interval"))?;
        let samples = whole_ratio(self.t_final, self.sample_interval)
            .ok_or_else(|| Error::invalid("t_final must be a multiple of the sample interval"))?;
        if per_sample == 0 {
            return Err(Error::invalid("dt is larger than the sample interval"));
        }
        Ok((per_sample, samples))
    }
}

fn whole_ratio(a: f64, b: f64) -> Option<usize> {
    let r = a / b;
    let n = r.round();
    ((r - n).abs() <= 1e-6 * n.max(1.0)).then_some(n as usize)
}

/// Observable traces on a common time grid.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub traces: BTreeMap<String, Vec<f64>>,
    pub states: Option<Vec<QuantumState>>,
    /// Largest population found in the top two Fock levels.
    pub leakage_max: f64,
    pub truncation_warning: bool,
    /// Largest |‖ψ‖ − 1| (unitary) or |Tr ρ − 1| (Lindblad) seen at samples.
    pub drift_max: f64,
    /// Largest max|ρ − ρ†| seen at samples (zero for pure states).
    pub hermiticity_max: f64,
    /// Smallest density-matrix eigenvalue seen at samples (Lindblad only).
    pub min_eigenvalue: Option<f64>,
}

impl EvolutionResult {
    pub fn trace(&self, name: &str) -> Option<&[f64]> {
        self.traces.get(name).map(|v| v.as_slice())
    }

    pub fn final_state(&self) -> Option<&QuantumState> {
        self.states.as_ref().and_then(|s| s.last())
    }
}

struct Recorder {
    observables: ObservableSet,
    times: Vec<f64>,
    traces: BTreeMap<String, Vec<f64>>,
    states: Option<Vec<QuantumState>>,
    leakage_max: f64,
    drift_max: f64,
    hermiticity_max: f64,
    min_eigenvalue: Option<f64>,
}

impl Recorder {
    fn new(layout: &SystemLayout, store: bool, mixed: bool) -> Result<Self> {
        let observables = ObservableSet::new(layout)?;
        let traces = observables.names().into_iter().map(|n| (n, Vec::new())).collect();
        Ok(Self {
            observables,
            times: Vec::new(),
            traces,
            states: store.then(Vec::new),
            leakage_max: 0.0,
            drift_max: 0.0,
            hermiticity_max: 0.0,
            min_eigenvalue: mixed.then_some(f64::INFINITY),
        })
    }

    fn record(&mut self, t: f64, state: QuantumState) -> Result<()> {
        let drift = (state.norm_or_trace() - 1.0).abs();
        self.drift_max = self.drift_max.max(drift);
        if drift > DRIFT_FAILURE {
            return Err(Error::IntegrationFailure {
                time: t,
                reason: format!("norm/trace drift {drift:.3e} exceeds {DRIFT_FAILURE:.0e}"),
            });
        }
        if let StateData::Mixed(rho) = state.data() {
            let herm = crate::hilbert::max_abs_diff(rho, &rho.adjoint());
            self.hermiticity_max = self.hermiticity_max.max(herm);
            let min_ev = sorted_eigenvalues(rho)[0];
            let slot = self.min_eigenvalue.get_or_insert(f64::INFINITY);
            *slot = slot.min(min_ev);
            if min_ev < POSITIVITY_FLOOR {
                return Err(Error::IntegrationFailure {
                    time: t,
                    reason: format!("density matrix eigenvalue {min_ev:.3e} below {POSITIVITY_FLOOR:.0e}"),
                });
            }
        }
        self.leakage_max = self.leakage_max.max(state.top_fock_population(2));
        for (name, value) in self.observables.evaluate(&state) {
            self.traces.get_mut(&name).expect("observable names are fixed").push(value);
        }
        self.times.push(t);
        if let Some(states) = &mut self.states {
            states.push(state);
        }
        Ok(())
    }

    fn finish(self) -> EvolutionResult {
        let truncation_warning = self.leakage_max >= LEAKAGE_LIMIT;
        if truncation_warning {
            log::warn!("top Fock levels reached population {:.3e}; increase fock_dim", self.leakage_max);
        }
        EvolutionResult {
            times: self.times,
            traces: self.traces,
            states: self.states,
            leakage_max: self.leakage_max,
            truncation_warning,
            drift_max: self.drift_max,
            hermiticity_max: self.hermiticity_max,
            min_eigenvalue: self.min_eigenvalue,
        }
    }
}

/// e^{iE_j t} for every level.
fn frame_phases(energies: &[f64], t: f64) -> Vec<C64> {
    energies.iter().map(|&e| C64::from_polar(1.0, e * t)).collect()
}

/// Interaction-frame generator at time t: the Hamiltonian remainder rotated
/// into the frame of the static diagonal energies.
fn frame_remainder<H: Hamiltonian + ?Sized>(h: &H, energies: &[f64], t: f64) -> SparseOperator {
    h.remainder_at(t).rotated(&frame_phases(energies, t))
}

const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Integrate i dψ/dt = H(t) ψ from `state0`.
pub fn evolve_unitary<H: Hamiltonian + ?Sized>(
    state0: &QuantumState,
    h: &H,
    options: EvolutionOptions,
) -> Result<EvolutionResult> {
    let layout = *state0.layout();
    if h.layout() != layout {
        return Err(Error::invalid("Hamiltonian layout differs from the state layout"));
    }
    let mut psi =
        state0.as_vector().ok_or_else(|| Error::invalid("unitary evolution needs a pure initial state"))?.clone();
    let (per_sample, samples) = options.grid()?;
    let energies = h.frame_energies();
    let dt = options.dt;
    let dim = layout.dim();

    let to_lab = |psi: &DVector<C64>, t: f64| {
        let phases = frame_phases(&energies, t);
        let v = DVector::from_iterator(dim, psi.iter().zip(&phases).map(|(x, p)| x * p.conj()));
        QuantumState::pure_unchecked(layout, v)
    };

    let mut rec = Recorder::new(&layout, options.store_states, false)?;
    rec.record(0.0, to_lab(&psi, 0.0))?;

    let rhs = |gen: &SparseOperator, x: &DVector<C64>, out: &mut DVector<C64>| {
        out.fill(C64::new(0.0, 0.0));
        gen.apply_add(x, MINUS_I, out);
    };

    let mut k1 = DVector::zeros(dim);
    let mut k2 = DVector::zeros(dim);
    let mut k3 = DVector::zeros(dim);
    let mut k4 = DVector::zeros(dim);
    let mut gen_start = frame_remainder(h, &energies, 0.0);
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);

    for sample in 1..=samples {
        for step in 0..per_sample {
            let t = ((sample - 1) * per_sample + step) as f64 * dt;
            let gen_mid = frame_remainder(h, &energies, t + 0.5 * dt);
            let gen_end = frame_remainder(h, &energies, t + dt);
            rhs(&gen_start, &psi, &mut k1);
            rhs(&gen_mid, &(&psi + &k1 * half), &mut k2);
            rhs(&gen_mid, &(&psi + &k2 * half), &mut k3);
            rhs(&gen_end, &(&psi + &k3 * full), &mut k4);
            psi += (&k1 + &k2 * C64::new(2.0, 0.0) + &k3 * C64::new(2.0, 0.0) + &k4) * sixth;
            gen_start = gen_end;
        }
        let t = (sample * per_sample) as f64 * dt;
        rec.record(t, to_lab(&psi, t))?;
    }
    Ok(rec.finish())
}

/// Integrate dρ/dt = −i[H, ρ] + Σ γ (L ρ L† − ½{L†L, ρ}) from `rho0`
/// (pure inputs are promoted to density matrices).
pub fn evolve_lindblad<H: Hamiltonian + ?Sized>(
    rho0: &QuantumState,
    h: &H,
    lindblad: &LindbladSpec,
    options: EvolutionOptions,
) -> Result<EvolutionResult> {
    let layout = *rho0.layout();
    if h.layout() != layout {
        return Err(Error::invalid("Hamiltonian layout differs from the state layout"));
    }
    let mut rho = rho0.density_matrix();
    let (per_sample, samples) = options.grid()?;
    let energies = h.frame_energies();
    let dt = options.dt;
    let dim = layout.dim();

    // Jump operators and the anti-Hermitian part −(i/2) Σ γ L†L.
    struct Channel {
        rate: f64,
        op: SparseOperator,
    }
    let jumps = lindblad.jump_operators(&layout)?;
    let channels: Vec<Channel> =
        jumps.iter().map(|j| Channel { rate: j.rate, op: SparseOperator::from_operator(&j.operator) }).collect();
    let mut decay = SparseOperator::empty(dim);
    for j in &jumps {
        let ldl = j.operator.adjoint().entries() * j.operator.entries();
        decay.push_scaled(&SparseOperator::from_dense(&ldl), C64::new(0.0, -0.5 * j.rate));
    }

    let to_lab = |rho: &DMatrix<C64>, t: f64| {
        let p = frame_phases(&energies, t);
        let m = DMatrix::from_fn(dim, dim, |r, c| p[r].conj() * rho[(r, c)] * p[c]);
        QuantumState::density_unchecked(layout, m)
    };

    // Generator pieces in the frame at time t.
    struct Stage {
        effective: SparseOperator,
        jumps: Vec<(f64, SparseOperator)>,
    }
    let stage = |t: f64| {
        let phases = frame_phases(&energies, t);
        let mut effective = h.remainder_at(t);
        effective.push_scaled(&decay, C64::new(1.0, 0.0));
        Stage {
            effective: effective.rotated(&phases),
            jumps: channels.iter().map(|c| (c.rate, c.op.rotated(&phases))).collect(),
        }
    };

    // K = −i H_eff ρ + ½ Σ γ L ρ L†;  dρ/dt = K + K†.
    let rhs = |s: &Stage, rho: &DMatrix<C64>, out: &mut DMatrix<C64>| {
        let mut k = DMatrix::zeros(dim, dim);
        s.effective.left_mul_add(rho, MINUS_I, &mut k);
        let mut tmp = DMatrix::zeros(dim, dim);
        for (rate, op) in &s.jumps {
            tmp.fill(C64::new(0.0, 0.0));
            op.left_mul_add(rho, C64::new(1.0, 0.0), &mut tmp);
            op.right_mul_adjoint_add(&tmp, C64::new(0.5 * rate, 0.0), &mut k);
        }
        *out = &k + k.adjoint();
    };

    let mut rec = Recorder::new(&layout, options.store_states, true)?;
    rec.record(0.0, to_lab(&rho, 0.0))?;

    let mut k1 = DMatrix::zeros(dim, dim);
    let mut k2 = DMatrix::zeros(dim, dim);
    let mut k3 = DMatrix::zeros(dim, dim);
    let mut k4 = DMatrix::zeros(dim, dim);
    let mut st_start = stage(0.0);
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);

    for sample in 1..=samples {
        for step in 0..per_sample {
            let t = ((sample - 1) * per_sample + step) as f64 * dt;
            let st_mid = stage(t + 0.5 * dt);
            let st_end = stage(t + dt);
            rhs(&st_start, &rho, &mut k1);
            rhs(&st_mid, &(&rho + &k1 * half), &mut k2);
            rhs(&st_mid, &(&rho + &k2 * half), &mut k3);
            rhs(&st_end, &(&rho + &k3 * full), &mut k4);
            rho += (&k1 + &k2 * C64::new(2.0, 0.0) + &k3 * C64::new(2.0, 0.0) + &k4) * sixth;
            st_start = st_end;
        }
        let t = (sample * per_sample) as f64 * dt;
        rec.record(t, to_lab(&rho, t))?;
    }
    Ok(rec.finish())
}
