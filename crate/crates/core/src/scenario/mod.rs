//! Declarative scenarios: config parsing, runs, CSV output, plots and the
//! direct-observation feasibility estimate.

mod config;
mod golden;
mod plot;

pub use config::{
    DistributionSection, FeasibilityConfig, InitialControl, LindbladSection, ModelSection, Scenario, ScenarioConfig,
    ScenarioKind, TimeSection, TomographyConfig, TrajectorySection,
};
pub use golden::{golden, golden_names, GOLDEN};
pub use plot::{emit_plot, render_svg};

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    check_step, default_step, evolve_lindblad, evolve_unitary, EvolutionOptions, EvolutionResult, LindbladSpec,
    ModulatedHamiltonian, ObservableSet,
};
use crate::exec::Execution;
use crate::floquet::bessel_j;
use crate::hilbert::{pauli_ground_projector, thermal_mode, ControlBasis, QuantumState, SystemLayout};
use crate::tomography::{
    fit_distribution, synthesize_scan, write_scan, Branch, FitResult, PhononDistribution, SidebandScan,
};
use crate::{Error, Result, C64, TWO_PI};

/// Amplitude phase above which the small-oscillation estimate is flagged.
pub const SMALL_AMPLITUDE_LIMIT: f64 = 0.1;

/// Inputs of the direct-observation estimate, in SI angular units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityInputs {
    pub drive_frequency: f64,
    pub detector_frequency: f64,
    pub mode_frequency: f64,
    pub amplitude: f64,
    pub speed_of_light: f64,
    pub coupling: f64,
    pub lifetime: Option<f64>,
}

impl FeasibilityInputs {
    /// `mode_frequency` defaults to ω − ω_q.
    pub fn new(
        drive_frequency: f64,
        detector_frequency: f64,
        mode_frequency: Option<f64>,
        amplitude: f64,
        speed_of_light: f64,
        coupling: f64,
        lifetime: Option<f64>,
    ) -> Result<Self> {
        let mode_frequency = mode_frequency.unwrap_or(drive_frequency - detector_frequency);
        let positive = [
            ("drive frequency", drive_frequency),
            ("detector frequency", detector_frequency),
            ("mode frequency", mode_frequency),
            ("speed of light", speed_of_light),
            ("coupling", coupling),
        ];
        for (what, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{what} must be > 0, got {v}")));
            }
        }
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::invalid(format!("amplitude must be >= 0, got {amplitude}")));
        }
        if lifetime.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::invalid("lifetime must be > 0"));
        }
        Ok(Self { drive_frequency, detector_frequency, mode_frequency, amplitude, speed_of_light, coupling, lifetime })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityEstimate {
    /// u = k A with k = ω_p / c.
    pub u: f64,
    /// g0 J_1(u), rad/s.
    pub g_eff: f64,
    /// 2 g_eff / 2π.
    pub rate_hz: f64,
    pub excitations_per_lifetime: Option<f64>,
}

/// Joint spin-motion excitation rate for a small micromotion amplitude at
/// the sum-frequency resonance (ū = 0, cos ū = 1).
pub fn feasibility_estimate(inputs: &FeasibilityInputs) -> Result<FeasibilityEstimate> {
    let k = inputs.mode_frequency / inputs.speed_of_light;
    let u = k * inputs.amplitude;
    if u > SMALL_AMPLITUDE_LIMIT {
        log::warn!("u = kA = {u:.3} exceeds {SMALL_AMPLITUDE_LIMIT}; small-oscillation estimate is rough");
    }
    let g_eff = inputs.coupling * bessel_j(1, u)?;
    let rate_hz = 2.0 * g_eff / TWO_PI;
    Ok(FeasibilityEstimate { u, g_eff, rate_hz, excitations_per_lifetime: inputs.lifetime.map(|t| rate_hz * t) })
}

/// Traces of one dynamics run and the columns requested for output.
#[derive(Debug, Clone)]
pub struct DynamicsOutcome {
    pub name: String,
    pub columns: Vec<String>,
    pub result: EvolutionResult,
}

impl DynamicsOutcome {
    pub fn truncation_warning(&self) -> bool {
        self.result.truncation_warning
    }

    /// `time_us` followed by the requested columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["time_us".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (i, t) in self.result.times.iter().enumerate() {
            let mut row = vec![format!("{:.6}", t * 1e6)];
            for c in &self.columns {
                row.push(format!("{:.12e}", self.result.traces[c][i]));
            }
            w.write_record(&row)?;
        }
        into_string(w)
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn initial_state(cfg: &ScenarioConfig, layout: SystemLayout, lindblad: Option<&LindbladSpec>) -> Result<QuantumState> {
    let thermal = lindblad.map_or(0.0, |l| l.initial_thermal);
    let fock = layout.fock_dim();
    if thermal == 0.0 && cfg.initial_control != InitialControl::Mixture {
        let control = match cfg.initial_control {
            InitialControl::Plus => ControlBasis::Plus,
            InitialControl::Minus => ControlBasis::Minus,
            InitialControl::Zero => ControlBasis::Zero,
            InitialControl::One => ControlBasis::One,
            InitialControl::Mixture => unreachable!(),
        };
        return QuantumState::ground(layout, control);
    }
    let control = if layout.is_superposed() {
        let pure = |b: ControlBasis| {
            let a = nalgebra::DVector::from_row_slice(&b.amplitudes());
            &a * a.adjoint()
        };
        match cfg.initial_control {
            InitialControl::Plus => pure(ControlBasis::Plus),
            InitialControl::Minus => pure(ControlBasis::Minus),
            InitialControl::Zero => pure(ControlBasis::Zero),
            InitialControl::One => pure(ControlBasis::One),
            InitialControl::Mixture => DMatrix::from_diagonal_element(2, 2, C64::new(0.5, 0.0)),
        }
    } else {
        DMatrix::from_element(1, 1, C64::new(1.0, 0.0))
    };
    QuantumState::product_density(layout, &control, &pauli_ground_projector(), &thermal_mode(thermal, fock)?)
}

/// Propagate a dynamics scenario. Runs with a `[lindblad]` table or a mixed
/// initial control state use the master equation; the rest are unitary.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<DynamicsOutcome> {
    cfg.validate()?;
    let params = cfg.model_params()?;
    let trajectories = cfg.trajectory_specs()?;
    let layout = SystemLayout::new(trajectories.len(), cfg.fock_dim)?;

    let available = ObservableSet::new(&layout)?.names();
    let columns = if cfg.outputs.is_empty() { available.clone() } else { cfg.outputs.clone() };
    if let Some(bad) = columns.iter().find(|c| !available.contains(c)) {
        return Err(Error::Config(format!(
            "outputs: unknown observable '{bad}' (available: {})",
            available.join(", ")
        )));
    }

    let sample = cfg.sample_interval();
    let dt = match cfg.time.dt_ns {
        Some(ns) => {
            let dt = ns * 1e-9;
            check_step(&params, &trajectories, dt)?;
            dt
        }
        None => default_step(&params, &trajectories, sample),
    };
    let options = EvolutionOptions::new(cfg.t_final(), dt, sample);

    let h = if layout.is_superposed() {
        ModulatedHamiltonian::superposed(layout, &params, [trajectories[0], trajectories[1]])?
    } else {
        ModulatedHamiltonian::single(layout, &params, trajectories[0])?
    };
    let lindblad = cfg.lindblad_spec()?;
    let state0 = initial_state(cfg, layout, lindblad.as_ref())?;
    let result = match (&lindblad, state0.is_pure()) {
        (None, true) => evolve_unitary(&state0, &h, options)?,
        (spec, _) => evolve_lindblad(&state0, &h, &spec.clone().unwrap_or_default(), options)?,
    };
    if result.truncation_warning {
        log::warn!("{}: population reached the top Fock levels (max {:.2e})", cfg.name, result.leakage_max);
    }
    Ok(DynamicsOutcome { name: cfg.name.clone(), columns, result })
}

/// Synthesized scans and the fit recovered from them.
#[derive(Debug, Clone)]
pub struct TomographyOutcome {
    pub name: String,
    pub truth: PhononDistribution,
    pub red: SidebandScan,
    pub blue: SidebandScan,
    pub fit: FitResult,
}

impl TomographyOutcome {
    /// Per-level table: n, true and fitted populations, 1σ of the fit.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "p_g_true", "p_e_true", "p_g_fit", "p_e_fit", "p_g_sigma", "p_e_sigma"])?;
        let fit = &self.fit.distribution;
        let l = fit.n_max() + 1;
        let level = |v: &[f64], n: usize| v.get(n).copied().unwrap_or(0.0);
        for n in 0..l.max(self.truth.n_max() + 1) {
            w.write_record([
                n.to_string(),
                format!("{:.10}", level(self.truth.p_g(), n)),
                format!("{:.10}", level(self.truth.p_e(), n)),
                format!("{:.10}", level(fit.p_g(), n)),
                format!("{:.10}", level(fit.p_e(), n)),
                format!("{:.10}", self.fit.uncertainties.get(n).copied().filter(|_| n < l).unwrap_or(0.0)),
                format!("{:.10}", self.fit.uncertainties.get(l + n).copied().filter(|_| n < l).unwrap_or(0.0)),
            ])?;
        }
        into_string(w)
    }
}

pub fn run_tomography(cfg: &TomographyConfig) -> Result<TomographyOutcome> {
    cfg.validate()?;
    let truth = cfg.distribution.to_distribution()?;
    let times = cfg.times();
    let mut red = synthesize_scan(&truth, Branch::Red, cfg.eta, cfg.omega0(), &times)?;
    let mut blue = synthesize_scan(&truth, Branch::Blue, cfg.eta, cfg.omega0(), &times)?;
    if cfg.shots > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        red = red.with_shot_noise(cfg.shots, rng.next_u64())?;
        blue = blue.with_shot_noise(cfg.shots, rng.next_u64())?;
    }
    let fit = fit_distribution(&red, &blue, cfg.n_max)?;
    Ok(TomographyOutcome { name: cfg.name.clone(), truth, red, blue, fit })
}

#[derive(Debug, Clone)]
pub enum ScenarioOutput {
    Dynamics(DynamicsOutcome),
    Tomography(Box<TomographyOutcome>),
    Feasibility { name: String, estimate: FeasibilityEstimate },
}

impl ScenarioOutput {
    pub fn truncation_warning(&self) -> bool {
        matches!(self, ScenarioOutput::Dynamics(d) if d.truncation_warning())
    }

    /// Write the output files into `dir`; returns their paths.
    ///
    /// * dynamics: `<name>.csv`
    /// * tomography: `<name>_red.scan`, `<name>_blue.scan`, `<name>_fit.csv`
    /// * feasibility: `<name>.csv`
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        match self {
            ScenarioOutput::Dynamics(d) => {
                let path = dir.join(format!("{}.csv", d.name));
                std::fs::write(&path, d.to_csv()?)?;
                Ok(vec![path])
            }
            ScenarioOutput::Tomography(t) => {
                let red = dir.join(format!("{}_red.scan", t.name));
                let blue = dir.join(format!("{}_blue.scan", t.name));
                let fit = dir.join(format!("{}_fit.csv", t.name));
                write_scan(&t.red, std::fs::File::create(&red)?)?;
                write_scan(&t.blue, std::fs::File::create(&blue)?)?;
                std::fs::write(&fit, t.to_csv()?)?;
                Ok(vec![red, blue, fit])
            }
            ScenarioOutput::Feasibility { name, estimate } => {
                let path = dir.join(format!("{name}.csv"));
                std::fs::write(&path, feasibility_csv(estimate)?)?;
                Ok(vec![path])
            }
        }
    }
}

pub fn feasibility_csv(e: &FeasibilityEstimate) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["u", "g_eff_rad_per_s", "rate_hz", "excitations_per_lifetime"])?;
    w.write_record([
        format!("{:.10e}", e.u),
        format!("{:.10e}", e.g_eff),
        format!("{:.10e}", e.rate_hz),
        e.excitations_per_lifetime.map_or(String::new(), |x| format!("{x:.10e}")),
    ])?;
    into_string(w)
}

/// Per-level fit table: n, fitted populations and their 1σ.
pub fn fit_csv(fit: &FitResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "p_g", "p_e", "p_g_sigma", "p_e_sigma"])?;
    let d = &fit.distribution;
    let l = d.n_max() + 1;
    for n in 0..l {
        w.write_record([
            n.to_string(),
            format!("{:.10}", d.p_g()[n]),
            format!("{:.10}", d.p_e()[n]),
            format!("{:.10}", fit.uncertainties[n]),
            format!("{:.10}", fit.uncertainties[l + n]),
        ])?;
    }
    into_string(w)
}

pub fn run(scenario: &Scenario) -> Result<ScenarioOutput> {
    match scenario {
        Scenario::Dynamics(c) => run_scenario(c).map(ScenarioOutput::Dynamics),
        Scenario::Tomography(c) => run_tomography(c).map(|t| ScenarioOutput::Tomography(Box::new(t))),
        Scenario::Feasibility(c) => {
            Ok(ScenarioOutput::Feasibility { name: c.name.clone(), estimate: feasibility_estimate(&c.inputs()?)? })
        }
    }
}

/// Run independent scenarios, in parallel when `execution` allows.
pub fn run_batch(scenarios: &[Scenario], execution: Execution) -> Vec<Result<ScenarioOutput>> {
    execution.map_slice(scenarios, run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::displacement_condition;
    use crate::trajectory::SPEED_OF_LIGHT;
    use proptest::prelude::*;

    fn electron_inputs(amplitude: f64, coupling_hz: f64) -> FeasibilityInputs {
        FeasibilityInputs::new(
            TWO_PI * 5e9,
            TWO_PI * 50e6,
            None,
            amplitude,
            SPEED_OF_LIGHT,
            TWO_PI * coupling_hz,
            Some(3600.0),
        )
        .unwrap()
    }

    #[test]
    fn feasibility_examples() {
        let inputs = electron_inputs(5e-6, 0.39);
        assert!((inputs.mode_frequency - TWO_PI * 4.95e9).abs() < 1e-3);
        let e = feasibility_estimate(&inputs).unwrap();
        // k = ω_p / c arithmetic
        let u = TWO_PI * 4.95e9 / SPEED_OF_LIGHT * 5e-6;
        assert!((e.u - u).abs() < 1e-15);
        assert!((e.u - 5.187216e-4).abs() < 1e-9);
        assert!((e.rate_hz - 2.02301e-4).abs() < 1e-9);
        assert!((e.rate_hz - 2e-4).abs() < 0.05 * 2e-4);
        assert!((e.excitations_per_lifetime.unwrap() - e.rate_hz * 3600.0).abs() < 1e-12);

        assert_eq!(feasibility_estimate(&electron_inputs(0.0, 0.39)).unwrap().rate_hz, 0.0);
        assert!(FeasibilityInputs::new(1.0, 2.0, None, 1e-6, SPEED_OF_LIGHT, 1.0, None).is_err());
    }

    proptest! {
        #[test]
        fn rate_monotone_below_first_maximum(f1 in 0.001f64..0.999, f2 in 0.001f64..0.999) {
            prop_assume!((f1 - f2).abs() > 1e-6);
            let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
            // amplitude giving u = fraction × u*
            let k = TWO_PI * 4.95e9 / SPEED_OF_LIGHT;
            let u_star = displacement_condition();
            let a = |f: f64| f * u_star / k;
            let r_lo = feasibility_estimate(&electron_inputs(a(lo), 0.39)).unwrap().rate_hz;
            let r_hi = feasibility_estimate(&electron_inputs(a(hi), 0.39)).unwrap().rate_hz;
            prop_assert!(r_hi > r_lo);
        }
    }
}
