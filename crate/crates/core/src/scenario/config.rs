//! TOML scenario configs.
//!
//! Every file carries a top-level `kind` ("dynamics", "tomography" or
//! "feasibility"). Physical quantities use unit-suffixed keys and are given
//! as f = ω/2π where a frequency is meant; they are converted to SI angular
//! units on validation. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::dynamics::{LindbladSpec, ModelParams};
use crate::hilbert::DEFAULT_FOCK_DIM;
use crate::tomography::PhononDistribution;
use crate::trajectory::{cavity_length_for_mode, TrajectorySpec, SPEED_OF_LIGHT};
use crate::{Error, Result, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Dynamics,
    Tomography,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Dynamics(ScenarioConfig),
    Tomography(TomographyConfig),
    Feasibility(FeasibilityConfig),
}

impl Scenario {
    /// Parse and validate. Parse errors carry the TOML line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let de = |e: toml::de::Error| Error::Config(e.to_string());
        let table: toml::Table = toml::from_str(text).map_err(de)?;
        let kind = match table.get("kind") {
            Some(toml::Value::String(k)) => k.clone(),
            Some(_) => return Err(Error::Config("`kind` must be a string".into())),
            None => return Err(Error::Config("missing top-level `kind`".into())),
        };
        let scenario = match kind.as_str() {
            "dynamics" => Scenario::Dynamics(toml::from_str(text).map_err(de)?),
            "tomography" => Scenario::Tomography(toml::from_str(text).map_err(de)?),
            "feasibility" => Scenario::Feasibility(toml::from_str(text).map_err(de)?),
            other => {
                return Err(Error::Config(format!(
                    "unknown kind '{other}' (expected dynamics, tomography or feasibility)"
                )))
            }
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> Result<String> {
        let out = match self {
            Scenario::Dynamics(c) => toml::to_string(c),
            Scenario::Tomography(c) => toml::to_string(c),
            Scenario::Feasibility(c) => toml::to_string(c),
        };
        out.map_err(|e| Error::Config(e.to_string()))
    }

    pub fn name(&self) -> &str {
        match self {
            Scenario::Dynamics(c) => &c.name,
            Scenario::Tomography(c) => &c.name,
            Scenario::Feasibility(c) => &c.name,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (kind, expected) = match self {
            Scenario::Dynamics(c) => (c.kind, ScenarioKind::Dynamics),
            Scenario::Tomography(c) => (c.kind, ScenarioKind::Tomography),
            Scenario::Feasibility(c) => (c.kind, ScenarioKind::Feasibility),
        };
        if kind != expected {
            return Err(Error::Config(format!("kind {kind:?} does not match the config contents")));
        }
        match self {
            Scenario::Dynamics(c) => c.validate(),
            Scenario::Tomography(c) => c.validate(),
            Scenario::Feasibility(c) => c.inputs().map(|_| ()),
        }
    }
}

fn config_err(field: &str, e: Error) -> Error {
    let msg = match e {
        Error::InvalidArgument(m) | Error::Config(m) => m,
        other => other.to_string(),
    };
    Error::Config(format!("{field}: {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialControl {
    #[default]
    Plus,
    Minus,
    Zero,
    One,
    /// ½(|0⟩⟨0| + |1⟩⟨1|)
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub mode_freq_over_2pi_khz: f64,
    pub detector_freq_over_2pi_khz: f64,
    pub coupling_over_2pi_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_final_us: f64,
    pub sample_interval_us: f64,
    /// Integrator step; defaults to the largest stable step dividing the
    /// sample interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_ns: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TrajectorySection {
    Static {
        center_u: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cavity_length_m: Option<f64>,
    },
    Inertial {
        velocity_over_c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cavity_length_m: Option<f64>,
    },
    Oscillatory {
        center_u: f64,
        amplitude_u: f64,
        drive_freq_over_2pi_khz: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cavity_length_m: Option<f64>,
    },
}

impl TrajectorySection {
    /// Build the trajectory; the cavity defaults to the one whose standing
    /// wave is resonant with the mode (ω_p = k c).
    pub fn to_spec(&self, mode_frequency: f64) -> Result<TrajectorySpec> {
        let default_length = cavity_length_for_mode(mode_frequency);
        match *self {
            TrajectorySection::Static { center_u, cavity_length_m } => {
                let l = cavity_length_m.unwrap_or(default_length);
                TrajectorySpec::stationary(center_u * l / (2.0 * TWO_PI), l)
            }
            TrajectorySection::Inertial { velocity_over_c, cavity_length_m } => {
                TrajectorySpec::inertial(velocity_over_c, cavity_length_m.unwrap_or(default_length))
            }
            TrajectorySection::Oscillatory { center_u, amplitude_u, drive_freq_over_2pi_khz, cavity_length_m } => {
                TrajectorySpec::oscillatory_phases(
                    center_u,
                    amplitude_u,
                    drive_freq_over_2pi_khz * 1e3 * TWO_PI,
                    cavity_length_m.unwrap_or(default_length),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_ms: Option<f64>,
    #[serde(default)]
    pub heating_rate_per_s: f64,
    #[serde(default)]
    pub initial_thermal: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing_weights: Option<Vec<f64>>,
}

impl LindbladSection {
    pub fn to_spec(&self) -> Result<LindbladSpec> {
        let mut spec = LindbladSpec {
            t2: self.t2_ms.map(|t| t * 1e-3),
            heating_rate: self.heating_rate_per_s,
            initial_thermal: self.initial_thermal,
            ..LindbladSpec::default()
        };
        if let Some(w) = &self.dephasing_weights {
            spec.dephasing_weights = w.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn default_fock_dim() -> usize {
    DEFAULT_FOCK_DIM
}

/// A time-evolution scenario with one or two trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub name: String,
    #[serde(default = "default_fock_dim")]
    pub fock_dim: usize,
    /// Control-qubit state for two-trajectory runs; ignored otherwise.
    #[serde(default)]
    pub initial_control: InitialControl,
    /// Observable columns; empty selects every observable of the layout.
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSection,
    pub time: TimeSection,
    pub trajectories: Vec<TrajectorySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<LindbladSection>,
}

impl ScenarioConfig {
    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        ModelParams::new(
            m.mode_freq_over_2pi_khz * 1e3 * TWO_PI,
            m.detector_freq_over_2pi_khz * 1e3 * TWO_PI,
            m.coupling_over_2pi_khz * 1e3 * TWO_PI,
        )
        .map_err(|e| config_err("model", e))
    }

    pub fn trajectory_specs(&self) -> Result<Vec<TrajectorySpec>> {
        let wp = self.model_params()?.mode_frequency();
        self.trajectories
            .iter()
            .enumerate()
            .map(|(i, t)| t.to_spec(wp).map_err(|e| config_err(&format!("trajectories[{i}]"), e)))
            .collect()
    }

    pub fn lindblad_spec(&self) -> Result<Option<LindbladSpec>> {
        self.lindblad.as_ref().map(|l| l.to_spec().map_err(|e| config_err("lindblad", e))).transpose()
    }

    pub fn t_final(&self) -> f64 {
        self.time.t_final_us * 1e-6
    }

    pub fn sample_interval(&self) -> f64 {
        self.time.sample_interval_us * 1e-6
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("name must not be empty".into()));
        }
        if !(2..=64).contains(&self.fock_dim) {
            return Err(Error::Config(format!("fock_dim must lie in 2..=64, got {}", self.fock_dim)));
        }
        if !matches!(self.trajectories.len(), 1 | 2) {
            return Err(Error::Config("trajectories: give one or two entries".into()));
        }
        let t = &self.time;
        if !(t.t_final_us >= 0.0) || !(t.sample_interval_us > 0.0) || t.dt_ns.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::Config("time: t_final_us >= 0, sample_interval_us > 0 and dt_ns > 0 required".into()));
        }
        self.model_params()?;
        self.trajectory_specs()?;
        if let Some(spec) = self.lindblad_spec()? {
            if self.trajectories.len() == 2 && spec.t2.is_some() && spec.dephasing_weights.len() != 2 {
                return Err(Error::Config("lindblad: two dephasing_weights required for two trajectories".into()));
            }
        }
        if self.trajectories.len() == 1 && self.initial_control != InitialControl::default() {
            return Err(Error::Config("initial_control applies only to two-trajectory scenarios".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSection {
    pub p_g: Vec<f64>,
    pub p_e: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blue_coherence: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub red_coherence: Option<Vec<f64>>,
}

impl DistributionSection {
    pub fn to_distribution(&self) -> Result<PhononDistribution> {
        let n = self.p_g.len().saturating_sub(1);
        PhononDistribution::with_coherences(
            self.p_g.clone(),
            self.p_e.clone(),
            self.blue_coherence.clone().unwrap_or_else(|| vec![0.0; n]),
            self.red_coherence.clone().unwrap_or_else(|| vec![0.0; n]),
        )
    }
}

/// Synthesize red and blue scans from a distribution and fit them back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    pub kind: ScenarioKind,
    pub name: String,
    pub eta: f64,
    pub omega0_over_2pi_khz: f64,
    pub scan_duration_us: f64,
    pub scan_points: usize,
    /// Projections per point; 0 gives noiseless scans.
    #[serde(default)]
    pub shots: u32,
    #[serde(default)]
    pub seed: u64,
    pub n_max: usize,
    pub distribution: DistributionSection,
}

impl TomographyConfig {
    pub fn omega0(&self) -> f64 {
        self.omega0_over_2pi_khz * 1e3 * TWO_PI
    }

    pub fn times(&self) -> Vec<f64> {
        crate::tomography::scan_times(self.scan_duration_us * 1e-6, self.scan_points)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::Config(format!("eta must lie in (0, 0.5), got {}", self.eta)));
        }
        if !(self.omega0_over_2pi_khz > 0.0) || !(self.scan_duration_us > 0.0) || self.scan_points < 2 {
            return Err(Error::Config("omega0, scan_duration_us > 0 and scan_points >= 2 required".into()));
        }
        if self.n_max == 0 || self.n_max > crate::tomography::MAX_FIT_LEVELS {
            return Err(Error::Config(format!("n_max must lie in 1..={}", crate::tomography::MAX_FIT_LEVELS)));
        }
        self.distribution.to_distribution().map_err(|e| config_err("distribution", e))?;
        Ok(())
    }
}

/// Inputs of the direct-observation estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityConfig {
    pub kind: ScenarioKind,
    pub name: String,
    pub drive_freq_over_2pi_mhz: f64,
    pub detector_freq_over_2pi_mhz: f64,
    /// Defaults to drive − detector (the sum-frequency resonance).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_freq_over_2pi_mhz: Option<f64>,
    pub amplitude_um: f64,
    pub coupling_over_2pi_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_of_light_m_per_s: Option<f64>,
}

impl FeasibilityConfig {
    pub fn inputs(&self) -> Result<super::FeasibilityInputs> {
        let mhz = |f: f64| f * 1e6 * TWO_PI;
        super::FeasibilityInputs::new(
            mhz(self.drive_freq_over_2pi_mhz),
            mhz(self.detector_freq_over_2pi_mhz),
            self.mode_freq_over_2pi_mhz.map(mhz),
            self.amplitude_um * 1e-6,
            self.speed_of_light_m_per_s.unwrap_or(SPEED_OF_LIGHT),
            self.coupling_over_2pi_hz * TWO_PI,
            self.lifetime_s,
        )
        .map_err(|e| config_err(&self.name, e))
    }
}
