//! Sideband tomography of the mode: red/blue sideband scan synthesis,
//! constrained fitting of the phonon distribution, and the control-qubit
//! readout operations (shelving, ± basis transform).

mod fit;
mod scan;
mod scanfile;

pub use fit::{fit_distribution, monte_carlo_fits, FitResult, MonteCarloConfig, MAX_CONDITION_NUMBER, MAX_FIT_LEVELS};
pub use scan::{design_matrix, laguerre, sideband_rabi_frequency, synthesize_scan, Branch, SidebandScan};
pub use scanfile::{read_scan, write_scan, SCAN_HEADER_TAG};

use crate::hilbert::{Detector, OperatorMatrix, QuantumState, Subsystem};
use crate::{Error, Result};

/// Tolerance on Σ (P_g + P_e) = 1.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Lamb-Dicke parameter of the reference scans.
pub const DEFAULT_ETA: f64 = 0.065;
/// Carrier Rabi frequency of the synthetic scans (2π × 150 kHz).
pub const DEFAULT_OMEGA0: f64 = crate::TWO_PI * 150e3;
/// Longest sideband pulse of a scan.
pub const DEFAULT_SCAN_DURATION: f64 = 250e-6;
/// Points per scan, including t = 0.
pub const DEFAULT_SCAN_POINTS: usize = 51;
/// Projections per scan point.
pub const DEFAULT_SHOTS: u32 = 100;

/// `points` evenly spaced pulse lengths from 0 to `duration`.
pub fn scan_times(duration: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| duration * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Populations of |g,n⟩ and |e,n⟩ for n = 0..=n_max, plus the sideband
/// coherences S.
///
/// `blue_coherence[n]` belongs to the pair (g,n)–(e,n+1), n = 0..n_max−1;
/// `red_coherence[n−1]` to the pair (g,n)–(e,n−1), n = 1..=n_max. Each is
/// c_g* c_e + c_g c_e* for the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononDistribution {
    p_g: Vec<f64>,
    p_e: Vec<f64>,
    blue_coherence: Vec<f64>,
    red_coherence: Vec<f64>,
}

impl PhononDistribution {
    pub fn new(p_g: Vec<f64>, p_e: Vec<f64>) -> Result<Self> {
        let n = p_g.len().saturating_sub(1);
        Self::with_coherences(p_g, p_e, vec![0.0; n], vec![0.0; n])
    }

    pub fn with_coherences(
        p_g: Vec<f64>,
        p_e: Vec<f64>,
        blue_coherence: Vec<f64>,
        red_coherence: Vec<f64>,
    ) -> Result<Self> {
        if p_g.is_empty() || p_g.len() != p_e.len() {
            return Err(Error::invalid("P_g and P_e must be non-empty and of equal length"));
        }
        let n_max = p_g.len() - 1;
        if blue_coherence.len() != n_max || red_coherence.len() != n_max {
            return Err(Error::invalid(format!("expected {n_max} coherences per branch")));
        }
        for &p in p_g.iter().chain(&p_e) {
            if !(-1e-9..=1.0 + 1e-9).contains(&p) {
                return Err(Error::invalid(format!("population {p} outside [0, 1]")));
            }
        }
        if blue_coherence.iter().chain(&red_coherence).any(|s| !s.is_finite()) {
            return Err(Error::invalid("coherences must be finite"));
        }
        let total: f64 = p_g.iter().chain(&p_e).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!("populations sum to {total}, not 1")));
        }
        Ok(Self { p_g, p_e, blue_coherence, red_coherence })
    }

    /// All population in |g,0⟩.
    pub fn vacuum(n_max: usize) -> Self {
        let mut p_g = vec![0.0; n_max + 1];
        p_g[0] = 1.0;
        Self { p_g, p_e: vec![0.0; n_max + 1], blue_coherence: vec![0.0; n_max], red_coherence: vec![0.0; n_max] }
    }

    /// Read populations and sideband coherences off a single-trajectory state,
    /// keeping Fock levels 0..=n_max (the remainder must be negligible).
    pub fn from_state(state: &QuantumState, n_max: usize) -> Result<Self> {
        if state.layout().is_superposed() {
            return Err(Error::invalid("use from_state_branch for superposed layouts"));
        }
        let (weight, dist) = Self::from_state_branch(state, 0, n_max)?;
        debug_assert!((weight - 1.0).abs() < 1e-6);
        Ok(dist)
    }

    /// Distribution of control branch `control` after shelving the other
    /// branch away: returns (branch weight, normalized distribution).
    pub fn from_state_branch(state: &QuantumState, control: usize, n_max: usize) -> Result<(f64, Self)> {
        let layout = state.layout();
        if control >= layout.control_levels() {
            return Err(Error::invalid("control branch out of range"));
        }
        let keep = (n_max + 1).min(layout.fock_dim());
        let rho = state.density_matrix();
        let idx = |d: Detector, n: usize| layout.index(control, d, n);
        let pop = |d: Detector, n: usize| if n < keep { rho[(idx(d, n), idx(d, n))].re } else { 0.0 };
        let coh = |ng: usize, ne: usize| -> f64 {
            if ng < keep && ne < keep {
                // c_g* c_e + c_g c_e* = 2 Re ρ_{e,g}
                2.0 * rho[(idx(Detector::E, ne), idx(Detector::G, ng))].re
            } else {
                0.0
            }
        };
        let p_g: Vec<f64> = (0..=n_max).map(|n| pop(Detector::G, n)).collect();
        let p_e: Vec<f64> = (0..=n_max).map(|n| pop(Detector::E, n)).collect();
        let weight: f64 = p_g.iter().chain(&p_e).sum();
        if weight <= 0.0 {
            return Err(Error::invalid("selected branch carries no population"));
        }
        let scale = |v: Vec<f64>| v.into_iter().map(|x| x / weight).collect::<Vec<_>>();
        let blue = scale((0..n_max).map(|n| coh(n, n + 1)).collect());
        let red = scale((1..=n_max).map(|n| coh(n, n - 1)).collect());
        Ok((weight, Self::with_coherences(scale(p_g), scale(p_e), blue, red)?))
    }

    pub fn n_max(&self) -> usize {
        self.p_g.len() - 1
    }

    pub fn p_g(&self) -> &[f64] {
        &self.p_g
    }

    pub fn p_e(&self) -> &[f64] {
        &self.p_e
    }

    pub fn blue_coherence(&self) -> &[f64] {
        &self.blue_coherence
    }

    pub fn red_coherence(&self) -> &[f64] {
        &self.red_coherence
    }

    /// Parameter vector [P_g, P_e, S_blue, S_red] used by the linear scan model.
    pub fn to_parameters(&self) -> Vec<f64> {
        self.p_g.iter().chain(&self.p_e).chain(&self.blue_coherence).chain(&self.red_coherence).copied().collect()
    }

    pub(crate) fn from_parameters(n_max: usize, x: &[f64]) -> Result<Self> {
        let l = n_max + 1;
        Self::with_coherences(
            x[..l].to_vec(),
            x[l..2 * l].to_vec(),
            x[2 * l..2 * l + n_max].to_vec(),
            x[2 * l + n_max..2 * l + 2 * n_max].to_vec(),
        )
    }
}

/// Σ_n n (P_g,n + P_e,n), or the sum over one detector level.
pub fn mean_phonon(dist: &PhononDistribution, filter: Option<Detector>) -> f64 {
    let weighted = |p: &[f64]| p.iter().enumerate().map(|(n, x)| n as f64 * x).sum::<f64>();
    match filter {
        None => weighted(&dist.p_g) + weighted(&dist.p_e),
        Some(Detector::G) => weighted(&dist.p_g),
        Some(Detector::E) => weighted(&dist.p_e),
    }
}

/// Control-qubit unitary with |+c⟩ → |0c⟩ and |−c⟩ → −|1c⟩.
pub fn pm_transform_matrix() -> OperatorMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    OperatorMatrix::from_real(2, &[s, s, -s, s]).expect("2x2")
}

/// Apply the ± → computational basis transform to the control qubit.
pub fn basis_transform_pm(state: &QuantumState) -> Result<QuantumState> {
    let layout = state.layout();
    layout.require_superposed("± basis transform")?;
    let u = crate::hilbert::embed(layout, Subsystem::Control, &pm_transform_matrix())?;
    state.transformed(&u)
}

/// Population of |control, detector⟩ with the mode traced out, as reported
/// by shelving every other level before detection.
pub fn shelving_projection(state: &QuantumState, control: usize, detector: Detector) -> Result<f64> {
    let layout = state.layout();
    layout.require_superposed("shelving readout")?;
    if control >= 2 {
        return Err(Error::invalid("control branch must be 0 or 1"));
    }
    let pops = state.populations();
    Ok((0..layout.fock_dim()).map(|n| pops[layout.index(control, detector, n)]).sum())
}
