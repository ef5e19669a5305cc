//! Time-dependent detector–mode Hamiltonians.
//!
//! Single trajectory:
//!   H(t) = ω_p N + (ω_q/2) σz + g0 sin(k x(t)) σx (a + a†)
//!
//! Superposed trajectories, control qubit tagging the branch:
//!   H(t) = ω_p N + (ω_q/2) σz + Σ_i g0 sin(k x_i(t)) |i_c⟩⟨i_c| ⊗ σx (a + a†)

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::sparse::SparseOperator;
use crate::hilbert::{
    annihilation, embed, pauli, ControlBasis, Detector, OperatorMatrix, Pauli, Subsystem, SystemLayout,
};
use crate::trajectory::TrajectorySpec;
use crate::{Error, Result, C64};

/// ω_p, ω_q and g0, all angular frequencies (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    mode_frequency: f64,
    detector_frequency: f64,
    coupling: f64,
}

impl ModelParams {
    pub fn new(mode_frequency: f64, detector_frequency: f64, coupling: f64) -> Result<Self> {
        for (name, v) in
            [("mode frequency", mode_frequency), ("detector frequency", detector_frequency), ("coupling", coupling)]
        {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        let p = Self { mode_frequency, detector_frequency, coupling };
        if p.strong_coupling() {
            log::warn!("g0 = {coupling:.3e} rad/s exceeds ω_p/10; the resonant effective model assumes g0 ≪ ω_p, ω_q");
        }
        Ok(p)
    }

    pub fn mode_frequency(&self) -> f64 {
        self.mode_frequency
    }

    pub fn detector_frequency(&self) -> f64 {
        self.detector_frequency
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// g0 > ω_p / 10.
    pub fn strong_coupling(&self) -> bool {
        self.coupling > self.mode_frequency / 10.0
    }
}

/// Shareable scalar schedule c(t) multiplying a static operator.
pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A Hamiltonian the propagators can evolve under.
///
/// Implementors may split off a static diagonal part (`frame_energies`),
/// which the propagators remove exactly by working in its rotating frame.
pub trait Hamiltonian: Sync {
    fn layout(&self) -> SystemLayout;

    fn matrix_at(&self, t: f64) -> OperatorMatrix;

    fn frame_energies(&self) -> Vec<f64> {
        vec![0.0; self.layout().dim()]
    }

    /// H(t) − diag(frame_energies), sparse.
    fn remainder_at(&self, t: f64) -> SparseOperator {
        let mut m = self.matrix_at(t).into_entries();
        for (j, e) in self.frame_energies().into_iter().enumerate() {
            m[(j, j)] -= C64::new(e, 0.0);
        }
        SparseOperator::from_dense(&m)
    }
}

/// Wraps an arbitrary `t → H(t)` closure.
pub struct FnHamiltonian<F> {
    layout: SystemLayout,
    f: F,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64) -> OperatorMatrix + Sync,
{
    pub fn new(layout: SystemLayout, f: F) -> Self {
        Self { layout, f }
    }
}

impl<F> Hamiltonian for FnHamiltonian<F>
where
    F: Fn(f64) -> OperatorMatrix + Sync,
{
    fn layout(&self) -> SystemLayout {
        self.layout
    }

    fn matrix_at(&self, t: f64) -> OperatorMatrix {
        (self.f)(t)
    }
}

struct ModulatedTerm {
    dense: DMatrix<C64>,
    sparse: SparseOperator,
    coefficient: Coefficient,
}

/// H(t) = diag(E) + Σ_k c_k(t) V_k.
#[derive(Clone)]
pub struct ModulatedHamiltonian {
    layout: SystemLayout,
    energies: Vec<f64>,
    terms: Vec<Arc<ModulatedTerm>>,
}

impl fmt::Debug for ModulatedHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulatedHamiltonian").field("layout", &self.layout).field("terms", &self.terms.len()).finish()
    }
}

impl ModulatedHamiltonian {
    pub fn new(layout: SystemLayout, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != layout.dim() {
            return Err(Error::invalid("energy list does not match layout dimension"));
        }
        Ok(Self { layout, energies, terms: Vec::new() })
    }

    /// H = 0.
    pub fn zero(layout: SystemLayout) -> Self {
        Self { layout, energies: vec![0.0; layout.dim()], terms: Vec::new() }
    }

    /// Free part ω_p N + (ω_q/2) σz.
    pub fn free(layout: SystemLayout, params: &ModelParams) -> Self {
        let energies = (0..layout.dim())
            .map(|i| {
                let (_, det, n) = layout.decompose(i);
                let sz = match det {
                    Detector::G => -1.0,
                    Detector::E => 1.0,
                };
                params.mode_frequency() * n as f64 + 0.5 * params.detector_frequency() * sz
            })
            .collect();
        Self { layout, energies, terms: Vec::new() }
    }

    /// Add `c(t) · op`; `op` must be Hermitian so H(t) stays Hermitian.
    pub fn with_term(mut self, op: &OperatorMatrix, coefficient: Coefficient) -> Result<Self> {
        if op.dim() != self.layout.dim() {
            return Err(Error::invalid("term dimension does not match layout"));
        }
        if !op.is_hermitian() {
            return Err(Error::invalid("modulated term must be Hermitian"));
        }
        self.terms.push(Arc::new(ModulatedTerm {
            dense: op.entries().clone(),
            sparse: SparseOperator::from_operator(op),
            coefficient,
        }));
        Ok(self)
    }

    /// Single-trajectory Hamiltonian.
    pub fn single(layout: SystemLayout, params: &ModelParams, traj: TrajectorySpec) -> Result<Self> {
        if layout.is_superposed() {
            return Err(Error::invalid("single-trajectory Hamiltonian needs a one-control layout"));
        }
        let v = interaction_operator(&layout)?;
        let g0 = params.coupling();
        Self::free(layout, params).with_term(&v, Arc::new(move |t| g0 * traj.modulation(t)))
    }

    /// Superposed-trajectory Hamiltonian; branch `i` follows `trajectories[i]`.
    pub fn superposed(layout: SystemLayout, params: &ModelParams, trajectories: [TrajectorySpec; 2]) -> Result<Self> {
        layout.require_superposed("superposed-trajectory Hamiltonian")?;
        let v = interaction_operator(&layout)?;
        let g0 = params.coupling();
        let mut h = Self::free(layout, params);
        for (basis, traj) in [ControlBasis::Zero, ControlBasis::One].into_iter().zip(trajectories) {
            let p = embed(&layout, Subsystem::Control, &basis.projector())?;
            let term = &p * &v;
            h = h.with_term(&term, Arc::new(move |t| g0 * traj.modulation(t)))?;
        }
        Ok(h)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
}

impl Hamiltonian for ModulatedHamiltonian {
    fn layout(&self) -> SystemLayout {
        self.layout
    }

    fn matrix_at(&self, t: f64) -> OperatorMatrix {
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|&e| C64::new(e, 0.0)),
        ));
        for term in &self.terms {
            let c = (term.coefficient)(t);
            if c != 0.0 {
                m += &term.dense * C64::new(c, 0.0);
            }
        }
        OperatorMatrix::from_square(m)
    }

    fn frame_energies(&self) -> Vec<f64> {
        self.energies.clone()
    }

    fn remainder_at(&self, t: f64) -> SparseOperator {
        let mut out = SparseOperator::empty(self.layout.dim());
        for term in &self.terms {
            out.push_scaled(&term.sparse, C64::new((term.coefficient)(t), 0.0));
        }
        out
    }
}

/// σx ⊗ (a + a†), lifted to the full layout.
pub fn interaction_operator(layout: &SystemLayout) -> Result<OperatorMatrix> {
    let a = annihilation(layout.fock_dim())?;
    let x = &a + &a.adjoint();
    let sx = embed(layout, Subsystem::Detector, &pauli(Pauli::X))?;
    let xm = embed(layout, Subsystem::Mode, &x)?;
    Ok(&sx * &xm)
}

/// H(t) for one trajectory on a single-control layout.
pub fn hamiltonian_single(
    layout: SystemLayout,
    params: &ModelParams,
    traj: &TrajectorySpec,
    t: f64,
) -> Result<OperatorMatrix> {
    Ok(ModulatedHamiltonian::single(layout, params, *traj)?.matrix_at(t))
}

/// H(t) for two superposed trajectories on a two-control layout.
pub fn hamiltonian_superposed(
    layout: SystemLayout,
    params: &ModelParams,
    traj0: &TrajectorySpec,
    traj1: &TrajectorySpec,
    t: f64,
) -> Result<OperatorMatrix> {
    Ok(ModulatedHamiltonian::superposed(layout, params, [*traj0, *traj1])?.matrix_at(t))
}
