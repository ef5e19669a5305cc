//! Dense complex linear algebra on the composite control ⊗ detector ⊗ mode
//! space.
//!
//! Basis ordering is control ⊗ detector ⊗ mode, with the detector basis
//! ordered (|g⟩, |e⟩) and σz = diag(−1, +1), so the ground state has
//! ⟨σz⟩ = −1. The composite index of |c, s, n⟩ is
//! `(c * 2 + s) * fock_dim + n`.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Tolerance for the cached Hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on pure-state norm and density-matrix trace.
pub const STATE_NORM_TOL: f64 = 1e-9;
/// Largest negative eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-9;
/// Imaginary residue of an expectation value that is silently discarded.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-9;

pub const DETECTOR_LEVELS: usize = 2;
/// Fock truncation used when a config does not set one.
pub const DEFAULT_FOCK_DIM: usize = 10;

/// Dimensions of the truncated Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemLayout {
    control_levels: usize,
    fock_dim: usize,
}

impl SystemLayout {
    pub fn new(control_levels: usize, fock_dim: usize) -> Result<Self> {
        if !(control_levels == 1 || control_levels == 2) {
            return Err(Error::invalid(format!("control_levels must be 1 or 2, got {control_levels}")));
        }
        if fock_dim < 2 {
            return Err(Error::invalid(format!("fock_dim must be >= 2, got {fock_dim}")));
        }
        Ok(Self { control_levels, fock_dim })
    }

    pub fn single(fock_dim: usize) -> Result<Self> {
        Self::new(1, fock_dim)
    }

    pub fn superposed(fock_dim: usize) -> Result<Self> {
        Self::new(2, fock_dim)
    }

    pub fn control_levels(&self) -> usize {
        self.control_levels
    }

    pub fn detector_levels(&self) -> usize {
        DETECTOR_LEVELS
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn dim(&self) -> usize {
        self.control_levels * DETECTOR_LEVELS * self.fock_dim
    }

    pub fn is_superposed(&self) -> bool {
        self.control_levels == 2
    }

    /// Composite index of |control, detector, n⟩.
    pub fn index(&self, control: usize, detector: Detector, n: usize) -> usize {
        debug_assert!(control < self.control_levels && n < self.fock_dim);
        (control * DETECTOR_LEVELS + detector as usize) * self.fock_dim + n
    }

    /// Inverse of [`SystemLayout::index`].
    pub fn decompose(&self, index: usize) -> (usize, Detector, usize) {
        let n = index % self.fock_dim;
        let rest = index / self.fock_dim;
        let det = if rest.is_multiple_of(2) { Detector::G } else { Detector::E };
        (rest / DETECTOR_LEVELS, det, n)
    }

    pub fn subsystem_dim(&self, subsystem: Subsystem) -> usize {
        match subsystem {
            Subsystem::Control => self.control_levels,
            Subsystem::Detector => DETECTOR_LEVELS,
            Subsystem::Mode => self.fock_dim,
        }
    }

    pub(crate) fn require_superposed(&self, what: &str) -> Result<()> {
        if self.is_superposed() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what} needs a two-control-level layout")))
        }
    }
}

/// Detector level, in basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Detector {
    G = 0,
    E = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Control,
    Detector,
    Mode,
}

/// Square dense complex matrix with a cached Hermitian flag.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::invalid(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let hermitian = max_abs_diff(&entries, &entries.adjoint()) < HERMITIAN_TOL;
        Ok(Self { entries, hermitian })
    }

    pub(crate) fn from_square(entries: DMatrix<C64>) -> Self {
        let hermitian = max_abs_diff(&entries, &entries.adjoint()) < HERMITIAN_TOL;
        Self { entries, hermitian }
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::invalid("data length must be dim*dim"));
        }
        Self::new(DMatrix::from_row_iterator(dim, dim, data.iter().map(|&x| C64::new(x, 0.0))))
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: DMatrix::identity(dim, dim), hermitian: true }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: DMatrix::zeros(dim, dim), hermitian: true }
    }

    /// Diagonal operator with real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self { entries: DMatrix::from_diagonal(&d), hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint(), hermitian: self.hermitian }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_square(self.entries.kronecker(&other.entries))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { entries: &self.entries * C64::new(factor, 0.0), hermitian: self.hermitian }
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self::from_square(&self.entries * factor)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self::from_square(&self.entries * &other.entries - &other.entries * &self.entries)
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Real eigenvalues, ascending. Only meaningful for Hermitian operators.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.hermitian {
            return Err(Error::invalid("eigenvalues requested for a non-Hermitian operator"));
        }
        Ok(sorted_eigenvalues(&self.entries))
    }

    pub fn rank(&self, eps: f64) -> usize {
        self.entries.clone().rank(eps)
    }
}

impl std::ops::Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::from_square(&self.entries * &rhs.entries)
    }
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::from_square(&self.entries + &rhs.entries)
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::from_square(&self.entries - &rhs.entries)
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(crate) fn sorted_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    // Symmetrize so the solver sees an exactly Hermitian input.
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Bosonic annihilation operator on a `fock_dim`-level ladder.
pub fn annihilation(fock_dim: usize) -> Result<OperatorMatrix> {
    if fock_dim < 2 {
        return Err(Error::invalid(format!("fock_dim must be >= 2, got {fock_dim}")));
    }
    let mut m = DMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(OperatorMatrix { entries: m, hermitian: false })
}

pub fn creation(fock_dim: usize) -> Result<OperatorMatrix> {
    Ok(annihilation(fock_dim)?.adjoint())
}

/// Number operator a†a, built directly as diag(0, 1, …).
pub fn number(fock_dim: usize) -> Result<OperatorMatrix> {
    if fock_dim < 2 {
        return Err(Error::invalid(format!("fock_dim must be >= 2, got {fock_dim}")));
    }
    let d: Vec<f64> = (0..fock_dim).map(|n| n as f64).collect();
    Ok(OperatorMatrix::diagonal(&d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// σ+ = |e⟩⟨g|
    Plus,
    /// σ− = |g⟩⟨e|
    Minus,
}

/// 2×2 Pauli and ladder matrices in the (|g⟩, |e⟩) basis.
pub fn pauli(which: Pauli) -> OperatorMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let (a, b, c, d) = match which {
        Pauli::X => (z, one, one, z),
        Pauli::Y => (z, i, -i, z),
        Pauli::Z => (-one, z, z, one),
        Pauli::Plus => (z, z, one, z),
        Pauli::Minus => (z, one, z, z),
    };
    OperatorMatrix::from_square(DMatrix::from_row_slice(2, 2, &[a, b, c, d]))
}

/// Lift `op` acting on one factor to the full space.
pub fn embed(layout: &SystemLayout, subsystem: Subsystem, op: &OperatorMatrix) -> Result<OperatorMatrix> {
    let expected = layout.subsystem_dim(subsystem);
    if op.dim() != expected {
        return Err(Error::invalid(format!(
            "{subsystem:?} operator has dimension {}, layout expects {expected}",
            op.dim()
        )));
    }
    let ic = OperatorMatrix::identity(layout.control_levels());
    let id = OperatorMatrix::identity(DETECTOR_LEVELS);
    let im = OperatorMatrix::identity(layout.fock_dim());
    Ok(match subsystem {
        Subsystem::Control => op.kron(&id).kron(&im),
        Subsystem::Detector => ic.kron(op).kron(&im),
        Subsystem::Mode => ic.kron(&id).kron(op),
    })
}

/// Control-qubit basis states used by the projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlBasis {
    Zero,
    One,
    Plus,
    Minus,
}

impl ControlBasis {
    pub const ALL: [ControlBasis; 4] = [ControlBasis::Zero, ControlBasis::One, ControlBasis::Plus, ControlBasis::Minus];

    /// Amplitudes (⟨0c|·⟩, ⟨1c|·⟩).
    pub fn amplitudes(self) -> [C64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            ControlBasis::Zero => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            ControlBasis::One => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            ControlBasis::Plus => [C64::new(s, 0.0), C64::new(s, 0.0)],
            ControlBasis::Minus => [C64::new(s, 0.0), C64::new(-s, 0.0)],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ControlBasis::Zero => "p0",
            ControlBasis::One => "p1",
            ControlBasis::Plus => "pplus",
            ControlBasis::Minus => "pminus",
        }
    }

    /// 2×2 projector |i_c⟩⟨i_c|.
    pub fn projector(self) -> OperatorMatrix {
        let v = DVector::from_row_slice(&self.amplitudes());
        OperatorMatrix::from_square(&v * v.adjoint())
    }
}

/// |i_c⟩⟨i_c| ⊗ I ⊗ I.
pub fn projector_control(which: ControlBasis, layout: &SystemLayout) -> Result<OperatorMatrix> {
    layout.require_superposed("control projector")?;
    embed(layout, Subsystem::Control, &which.projector())
}

/// Pure vector or density matrix on a [`SystemLayout`].
#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    layout: SystemLayout,
    data: StateData,
}

impl QuantumState {
    pub fn pure(layout: SystemLayout, psi: DVector<C64>) -> Result<Self> {
        if psi.len() != layout.dim() {
            return Err(Error::invalid(format!(
                "state vector has length {}, layout dimension is {}",
                psi.len(),
                layout.dim()
            )));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::invalid(format!("state vector norm {norm} is not 1")));
        }
        Ok(Self { layout, data: StateData::Pure(psi) })
    }

    pub fn density(layout: SystemLayout, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != layout.dim() || rho.ncols() != layout.dim() {
            return Err(Error::invalid("density matrix does not match layout dimension"));
        }
        if max_abs_diff(&rho, &rho.adjoint()) > STATE_NORM_TOL {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_NORM_TOL || tr.im.abs() > STATE_NORM_TOL {
            return Err(Error::invalid(format!("density matrix trace {tr} is not 1")));
        }
        let min_ev = sorted_eigenvalues(&rho)[0];
        if min_ev < -PSD_TOL {
            return Err(Error::invalid(format!("density matrix has negative eigenvalue {min_ev:.3e}")));
        }
        Ok(Self { layout, data: StateData::Mixed(rho) })
    }

    /// Constructors for integrator output, which reports drift separately.
    pub(crate) fn pure_unchecked(layout: SystemLayout, psi: DVector<C64>) -> Self {
        Self { layout, data: StateData::Pure(psi) }
    }

    pub(crate) fn density_unchecked(layout: SystemLayout, rho: DMatrix<C64>) -> Self {
        Self { layout, data: StateData::Mixed(rho) }
    }

    /// Basis state |control, detector, n⟩.
    pub fn basis(layout: SystemLayout, control: usize, detector: Detector, n: usize) -> Result<Self> {
        if control >= layout.control_levels() || n >= layout.fock_dim() {
            return Err(Error::invalid("basis label out of range"));
        }
        let mut psi = DVector::zeros(layout.dim());
        psi[layout.index(control, detector, n)] = C64::new(1.0, 0.0);
        Ok(Self { layout, data: StateData::Pure(psi) })
    }

    /// |g, 0⟩ with the control (if any) in `control`.
    pub fn ground(layout: SystemLayout, control: ControlBasis) -> Result<Self> {
        let mode = unit(layout.fock_dim(), 0);
        Self::product(layout, control, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], mode.as_slice())
    }

    /// Product state |control⟩ ⊗ |detector⟩ ⊗ |mode⟩; `control` is ignored
    /// on single-trajectory layouts.
    pub fn product(layout: SystemLayout, control: ControlBasis, detector: &[C64], mode: &[C64]) -> Result<Self> {
        if detector.len() != DETECTOR_LEVELS || mode.len() != layout.fock_dim() {
            return Err(Error::invalid("factor dimension mismatch"));
        }
        let c: Vec<C64> = if layout.is_superposed() { control.amplitudes().to_vec() } else { vec![C64::new(1.0, 0.0)] };
        let cv = DVector::from_vec(c);
        let dv = DVector::from_row_slice(detector);
        let mv = DVector::from_row_slice(mode);
        let mut psi = cv.kronecker(&dv).kronecker(&mv);
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::invalid("zero product state"));
        }
        psi /= C64::new(norm, 0.0);
        Self::pure(layout, psi)
    }

    /// ρ_control ⊗ ρ_detector ⊗ ρ_mode.
    pub fn product_density(
        layout: SystemLayout,
        control: &DMatrix<C64>,
        detector: &DMatrix<C64>,
        mode: &DMatrix<C64>,
    ) -> Result<Self> {
        if control.nrows() != layout.control_levels()
            || detector.nrows() != DETECTOR_LEVELS
            || mode.nrows() != layout.fock_dim()
        {
            return Err(Error::invalid("factor dimension mismatch"));
        }
        Self::density(layout, control.kronecker(detector).kronecker(mode))
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn as_vector(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Mixed(m) => m.clone(),
        }
    }

    /// Into a mixed-state representation.
    pub fn to_density(&self) -> Self {
        Self { layout: self.layout, data: StateData::Mixed(self.density_matrix()) }
    }

    /// Diagonal populations in the composite basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateData::Mixed(m) => m.diagonal().iter().map(|z| z.re).collect(),
        }
    }

    /// ‖ψ‖ for pure states, Tr ρ for mixed states.
    pub fn norm_or_trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm(),
            StateData::Mixed(m) => m.trace().re,
        }
    }

    /// Apply a unitary: ψ → Uψ or ρ → UρU†.
    pub fn transformed(&self, u: &OperatorMatrix) -> Result<Self> {
        if u.dim() != self.layout.dim() {
            return Err(Error::invalid("operator dimension does not match state"));
        }
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(u.entries() * v),
            StateData::Mixed(m) => StateData::Mixed(u.entries() * m * u.entries().adjoint()),
        };
        Ok(Self { layout: self.layout, data })
    }

    /// Population summed over the top `levels` Fock states.
    pub fn top_fock_population(&self, levels: usize) -> f64 {
        let fock = self.layout.fock_dim();
        let cutoff = fock.saturating_sub(levels);
        self.populations().iter().enumerate().filter(|(i, _)| i % fock >= cutoff).map(|(_, p)| p).sum()
    }
}

fn unit(dim: usize, k: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

/// ⟨ψ|O|ψ⟩ or Tr(ρO) for Hermitian O.
pub fn expectation(state: &QuantumState, op: &OperatorMatrix) -> Result<f64> {
    if op.dim() != state.layout.dim() {
        return Err(Error::invalid(format!(
            "operator dimension {} does not match state dimension {}",
            op.dim(),
            state.layout.dim()
        )));
    }
    if !op.is_hermitian() {
        return Err(Error::invalid("expectation value of a non-Hermitian operator"));
    }
    let value = raw_expectation(state, op.entries());
    if value.im.abs() > EXPECTATION_IMAG_TOL {
        return Err(Error::NumericalInconsistency(format!("expectation value has imaginary part {:.3e}", value.im)));
    }
    Ok(value.re)
}

/// Complex ⟨O⟩ without any checks; used on hot paths with pre-validated
/// operators.
pub(crate) fn raw_expectation(state: &QuantumState, op: &DMatrix<C64>) -> C64 {
    match &state.data {
        StateData::Pure(v) => v.dotc(&(op * v)),
        StateData::Mixed(m) => {
            // Tr(ρO) = Σ_jk ρ_jk O_kj
            let n = m.nrows();
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                for k in 0..n {
                    acc += m[(j, k)] * op[(k, j)];
                }
            }
            acc
        }
    }
}

/// Normalized thermal occupation probabilities p_n ∝ (n̄/(1+n̄))^n on the
/// truncated ladder.
pub fn thermal_populations(mean: f64, fock_dim: usize) -> Result<Vec<f64>> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::invalid(format!("thermal occupation must be >= 0, got {mean}")));
    }
    if fock_dim < 2 {
        return Err(Error::invalid(format!("fock_dim must be >= 2, got {fock_dim}")));
    }
    let ratio = mean / (1.0 + mean);
    let mut p: Vec<f64> = (0..fock_dim).map(|n| ratio.powi(n as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Ok(p)
}

/// Thermal mode density matrix on the truncated ladder.
pub fn thermal_mode(mean: f64, fock_dim: usize) -> Result<DMatrix<C64>> {
    let p = thermal_populations(mean, fock_dim)?;
    Ok(DMatrix::from_diagonal(&DVector::from_iterator(fock_dim, p.into_iter().map(|x| C64::new(x, 0.0)))))
}

/// |g⟩⟨g| ⊗ ρ_thermal on the single-trajectory layout.
pub fn thermal_state(mean: f64, fock_dim: usize) -> Result<QuantumState> {
    let layout = SystemLayout::single(fock_dim)?;
    let ctrl = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    let det = pauli_ground_projector();
    QuantumState::product_density(layout, &ctrl, &det, &thermal_mode(mean, fock_dim)?)
}

pub(crate) fn pauli_ground_projector() -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilation_small() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.entries(), &DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]));
        let a3 = annihilation(3).unwrap();
        for r in 0..3 {
            for col in 0..3 {
                let expect = match (r, col) {
                    (0, 1) => 1.0,
                    (1, 2) => 2f64.sqrt(),
                    _ => 0.0,
                };
                assert_eq!(a3.get(r, col), c(expect));
            }
        }
        assert!(matches!(annihilation(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn creation_is_transpose() {
        let a = annihilation(10).unwrap();
        let ad = creation(10).unwrap();
        for r in 0..10 {
            for col in 0..10 {
                assert_eq!(ad.get(r, col), a.get(col, r).conj());
            }
        }
    }

    #[test]
    fn number_matches_ladder_product() {
        for d in 2..=32 {
            let n = number(d).unwrap();
            let prod = &creation(d).unwrap() * &annihilation(d).unwrap();
            assert!(n.max_abs_diff(&prod) < 1e-12, "fock_dim {d}");
        }
    }

    #[test]
    fn pauli_conventions() {
        assert_eq!(pauli(Pauli::Z), OperatorMatrix::diagonal(&[-1.0, 1.0]));
        let pm = &(&pauli(Pauli::Plus) * &pauli(Pauli::Minus)) + &(&pauli(Pauli::Minus) * &pauli(Pauli::Plus));
        assert_eq!(pm, OperatorMatrix::identity(2));
        assert_eq!(pauli(Pauli::X), &pauli(Pauli::Plus) + &pauli(Pauli::Minus));
        // σ+|g⟩ = |e⟩
        assert_eq!(pauli(Pauli::Plus).get(1, 0), c(1.0));
        // σx σy = i σz
        let xy = &pauli(Pauli::X) * &pauli(Pauli::Y);
        assert!(xy.max_abs_diff(&pauli(Pauli::Z).scale_complex(C64::new(0.0, 1.0))) < 1e-15);
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            assert!(pauli(p).is_hermitian());
        }
        assert!(!pauli(Pauli::Plus).is_hermitian());
    }

    #[test]
    fn embed_examples() {
        let l = SystemLayout::single(2).unwrap();
        let n = embed(&l, Subsystem::Mode, &number(2).unwrap()).unwrap();
        let ev = n.hermitian_eigenvalues().unwrap();
        let expected = [0.0, 0.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }

        let l2 = SystemLayout::superposed(2).unwrap();
        let p0 = embed(&l2, Subsystem::Control, &ControlBasis::Zero.projector()).unwrap();
        assert_eq!(p0.rank(1e-9), 4);
        assert!((&p0 * &p0).max_abs_diff(&p0) < 1e-15);

        let sz = embed(&l2, Subsystem::Detector, &pauli(Pauli::Z)).unwrap();
        let nn = embed(&l2, Subsystem::Mode, &number(2).unwrap()).unwrap();
        assert!(sz.commutator(&nn).max_abs() < 1e-15);

        assert!(embed(&l2, Subsystem::Mode, &number(3).unwrap()).is_err());
    }

    #[test]
    fn projector_examples() {
        let l = SystemLayout::superposed(3).unwrap();
        let pp = projector_control(ControlBasis::Plus, &l).unwrap();
        let pmn = projector_control(ControlBasis::Minus, &l).unwrap();
        assert!((&pp + &pmn).max_abs_diff(&OperatorMatrix::identity(l.dim())) < 1e-15);
        assert!((&pp * &pmn).max_abs() < 1e-15);
        let p0 = projector_control(ControlBasis::Zero, &l).unwrap();
        let p1 = projector_control(ControlBasis::One, &l).unwrap();
        assert!((&p0 + &p1).max_abs_diff(&OperatorMatrix::identity(l.dim())) < 1e-15);
        let plus = QuantumState::ground(l, ControlBasis::Plus).unwrap();
        assert!((expectation(&plus, &p0).unwrap() - 0.5).abs() < 1e-15);

        let single = SystemLayout::single(3).unwrap();
        assert!(projector_control(ControlBasis::Zero, &single).is_err());
    }

    #[test]
    fn ground_state_expectations() {
        let l = SystemLayout::single(10).unwrap();
        let g = QuantumState::ground(l, ControlBasis::Zero).unwrap();
        let sz = embed(&l, Subsystem::Detector, &pauli(Pauli::Z)).unwrap();
        let n = embed(&l, Subsystem::Mode, &number(10).unwrap()).unwrap();
        assert_eq!(expectation(&g, &sz).unwrap(), -1.0);
        assert_eq!(expectation(&g, &n).unwrap(), 0.0);
        let sp = embed(&l, Subsystem::Detector, &pauli(Pauli::Plus)).unwrap();
        assert!(matches!(expectation(&g, &sp), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn imaginary_residue_is_reported() {
        // Anti-Hermitian off-diagonal: Tr(ρX) comes out imaginary.
        let l = SystemLayout::single(2).unwrap();
        let mut rho = DMatrix::zeros(4, 4);
        rho[(0, 0)] = c(1.0);
        rho[(0, 1)] = C64::new(0.0, 0.5);
        rho[(1, 0)] = C64::new(0.0, 0.5);
        let s = QuantumState::density_unchecked(l, rho);
        let x = embed(&l, Subsystem::Mode, &pauli(Pauli::X)).unwrap();
        assert!(matches!(expectation(&s, &x), Err(Error::NumericalInconsistency(_))));
    }

    /// Independent oracle: geometric series Σ n r^n (1−r) with the tail
    /// beyond the truncation removed and renormalized.
    fn thermal_oracle(mean: f64, dim: usize) -> (f64, f64) {
        let r = mean / (1.0 + mean);
        let z = (1.0 - r.powi(dim as i32)) / (1.0 - r);
        let mut num = 0.0;
        for n in 0..dim {
            num += n as f64 * r.powi(n as i32);
        }
        (1.0 / z, num / z)
    }

    #[test]
    fn thermal_state_examples() {
        let vac = thermal_state(0.0, 10).unwrap();
        let pops = vac.populations();
        assert_eq!(pops[0], 1.0);
        assert!(pops[1..].iter().all(|&p| p == 0.0));

        let th = thermal_state(0.05, 10).unwrap();
        let (p0, nbar) = thermal_oracle(0.05, 10);
        let pops = th.populations();
        assert!((pops[0] - p0).abs() < 1e-12);
        assert!((pops[0] - 0.95238).abs() < 1e-5);
        let n = embed(th.layout(), Subsystem::Mode, &number(10).unwrap()).unwrap();
        let got = expectation(&th, &n).unwrap();
        assert!((got - nbar).abs() < 1e-12);
        assert!((got - 0.05).abs() < 1e-4);
        assert!((th.norm_or_trace() - 1.0).abs() < 1e-15);

        assert!(thermal_state(-0.1, 10).is_err());
    }

    #[test]
    fn state_validation() {
        let l = SystemLayout::single(2).unwrap();
        let v = DVector::from_element(4, c(1.0));
        assert!(QuantumState::pure(l, v).is_err());
        let mut bad = DMatrix::zeros(4, 4);
        bad[(0, 0)] = c(1.5);
        bad[(1, 1)] = c(-0.5);
        assert!(QuantumState::density(l, bad).is_err());
        assert!(SystemLayout::new(3, 4).is_err());
        assert!(SystemLayout::new(1, 1).is_err());
        assert_eq!(SystemLayout::superposed(10).unwrap().dim(), 40);
    }

    fn random_op(dim: usize, seed: &[f64]) -> OperatorMatrix {
        OperatorMatrix::new(DMatrix::from_fn(dim, dim, |r, c| {
            let k = (r * dim + c) % seed.len();
            C64::new(seed[k], seed[(k + 1) % seed.len()] * 0.5)
        }))
        .unwrap()
    }

    proptest! {
        #[test]
        fn embed_distributes_over_products(seed in prop::collection::vec(-1.0f64..1.0, 8..20), fock in 2usize..6) {
            let l = SystemLayout::superposed(fock).unwrap();
            for sub in [Subsystem::Control, Subsystem::Detector, Subsystem::Mode] {
                let d = l.subsystem_dim(sub);
                let a = random_op(d, &seed);
                let b = random_op(d, &seed[1..]);
                let lhs = &embed(&l, sub, &a).unwrap() * &embed(&l, sub, &b).unwrap();
                let rhs = embed(&l, sub, &(&a * &b)).unwrap();
                prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }

        #[test]
        fn generated_hermitian_flags_hold(fock in 2usize..12) {
            let l = SystemLayout::superposed(fock).unwrap();
            let a = embed(&l, Subsystem::Mode, &annihilation(fock).unwrap()).unwrap();
            let x = &a + &a.adjoint();
            prop_assert!(x.is_hermitian());
            prop_assert!(x.max_abs_diff(&x.adjoint()) < 1e-12);
            for p in ControlBasis::ALL {
                let proj = projector_control(p, &l).unwrap();
                prop_assert!(proj.is_hermitian());
            }
        }
    }
}
