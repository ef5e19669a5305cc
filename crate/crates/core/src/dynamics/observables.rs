//! Named observables, including the control-projected ⟨P̂_i ⊗ Ô⟩ used for
//! superposed trajectories and their mixture/coherence split.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::hilbert::{
    embed, expectation, number, pauli, raw_expectation, ControlBasis, OperatorMatrix, Pauli, QuantumState, Subsystem,
    SystemLayout,
};
use crate::{Error, Result, C64};

/// σz ⊗ I_mode on the detector ⊗ mode factor.
pub fn local_sigma_z(fock_dim: usize) -> OperatorMatrix {
    pauli(Pauli::Z).kron(&OperatorMatrix::identity(fock_dim))
}

/// I_2 ⊗ N on the detector ⊗ mode factor.
pub fn local_number(fock_dim: usize) -> Result<OperatorMatrix> {
    Ok(OperatorMatrix::identity(2).kron(&number(fock_dim)?))
}

/// |i_c⟩⟨i_c| ⊗ Ô for Ô on the detector ⊗ mode factor.
pub fn projected(layout: &SystemLayout, basis: ControlBasis, op: &OperatorMatrix) -> Result<OperatorMatrix> {
    layout.require_superposed("projected observable")?;
    if op.dim() != 2 * layout.fock_dim() {
        return Err(Error::invalid(format!(
            "operator has dimension {}, detector ⊗ mode factor has {}",
            op.dim(),
            2 * layout.fock_dim()
        )));
    }
    Ok(basis.projector().kron(op))
}

/// Precomputed observable operators for one layout.
///
/// Names: `sigma_z`, `n`; on two-control layouts also `{p}` (branch
/// population), `{p}_sigma_z`, `{p}_n` for p ∈ {p0, p1, pplus, pminus}, and
/// `mix_sigma_z`, `coh_sigma_z`, `mix_n`, `coh_n`.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    layout: SystemLayout,
    ops: Vec<(String, DMatrix<C64>)>,
}

impl ObservableSet {
    pub fn new(layout: &SystemLayout) -> Result<Self> {
        let mut ops = vec![
            ("sigma_z".to_string(), embed(layout, Subsystem::Detector, &pauli(Pauli::Z))?.into_entries()),
            ("n".to_string(), embed(layout, Subsystem::Mode, &number(layout.fock_dim())?)?.into_entries()),
        ];
        if layout.is_superposed() {
            let f = layout.fock_dim();
            let locals = [("sigma_z", local_sigma_z(f)), ("n", local_number(f)?)];
            for basis in ControlBasis::ALL {
                let label = basis.label();
                ops.push((
                    label.to_string(),
                    projected(layout, basis, &OperatorMatrix::identity(2 * f))?.into_entries(),
                ));
                for (name, op) in &locals {
                    ops.push((format!("{label}_{name}"), projected(layout, basis, op)?.into_entries()));
                }
            }
        }
        Ok(Self { layout: *layout, ops })
    }

    /// Every name [`ObservableSet::evaluate`] produces, in output order.
    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.ops.iter().map(|(n, _)| n.clone()).collect();
        if self.layout.is_superposed() {
            names.extend(["mix_sigma_z", "coh_sigma_z", "mix_n", "coh_n"].map(String::from));
        }
        names
    }

    pub fn evaluate(&self, state: &QuantumState) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> =
            self.ops.iter().map(|(name, op)| (name.clone(), raw_expectation(state, op).re)).collect();
        if self.layout.is_superposed() {
            for obs in ["sigma_z", "n"] {
                let plus = out[&format!("pplus_{obs}")];
                let minus = out[&format!("pminus_{obs}")];
                out.insert(format!("mix_{obs}"), plus + minus);
                out.insert(format!("coh_{obs}"), plus - minus);
            }
        }
        out
    }
}

/// All named observables of `state` (see [`ObservableSet`]).
pub fn observables(state: &QuantumState) -> Result<BTreeMap<String, f64>> {
    Ok(ObservableSet::new(state.layout())?.evaluate(state))
}

/// (mix, coh) = (⟨P̂₊⊗Ô⟩ + ⟨P̂₋⊗Ô⟩, ⟨P̂₊⊗Ô⟩ − ⟨P̂₋⊗Ô⟩) for Ô on the
/// detector ⊗ mode factor.
///
/// For |Ψ⟩ = (|0c⟩|ψ0⟩ + |1c⟩|ψ1⟩)/√2 these are the branch average
/// (⟨ψ0|Ô|ψ0⟩ + ⟨ψ1|Ô|ψ1⟩)/2 and the interference term Re⟨ψ0|Ô|ψ1⟩.
pub fn coherence_decompose(state: &QuantumState, op: &OperatorMatrix) -> Result<(f64, f64)> {
    let layout = state.layout();
    let plus = expectation(state, &projected(layout, ControlBasis::Plus, op)?)?;
    let minus = expectation(state, &projected(layout, ControlBasis::Minus, op)?)?;
    Ok((plus + minus, plus - minus))
}
