//! Dephasing and heating channels.
//!
//! Dephasing uses a single jump operator Σ_i w_i |i_c⟩⟨i_c| ⊗ σz at rate
//! 1/(2 T2), so detector coherences decay as exp(−t/T2) when w_i = 1.
//! Heating uses a† and a at equal rate ṅ, which gives d⟨N⟩/dt = ṅ exactly.

use crate::hilbert::{annihilation, embed, pauli, ControlBasis, OperatorMatrix, Pauli, Subsystem, SystemLayout};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    /// Coherence time; `None` disables dephasing.
    pub t2: Option<f64>,
    /// Heating rate ṅ in quanta per second.
    pub heating_rate: f64,
    /// Thermal occupation of the initial mode state.
    pub initial_thermal: f64,
    /// Per-control-branch scale on the σz jump operator.
    pub dephasing_weights: Vec<f64>,
}

impl Default for LindbladSpec {
    fn default() -> Self {
        Self { t2: None, heating_rate: 0.0, initial_thermal: 0.0, dephasing_weights: vec![1.0, 1.0] }
    }
}

/// One jump operator with its rate γ.
#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub rate: f64,
    pub operator: OperatorMatrix,
}

impl LindbladSpec {
    pub fn dephasing(t2: f64) -> Self {
        Self { t2: Some(t2), ..Self::default() }
    }

    pub fn heating(rate: f64) -> Self {
        Self { heating_rate: rate, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t2) = self.t2 {
            if !(t2 > 0.0) {
                return Err(Error::invalid(format!("T2 must be > 0, got {t2}")));
            }
        }
        if !(self.heating_rate >= 0.0) || !self.heating_rate.is_finite() {
            return Err(Error::invalid(format!("heating rate must be >= 0, got {}", self.heating_rate)));
        }
        if !(self.initial_thermal >= 0.0) || !self.initial_thermal.is_finite() {
            return Err(Error::invalid(format!(
                "initial thermal occupation must be >= 0, got {}",
                self.initial_thermal
            )));
        }
        if self.dephasing_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("dephasing weights must be finite"));
        }
        Ok(())
    }

    /// Dephasing rate γ = 1/(2 T2).
    pub fn dephasing_rate(&self) -> f64 {
        self.t2.map_or(0.0, |t2| 0.5 / t2)
    }

    /// Jump operators on `layout`, dropping zero-rate channels.
    pub fn jump_operators(&self, layout: &SystemLayout) -> Result<Vec<JumpOperator>> {
        self.validate()?;
        let mut out = Vec::new();
        let gamma = self.dephasing_rate();
        if gamma > 0.0 {
            let sz = embed(layout, Subsystem::Detector, &pauli(Pauli::Z))?;
            let op = if layout.is_superposed() {
                if self.dephasing_weights.len() != 2 {
                    return Err(Error::invalid("two dephasing weights required for superposed layouts"));
                }
                let mut acc = OperatorMatrix::zeros(layout.dim());
                for (basis, w) in [ControlBasis::Zero, ControlBasis::One].into_iter().zip(&self.dephasing_weights) {
                    let p = embed(layout, Subsystem::Control, &basis.projector())?;
                    acc = &acc + &(&p * &sz).scale(*w);
                }
                acc
            } else {
                sz.scale(self.dephasing_weights.first().copied().unwrap_or(1.0))
            };
            out.push(JumpOperator { rate: gamma, operator: op });
        }
        if self.heating_rate > 0.0 {
            let a = embed(layout, Subsystem::Mode, &annihilation(layout.fock_dim())?)?;
            out.push(JumpOperator { rate: self.heating_rate, operator: a.adjoint() });
            out.push(JumpOperator { rate: self.heating_rate, operator: a });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channels() {
        let l = SystemLayout::superposed(4).unwrap();
        assert!(LindbladSpec::default().jump_operators(&l).unwrap().is_empty());
        let ops = LindbladSpec { t2: Some(1e-3), heating_rate: 20.0, ..Default::default() }.jump_operators(&l).unwrap();
        assert_eq!(ops.len(), 3);
        assert!((ops[0].rate - 500.0).abs() < 1e-12);
        let sz = embed(&l, Subsystem::Detector, &pauli(Pauli::Z)).unwrap();
        assert!(ops[0].operator.max_abs_diff(&sz) < 1e-15);
    }

    #[test]
    fn weighted_dephasing() {
        let l = SystemLayout::superposed(3).unwrap();
        let spec = LindbladSpec { t2: Some(1e-3), dephasing_weights: vec![1.0, 0.5], ..Default::default() };
        let op = &spec.jump_operators(&l).unwrap()[0].operator;
        let half = l.dim() / 2;
        assert_eq!(op.get(0, 0).re, -1.0);
        assert_eq!(op.get(half, half).re, -0.5);
        let bad = LindbladSpec { dephasing_weights: vec![1.0], ..spec };
        assert!(bad.jump_operators(&l).is_err());
    }

    #[test]
    fn validation() {
        assert!(LindbladSpec { t2: Some(0.0), ..Default::default() }.validate().is_err());
        assert!(LindbladSpec::heating(-1.0).validate().is_err());
        assert!(LindbladSpec { initial_thermal: -0.1, ..Default::default() }.validate().is_err());
    }
}
