//! Analytic layer: Jacobi-Anger harmonics of the trajectory modulation and
//! the resonant couplings that survive the rotating-wave reduction.
//!
//! Writing sin(ū + u sin ωt) as a Fourier-Bessel series and moving to the
//! frame of ω_p N + (ω_q/2) σz, the only non-rotating terms for the
//! degenerate case ω_p = ω_q are:
//!
//! * ω = ω_p + ω_q: JC amplitude sin ū J_0(u), anti-JC amplitude i cos ū J_1(u)
//! * ω = ω_p = ω_q: JC amplitude sin ū J_0(u), anti-JC amplitude sin ū J_2(u)
//!
//! Amplitudes are in units of g0. A JC term with amplitude A is
//! g0 (A σ+ a + A* σ− a†); an anti-JC term is g0 (A σ+ a† + A* σ− a).

mod bessel;

pub use bessel::{bessel_j, bessel_j1_prime, bessel_j_signed, MAX_ARGUMENT};

use std::sync::Arc;

use crate::dynamics::{ModelParams, ModulatedHamiltonian};
use crate::exec::Execution;
use crate::hilbert::{annihilation, embed, pauli, OperatorMatrix, Pauli, Subsystem, SystemLayout};
use crate::{Error, Result, C64};

/// One harmonic of the Jacobi-Anger series: `cos_coeff·cos(mωt) + sin_coeff·sin(mωt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub order: u32,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
}

/// Truncated expansion of sin(ū + u sin ωt).
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTable {
    pub dc: f64,
    pub harmonics: Vec<Harmonic>,
}

impl HarmonicTable {
    /// Evaluate the truncated series at phase ωt.
    pub fn evaluate(&self, phase: f64) -> f64 {
        self.dc
            + self
                .harmonics
                .iter()
                .map(|h| {
                    let a = h.order as f64 * phase;
                    h.cos_coeff * a.cos() + h.sin_coeff * a.sin()
                })
                .sum::<f64>()
    }

    pub fn harmonic(&self, order: u32) -> Option<&Harmonic> {
        self.harmonics.iter().find(|h| h.order == order)
    }
}

/// Harmonics 1..=n_max of sin(ū + u sin ωt):
/// even orders 2n carry 2 sin ū J_{2n}(u) cos(2nωt), odd orders 2n−1 carry
/// 2 cos ū J_{2n−1}(u) sin((2n−1)ωt), and the DC term is sin ū J_0(u).
pub fn jacobi_anger_coeffs(center_u: f64, amplitude_u: f64, n_max: u32) -> Result<HarmonicTable> {
    if n_max < 1 {
        return Err(Error::invalid("n_max must be >= 1"));
    }
    let (s, c) = center_u.sin_cos();
    let dc = s * bessel_j(0, amplitude_u)?;
    let harmonics = (1..=n_max)
        .map(|m| {
            let j = bessel_j(m, amplitude_u)?;
            Ok(if m % 2 == 0 {
                Harmonic { order: m, cos_coeff: 2.0 * s * j, sin_coeff: 0.0 }
            } else {
                Harmonic { order: m, cos_coeff: 0.0, sin_coeff: 2.0 * c * j }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HarmonicTable { dc, harmonics })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// σ+ a + σ− a†: conserves excitation number.
    Jc,
    /// σ+ a† + σ− a: creates or removes pairs.
    AntiJc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTerm {
    pub kind: CouplingKind,
    /// In units of g0.
    pub amplitude: C64,
    /// Bessel order that produced the term.
    pub source_harmonic: u32,
}

impl EffectiveTerm {
    /// The Hermitian operator A σ+ X + A* σ− X†, with X = a (JC) or a† (anti-JC).
    pub fn operator(&self, layout: &SystemLayout) -> Result<OperatorMatrix> {
        let a = annihilation(layout.fock_dim())?;
        let x = match self.kind {
            CouplingKind::Jc => a,
            CouplingKind::AntiJc => a.adjoint(),
        };
        let sp = embed(layout, Subsystem::Detector, &pauli(Pauli::Plus))?;
        let xm = embed(layout, Subsystem::Mode, &x)?;
        let raising = (&sp * &xm).scale_complex(self.amplitude);
        Ok(&raising + &raising.adjoint())
    }
}

/// Drive and level frequencies plus the trajectory phases ū = k x̄, u = k A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceContext {
    pub drive_frequency: f64,
    pub mode_frequency: f64,
    pub detector_frequency: f64,
    pub center_u: f64,
    pub amplitude_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resonance {
    /// ω = ω_p + ω_q
    SumFrequency,
    /// ω = ω_p = ω_q
    Degenerate,
    /// Neither analysed resonance; full numerics required.
    OffResonance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub resonance: Resonance,
    pub terms: Vec<EffectiveTerm>,
}

impl EffectiveHamiltonian {
    pub fn off_resonance(&self) -> bool {
        self.resonance == Resonance::OffResonance
    }

    pub fn amplitude(&self, kind: CouplingKind) -> C64 {
        self.terms.iter().filter(|t| t.kind == kind).map(|t| t.amplitude).sum()
    }

    /// Time-independent interaction-picture Hamiltonian g0 Σ terms, with no
    /// free part, for direct numerical comparison.
    pub fn hamiltonian(&self, layout: SystemLayout, g0: f64) -> Result<ModulatedHamiltonian> {
        let mut h = ModulatedHamiltonian::zero(layout);
        for term in &self.terms {
            h = h.with_term(&term.operator(&layout)?, Arc::new(move |_| g0))?;
        }
        Ok(h)
    }
}

const FREQ_RTOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FREQ_RTOL * a.abs().max(b.abs())
}

/// Resonant JC / anti-JC terms for the two analysed drive frequencies.
pub fn effective_hamiltonian(ctx: &ResonanceContext) -> Result<EffectiveHamiltonian> {
    for (name, f) in
        [("drive", ctx.drive_frequency), ("mode", ctx.mode_frequency), ("detector", ctx.detector_frequency)]
    {
        if !(f > 0.0) {
            return Err(Error::invalid(format!("{name} frequency must be > 0")));
        }
    }
    if !close(ctx.mode_frequency, ctx.detector_frequency) {
        return Err(Error::UnsupportedConfiguration("effective couplings are derived only for ω_p = ω_q".into()));
    }
    let (s, c) = ctx.center_u.sin_cos();
    let u = ctx.amplitude_u;
    let jc = |amp: f64| EffectiveTerm { kind: CouplingKind::Jc, amplitude: C64::new(amp, 0.0), source_harmonic: 0 };
    let w = ctx.drive_frequency;
    if close(w, ctx.mode_frequency + ctx.detector_frequency) {
        Ok(EffectiveHamiltonian {
            resonance: Resonance::SumFrequency,
            terms: vec![
                jc(s * bessel_j(0, u)?),
                EffectiveTerm {
                    kind: CouplingKind::AntiJc,
                    amplitude: C64::new(0.0, c * bessel_j(1, u)?),
                    source_harmonic: 1,
                },
            ],
        })
    } else if close(w, ctx.mode_frequency) {
        Ok(EffectiveHamiltonian {
            resonance: Resonance::Degenerate,
            terms: vec![
                jc(s * bessel_j(0, u)?),
                EffectiveTerm {
                    kind: CouplingKind::AntiJc,
                    amplitude: C64::new(s * bessel_j(2, u)?, 0.0),
                    source_harmonic: 2,
                },
            ],
        })
    } else {
        Ok(EffectiveHamiltonian { resonance: Resonance::OffResonance, terms: Vec::new() })
    }
}

/// Anti-JC matrix element g0 |cos ū J_1(u)| at ω = ω_p + ω_q.
pub fn anti_jc_rate(params: &ModelParams, center_u: f64, amplitude_u: f64) -> Result<f64> {
    Ok(params.coupling() * (center_u.cos() * bessel_j(1, amplitude_u)?).abs())
}

/// Period π / (g0 |cos ū J_1(u)|) of the |g,0⟩ ↔ |e,1⟩ population exchange.
pub fn rabi_period_prediction(params: &ModelParams, center_u: f64, amplitude_u: f64) -> Result<f64> {
    let rate = anti_jc_rate(params, center_u, amplitude_u)?;
    if rate <= 1e-15 * params.coupling() {
        return Err(Error::UndefinedPeriod(format!("anti-JC amplitude vanishes at ū = {center_u}, u = {amplitude_u}")));
    }
    Ok(std::f64::consts::PI / rate)
}

/// ⟨N⟩(t) = sin²(g_eff t) of the two-level anti-JC model started in |g,0⟩.
pub fn anti_jc_excitation(params: &ModelParams, center_u: f64, amplitude_u: f64, t: f64) -> Result<f64> {
    Ok((anti_jc_rate(params, center_u, amplitude_u)? * t).sin().powi(2))
}

/// Smallest u* > 0 with J_0(u*) = J_2(u*), i.e. the first maximum of J_1.
pub fn displacement_condition() -> f64 {
    let f = |u: f64| bessel_j(0, u).unwrap() - bessel_j(2, u).unwrap();
    // J_0 − J_2 = 2 J_1′ changes sign exactly once on [1, 2.5].
    let (mut lo, mut hi) = (1.0, 2.5);
    let f_lo = f(lo);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// ω_q + γ (c k − k v) for a detector moving with speed v along k.
pub fn relativistic_resonance_residual(
    velocity: f64,
    detector_frequency: f64,
    wave_number: f64,
    c: f64,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::invalid("speed of light must be > 0"));
    }
    if !(velocity >= 0.0) || velocity >= c {
        return Err(Error::invalid(format!("velocity must lie in [0, c), got {velocity}")));
    }
    let beta = velocity / c;
    let gamma = 1.0 / (1.0 - beta * beta).sqrt();
    Ok(detector_frequency + gamma * (c * wave_number - wave_number * velocity))
}

/// Residual on `points` evenly spaced speeds in [0, v_max].
pub fn resonance_residual_sweep(
    detector_frequency: f64,
    wave_number: f64,
    c: f64,
    v_max: f64,
    points: usize,
    exec: Execution,
) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::invalid("sweep needs at least two points"));
    }
    exec.map_indexed(points, |i| {
        let v = v_max * i as f64 / (points - 1) as f64;
        relativistic_resonance_residual(v, detector_frequency, wave_number, c)
    })
    .into_iter()
    .collect()
}
