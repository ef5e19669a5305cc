//! Detector worldlines inside the cavity and the coupling modulation
//! `sin(k x(t))` they produce in the standing-wave mode.

use crate::{Error, Result, TWO_PI};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Cavity length whose standing wave `k = 2·2π/L` satisfies `ω_p = k c`.
pub fn cavity_length_for_mode(mode_frequency: f64) -> f64 {
    2.0 * TWO_PI * SPEED_OF_LIGHT / mode_frequency
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryKind {
    /// x(t) = x̄
    Static,
    /// x(t) = v t, with `velocity` as a fraction of c.
    Inertial { velocity: f64 },
    /// x(t) = x̄ + A sin(ω t)
    Oscillatory { amplitude: f64, frequency: f64 },
}

/// A worldline plus the cavity it lives in. Lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    kind: TrajectoryKind,
    center: f64,
    cavity_length: f64,
}

impl TrajectorySpec {
    pub fn new(kind: TrajectoryKind, center: f64, cavity_length: f64) -> Result<Self> {
        if !(cavity_length > 0.0) || !cavity_length.is_finite() {
            return Err(Error::invalid(format!("cavity length must be > 0, got {cavity_length}")));
        }
        // Allow round-off when x̄ is derived from ū = 4π.
        let slack = 1e-12 * cavity_length;
        if !(center >= -slack && center <= cavity_length + slack) {
            return Err(Error::invalid(format!("centre {center} m lies outside the cavity [0, {cavity_length}]")));
        }
        match kind {
            TrajectoryKind::Static => {}
            TrajectoryKind::Inertial { velocity } => {
                if !(velocity >= 0.0) || !velocity.is_finite() {
                    return Err(Error::invalid(format!("velocity must be >= 0, got {velocity}")));
                }
            }
            TrajectoryKind::Oscillatory { amplitude, frequency } => {
                if !(amplitude >= 0.0) || !amplitude.is_finite() {
                    return Err(Error::invalid(format!("amplitude must be >= 0, got {amplitude}")));
                }
                if !(frequency > 0.0) || !frequency.is_finite() {
                    return Err(Error::invalid(format!("oscillation frequency must be > 0, got {frequency}")));
                }
            }
        }
        Ok(Self { kind, center, cavity_length })
    }

    pub fn stationary(center: f64, cavity_length: f64) -> Result<Self> {
        Self::new(TrajectoryKind::Static, center, cavity_length)
    }

    pub fn inertial(velocity: f64, cavity_length: f64) -> Result<Self> {
        Self::new(TrajectoryKind::Inertial { velocity }, 0.0, cavity_length)
    }

    pub fn oscillatory(center: f64, amplitude: f64, frequency: f64, cavity_length: f64) -> Result<Self> {
        Self::new(TrajectoryKind::Oscillatory { amplitude, frequency }, center, cavity_length)
    }

    /// Oscillatory trajectory given the phases ū = k x̄ and u = k A.
    pub fn oscillatory_phases(center_u: f64, amplitude_u: f64, frequency: f64, cavity_length: f64) -> Result<Self> {
        let k = wave_number(cavity_length);
        Self::oscillatory(center_u / k, amplitude_u / k, frequency, cavity_length)
    }

    pub fn kind(&self) -> TrajectoryKind {
        self.kind
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn cavity_length(&self) -> f64 {
        self.cavity_length
    }

    /// k = 2·2π/L.
    pub fn wave_number(&self) -> f64 {
        wave_number(self.cavity_length)
    }

    /// ū = k x̄.
    pub fn center_u(&self) -> f64 {
        self.wave_number() * self.center
    }

    /// u = k A (zero for non-oscillatory kinds).
    pub fn amplitude_u(&self) -> f64 {
        match self.kind {
            TrajectoryKind::Oscillatory { amplitude, .. } => self.wave_number() * amplitude,
            _ => 0.0,
        }
    }

    /// Oscillation angular frequency, if any.
    pub fn frequency(&self) -> Option<f64> {
        match self.kind {
            TrajectoryKind::Oscillatory { frequency, .. } => Some(frequency),
            _ => None,
        }
    }

    /// Angular frequency at which the coupling is modulated: ω for
    /// oscillatory motion, k v for inertial motion, zero when static.
    pub fn modulation_frequency(&self) -> f64 {
        match self.kind {
            TrajectoryKind::Static => 0.0,
            TrajectoryKind::Inertial { velocity } => self.wave_number() * velocity * SPEED_OF_LIGHT,
            TrajectoryKind::Oscillatory { frequency, .. } => frequency,
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        match self.kind {
            TrajectoryKind::Static => self.center,
            TrajectoryKind::Inertial { velocity } => velocity * SPEED_OF_LIGHT * t,
            TrajectoryKind::Oscillatory { amplitude, frequency } => self.center + amplitude * (frequency * t).sin(),
        }
    }

    /// sin(k x(t)).
    pub fn modulation(&self, t: f64) -> f64 {
        match self.kind {
            // Evaluate in phase form so ū = 2π stays exact-ish and the
            // periodicity in t is not spoiled by large k·x products.
            TrajectoryKind::Oscillatory { frequency, .. } => {
                (self.center_u() + self.amplitude_u() * (frequency * t).sin()).sin()
            }
            _ => (self.wave_number() * self.position(t)).sin(),
        }
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        match self.kind {
            TrajectoryKind::Static | TrajectoryKind::Inertial { .. } => 0.0,
            TrajectoryKind::Oscillatory { amplitude, frequency } => {
                -amplitude * frequency * frequency * (frequency * t).sin()
            }
        }
    }
}

fn wave_number(cavity_length: f64) -> f64 {
    2.0 * TWO_PI / cavity_length
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const OMEGA: f64 = TWO_PI * 300e3;

    fn osc(u: f64) -> TrajectorySpec {
        TrajectorySpec::oscillatory_phases(TWO_PI, u, OMEGA, 1.0).unwrap()
    }

    #[test]
    fn position_examples() {
        let t = TrajectorySpec::oscillatory(0.5, 0.1, OMEGA, 1.0).unwrap();
        assert_eq!(t.position(0.0), 0.5);
        let quarter = std::f64::consts::FRAC_PI_2 / OMEGA;
        assert!((t.position(quarter) - 0.6).abs() < 1e-15);
        let s = TrajectorySpec::stationary(0.25, 1.0).unwrap();
        for k in 0..10 {
            assert_eq!(s.position(k as f64 * 1e-5), 0.25);
        }
    }

    #[test]
    fn derived_phases() {
        let t = TrajectorySpec::oscillatory(0.5, 0.0, OMEGA, 1.0).unwrap();
        assert!((t.center_u() - TWO_PI).abs() < 1e-14);
        assert_eq!(t.wave_number(), 2.0 * TWO_PI);
        assert!((osc(1.5).amplitude_u() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn modulation_examples() {
        let still = osc(0.0);
        for k in 0..100 {
            assert!(still.modulation(k as f64 * 1e-7).abs() < 1e-14);
        }
        let quarter = std::f64::consts::FRAC_PI_2 / OMEGA;
        // sin(2π + 1.5) by direct evaluation
        assert!((osc(1.5).modulation(quarter) - 0.997_494_986_604_054_4).abs() < 1e-12);
        let period = TWO_PI / OMEGA;
        let t = osc(1.5);
        for k in 0..200 {
            let s = k as f64 * 3.7e-8;
            assert!((t.modulation(s) - t.modulation(s + period)).abs() < 1e-12);
        }
    }

    #[test]
    fn acceleration_examples() {
        let inertial = TrajectorySpec::inertial(0.3, 1.0).unwrap();
        assert_eq!(inertial.acceleration(1.234e-3), 0.0);
        let t = TrajectorySpec::oscillatory(0.5, 0.01, OMEGA, 1.0).unwrap();
        assert_eq!(t.acceleration(0.0), 0.0);
        let peak = (0..10_000).map(|k| t.acceleration(k as f64 * 1e-9).abs()).fold(0.0, f64::max);
        let bound = 0.01 * OMEGA * OMEGA;
        assert!(peak <= bound * (1.0 + 1e-12));
        assert!(peak > bound * 0.999);
    }

    #[test]
    fn acceleration_matches_second_difference() {
        let t = TrajectorySpec::oscillatory(0.5, 0.01, OMEGA, 1.0).unwrap();
        let s = 0.37 / OMEGA;
        let err = |h: f64| {
            let fd = (t.position(s + h) - 2.0 * t.position(s) + t.position(s - h)) / (h * h);
            (fd - t.acceleration(s)).abs()
        };
        let h = 0.02 / OMEGA;
        let (e1, e2) = (err(h), err(h / 2.0));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }

    #[test]
    fn invalid_specs() {
        assert!(TrajectorySpec::stationary(1.5, 1.0).is_err());
        assert!(TrajectorySpec::oscillatory(0.5, -0.1, OMEGA, 1.0).is_err());
        assert!(TrajectorySpec::oscillatory(0.5, 0.1, 0.0, 1.0).is_err());
        assert!(TrajectorySpec::inertial(-0.1, 1.0).is_err());
        assert!(TrajectorySpec::stationary(0.0, 0.0).is_err());
    }

    #[test]
    fn mode_matched_cavity() {
        let wp = TWO_PI * 150e3;
        let t = TrajectorySpec::inertial(0.5, cavity_length_for_mode(wp)).unwrap();
        assert!((t.wave_number() * SPEED_OF_LIGHT - wp).abs() / wp < 1e-14);
        assert!((t.modulation_frequency() - 0.5 * wp).abs() / wp < 1e-14);
    }

    proptest! {
        #[test]
        fn modulation_bounded(ubar in 0.0f64..(2.0 * TWO_PI), u in 0.0f64..10.0, t in 0.0f64..1e-3) {
            let spec = TrajectorySpec::oscillatory_phases(ubar, u, OMEGA, 1.0).unwrap();
            let m = spec.modulation(t);
            prop_assert!((-1.0..=1.0).contains(&m));
        }

        #[test]
        fn zero_amplitude_is_constant(ubar in 0.0f64..(2.0 * TWO_PI), t in 0.0f64..1e-3) {
            let spec = TrajectorySpec::oscillatory_phases(ubar, 0.0, OMEGA, 1.0).unwrap();
            prop_assert!((spec.modulation(t) - ubar.sin()).abs() < 1e-12);
        }
    }
}
