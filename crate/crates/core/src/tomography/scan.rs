//! Red/blue sideband scan model.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::PhononDistribution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Red,
    Blue,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Red => "red",
            Branch::Blue => "blue",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "red" => Ok(Branch::Red),
            "blue" => Ok(Branch::Blue),
            other => Err(Error::invalid(format!("unknown sideband branch '{other}'"))),
        }
    }
}

/// Generalized Laguerre polynomial L_n^α(x) by the three-term recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Ω_{n,n+1} = η Ω0 e^{−η²/2} L_n^1(η²) / √(n+1).
pub fn sideband_rabi_frequency(n: usize, eta: f64, omega0: f64) -> f64 {
    let e2 = eta * eta;
    eta * omega0 * (-0.5 * e2).exp() * laguerre(n, 1.0, e2) / ((n + 1) as f64).sqrt()
}

/// One red or blue sideband scan: P_g against pulse length.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandScan {
    pub branch: Branch,
    pub eta: f64,
    pub omega0: f64,
    pub times: Vec<f64>,
    pub p_g: Vec<f64>,
    /// Shots per point when the values are sampled frequencies.
    pub shots: Option<Vec<u32>>,
}

impl SidebandScan {
    pub fn new(
        branch: Branch,
        eta: f64,
        omega0: f64,
        times: Vec<f64>,
        p_g: Vec<f64>,
        shots: Option<Vec<u32>>,
    ) -> Result<Self> {
        let scan = Self { branch, eta, omega0, times, p_g, shots };
        scan.validate()?;
        Ok(scan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return Err(Error::invalid(format!("Lamb-Dicke parameter {} outside (0, 0.5)", self.eta)));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::invalid("carrier Rabi frequency must be positive"));
        }
        if self.times.len() != self.p_g.len() || self.times.is_empty() {
            return Err(Error::invalid("times and p_g must be non-empty and of equal length"));
        }
        if self.times[0] < 0.0 || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("scan times must be nonnegative and increasing"));
        }
        if self.p_g.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("p_g values must lie in [0, 1]"));
        }
        if let Some(shots) = &self.shots {
            if shots.len() != self.times.len() {
                return Err(Error::invalid("shots column length mismatch"));
            }
            if shots.contains(&0) {
                return Err(Error::invalid("shot counts must be positive, or 0 on every row for noiseless data"));
            }
        }
        Ok(())
    }

    /// Replace each point by a binomial sample of `shots` projections.
    pub fn with_shot_noise(&self, shots: u32, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::invalid("shot count must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p_g = self
            .p_g
            .iter()
            .map(|&p| {
                let k = Binomial::new(shots as u64, p).expect("p in [0,1]").sample(&mut rng);
                k as f64 / shots as f64
            })
            .collect();
        Ok(Self { p_g, shots: Some(vec![shots; self.times.len()]), ..self.clone() })
    }
}

/// Linear scan model: rows are times, columns follow
/// [`PhononDistribution::to_parameters`] for truncation `n_max`.
pub fn design_matrix(branch: Branch, n_max: usize, eta: f64, omega0: f64, times: &[f64]) -> DMatrix<f64> {
    let l = n_max + 1;
    let g = |n: usize| n;
    let e = |n: usize| l + n;
    let sb = |n: usize| 2 * l + n;
    let sr = |n: usize| 2 * l + n_max + n - 1;
    let freqs: Vec<f64> = (0..=l).map(|n| sideband_rabi_frequency(n, eta, omega0)).collect();
    let mut a = DMatrix::zeros(times.len(), 4 * n_max + 2);
    for (row, &t) in times.iter().enumerate() {
        let mut add = |col: usize, v: f64| a[(row, col)] += v;
        match branch {
            Branch::Blue => {
                // pair (g,n)–(e,n+1) at Ω_{n,n+1}; |e,0⟩ has no blue partner
                for (n, &w) in freqs.iter().enumerate().take(n_max + 1) {
                    let (c, s) = ((w * t).cos(), (w * t).sin());
                    add(g(n), 0.5 * (1.0 + c));
                    if n < n_max {
                        add(e(n + 1), 0.5 * (1.0 - c));
                        add(sb(n), 0.5 * s);
                    }
                }
            }
            Branch::Red => {
                // pair (g,n)–(e,n−1) at Ω_{n−1,n}; |g,0⟩ is dark
                add(g(0), 1.0);
                for n in 1..=l {
                    let (c, s) = ((freqs[n - 1] * t).cos(), (freqs[n - 1] * t).sin());
                    add(e(n - 1), 0.5 * (1.0 - c));
                    if n <= n_max {
                        add(g(n), 0.5 * (1.0 + c));
                        add(sr(n), 0.5 * s);
                    }
                }
            }
        }
    }
    a
}

/// Noiseless P_g(t) for one branch. Values are clipped to [0, 1] against
/// round-off; pair coherences beyond the physical bound are the caller's
/// responsibility.
pub fn synthesize_scan(
    dist: &PhononDistribution,
    branch: Branch,
    eta: f64,
    omega0: f64,
    times: &[f64],
) -> Result<SidebandScan> {
    let a = design_matrix(branch, dist.n_max(), eta, omega0, times);
    let x = nalgebra::DVector::from_vec(dist.to_parameters());
    let p = a * x;
    SidebandScan::new(branch, eta, omega0, times.to_vec(), p.iter().map(|v| v.clamp(0.0, 1.0)).collect(), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI;

    const ETA: f64 = 0.065;
    const OMEGA0: f64 = TWO_PI * 150e3;

    fn grid() -> Vec<f64> {
        (0..=50).map(|i| i as f64 * 5e-6).collect()
    }

    #[test]
    fn laguerre_closed_forms() {
        for x in [0.0, 0.3, 1.7] {
            assert_eq!(laguerre(0, 1.0, x), 1.0);
            assert!((laguerre(1, 1.0, x) - (2.0 - x)).abs() < 1e-15);
            assert!((laguerre(2, 1.0, x) - (x * x / 2.0 - 3.0 * x + 3.0)).abs() < 1e-14);
            let l3 = (-x * x * x + 12.0 * x * x - 36.0 * x + 24.0) / 6.0;
            assert!((laguerre(3, 1.0, x) - l3).abs() < 1e-13);
        }
    }

    #[test]
    fn rabi_frequency_examples() {
        let r01 = sideband_rabi_frequency(0, ETA, OMEGA0);
        assert!((r01 - ETA * OMEGA0 * (-ETA * ETA / 2.0).exp()).abs() < 1e-9);
        assert!((r01 / OMEGA0 - 0.0648628324).abs() < 1e-9);
        let r12 = sideband_rabi_frequency(1, ETA, OMEGA0);
        // ratio oracle: √2 (1 − η²/2)
        let oracle = 2f64.sqrt() * (1.0 - ETA * ETA / 2.0);
        assert!((r12 / r01 - oracle).abs() < 1e-12);
        assert!((r12 / r01 - 1.41122604).abs() < 1e-8);
    }

    #[test]
    fn vacuum_scans() {
        let d = PhononDistribution::vacuum(3);
        let red = synthesize_scan(&d, Branch::Red, ETA, OMEGA0, &grid()).unwrap();
        assert!(red.p_g.iter().all(|&p| (p - 1.0).abs() < 1e-15));
        let blue = synthesize_scan(&d, Branch::Blue, ETA, OMEGA0, &grid()).unwrap();
        let w = sideband_rabi_frequency(0, ETA, OMEGA0);
        for (t, p) in blue.times.iter().zip(&blue.p_g) {
            assert!((p - 0.5 * (1.0 + (w * t).cos())).abs() < 1e-14);
        }
    }

    #[test]
    fn mixed_pair_example() {
        let d = PhononDistribution::new(vec![0.5, 0.0], vec![0.0, 0.5]).unwrap();
        let blue = synthesize_scan(&d, Branch::Blue, ETA, OMEGA0, &grid()).unwrap();
        assert!(blue.p_g.iter().all(|&p| (p - 0.5).abs() < 1e-14));
        // |g,0⟩ is dark on red; |e,1⟩ pairs with |g,2⟩ at Ω_{1,2}
        let red = synthesize_scan(&d, Branch::Red, ETA, OMEGA0, &grid()).unwrap();
        let w = sideband_rabi_frequency(1, ETA, OMEGA0);
        for (t, p) in red.times.iter().zip(&red.p_g) {
            assert!((p - (0.5 + 0.25 * (1.0 - (w * t).cos()))).abs() < 1e-14);
        }
    }

    #[test]
    fn scan_validation() {
        let t = vec![0.0, 1e-6];
        assert!(SidebandScan::new(Branch::Red, 0.6, OMEGA0, t.clone(), vec![1.0, 1.0], None).is_err());
        assert!(SidebandScan::new(Branch::Red, ETA, OMEGA0, vec![1e-6, 0.0], vec![1.0, 1.0], None).is_err());
        assert!(SidebandScan::new(Branch::Red, ETA, OMEGA0, t.clone(), vec![1.0, 1.1], None).is_err());
        assert!(SidebandScan::new(Branch::Red, ETA, OMEGA0, t, vec![1.0, 1.0], Some(vec![1])).is_err());
        assert!(Branch::parse("green").is_err());
    }

    #[test]
    fn shot_noise_is_seeded_and_bounded() {
        let d = PhononDistribution::new(vec![0.76, 0.01], vec![0.005, 0.225]).unwrap();
        let s = synthesize_scan(&d, Branch::Blue, ETA, OMEGA0, &grid()).unwrap();
        let a = s.with_shot_noise(100, 7).unwrap();
        let b = s.with_shot_noise(100, 7).unwrap();
        let c = s.with_shot_noise(100, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.p_g, c.p_g);
        assert!(a.p_g.iter().all(|p| (0.0..=1.0).contains(p) && (p * 100.0 - (p * 100.0).round()).abs() < 1e-9));
        assert!(s.with_shot_noise(0, 1).is_err());
    }
}
