//! Constrained least-squares fit of red and blue scans.
//!
//! Populations are nonnegative and sum to one; coherences are free. A
//! Lawson–Hanson NNLS solve (coherences split into ± parts, normalization as
//! a heavily weighted row) seeds a primal active-set solve of the exact
//! constrained problem.

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scan::{design_matrix, synthesize_scan, SidebandScan};
use super::{mean_phonon, Branch, PhononDistribution};
use crate::exec::Execution;
use crate::{Error, Result};

/// Largest Fock level the fit accepts.
pub const MAX_FIT_LEVELS: usize = 5;

/// Condition number of the column-normalized design above which a fit is
/// refused.
pub const MAX_CONDITION_NUMBER: f64 = 1e6;

/// Weight on ⟨N⟩ that breaks ties in flat directions, relative to the
/// largest Gram-matrix entry.
const TIE_BREAK: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct FitResult {
    pub distribution: PhononDistribution,
    pub residual_norm: f64,
    /// 1σ per parameter, ordered as [`PhononDistribution::to_parameters`].
    /// Parameters pinned at zero by the constraint report 0.
    pub uncertainties: Vec<f64>,
    pub mean_phonon: f64,
    pub mean_phonon_sigma: f64,
    pub condition_number: f64,
}

/// Fit red and blue scans to a distribution truncated at `n_max`.
pub fn fit_distribution(red: &SidebandScan, blue: &SidebandScan, n_max: usize) -> Result<FitResult> {
    red.validate()?;
    blue.validate()?;
    if red.branch != Branch::Red || blue.branch != Branch::Blue {
        return Err(Error::invalid("expected one red and one blue scan"));
    }
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !same(red.eta, blue.eta) || !same(red.omega0, blue.omega0) {
        return Err(Error::invalid("red and blue scans must share η and Ω0"));
    }
    if n_max > MAX_FIT_LEVELS {
        return Err(Error::invalid(format!("n_max = {n_max} exceeds {MAX_FIT_LEVELS}")));
    }
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }

    let a_red = design_matrix(Branch::Red, n_max, red.eta, red.omega0, &red.times);
    let a_blue = design_matrix(Branch::Blue, n_max, blue.eta, blue.omega0, &blue.times);
    let k = a_red.ncols();
    let m = a_red.nrows() + a_blue.nrows();
    let mut a = DMatrix::zeros(m, k);
    a.rows_mut(0, a_red.nrows()).copy_from(&a_red);
    a.rows_mut(a_red.nrows(), a_blue.nrows()).copy_from(&a_blue);
    let b = DVector::from_iterator(m, red.p_g.iter().chain(&blue.p_g).copied());

    let condition_number = condition_number(&a);
    if !(condition_number <= MAX_CONDITION_NUMBER) {
        return Err(Error::IllConditionedFit {
            condition_number,
            limit: MAX_CONDITION_NUMBER,
            detail: format!(
                "{} scan points up to {:.1} µs cannot separate the sideband frequencies for n_max = {n_max}",
                m,
                red.times.last().unwrap().max(*blue.times.last().unwrap()) * 1e6
            ),
        });
    }

    let n_pop = 2 * (n_max + 1);
    let (mut x, mut free, mut gram, mut rss) = constrained_solve(&a, &b, n_max, None)?;
    let shots: Option<Vec<f64>> = match (&red.shots, &blue.shots) {
        (Some(r), Some(bl)) => Some(r.iter().chain(bl).map(|&s| s as f64).collect()),
        _ => None,
    };
    if let Some(shots) = shots {
        // Binomial weights from the current model, refined twice.
        for _ in 0..2 {
            let model = &a * &x;
            let w = DVector::from_fn(m, |i, _| {
                let p = model[i].clamp(0.0, 1.0);
                shots[i] / (p * (1.0 - p) + 1.0 / shots[i])
            });
            (x, free, gram, rss) = constrained_solve(&a, &b, n_max, Some(&w))?;
        }
    }

    let residual_norm = (&a * &x - &b).norm();
    let cov = covariance(&gram, &free, n_pop, rss, m)?;
    let uncertainties = (0..k).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let c = DVector::from_fn(k, |i, _| if i < n_pop { (i % (n_max + 1)) as f64 } else { 0.0 });
    let mean_phonon_sigma = (c.transpose() * &cov * &c)[(0, 0)].max(0.0).sqrt();

    let params: Vec<f64> = x.iter().enumerate().map(|(i, &v)| if i < n_pop { v.clamp(0.0, 1.0) } else { v }).collect();
    let distribution = PhononDistribution::from_parameters(n_max, &params)?;
    Ok(FitResult {
        mean_phonon: mean_phonon(&distribution, None),
        distribution,
        residual_norm,
        uncertainties,
        mean_phonon_sigma,
        condition_number,
    })
}

/// Minimizer, free mask, (weighted) Gram matrix and weighted RSS.
type Solution = (DVector<f64>, Vec<bool>, DMatrix<f64>, f64);

/// Solve the constrained problem with optional row weights.
fn constrained_solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    n_max: usize,
    weights: Option<&DVector<f64>>,
) -> Result<Solution> {
    let (mut aw, mut bw) = (a.clone(), b.clone());
    if let Some(w) = weights {
        let mean = w.mean();
        for (i, wi) in w.iter().enumerate() {
            let r = (wi / mean).sqrt();
            aw.row_mut(i).scale_mut(r);
            bw[i] *= r;
        }
    }
    let n_pop = 2 * (n_max + 1);
    let gram = aw.transpose() * &aw;
    let mut linear = -(aw.transpose() * &bw);
    let tie = TIE_BREAK * gram.amax();
    for n in 0..=n_max {
        linear[n] += tie * n as f64;
        linear[n_max + 1 + n] += tie * n as f64;
    }
    let seed = nnls_seed(&aw, &bw, n_pop);
    let (x, free) = active_set(&gram, &linear, n_pop, seed)?;
    let rss = (&aw * &x - &bw).norm_squared();
    Ok((x, free, gram, rss))
}

/// σ_max/σ_min of the design with unit-norm columns.
fn condition_number(a: &DMatrix<f64>) -> f64 {
    let mut scaled = a.clone();
    for mut col in scaled.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    let sv = scaled.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn nnls_seed(a: &DMatrix<f64>, b: &DVector<f64>, n_pop: usize) -> DVector<f64> {
    let (m, k) = a.shape();
    let n_coh = k - n_pop;
    let weight = 1e3 * a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut aug = DMatrix::zeros(m + 1, n_pop + 2 * n_coh);
    aug.view_mut((0, 0), (m, n_pop)).copy_from(&a.columns(0, n_pop));
    aug.view_mut((0, n_pop), (m, n_coh)).copy_from(&a.columns(n_pop, n_coh));
    aug.view_mut((0, n_pop + n_coh), (m, n_coh)).copy_from(&(-a.columns(n_pop, n_coh)));
    for j in 0..n_pop {
        aug[(m, j)] = weight;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs.rows_mut(0, m).copy_from(b);
    rhs[m] = weight;
    let y = nnls(&aug, &rhs);
    DVector::from_fn(k, |i, _| if i < n_pop { y[i] } else { y[i] - y[i + n_coh] })
}

/// Lawson–Hanson nonnegative least squares.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    let mut x = DVector::zeros(k);
    let mut passive = vec![false; k];
    let tol = 1e-12 * a.amax() * b.amax().max(1.0) * a.nrows() as f64;
    for _ in 0..3 * k {
        let w = a.transpose() * (b - a * &x);
        let Some(j) = (0..k).filter(|&j| !passive[j] && w[j] > tol).max_by(|&p, &q| w[p].total_cmp(&w[q])) else {
            break;
        };
        passive[j] = true;
        for _ in 0..3 * k {
            let z = restricted_lstsq(a, b, &passive);
            if (0..k).all(|i| !passive[i] || z[i] > 0.0) {
                x = z;
                break;
            }
            let alpha = (0..k)
                .filter(|&i| passive[i] && z[i] <= 0.0)
                .map(|i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for i in 0..k {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    x
}

fn restricted_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let sub = a.select_columns(&cols);
    let sol = sub.svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| DVector::zeros(cols.len()));
    let mut out = DVector::zeros(passive.len());
    for (s, &c) in cols.iter().enumerate() {
        out[c] = sol[s];
    }
    out
}

/// Minimize ½xᵀGx + gᵀx subject to x_i ≥ 0 and Σ x_i = 1 for i < n_pop.
/// Returns the minimizer and the final free-variable mask.
fn active_set(
    gram: &DMatrix<f64>,
    linear: &DVector<f64>,
    n_pop: usize,
    seed: DVector<f64>,
) -> Result<(DVector<f64>, Vec<bool>)> {
    let k = gram.ncols();
    let mut x = seed;
    for i in 0..n_pop {
        x[i] = x[i].max(0.0);
    }
    let total: f64 = x.rows(0, n_pop).sum();
    for i in 0..n_pop {
        x[i] = if total > 0.0 { x[i] / total } else { 1.0 / n_pop as f64 };
    }
    let mut free: Vec<bool> = (0..k).map(|i| i >= n_pop || x[i] > 0.0).collect();
    let scale = gram.amax().max(1e-300);

    for _ in 0..(20 * k + 200) {
        let idx: Vec<usize> = (0..k).filter(|&i| free[i]).collect();
        let (y, mu) = equality_solve(gram, linear, n_pop, &idx)?;
        let step: Vec<f64> = idx.iter().zip(y.iter()).map(|(&i, &yi)| yi - x[i]).collect();
        let step_size = step.iter().fold(0.0f64, |acc, s| acc.max(s.abs()));
        if step_size <= 1e-14 * (1.0 + x.amax()) {
            let grad = gram * &x + linear;
            let worst = (0..n_pop).filter(|&i| !free[i]).map(|i| (i, grad[i] + mu)).min_by(|p, q| p.1.total_cmp(&q.1));
            match worst {
                Some((i, lambda)) if lambda < -1e-12 * scale => free[i] = true,
                _ => return Ok((x, free)),
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        for (&i, &s) in idx.iter().zip(&step) {
            if i < n_pop && s < 0.0 {
                let r = -x[i] / s;
                if r < alpha {
                    alpha = r;
                    blocking = Some(i);
                }
            }
        }
        for (&i, &s) in idx.iter().zip(&step) {
            x[i] += alpha * s;
        }
        if let Some(i) = blocking {
            x[i] = 0.0;
            free[i] = false;
        }
    }
    Err(Error::NumericalInconsistency("active-set fit did not converge".into()))
}

/// Solve the equality-constrained subproblem on the free set; returns the
/// free-variable values and the normalization multiplier.
fn equality_solve(gram: &DMatrix<f64>, linear: &DVector<f64>, n_pop: usize, idx: &[usize]) -> Result<(Vec<f64>, f64)> {
    let f = idx.len();
    let mut kkt = DMatrix::zeros(f + 1, f + 1);
    let mut rhs = DVector::zeros(f + 1);
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            kkt[(r, c)] = gram[(i, j)];
        }
        if i < n_pop {
            kkt[(r, f)] = 1.0;
            kkt[(f, r)] = 1.0;
        }
        rhs[r] = -linear[i];
    }
    rhs[f] = 1.0;
    let sol = kkt.lu().solve(&rhs).ok_or_else(|| Error::NumericalInconsistency("singular KKT system in fit".into()))?;
    Ok((sol.rows(0, f).iter().copied().collect(), sol[f]))
}

/// s² Z (Zᵀ G Z)⁻¹ Zᵀ on the free set, embedded in the full parameter space.
fn covariance(gram: &DMatrix<f64>, free: &[bool], n_pop: usize, rss: f64, m: usize) -> Result<DMatrix<f64>> {
    let k = gram.ncols();
    let idx: Vec<usize> = (0..k).filter(|&i| free[i]).collect();
    let pivot = idx.iter().position(|&i| i < n_pop).expect("a free population exists");
    let f = idx.len();
    let mut z = DMatrix::zeros(f, f - 1);
    let mut col = 0;
    for r in 0..f {
        if r == pivot {
            continue;
        }
        z[(r, col)] = 1.0;
        if idx[r] < n_pop {
            z[(pivot, col)] = -1.0;
        }
        col += 1;
    }
    let g_ff = gram.select_rows(&idx).select_columns(&idx);
    let reduced = z.transpose() * &g_ff * &z;
    let inv =
        reduced.try_inverse().ok_or_else(|| Error::NumericalInconsistency("singular reduced Hessian in fit".into()))?;
    let dof = m.saturating_sub(f - 1).max(1);
    let cov_ff = &z * inv * z.transpose() * (rss / dof as f64);
    let mut cov = DMatrix::zeros(k, k);
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            cov[(i, j)] = cov_ff[(r, c)];
        }
    }
    Ok(cov)
}

/// Repeated noisy synthesize-and-fit trials.
#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub eta: f64,
    pub omega0: f64,
    pub times: Vec<f64>,
    pub shots: u32,
    pub trials: usize,
    pub n_max: usize,
    pub seed: u64,
    pub execution: Execution,
}

/// Fit `trials` independent noisy scan pairs drawn from `truth`. Each trial
/// derives its seed from the base seed and its index, so results do not
/// depend on the execution mode.
pub fn monte_carlo_fits(truth: &PhononDistribution, cfg: &MonteCarloConfig) -> Result<Vec<FitResult>> {
    let red = synthesize_scan(truth, Branch::Red, cfg.eta, cfg.omega0, &cfg.times)?;
    let blue = synthesize_scan(truth, Branch::Blue, cfg.eta, cfg.omega0, &cfg.times)?;
    cfg.execution
        .map_indexed(cfg.trials, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let noisy_red = red.with_shot_noise(cfg.shots, rng.next_u64())?;
            let noisy_blue = blue.with_shot_noise(cfg.shots, rng.next_u64())?;
            fit_distribution(&noisy_red, &noisy_blue, cfg.n_max)
        })
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI;

    const ETA: f64 = 0.065;
    const OMEGA0: f64 = TWO_PI * 150e3;

    fn grid(t_max_us: f64, points: usize) -> Vec<f64> {
        (0..points).map(|i| i as f64 * t_max_us * 1e-6 / (points - 1) as f64).collect()
    }

    fn scans(d: &PhononDistribution, times: &[f64]) -> (SidebandScan, SidebandScan) {
        (
            synthesize_scan(d, Branch::Red, ETA, OMEGA0, times).unwrap(),
            synthesize_scan(d, Branch::Blue, ETA, OMEGA0, times).unwrap(),
        )
    }

    #[test]
    fn nnls_matches_unconstrained_when_interior() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = nnls(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        let b = DVector::from_vec(vec![-1.0, 2.0, 1.0]);
        let x = nnls(&a, &b);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn round_trip_with_coherences() {
        let d = PhononDistribution::with_coherences(
            vec![0.6, 0.1, 0.02],
            vec![0.03, 0.2, 0.05],
            vec![0.3, 0.05],
            vec![-0.1, 0.02],
        )
        .unwrap();
        let (red, blue) = scans(&d, &grid(250.0, 51));
        let fit = fit_distribution(&red, &blue, 2).unwrap();
        for (got, want) in fit.distribution.to_parameters().iter().zip(d.to_parameters()) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        assert!(fit.residual_norm < 1e-7);
        assert!(fit.mean_phonon_sigma < 1e-6);
    }

    #[test]
    fn vacuum_fit_reports_no_excitation() {
        let d = PhononDistribution::vacuum(5);
        let (red, blue) = scans(&d, &grid(250.0, 51));
        let fit = fit_distribution(&red, &blue, 5).unwrap();
        assert!(fit.mean_phonon < 1e-6);
    }

    #[test]
    fn short_grid_is_ill_conditioned() {
        let d = PhononDistribution::vacuum(5);
        let (red, blue) = scans(&d, &grid(10.0, 51));
        match fit_distribution(&red, &blue, 5) {
            Err(Error::IllConditionedFit { condition_number, .. }) => assert!(condition_number > MAX_CONDITION_NUMBER),
            other => panic!("expected ill-conditioned fit, got {other:?}"),
        }
    }

    #[test]
    fn precondition_errors() {
        let d = PhononDistribution::vacuum(2);
        let (red, blue) = scans(&d, &grid(250.0, 51));
        assert!(fit_distribution(&red, &blue, 6).is_err());
        assert!(fit_distribution(&blue, &red, 2).is_err());
        let mut other = blue.clone();
        other.eta = 0.07;
        assert!(fit_distribution(&red, &other, 2).is_err());
    }

    #[test]
    fn monte_carlo_independent_of_execution() {
        let d = PhononDistribution::new(vec![0.76, 0.01], vec![0.005, 0.225]).unwrap();
        let mut cfg = MonteCarloConfig {
            eta: ETA,
            omega0: OMEGA0,
            times: grid(250.0, 51),
            shots: 100,
            trials: 6,
            n_max: 3,
            seed: 11,
            execution: Execution::Sequential,
        };
        let a: Vec<f64> = monte_carlo_fits(&d, &cfg).unwrap().iter().map(|f| f.mean_phonon).collect();
        cfg.execution = Execution::Parallel;
        let b: Vec<f64> = monte_carlo_fits(&d, &cfg).unwrap().iter().map(|f| f.mean_phonon).collect();
        assert_eq!(a, b);
    }
}
