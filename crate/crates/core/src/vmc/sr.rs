use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SampleBatch;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SrSolver {
    /// Cholesky factorization of the shifted overlap matrix.
    Direct,
    /// Matrix-free conjugate gradient.
    ConjugateGradient { tolerance: f64, max_iter: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrConfig {
    pub learning_rate: f64,
    /// Initial diagonal regularizer.
    pub diag_shift: f64,
    /// Value the regularizer decays to geometrically over `max_steps`.
    pub diag_shift_floor: f64,
    pub solver: SrSolver,
    pub max_steps: usize,
}

/// Parameter counts above which the default solver is iterative.
pub const DIRECT_SOLVE_LIMIT: usize = 2000;

impl Default for SrConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            diag_shift: 1e-3,
            diag_shift_floor: 1e-5,
            solver: SrSolver::Direct,
            max_steps: 5000,
        }
    }
}

impl SrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if !(self.diag_shift >= 0.0 && self.diag_shift_floor >= 0.0) {
            return Err(Error::InvalidArgument("diag_shift must be non-negative".into()));
        }
        if let SrSolver::ConjugateGradient { tolerance, max_iter } = self.solver {
            if !(tolerance > 0.0) || max_iter == 0 {
                return Err(Error::InvalidArgument(
                    "conjugate-gradient tolerance and max_iter must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Regularizer used at optimization step `step`.
    pub fn shift_at(&self, step: usize) -> f64 {
        let (s0, floor) = (self.diag_shift, self.diag_shift_floor);
        if self.max_steps == 0 || s0 <= floor || floor <= 0.0 {
            return s0;
        }
        let rate = (floor / s0).powf(1.0 / self.max_steps as f64);
        (s0 * rate.powi(step as i32)).max(floor)
    }
}

/// Weighted, centered rows `Y = √w (O − ⟨O⟩)` and `e = √w (E − ⟨E⟩)`.
fn centered(batch: &SampleBatch) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    let (n, p) = (batch.len(), batch.n_params);
    if n < 2 {
        return Err(Error::InvalidArgument("stochastic reconfiguration needs at least 2 samples".into()));
    }
    if batch.log_derivs.len() != n * p {
        return Err(Error::DimensionMismatch { expected: n * p, got: batch.log_derivs.len() });
    }
    let mut mean = vec![Complex64::new(0.0, 0.0); p];
    for (k, w) in batch.weights.iter().enumerate() {
        for (m, o) in mean.iter_mut().zip(batch.log_deriv_row(k)) {
            *m += o * w;
        }
    }
    let e_mean = batch.energy();
    let y = DMatrix::from_fn(n, p, |k, q| (batch.log_derivs[k * p + q] - mean[q]) * batch.weights[k].sqrt());
    let e = DVector::from_fn(n, |k, _| (batch.local_energies[k] - e_mean) * batch.weights[k].sqrt());
    Ok((y, e))
}

/// Overlap matrix `S` and force `F` of a batch.
pub fn sr_matrices(batch: &SampleBatch) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    let (y, e) = centered(batch)?;
    Ok((y.ad_mul(&y), y.ad_mul(&e)))
}

/// `−lr (S + shift·I)⁻¹ F`.
pub fn sr_increment(batch: &SampleBatch, learning_rate: f64, shift: f64, solver: SrSolver) -> Result<Vec<Complex64>> {
    let (y, e) = centered(batch)?;
    let f = y.ad_mul(&e);
    if f.iter().all(|z| z.norm_sqr() == 0.0) {
        return Ok(vec![Complex64::new(0.0, 0.0); batch.n_params]);
    }
    let x = match solver {
        SrSolver::Direct => {
            let mut s = y.ad_mul(&y);
            for k in 0..s.nrows() {
                s[(k, k)] += shift;
            }
            match s.clone().cholesky() {
                Some(ch) => ch.solve(&f),
                None => {
                    let residual = f.norm();
                    return Err(Error::SolverFailed { residual });
                }
            }
        }
        SrSolver::ConjugateGradient { tolerance, max_iter } => {
            conjugate_gradient(|v| y.ad_mul(&(&y * v)) + v * Complex64::new(shift, 0.0), &f, tolerance, max_iter)?
        }
    };
    Ok(x.iter().map(|z| -z * learning_rate).collect())
}

/// Increment for `cfg` with its initial regularizer.
pub fn sr_step(batch: &SampleBatch, cfg: &SrConfig) -> Result<Vec<Complex64>> {
    sr_increment(batch, cfg.learning_rate, cfg.diag_shift, cfg.solver)
}

fn conjugate_gradient<F>(apply: F, b: &DVector<Complex64>, tol: f64, max_iter: usize) -> Result<DVector<Complex64>>
where
    F: Fn(&DVector<Complex64>) -> DVector<Complex64>,
{
    let mut x = DVector::zeros(b.len());
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let target = tol * b.norm();
    for _ in 0..max_iter {
        if rr.sqrt() <= target {
            return Ok(x);
        }
        let ap = apply(&p);
        let alpha = rr / p.dotc(&ap).re;
        x += &p * Complex64::new(alpha, 0.0);
        r -= &ap * Complex64::new(alpha, 0.0);
        let rr_new = r.norm_squared();
        p = &r + &p * Complex64::new(rr_new / rr, 0.0);
        rr = rr_new;
    }
    if rr.sqrt() <= target {
        Ok(x)
    } else {
        Err(Error::NoConvergence { residual: rr.sqrt() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Basis, SpinConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_batch(n: usize, p: usize, seed: u64) -> SampleBatch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let log_derivs = (0..n * p).map(|_| c()).collect();
        let local_energies = (0..n).map(|_| c()).collect();
        SampleBatch {
            configs: vec![SpinConfig::parse("0", Basis::Sz).unwrap(); n],
            log_derivs,
            n_params: p,
            local_energies,
            weights: vec![1.0 / n as f64; n],
            acceptance_rate: 0.5,
            sampled: true,
        }
    }

    #[test]
    fn overlap_is_hermitian_psd() {
        for seed in 0..5 {
            // fewer samples than parameters: rank deficient
            let b = random_batch(6, 10, seed);
            let (s, _) = sr_matrices(&b).unwrap();
            assert!((&s - s.adjoint()).norm() < 1e-12);
            let min = s.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-10, "{min}");
        }
    }

    #[test]
    fn zero_force_gives_zero_increment() {
        let mut b = random_batch(8, 3, 1);
        b.local_energies = vec![Complex64::new(-1.5, 0.0); 8];
        let d = sr_step(&b, &SrConfig::default()).unwrap();
        assert!(d.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn solvers_agree() {
        let b = random_batch(40, 12, 2);
        let direct = sr_increment(&b, 0.1, 1e-3, SrSolver::Direct).unwrap();
        let cg = sr_increment(&b, 0.1, 1e-3, SrSolver::ConjugateGradient { tolerance: 1e-12, max_iter: 500 }).unwrap();
        for (a, c) in direct.iter().zip(&cg) {
            assert!((a - c).norm() < 1e-8 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn large_shift_is_plain_gradient() {
        let b = random_batch(30, 5, 3);
        let shift = 1e8;
        let d = sr_increment(&b, 1.0, shift, SrSolver::Direct).unwrap();
        let (_, f) = sr_matrices(&b).unwrap();
        for (x, fk) in d.iter().zip(f.iter()) {
            let plain = -fk / shift;
            assert!((x - plain).norm() < 1e-6 * plain.norm());
        }
    }

    #[test]
    fn shift_schedule_decays_to_floor() {
        let cfg = SrConfig { max_steps: 100, ..SrConfig::default() };
        assert_eq!(cfg.shift_at(0), 1e-3);
        assert!((cfg.shift_at(100) - 1e-5).abs() < 1e-12);
        assert!(cfg.shift_at(50) < 1e-3 && cfg.shift_at(50) > 1e-5);
        assert_eq!(cfg.shift_at(1000), 1e-5);
    }
}
