use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::{derive_seed, exact_batch, metropolis_sample, metropolis_sample_variational, stream_rng};
use super::sr::sr_increment;
use super::{SampleBatch, SamplerConfig, SrConfig};
use crate::ansatz::{Ansatz, Variational};
use crate::error::{Error, Result};
use crate::exact::{dense_from_ansatz, fidelity, LowSpectrum};
use crate::hilbert::SectorSpec;
use crate::model::BondHamiltonian;

/// How expectation values are estimated during optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Markov-chain samples.
    Sampled,
    /// Full enumeration of the sector weighted by `|Ψ|²`.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmcConfig {
    pub sampler: SamplerConfig,
    pub sr: SrConfig,
    pub estimator: Estimator,
    /// Half-width of the uniform distribution for fresh parameters.
    pub init_scale: f64,
    /// Batch-mean blocks used for sampled error bars.
    pub n_blocks: usize,
}

impl VmcConfig {
    pub fn for_sites(n_sites: usize) -> Self {
        Self {
            sampler: SamplerConfig::for_sites(n_sites),
            sr: SrConfig::default(),
            estimator: Estimator::Sampled,
            init_scale: 0.01,
            n_blocks: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        self.sr.validate()?;
        if !(self.init_scale >= 0.0) {
            return Err(Error::InvalidArgument("init_scale must be non-negative".into()));
        }
        Ok(())
    }
}

/// One optimization step of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub rerun: usize,
    pub e_mean: f64,
    pub e_std: f64,
    pub acceptance: f64,
    pub increment_norm: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub params: Vec<Complex64>,
    pub energy: f64,
    pub energy_error: f64,
}

fn estimate<A: Variational>(
    ansatz: &A,
    sector: SectorSpec,
    h: &BondHamiltonian,
    cfg: &VmcConfig,
    seed: u64,
) -> Result<SampleBatch> {
    match cfg.estimator {
        Estimator::Exact => exact_batch(ansatz, sector, h),
        Estimator::Sampled => {
            let sampler = SamplerConfig { rng_seed: seed, ..cfg.sampler.clone() };
            metropolis_sample_variational(ansatz, sector, h, &sampler)
        }
    }
}

/// Runs stochastic reconfiguration on `ansatz` in place and evaluates the
/// final energy with a fresh estimate.
pub fn optimize<A: Variational>(
    ansatz: &mut A,
    sector: SectorSpec,
    h: &BondHamiltonian,
    cfg: &VmcConfig,
    seed: u64,
    tag: (usize, usize),
    log: &mut dyn FnMut(&StepRecord),
) -> Result<RunResult> {
    cfg.validate()?;
    let start = Instant::now();
    for step in 0..cfg.sr.max_steps {
        let batch = estimate(ansatz, sector, h, cfg, derive_seed(seed, step as u64))?;
        let energy = batch.energy().re;
        if !energy.is_finite() {
            return Err(Error::NoConvergence { residual: energy });
        }
        let mut shift = cfg.sr.shift_at(step);
        let delta = loop {
            match sr_increment(&batch, cfg.sr.learning_rate, shift, cfg.sr.solver) {
                Ok(d) => break d,
                Err(Error::SolverFailed { .. } | Error::NoConvergence { .. }) if shift < 1.0 => {
                    shift = (shift * 10.0).max(1e-8);
                }
                Err(e) => return Err(e),
            }
        };
        let increment_norm = delta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        ansatz.add_to_params(&delta);
        log(&StepRecord {
            step,
            m: ansatz.n_hidden(),
            rerun: tag.1,
            e_mean: energy,
            e_std: batch.energy_error(cfg.n_blocks),
            acceptance: batch.acceptance_rate,
            increment_norm,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    let batch = estimate(ansatz, sector, h, cfg, derive_seed(seed, u64::MAX))?;
    let energy = batch.energy().re;
    if !energy.is_finite() {
        return Err(Error::NoConvergence { residual: energy });
    }
    Ok(RunResult { params: ansatz.params(), energy, energy_error: batch.energy_error(cfg.n_blocks) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub m_max: usize,
    pub reruns: usize,
    pub seed: u64,
    pub vmc: VmcConfig,
}

/// Best result at one network size.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthStep {
    #[serde(rename = "M")]
    pub m: usize,
    pub n_params: usize,
    pub energy: f64,
    pub energy_error: f64,
    pub infidelity: Option<f64>,
    /// Energy error over the sector gap.
    pub resolution: Option<f64>,
    #[serde(skip)]
    pub params: Vec<Complex64>,
}

fn random_values(n: usize, scale: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-scale..=scale), rng.random_range(-scale..=scale))).collect()
}

/// Grows the network one hidden unit at a time up to `m_max`, seeding each
/// size with the best parameters of the previous one. `initial` must have no
/// hidden units; its parameters are replaced by random values.
pub fn sequential_growth<A: Variational>(
    initial: &A,
    sector: SectorSpec,
    h: &BondHamiltonian,
    cfg: &GrowthConfig,
    reference: Option<&LowSpectrum>,
    log: &mut dyn FnMut(&StepRecord),
) -> Result<Vec<GrowthStep>> {
    if cfg.m_max == 0 || cfg.reruns == 0 {
        return Err(Error::InvalidArgument("m_max and reruns must be at least 1".into()));
    }
    if initial.n_hidden() != 0 {
        return Err(Error::InvalidArgument("growth starts from a machine without hidden units".into()));
    }
    cfg.vmc.validate()?;
    let scale = cfg.vmc.init_scale;
    let mut results: Vec<GrowthStep> = Vec::new();
    let mut base = initial.clone();
    for m in 1..=cfg.m_max {
        let m_seed = derive_seed(cfg.seed, m as u64);
        let mut best: Option<(A, RunResult)> = None;
        let mut last_err = None;
        for r in 0..cfg.reruns {
            let run_seed = derive_seed(m_seed, r as u64);
            let mut rng = stream_rng(run_seed, 0);
            let mut ansatz = base.clone();
            if m == 1 {
                let p = random_values(ansatz.n_params(), scale, &mut rng);
                ansatz.set_params(&p);
            }
            let unit = random_values(ansatz.hidden_unit_len(), scale, &mut rng);
            ansatz.push_hidden(&unit);
            match optimize(&mut ansatz, sector, h, &cfg.vmc, run_seed, (m, r), log) {
                Ok(run) => {
                    if best.as_ref().is_none_or(|(_, b)| run.energy < b.energy) {
                        best = Some((ansatz, run));
                    }
                }
                Err(e @ Error::NoConvergence { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        let Some((ansatz, run)) = best else {
            return Err(last_err.unwrap_or(Error::NoConvergence { residual: f64::NAN }));
        };
        let (infidelity, resolution) = match reference {
            Some(spec) => {
                let psi = dense_from_ansatz(&ansatz, h.basis, sector)?;
                let f = fidelity(&psi, &spec.ground_state)?;
                let res = (spec.gap > 0.0).then(|| run.energy_error / spec.gap);
                (Some((1.0 - f).max(0.0)), res)
            }
            None => (None, None),
        };
        results.push(GrowthStep {
            m,
            n_params: ansatz.n_params(),
            energy: run.energy,
            energy_error: run.energy_error,
            infidelity,
            resolution,
            params: run.params,
        });
        base = ansatz;
    }
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticsPoint {
    pub n_samp: usize,
    pub runs: usize,
    /// Mean over runs of the run energy estimates.
    pub mean: f64,
    /// Standard deviation of the run energy estimates.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyStatistics {
    pub points: Vec<StatisticsPoint>,
    /// Least-squares slope of `ln spread` against `ln n_samp`.
    pub slope: Option<f64>,
}

/// Slope of the least-squares line through `(x, y)`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Spread of independent sampled energy estimates for each sample size.
pub fn energy_statistics<A: Ansatz>(
    ansatz: &A,
    sector: SectorSpec,
    h: &BondHamiltonian,
    cfg: &SamplerConfig,
    n_samp_grid: &[usize],
    n_runs: usize,
) -> Result<EnergyStatistics> {
    if n_runs < 2 {
        return Err(Error::InvalidArgument("energy statistics need at least 2 runs".into()));
    }
    let mut points = Vec::with_capacity(n_samp_grid.len());
    for &n_samp in n_samp_grid {
        let point_seed = derive_seed(cfg.rng_seed, n_samp as u64);
        let energies: Vec<f64> = (0..n_runs)
            .into_par_iter()
            .map(|r| {
                let run_cfg = SamplerConfig { n_samp, rng_seed: derive_seed(point_seed, r as u64), ..cfg.clone() };
                metropolis_sample(ansatz, sector, h, &run_cfg).map(|b| b.energy().re)
            })
            .collect::<Result<_>>()?;
        let mean = energies.iter().sum::<f64>() / n_runs as f64;
        let var = energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n_runs - 1) as f64;
        points.push(StatisticsPoint { n_samp, runs: n_runs, mean, spread: var.sqrt() });
    }
    let usable: Vec<&StatisticsPoint> = points.iter().filter(|p| p.spread > 0.0).collect();
    let slope = if usable.len() == points.len() {
        let x: Vec<f64> = usable.iter().map(|p| (p.n_samp as f64).ln()).collect();
        let y: Vec<f64> = usable.iter().map(|p| p.spread.ln()).collect();
        fit_slope(&x, &y)
    } else {
        None
    };
    Ok(EnergyStatistics { points, slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let x: Vec<f64> = [1000.0f64, 2000.0, 4000.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [1000.0f64, 2000.0, 4000.0].iter().map(|v| (3.0 / v.sqrt()).ln()).collect();
        assert!((fit_slope(&x, &y).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(fit_slope(&x[..1], &y[..1]), None);
    }
}
