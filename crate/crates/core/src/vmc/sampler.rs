use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimator::local_energy_cached;
use crate::ansatz::{Ansatz, Variational};
use crate::error::{Error, Result};
use crate::hilbert::{enumerate_sector, Basis, SectorSpec, SpinConfig};
use crate::model::BondHamiltonian;

const START_ATTEMPTS: usize = 1000;
const PAIR_DRAWS: usize = 64;

/// Relative weights of the move types. In the unrestricted sector the pair
/// slot proposes a single-site change instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveMix {
    pub exchange: f64,
    pub pair: f64,
}

impl Default for MoveMix {
    fn default() -> Self {
        Self { exchange: 0.5, pair: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_samp: usize,
    /// Proposals between retained samples.
    pub decorrelation: usize,
    /// Proposals discarded at the start of each chain.
    pub burn_in: usize,
    pub rng_seed: u64,
    pub move_mix: MoveMix,
    /// Independent chains whose samples are concatenated in chain order.
    pub n_chains: usize,
}

impl SamplerConfig {
    /// Defaults for an N-site chain: N proposals between samples.
    pub fn for_sites(n_sites: usize) -> Self {
        Self {
            n_samp: 8000,
            decorrelation: n_sites.max(1),
            burn_in: 50 * n_sites.max(1),
            rng_seed: 1,
            move_mix: MoveMix::default(),
            n_chains: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samp == 0 {
            return Err(Error::InvalidArgument("n_samp must be at least 1".into()));
        }
        if self.decorrelation == 0 {
            return Err(Error::InvalidArgument("decorrelation must be at least 1".into()));
        }
        if self.n_chains == 0 {
            return Err(Error::InvalidArgument("n_chains must be at least 1".into()));
        }
        let m = self.move_mix;
        if !(m.exchange >= 0.0 && m.pair >= 0.0 && m.exchange + m.pair > 0.0) {
            return Err(Error::InvalidArgument("move weights must be non-negative with a positive sum".into()));
        }
        Ok(())
    }
}

/// Estimates from a set of configurations, optionally with `O_k` rows.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub configs: Vec<SpinConfig>,
    /// Row-major `len × n_params`; empty when derivatives were not requested.
    pub log_derivs: Vec<Complex64>,
    pub n_params: usize,
    pub local_energies: Vec<Complex64>,
    /// Normalized probability weight of each row.
    pub weights: Vec<f64>,
    pub acceptance_rate: f64,
    /// Set for Markov-chain batches, where rows are equally weighted draws.
    pub sampled: bool,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn log_deriv_row(&self, k: usize) -> &[Complex64] {
        &self.log_derivs[k * self.n_params..(k + 1) * self.n_params]
    }

    /// Weighted mean of the local energies.
    pub fn energy(&self) -> Complex64 {
        self.local_energies.iter().zip(&self.weights).map(|(e, w)| e * w).sum()
    }

    /// Standard error of [`SampleBatch::energy`] from `n_blocks` batch means;
    /// zero for exact batches.
    pub fn energy_error(&self, n_blocks: usize) -> f64 {
        if !self.sampled || self.len() < 2 {
            return 0.0;
        }
        let n_blocks = n_blocks.clamp(2, self.len());
        let size = self.len() / n_blocks;
        let means: Vec<f64> = (0..n_blocks)
            .map(|b| self.local_energies[b * size..(b + 1) * size].iter().map(|e| e.re).sum::<f64>() / size as f64)
            .collect();
        let mu = means.iter().sum::<f64>() / n_blocks as f64;
        let var = means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (n_blocks - 1) as f64;
        (var / n_blocks as f64).sqrt()
    }

    /// Weighted variance of the local energy.
    pub fn energy_variance(&self) -> f64 {
        let mu = self.energy();
        self.local_energies.iter().zip(&self.weights).map(|(e, w)| w * (e - mu).norm_sqr()).sum()
    }
}

/// A proposed change of at most two sites; `len == 0` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    changes: [(usize, u8); 2],
    len: usize,
}

impl Move {
    pub const IDENTITY: Move = Move { changes: [(0, 0); 2], len: 0 };

    fn one(j: usize, s: u8) -> Self {
        Self { changes: [(j, s), (0, 0)], len: 1 }
    }

    fn two(i: usize, si: u8, j: usize, sj: u8) -> Self {
        Self { changes: [(i, si), (j, sj)], len: 2 }
    }

    pub fn changes(&self) -> &[(usize, u8)] {
        &self.changes[..self.len]
    }

    pub fn is_identity(&self) -> bool {
        self.len == 0
    }
}

fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Swap of two sites holding different values, uniform over such pairs.
fn exchange_move<R: Rng + ?Sized>(sites: &[u8], rng: &mut R) -> Move {
    let n = sites.len();
    if n < 2 || sites.iter().all(|&s| s == sites[0]) {
        return Move::IDENTITY;
    }
    for _ in 0..PAIR_DRAWS {
        let (i, j) = random_pair(n, rng);
        if sites[i] != sites[j] {
            return Move::two(i, sites[j], j, sites[i]);
        }
    }
    // rejection failed: fall back to an exhaustive uniform choice
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| sites[i] != sites[j]).collect();
    let (i, j) = pairs[rng.random_range(0..pairs.len())];
    Move::two(i, sites[j], j, sites[i])
}

/// Ordered pair (i, j): (⇑, ⇓) ↔ (0, 0); anything else is the identity.
fn sz_pair_move<R: Rng + ?Sized>(sites: &[u8], rng: &mut R) -> Move {
    if sites.len() < 2 {
        return Move::IDENTITY;
    }
    let (i, j) = random_pair(sites.len(), rng);
    match (sites[i], sites[j]) {
        (0, 2) => Move::two(i, 1, j, 1),
        (1, 1) => Move::two(i, 0, j, 2),
        _ => Move::IDENTITY,
    }
}

/// Two equal sites retyped to one of the two other values.
fn xyz_retype_move<R: Rng + ?Sized>(sites: &[u8], rng: &mut R) -> Move {
    if sites.len() < 2 {
        return Move::IDENTITY;
    }
    let (i, j) = random_pair(sites.len(), rng);
    if sites[i] != sites[j] {
        return Move::IDENTITY;
    }
    let s = (sites[i] + rng.random_range(1..3u8)) % 3;
    Move::two(i, s, j, s)
}

fn single_site_move<R: Rng + ?Sized>(sites: &[u8], rng: &mut R) -> Move {
    let j = rng.random_range(0..sites.len());
    Move::one(j, (sites[j] + rng.random_range(1..3u8)) % 3)
}

/// Draws a symmetric, sector-preserving proposal for `sites`.
pub fn propose_move<R: Rng + ?Sized>(
    sites: &[u8],
    basis: Basis,
    sector: SectorSpec,
    mix: MoveMix,
    rng: &mut R,
) -> Move {
    let total = mix.exchange + mix.pair;
    if rng.random::<f64>() * total < mix.exchange {
        return exchange_move(sites, rng);
    }
    match (sector, basis) {
        (SectorSpec::None, _) => single_site_move(sites, rng),
        (_, Basis::Sz) => sz_pair_move(sites, rng),
        (_, Basis::Xyz) => xyz_retype_move(sites, rng),
    }
}

/// Some configuration of the sector, in a canonical arrangement.
fn canonical_start(n: usize, basis: Basis, sector: SectorSpec) -> Result<Vec<u8>> {
    sector.validate(n, basis)?;
    Ok(match sector {
        SectorSpec::None => vec![1; n],
        SectorSpec::TotalSz(t) => {
            let polarized = t.unsigned_abs() as usize;
            let rest = n - polarized;
            let mut s = vec![if t > 0 { 0 } else { 2 }; polarized];
            if rest % 2 == 1 {
                s.push(1);
            }
            for _ in 0..rest / 2 {
                s.extend([0, 2]);
            }
            s
        }
        SectorSpec::ParityXyz(px, py, pz) => {
            let mut s = Vec::with_capacity(n);
            for (v, p) in [(0u8, px), (1, py), (2, pz)] {
                if p == 1 {
                    s.push(v);
                }
            }
            s.resize(n, 2);
            s
        }
    })
}

/// Random sector configuration with nonzero amplitude, found by scrambling
/// a canonical one with unconditionally accepted moves.
pub fn random_start<A: Ansatz, R: Rng + ?Sized>(
    ansatz: &A,
    basis: Basis,
    sector: SectorSpec,
    mix: MoveMix,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let n = ansatz.n_sites();
    let mut sites = canonical_start(n, basis, sector)?;
    for _ in 0..START_ATTEMPTS {
        for _ in 0..4 * n {
            let mv = propose_move(&sites, basis, sector, mix, rng);
            for &(j, s) in mv.changes() {
                sites[j] = s;
            }
        }
        if ansatz.log_psi(&sites).is_some() {
            return Ok(sites);
        }
    }
    Err(Error::NoStartConfig(START_ATTEMPTS))
}

/// Chain RNG derived from a seed and a stream index.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for a sub-task, derived from a parent seed and a tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    stream_rng(seed, tag.wrapping_add(1 << 32)).next_u64()
}

struct ChainOutput {
    samples: Vec<Vec<u8>>,
    accepted: usize,
    proposed: usize,
}

fn run_chain<A: Ansatz>(
    ansatz: &A,
    basis: Basis,
    sector: SectorSpec,
    cfg: &SamplerConfig,
    chain: usize,
    n_keep: usize,
) -> Result<ChainOutput> {
    let mut rng = stream_rng(cfg.rng_seed, chain as u64);
    let mut sites = random_start(ansatz, basis, sector, cfg.move_mix, &mut rng)?;
    let mut cache = ansatz.cache(&sites);
    let mut out = ChainOutput { samples: Vec::with_capacity(n_keep), accepted: 0, proposed: 0 };
    let mut old = [0u8; 2];
    let mut step = |sites: &mut Vec<u8>, cache: &mut A::Cache, out: &mut ChainOutput, rng: &mut ChaCha8Rng| {
        let mv = propose_move(sites, basis, sector, cfg.move_mix, rng);
        if mv.is_identity() {
            return;
        }
        out.proposed += 1;
        let Some(log_ratio) = ansatz.log_psi_ratio(cache, sites, mv.changes()) else {
            return;
        };
        let p = (2.0 * log_ratio.re).exp();
        if p >= 1.0 || rng.random::<f64>() < p {
            for (k, &(j, s)) in mv.changes().iter().enumerate() {
                old[k] = sites[j];
                sites[j] = s;
            }
            ansatz.update_cache(cache, sites, mv.changes(), &old[..mv.changes().len()]);
            out.accepted += 1;
        }
    };
    for _ in 0..cfg.burn_in {
        step(&mut sites, &mut cache, &mut out, &mut rng);
    }
    for _ in 0..n_keep {
        for _ in 0..cfg.decorrelation {
            step(&mut sites, &mut cache, &mut out, &mut rng);
        }
        out.samples.push(sites.clone());
    }
    Ok(out)
}

/// Markov-chain configurations distributed as `|Ψ|²` within `sector`,
/// together with the acceptance rate.
pub fn sample_configs<A: Ansatz>(
    ansatz: &A,
    basis: Basis,
    sector: SectorSpec,
    cfg: &SamplerConfig,
) -> Result<(Vec<SpinConfig>, f64)> {
    cfg.validate()?;
    let chains = cfg.n_chains.min(cfg.n_samp);
    let per_chain: Vec<usize> =
        (0..chains).map(|c| cfg.n_samp / chains + usize::from(c < cfg.n_samp % chains)).collect();
    let outputs: Vec<ChainOutput> = per_chain
        .par_iter()
        .enumerate()
        .map(|(c, &k)| run_chain(ansatz, basis, sector, cfg, c, k))
        .collect::<Result<_>>()?;
    let (mut acc, mut prop) = (0usize, 0usize);
    let mut configs = Vec::with_capacity(cfg.n_samp);
    for o in outputs {
        acc += o.accepted;
        prop += o.proposed;
        configs.extend(o.samples.into_iter().map(|s| SpinConfig::from_raw(s, basis)));
    }
    let rate = if prop == 0 { 0.0 } else { acc as f64 / prop as f64 };
    Ok((configs, rate))
}

fn check_model(ansatz_sites: usize, h: &BondHamiltonian) -> Result<()> {
    if ansatz_sites != h.n_sites {
        return Err(Error::DimensionMismatch { expected: h.n_sites, got: ansatz_sites });
    }
    Ok(())
}

/// Sampled local energies without derivatives.
pub fn metropolis_sample<A: Ansatz>(
    ansatz: &A,
    sector: SectorSpec,
    h: &BondHamiltonian,
    cfg: &SamplerConfig,
) -> Result<SampleBatch> {
    check_model(ansatz.n_sites(), h)?;
    let (configs, rate) = sample_configs(ansatz, h.basis, sector, cfg)?;
    let local_energies = configs
        .par_iter()
        .map(|c| {
            let cache = ansatz.cache(c.sites());
            local_energy_cached(ansatz, h, c.sites(), &cache)
        })
        .collect();
    let w = 1.0 / configs.len() as f64;
    Ok(SampleBatch {
        weights: vec![w; configs.len()],
        configs,
        log_derivs: Vec::new(),
        n_params: 0,
        local_energies,
        acceptance_rate: rate,
        sampled: true,
    })
}

fn with_derivatives<A: Variational>(
    ansatz: &A,
    h: &BondHamiltonian,
    configs: Vec<SpinConfig>,
    weights: Vec<f64>,
    rate: f64,
    sampled: bool,
) -> SampleBatch {
    let p = ansatz.n_params();
    let rows: Vec<(Complex64, Vec<Complex64>)> = configs
        .par_iter()
        .map(|c| {
            let cache = ansatz.cache(c.sites());
            let e = local_energy_cached(ansatz, h, c.sites(), &cache);
            let mut d = vec![Complex64::new(0.0, 0.0); p];
            ansatz.log_derivatives(c.sites(), &cache, &mut d);
            (e, d)
        })
        .collect();
    let mut local_energies = Vec::with_capacity(rows.len());
    let mut log_derivs = Vec::with_capacity(rows.len() * p);
    for (e, d) in rows {
        local_energies.push(e);
        log_derivs.extend(d);
    }
    SampleBatch { configs, log_derivs, n_params: p, local_energies, weights, acceptance_rate: rate, sampled }
}

/// Sampled local energies and log-derivatives.
pub fn metropolis_sample_variational<A: Variational>(
    ansatz: &A,
    sector: SectorSpec,
    h: &BondHamiltonian,
    cfg: &SamplerConfig,
) -> Result<SampleBatch> {
    check_model(ansatz.n_sites(), h)?;
    let (configs, rate) = sample_configs(ansatz, h.basis, sector, cfg)?;
    let w = vec![1.0 / configs.len() as f64; configs.len()];
    Ok(with_derivatives(ansatz, h, configs, w, rate, true))
}

/// Exact expectation batch: every sector configuration with nonzero
/// amplitude, weighted by the normalized `|Ψ|²`.
pub fn exact_batch<A: Variational>(ansatz: &A, sector: SectorSpec, h: &BondHamiltonian) -> Result<SampleBatch> {
    check_model(ansatz.n_sites(), h)?;
    let all = enumerate_sector(h.n_sites, h.basis, sector)?;
    let logs: Vec<Option<Complex64>> = all.par_iter().map(|c| ansatz.log_psi(c.sites())).collect();
    let top = logs.iter().flatten().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let mut configs = Vec::new();
    let mut weights = Vec::new();
    for (c, l) in all.into_iter().zip(logs) {
        if let Some(l) = l {
            let w = (2.0 * (l.re - top)).exp();
            if w > 0.0 {
                configs.push(c);
                weights.push(w);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(with_derivatives(ansatz, h, configs, weights, 1.0, false))
}
