//! Exact diagonalization, AKLT constructions and dense-state observables.

mod aklt;
mod ed;

pub use aklt::{aklt_nqs_sz, aklt_nqs_xyz, aklt_sz_hidden_count, mps_amplitude, sz_couplings, xyz_couplings, AkltMps};
pub use ed::{exact_ground_state, exact_low_spectrum, LowSpectrum, SectorHamiltonian, DENSE_LIMIT, MAX_SECTOR_DIM};

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::hilbert::{enumerate_sector, Basis, SectorSpec, SpinConfig, VISIBLE};

/// Amplitude table over one sector, configurations in enumeration order.
#[derive(Debug, Clone)]
pub struct DenseState {
    pub n_sites: usize,
    pub basis: Basis,
    pub sector: SectorSpec,
    configs: Vec<SpinConfig>,
    codes: Vec<usize>,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn new(
        n_sites: usize,
        basis: Basis,
        sector: SectorSpec,
        configs: Vec<SpinConfig>,
        amps: Vec<Complex64>,
    ) -> Result<Self> {
        if configs.len() != amps.len() {
            return Err(Error::DimensionMismatch { expected: configs.len(), got: amps.len() });
        }
        if amps.iter().all(|a| a.norm_sqr() == 0.0) {
            return Err(Error::ZeroNorm);
        }
        let codes: Vec<usize> = configs.iter().map(|c| c.code()).collect();
        if codes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("configurations must be in enumeration order".into()));
        }
        Ok(Self { n_sites, basis, sector, configs, codes, amps })
    }

    /// Evaluates `f` on every configuration of the sector.
    pub fn from_fn<F>(n_sites: usize, basis: Basis, sector: SectorSpec, f: F) -> Result<Self>
    where
        F: Fn(&SpinConfig) -> Complex64 + Sync,
    {
        let configs = enumerate_sector(n_sites, basis, sector)?;
        let amps = configs.par_iter().map(&f).collect();
        Self::new(n_sites, basis, sector, configs, amps)
    }

    pub fn configs(&self) -> &[SpinConfig] {
        &self.configs
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        let mut out = self.clone();
        for a in &mut out.amps {
            *a /= n;
        }
        out
    }

    /// Position of the configuration with raw local indices `sites`.
    pub fn index_of(&self, sites: &[u8]) -> Option<usize> {
        if sites.len() != self.n_sites {
            return None;
        }
        let code = sites.iter().fold(0usize, |acc, &s| acc * 3 + s as usize);
        self.codes.binary_search(&code).ok()
    }

    /// Amplitude of `sites`; zero outside the sector.
    pub fn amplitude_of(&self, sites: &[u8]) -> Complex64 {
        self.index_of(sites).map_or(Complex64::new(0.0, 0.0), |k| self.amps[k])
    }

    fn check_aligned(&self, other: &DenseState) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch { expected: self.basis.to_string(), got: other.basis.to_string() });
        }
        if self.codes != other.codes {
            return Err(Error::InvalidArgument(format!(
                "states live on different sectors ({} vs {})",
                self.sector, other.sector
            )));
        }
        Ok(())
    }

    /// `⟨self|other⟩` without normalization.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        self.check_aligned(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Writes `config,re,im` rows preceded by a commented header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# basis={} sector={} N={}", self.basis, self.sector, self.n_sites)?;
        writeln!(out, "config,re,im")?;
        for (c, a) in self.configs.iter().zip(&self.amps) {
            writeln!(out, "{c},{:e},{:e}", a.re, a.im)?;
        }
        Ok(())
    }
}

impl Ansatz for DenseState {
    type Cache = ();

    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn log_psi(&self, sites: &[u8]) -> Option<Complex64> {
        let a = self.amplitude_of(sites);
        (a.norm_sqr() > 0.0).then(|| a.ln())
    }

    fn cache(&self, _sites: &[u8]) {}

    fn log_psi_ratio(&self, _cache: &(), sites: &[u8], changes: &[(usize, u8)]) -> Option<Complex64> {
        let old = self.log_psi(sites)?;
        let mut new_sites = sites.to_vec();
        for &(j, s) in changes {
            new_sites[j] = s;
        }
        Some(self.log_psi(&new_sites)? - old)
    }

    fn update_cache(&self, _cache: &mut (), _sites: &[u8], _changes: &[(usize, u8)], _old: &[u8]) {}
}

/// `|⟨ψ|φ⟩|² / (⟨ψ|ψ⟩⟨φ|φ⟩)`.
pub fn fidelity(psi: &DenseState, phi: &DenseState) -> Result<f64> {
    let overlap = psi.inner(phi)?;
    let (np, nf) = (psi.norm(), phi.norm());
    if np == 0.0 || nf == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((overlap.norm() / (np * nf)).powi(2).min(1.0))
}

/// Materializes an ansatz over a sector. Amplitudes are rescaled by a common
/// factor so that the largest has unit modulus; vanishing ones are set to 0.
pub fn dense_from_ansatz<A: Ansatz>(ansatz: &A, basis: Basis, sector: SectorSpec) -> Result<DenseState> {
    let n = ansatz.n_sites();
    let configs = enumerate_sector(n, basis, sector)?;
    let logs: Vec<Option<Complex64>> = configs.par_iter().map(|c| ansatz.log_psi(c.sites())).collect();
    let top = logs.iter().flatten().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let amps = logs.into_iter().map(|l| l.map_or(Complex64::new(0.0, 0.0), |l| (l - top).exp())).collect();
    DenseState::new(n, basis, sector, configs, amps)
}

/// Factor `e^{iπ S^z}` for each local index.
const STRING_PHASE: [f64; 3] = [-1.0, 1.0, -1.0];

fn sz_observable(psi: &DenseState, l: usize, translate: bool, string: bool) -> Result<f64> {
    if psi.basis != Basis::Sz {
        return Err(Error::BasisMismatch { expected: Basis::Sz.to_string(), got: psi.basis.to_string() });
    }
    let n = psi.n_sites;
    if l == 0 || l >= n {
        return Err(Error::InvalidArgument(format!("separation {l} must lie in 1..{n}")));
    }
    let starts: Vec<usize> = if translate { (0..n).collect() } else { vec![0] };
    let norm = psi.norm().powi(2);
    let mut acc = 0.0;
    for (c, a) in psi.configs.iter().zip(&psi.amps) {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let s = c.sites();
        let mut v = 0.0;
        for &i in &starts {
            let mut term = VISIBLE[s[i] as usize] * VISIBLE[s[(i + l) % n] as usize];
            if string {
                for t in 1..l {
                    term *= STRING_PHASE[s[(i + t) % n] as usize];
                }
            }
            v += term;
        }
        acc += p * v;
    }
    Ok(acc / (norm * starts.len() as f64))
}

/// `⟨S^z_0 S^z_ℓ⟩`, averaged over all starting sites when `translate` is set
/// (sites taken modulo N).
pub fn spin_correlation(psi: &DenseState, l: usize, translate: bool) -> Result<f64> {
    sz_observable(psi, l, translate, false)
}

/// `⟨S^z_0 Π_{0<j<ℓ} e^{iπS^z_j} S^z_ℓ⟩`, averaged like [`spin_correlation`].
pub fn string_order(psi: &DenseState, l: usize, translate: bool) -> Result<f64> {
    sz_observable(psi, l, translate, true)
}

fn check_gap(gap: f64) -> Result<()> {
    if gap.is_nan() || gap <= 0.0 {
        Err(Error::NonPositiveGap(gap))
    } else {
        Ok(())
    }
}

/// Upper bound `(E − E₀)/δ` on the infidelity of a state with energy `E`.
pub fn infidelity_bound(energy: f64, ground: f64, gap: f64) -> Result<f64> {
    check_gap(gap)?;
    let tol = 1e-8 * ground.abs().max(1.0);
    if energy < ground - tol {
        return Err(Error::BelowGroundState { energy, ground });
    }
    Ok((energy - ground).max(0.0) / gap)
}

/// Fidelity resolution `Δε/δ` of an energy estimate with spread `Δε`.
pub fn fidelity_resolution(energy_spread: f64, gap: f64) -> Result<f64> {
    check_gap(gap)?;
    Ok(energy_spread / gap)
}
