use num_complex::Complex64;

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::hilbert::SpinConfig;
use crate::model::BondHamiltonian;

/// `Σ_{S'} H_{S S'} Ψ(S')/Ψ(S)` using a cache built for `sites`.
pub fn local_energy_cached<A: Ansatz>(ansatz: &A, h: &BondHamiltonian, sites: &[u8], cache: &A::Cache) -> Complex64 {
    let mut e = Complex64::new(0.0, 0.0);
    h.for_each_connected(sites, |changes, v| {
        if changes.is_empty() {
            e += v;
        } else if let Some(r) = ansatz.log_psi_ratio(cache, sites, changes) {
            e += v * r.exp();
        }
    });
    e
}

/// Local energy of `config`; fails when its amplitude vanishes.
pub fn local_energy<A: Ansatz>(ansatz: &A, h: &BondHamiltonian, config: &SpinConfig) -> Result<Complex64> {
    if config.basis() != h.basis {
        return Err(Error::BasisMismatch { expected: h.basis.to_string(), got: config.basis().to_string() });
    }
    if config.len() != h.n_sites || ansatz.n_sites() != h.n_sites {
        return Err(Error::DimensionMismatch { expected: h.n_sites, got: config.len() });
    }
    if ansatz.log_psi(config.sites()).is_none() {
        return Err(Error::ZeroAmplitude);
    }
    let cache = ansatz.cache(config.sites());
    Ok(local_energy_cached(ansatz, h, config.sites(), &cache))
}
