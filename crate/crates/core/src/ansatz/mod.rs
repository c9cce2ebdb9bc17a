//! Variational wavefunctions: the spin-½ RBM used with unary encoding, the
//! spin-1 RBM with quadratic visible terms, and the coupling-matrix network
//! form together with conversions between them.
//!
//! Log-amplitudes are complex numbers whose imaginary part is only defined
//! modulo 2π. Comparisons between ansatzes are always made on exponentiated
//! values.

mod convert;
mod net;
mod spin1;
mod spin12;

pub use convert::{
    couplings_to_rbm, param_counts, product_state_params, project_unary, rbm_to_couplings, ParamKind, DEFAULT_SOFTENING,
};
pub use net::{correlator, CouplingMatrix, CouplingNet, IDENTITY_COUPLING};
pub use spin1::{HiddenActivations, Spin1Rbm};
pub use spin12::{unary_encode, Spin12Rbm, UnaryRbm, UNARY_CELLS};

use num_complex::Complex64;

/// Sign convention of the two energy functions.
///
/// The spin-1 ansatz sums `exp(+E(v, h))` over hidden states while the spin-½
/// baseline sums `exp(−E(v, h))` with `E = −Σ a v − Σ b h − Σ w h v`. Both reduce
/// to the same product-of-cosh amplitude, so parameters carry over unchanged.
pub const SPIN1_ENERGY_SIGN: f64 = 1.0;
/// See [`SPIN1_ENERGY_SIGN`].
pub const SPIN12_ENERGY_SIGN: f64 = -1.0;

/// A wavefunction that can be evaluated on configurations of local indices.
///
/// `log_psi` returns `None` for an exact zero amplitude.
pub trait Ansatz: Sync {
    /// Per-configuration intermediate kept by Markov chains.
    type Cache: Clone + Send;

    fn n_sites(&self) -> usize;

    fn log_psi(&self, sites: &[u8]) -> Option<Complex64>;

    fn cache(&self, sites: &[u8]) -> Self::Cache;

    /// `log Ψ(new) − log Ψ(old)` where `new` is `sites` with `changes` applied.
    /// `None` when the new amplitude vanishes.
    fn log_psi_ratio(&self, cache: &Self::Cache, sites: &[u8], changes: &[(usize, u8)]) -> Option<Complex64>;

    /// Brings `cache` in line with `sites` after `changes` were applied to it.
    /// `sites` already holds the new values.
    fn update_cache(&self, cache: &mut Self::Cache, sites: &[u8], changes: &[(usize, u8)], old: &[u8]);
}

/// An ansatz with a flat complex parameter vector and closed-form
/// logarithmic derivatives.
pub trait Variational: Ansatz + Clone + Send {
    fn n_params(&self) -> usize;

    fn n_hidden(&self) -> usize;

    /// `∂ log Ψ / ∂p_k` written into `out` (length `n_params`).
    fn log_derivatives(&self, sites: &[u8], cache: &Self::Cache, out: &mut [Complex64]);

    fn params(&self) -> Vec<Complex64>;

    fn set_params(&mut self, params: &[Complex64]);

    /// Appends one hidden unit with the given bias and weights. The weight
    /// slice layout is ansatz specific; missing values are taken as zero.
    fn push_hidden(&mut self, values: &[Complex64]);

    /// Number of values consumed by [`Variational::push_hidden`].
    fn hidden_unit_len(&self) -> usize;

    fn add_to_params(&mut self, delta: &[Complex64]) {
        let mut p = self.params();
        for (x, d) in p.iter_mut().zip(delta) {
            *x += d;
        }
        self.set_params(&p);
    }
}

/// `log(2 cosh z)` evaluated without overflow for large `|Re z|`.
pub fn ln_2cosh(z: Complex64) -> Complex64 {
    let zz = if z.re >= 0.0 { z } else { -z };
    zz + (Complex64::new(1.0, 0.0) + (-2.0 * zz).exp()).ln()
}

/// `tanh z` evaluated without overflow for large `|Re z|`.
pub fn tanh_stable(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        let e = (-2.0 * z).exp();
        (1.0 - e) / (1.0 + e)
    } else {
        -tanh_stable(-z)
    }
}

/// FNV-1a hash of a configuration, used as a cache key.
pub(crate) fn checksum(sites: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &s in sites {
        h ^= s as u64 + 1;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ sites.len() as u64
}

pub(crate) fn finite_log(z: Complex64) -> Option<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Some(z)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_2cosh_matches_direct_and_survives_overflow() {
        for &z in
            &[Complex64::new(0.3, -0.7), Complex64::new(-2.0, 1.1), Complex64::new(5.0, 3.0), Complex64::new(0.0, 0.0)]
        {
            let direct = (2.0 * z.cosh()).ln();
            let ours = ln_2cosh(z);
            assert!(((ours - direct).exp() - 1.0).norm() < 1e-13);
        }
        let big = ln_2cosh(Complex64::new(800.0, 0.25));
        assert!((big.re - 800.0).abs() < 1e-9);
        assert!((big.im - 0.25).abs() < 1e-12);
        let t = tanh_stable(Complex64::new(-900.0, 1.0));
        assert!((t + 1.0).norm() < 1e-12);
    }
}
