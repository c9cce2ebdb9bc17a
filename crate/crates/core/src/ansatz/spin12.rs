use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{finite_log, ln_2cosh, tanh_stable, Ansatz, Variational};
use crate::error::{Error, Result};
use crate::hilbert::SpinConfig;

/// Unary cells: the ±1 pattern encoding each local spin-1 index.
/// ⇑ → (↑↑↓), 0 → (↑↓↑), ⇓ → (↓↑↑).
pub const UNARY_CELLS: [[f64; 3]; 3] = [[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]];

/// Spin-½ RBM, `Ψ(v) = Π_j e^{a_j v_j} Π_i 2cosh(b_i + Σ_j w_ij v_j)` with
/// `v_j ∈ {+1, −1}`. Parameter order `(a, b, w)`, weights row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spin12Rbm {
    n_visible: usize,
    n_hidden: usize,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl Spin12Rbm {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { n_visible, n_hidden, a: vec![z; n_visible], b: vec![z; n_hidden], w: vec![z; n_visible * n_hidden] }
    }

    pub fn from_parts(a: Vec<Complex64>, b: Vec<Complex64>, w: Vec<Complex64>) -> Result<Self> {
        let n = a.len();
        let m = b.len();
        if w.len() != n * m {
            return Err(Error::DimensionMismatch { expected: n * m, got: w.len() });
        }
        Ok(Self { n_visible: n, n_hidden: m, a, b, w })
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn n_params(&self) -> usize {
        self.n_hidden + self.n_visible + self.n_hidden * self.n_visible
    }

    #[inline]
    pub fn weight(&self, i: usize, p: usize) -> Complex64 {
        self.w[i * self.n_visible + p]
    }

    pub fn activations(&self, v: &[f64]) -> Result<Vec<Complex64>> {
        if v.len() != self.n_visible {
            return Err(Error::DimensionMismatch { expected: self.n_visible, got: v.len() });
        }
        Ok((0..self.n_hidden)
            .map(|i| {
                let row = &self.w[i * self.n_visible..(i + 1) * self.n_visible];
                row.iter().zip(v).fold(self.b[i], |t, (w, &x)| t + w * x)
            })
            .collect())
    }

    pub fn log_amplitude(&self, v: &[f64]) -> Result<Complex64> {
        let theta = self.activations(v)?;
        let mut acc: Complex64 = self.a.iter().zip(v).map(|(a, &x)| a * x).sum();
        for t in theta {
            acc += ln_2cosh(t);
        }
        Ok(acc)
    }

    /// `∂ log Ψ / ∂p` in the order `(a, b, w)`.
    pub fn log_derivatives(&self, v: &[f64]) -> Result<Vec<Complex64>> {
        let theta = self.activations(v)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_params()];
        self.fill_derivatives(v, &theta, &mut out);
        Ok(out)
    }

    fn fill_derivatives(&self, v: &[f64], theta: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_visible;
        let m = self.n_hidden;
        for p in 0..n {
            out[p] = Complex64::new(v[p], 0.0);
        }
        for i in 0..m {
            let t = tanh_stable(theta[i]);
            out[n + i] = t;
            for p in 0..n {
                out[n + m + i * n + p] = t * v[p];
            }
        }
    }
}

/// Unary encoding of a spin-1 configuration into 3N spin-½ values.
pub fn unary_encode(config: &SpinConfig) -> Vec<f64> {
    encode_sites(config.sites())
}

pub(crate) fn encode_sites(sites: &[u8]) -> Vec<f64> {
    sites.iter().flat_map(|&s| UNARY_CELLS[s as usize]).collect()
}

/// A spin-½ RBM acting on unary-encoded spin-1 configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnaryRbm {
    pub rbm: Spin12Rbm,
}

impl UnaryRbm {
    pub fn new(rbm: Spin12Rbm) -> Result<Self> {
        if !rbm.n_visible().is_multiple_of(3) {
            return Err(Error::NotUnary(rbm.n_visible()));
        }
        Ok(Self { rbm })
    }

    pub fn zeros(n_sites: usize, n_hidden: usize) -> Self {
        Self { rbm: Spin12Rbm::zeros(3 * n_sites, n_hidden) }
    }
}

impl Ansatz for UnaryRbm {
    type Cache = Vec<Complex64>;

    fn n_sites(&self) -> usize {
        self.rbm.n_visible / 3
    }

    fn log_psi(&self, sites: &[u8]) -> Option<Complex64> {
        self.rbm.log_amplitude(&encode_sites(sites)).ok().and_then(finite_log)
    }

    fn cache(&self, sites: &[u8]) -> Vec<Complex64> {
        self.rbm.activations(&encode_sites(sites)).expect("configuration length matches the ansatz")
    }

    fn log_psi_ratio(&self, cache: &Vec<Complex64>, sites: &[u8], changes: &[(usize, u8)]) -> Option<Complex64> {
        let n = self.rbm.n_visible;
        let mut ratio = Complex64::new(0.0, 0.0);
        let mut shift = vec![Complex64::new(0.0, 0.0); self.rbm.n_hidden];
        for &(j, s_new) in changes {
            let old = UNARY_CELLS[sites[j] as usize];
            let new = UNARY_CELLS[s_new as usize];
            for c in 0..3 {
                let d = new[c] - old[c];
                if d == 0.0 {
                    continue;
                }
                let p = 3 * j + c;
                ratio += self.rbm.a[p] * d;
                for (i, s) in shift.iter_mut().enumerate() {
                    *s += self.rbm.w[i * n + p] * d;
                }
            }
        }
        for (t, s) in cache.iter().zip(&shift) {
            ratio += ln_2cosh(*t + *s) - ln_2cosh(*t);
        }
        finite_log(ratio)
    }

    fn update_cache(&self, cache: &mut Vec<Complex64>, sites: &[u8], changes: &[(usize, u8)], old: &[u8]) {
        let n = self.rbm.n_visible;
        for (&(j, _), &s_old) in changes.iter().zip(old) {
            let o = UNARY_CELLS[s_old as usize];
            let nw = UNARY_CELLS[sites[j] as usize];
            for c in 0..3 {
                let d = nw[c] - o[c];
                if d == 0.0 {
                    continue;
                }
                let p = 3 * j + c;
                for (i, t) in cache.iter_mut().enumerate() {
                    *t += self.rbm.w[i * n + p] * d;
                }
            }
        }
    }
}

impl Variational for UnaryRbm {
    fn n_params(&self) -> usize {
        self.rbm.n_params()
    }

    fn n_hidden(&self) -> usize {
        self.rbm.n_hidden
    }

    fn log_derivatives(&self, sites: &[u8], cache: &Vec<Complex64>, out: &mut [Complex64]) {
        self.rbm.fill_derivatives(&encode_sites(sites), cache, out);
    }

    fn params(&self) -> Vec<Complex64> {
        let mut p = Vec::with_capacity(self.rbm.n_params());
        p.extend_from_slice(&self.rbm.a);
        p.extend_from_slice(&self.rbm.b);
        p.extend_from_slice(&self.rbm.w);
        p
    }

    fn set_params(&mut self, p: &[Complex64]) {
        assert_eq!(p.len(), self.rbm.n_params(), "parameter vector length");
        let n = self.rbm.n_visible;
        let m = self.rbm.n_hidden;
        self.rbm.a.copy_from_slice(&p[..n]);
        self.rbm.b.copy_from_slice(&p[n..n + m]);
        self.rbm.w.copy_from_slice(&p[n + m..]);
    }

    /// Layout: `[b, w_1..w_3N]`.
    fn push_hidden(&mut self, values: &[Complex64]) {
        let get = |k: usize| values.get(k).copied().unwrap_or_default();
        self.rbm.b.push(get(0));
        self.rbm.w.extend((0..self.rbm.n_visible).map(|p| get(1 + p)));
        self.rbm.n_hidden += 1;
    }

    fn hidden_unit_len(&self) -> usize {
        1 + self.rbm.n_visible
    }
}
