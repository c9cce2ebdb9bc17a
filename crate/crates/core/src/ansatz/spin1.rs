use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{checksum, finite_log, ln_2cosh, tanh_stable, Ansatz, Variational};
use crate::error::{Error, Result};
use crate::hilbert::VISIBLE;

/// Spin-1 RBM with linear and quadratic visible biases and weights.
///
/// Amplitudes are
/// `Ψ(v) = Π_j exp(a_j v_j + A_j v_j²) · Π_i 2cosh(b_i + Σ_j w_ij v_j + Σ_j W_ij v_j²)`.
/// Weights are stored row-major with one row per hidden unit. The flat
/// parameter vector is ordered `(a, A, b, w, W)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spin1Rbm {
    n_visible: usize,
    n_hidden: usize,
    pub a: Vec<Complex64>,
    pub big_a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub big_w: Vec<Complex64>,
}

/// Cached hidden-unit arguments `θ_i` for one visible configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenActivations {
    pub theta: Vec<Complex64>,
    /// `tanh θ_i`, kept for fast amplitude ratios.
    tanh: Vec<Complex64>,
    key: u64,
}

impl HiddenActivations {
    fn new(theta: Vec<Complex64>, key: u64) -> Self {
        let tanh = theta.iter().map(|&t| tanh_stable(t)).collect();
        Self { theta, tanh, key }
    }

    pub fn key(&self) -> u64 {
        self.key
    }
}

impl Spin1Rbm {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            n_visible,
            n_hidden,
            a: vec![z; n_visible],
            big_a: vec![z; n_visible],
            b: vec![z; n_hidden],
            w: vec![z; n_hidden * n_visible],
            big_w: vec![z; n_hidden * n_visible],
        }
    }

    pub fn from_parts(
        a: Vec<Complex64>,
        big_a: Vec<Complex64>,
        b: Vec<Complex64>,
        w: Vec<Complex64>,
        big_w: Vec<Complex64>,
    ) -> Result<Self> {
        let n = a.len();
        let m = b.len();
        for (len, want) in [(big_a.len(), n), (w.len(), n * m), (big_w.len(), n * m)] {
            if len != want {
                return Err(Error::DimensionMismatch { expected: want, got: len });
            }
        }
        Ok(Self { n_visible: n, n_hidden: m, a, big_a, b, w, big_w })
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn n_params(&self) -> usize {
        2 * self.n_hidden * self.n_visible + 2 * self.n_visible + self.n_hidden
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> Complex64 {
        self.w[i * self.n_visible + j]
    }

    #[inline]
    pub fn quad_weight(&self, i: usize, j: usize) -> Complex64 {
        self.big_w[i * self.n_visible + j]
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_visible {
            Err(Error::DimensionMismatch { expected: self.n_visible, got: len })
        } else {
            Ok(())
        }
    }

    /// Hidden arguments for a visible vector.
    pub fn activations(&self, v: &[f64]) -> Result<HiddenActivations> {
        self.check_len(v.len())?;
        let theta = (0..self.n_hidden)
            .map(|i| {
                let row = i * self.n_visible;
                let mut t = self.b[i];
                for (j, &vj) in v.iter().enumerate() {
                    t += self.w[row + j] * vj + self.big_w[row + j] * (vj * vj);
                }
                t
            })
            .collect();
        Ok(HiddenActivations::new(theta, value_checksum(v)))
    }

    /// Complex log-amplitude of a visible vector with entries in {+1, 0, −1}.
    pub fn log_amplitude(&self, v: &[f64]) -> Result<Complex64> {
        let act = self.activations(v)?;
        Ok(self.log_amplitude_from(v, &act))
    }

    fn log_amplitude_from(&self, v: &[f64], act: &HiddenActivations) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &vj) in v.iter().enumerate() {
            acc += self.a[j] * vj + self.big_a[j] * (vj * vj);
        }
        for &t in &act.theta {
            acc += ln_2cosh(t);
        }
        acc
    }

    /// Incremental log-amplitude ratio for a set of changed sites.
    ///
    /// `changes` holds `(site, new visible value)`. The returned cache belongs
    /// to the new configuration. The cost is `O(M · changes)` plus one
    /// `log cosh` per hidden unit.
    pub fn log_amplitude_ratio(
        &self,
        cache: &HiddenActivations,
        old_v: &[f64],
        changes: &[(usize, f64)],
    ) -> Result<(Complex64, HiddenActivations)> {
        self.check_len(old_v.len())?;
        if cache.key != value_checksum(old_v) || cache.theta.len() != self.n_hidden {
            return Err(Error::StaleCache);
        }
        if changes.is_empty() {
            return Ok((Complex64::new(0.0, 0.0), cache.clone()));
        }
        let mut new_v = old_v.to_vec();
        let mut ratio = Complex64::new(0.0, 0.0);
        let mut theta = cache.theta.clone();
        for &(j, vn) in changes {
            if j >= self.n_visible {
                return Err(Error::DimensionMismatch { expected: self.n_visible, got: j + 1 });
            }
            let vo = new_v[j];
            let dv = vn - vo;
            let dq = vn * vn - vo * vo;
            ratio += self.a[j] * dv + self.big_a[j] * dq;
            for (i, t) in theta.iter_mut().enumerate() {
                *t += self.weight(i, j) * dv + self.quad_weight(i, j) * dq;
            }
            new_v[j] = vn;
        }
        for (t_new, t_old) in theta.iter().zip(&cache.theta) {
            ratio += ln_2cosh(*t_new) - ln_2cosh(*t_old);
        }
        Ok((ratio, HiddenActivations::new(theta, value_checksum(&new_v))))
    }

    /// `∂ log Ψ / ∂p` in the order `(a, A, b, w, W)`.
    pub fn log_derivatives(&self, v: &[f64]) -> Result<Vec<Complex64>> {
        let act = self.activations(v)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_params()];
        self.fill_derivatives(v, &act.theta, &mut out);
        Ok(out)
    }

    fn fill_derivatives(&self, v: &[f64], theta: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_visible;
        let m = self.n_hidden;
        for j in 0..n {
            out[j] = Complex64::new(v[j], 0.0);
            out[n + j] = Complex64::new(v[j] * v[j], 0.0);
        }
        let w_off = 2 * n + m;
        let qw_off = w_off + m * n;
        for i in 0..m {
            let t = tanh_stable(theta[i]);
            out[2 * n + i] = t;
            for j in 0..n {
                out[w_off + i * n + j] = t * v[j];
                out[qw_off + i * n + j] = t * (v[j] * v[j]);
            }
        }
    }
}

fn value_checksum(v: &[f64]) -> u64 {
    let idx: Vec<u8> = v
        .iter()
        .map(|&x| {
            if x > 0.5 {
                0
            } else if x < -0.5 {
                2
            } else {
                1
            }
        })
        .collect();
    checksum(&idx)
}

fn visible(sites: &[u8]) -> Vec<f64> {
    sites.iter().map(|&s| VISIBLE[s as usize]).collect()
}

impl Ansatz for Spin1Rbm {
    type Cache = HiddenActivations;

    fn n_sites(&self) -> usize {
        self.n_visible
    }

    fn log_psi(&self, sites: &[u8]) -> Option<Complex64> {
        let v = visible(sites);
        self.log_amplitude(&v).ok().and_then(finite_log)
    }

    fn cache(&self, sites: &[u8]) -> HiddenActivations {
        self.activations(&visible(sites)).expect("configuration length matches the ansatz")
    }

    fn log_psi_ratio(&self, cache: &HiddenActivations, sites: &[u8], changes: &[(usize, u8)]) -> Option<Complex64> {
        let mut linear = Complex64::new(0.0, 0.0);
        // per-hidden-unit argument shift, accumulated over changed sites
        let m = self.n_hidden;
        let n = self.n_visible;
        let mut shift = [Complex64::new(0.0, 0.0); 64];
        let mut heap;
        let shift: &mut [Complex64] = if m <= 64 {
            &mut shift[..m]
        } else {
            heap = vec![Complex64::new(0.0, 0.0); m];
            &mut heap
        };
        for &(j, s_new) in changes {
            let vo = VISIBLE[sites[j] as usize];
            let vn = VISIBLE[s_new as usize];
            let dv = vn - vo;
            let dq = vn * vn - vo * vo;
            if dv == 0.0 && dq == 0.0 {
                continue;
            }
            linear += self.a[j] * dv + self.big_a[j] * dq;
            for (i, s) in shift.iter_mut().enumerate() {
                *s += self.w[i * n + j] * dv + self.big_w[i * n + j] * dq;
            }
        }
        // cosh(θ + s)/cosh θ = cosh s + tanh θ sinh s
        let mut product = Complex64::new(1.0, 0.0);
        for (t, s) in cache.tanh.iter().zip(shift.iter()) {
            if *s == Complex64::new(0.0, 0.0) {
                continue;
            }
            let e = s.exp();
            let inv = e.inv();
            product *= (e + inv) * 0.5 + t * (e - inv) * 0.5;
        }
        let p = product.norm_sqr();
        if p > 1e-250 && p < 1e250 && p.is_finite() {
            return finite_log(linear + product.ln());
        }
        // fall back to summed logarithms when the product leaves double range
        let mut ratio = linear;
        for (t, s) in cache.theta.iter().zip(shift.iter()) {
            ratio += ln_2cosh(*t + *s) - ln_2cosh(*t);
        }
        finite_log(ratio)
    }

    fn update_cache(&self, cache: &mut HiddenActivations, sites: &[u8], changes: &[(usize, u8)], old: &[u8]) {
        let n = self.n_visible;
        for (&(j, _), &s_old) in changes.iter().zip(old) {
            let vo = VISIBLE[s_old as usize];
            let vn = VISIBLE[sites[j] as usize];
            let dv = vn - vo;
            let dq = vn * vn - vo * vo;
            for (i, t) in cache.theta.iter_mut().enumerate() {
                *t += self.w[i * n + j] * dv + self.big_w[i * n + j] * dq;
            }
        }
        for (th, t) in cache.tanh.iter_mut().zip(&cache.theta) {
            *th = tanh_stable(*t);
        }
        cache.key = checksum(sites);
    }
}

impl Variational for Spin1Rbm {
    fn n_params(&self) -> usize {
        Spin1Rbm::n_params(self)
    }

    fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    fn log_derivatives(&self, sites: &[u8], cache: &HiddenActivations, out: &mut [Complex64]) {
        self.fill_derivatives(&visible(sites), &cache.theta, out);
    }

    fn params(&self) -> Vec<Complex64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend_from_slice(&self.a);
        p.extend_from_slice(&self.big_a);
        p.extend_from_slice(&self.b);
        p.extend_from_slice(&self.w);
        p.extend_from_slice(&self.big_w);
        p
    }

    fn set_params(&mut self, p: &[Complex64]) {
        assert_eq!(p.len(), self.n_params(), "parameter vector length");
        let n = self.n_visible;
        let m = self.n_hidden;
        let (a, rest) = p.split_at(n);
        let (big_a, rest) = rest.split_at(n);
        let (b, rest) = rest.split_at(m);
        let (w, big_w) = rest.split_at(m * n);
        self.a.copy_from_slice(a);
        self.big_a.copy_from_slice(big_a);
        self.b.copy_from_slice(b);
        self.w.copy_from_slice(w);
        self.big_w.copy_from_slice(big_w);
    }

    /// Layout: `[b, w_1..w_N, W_1..W_N]`.
    fn push_hidden(&mut self, values: &[Complex64]) {
        let n = self.n_visible;
        let get = |k: usize| values.get(k).copied().unwrap_or_default();
        self.b.push(get(0));
        self.w.extend((0..n).map(|j| get(1 + j)));
        self.big_w.extend((0..n).map(|j| get(1 + n + j)));
        self.n_hidden += 1;
    }

    fn hidden_unit_len(&self) -> usize {
        1 + 2 * self.n_visible
    }
}
