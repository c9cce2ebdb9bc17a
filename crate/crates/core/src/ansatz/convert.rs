//! Conversions between the RBM and coupling-matrix forms.

use num_complex::Complex64;

use super::net::{CouplingMatrix, CouplingNet};
use super::spin1::Spin1Rbm;
use super::spin12::{Spin12Rbm, UNARY_CELLS};
use crate::error::{Error, Result};
use crate::hilbert::VISIBLE;

/// Softening used when none is given; zeros become `e^{-10}`.
pub const DEFAULT_SOFTENING: f64 = 10.0;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Spin-1 RBM with no hidden units describing the product state
/// `⊗_j (c₊ |⇑⟩ + c₀ |0⟩ + c₋ |⇓⟩)`.
///
/// The amplitudes equal `Π_j c_{S_j} / c₀` so the product state is recovered
/// after multiplying by `Π_j c₀`.
pub fn product_state_params(coeffs: &[[Complex64; 3]]) -> Result<Spin1Rbm> {
    let n = coeffs.len();
    let mut a = Vec::with_capacity(n);
    let mut big_a = Vec::with_capacity(n);
    for (site, c) in coeffs.iter().enumerate() {
        if c.contains(&ZERO) {
            return Err(Error::ZeroCoefficient { site });
        }
        let (lp, l0, lm) = (c[0].ln(), c[1].ln(), c[2].ln());
        // a + A = ln(c₊/c₀), −a + A = ln(c₋/c₀)
        a.push(0.5 * (lp - lm));
        big_a.push(0.5 * (lp + lm) - l0);
    }
    Spin1Rbm::from_parts(a, big_a, vec![], vec![], vec![])
}

fn soften(c: Complex64, floor: f64) -> Complex64 {
    if c == ZERO {
        Complex64::new(floor, 0.0)
    } else {
        c
    }
}

/// Boltzmann parameters of a single coupling matrix:
/// `(ã, Ã, b̃, c̃, w, W)` with
/// `C_{hv} = exp(c̃ + w h v + W h v² + b̃ h + ã v + Ã v²)`.
pub(crate) fn boltzmann_parts(m: &CouplingMatrix, floor: f64) -> [Complex64; 6] {
    let l = |h: usize, v: usize| soften(m[h][v], floor).ln();
    let (lpp, lp0, lpm) = (l(0, 0), l(0, 1), l(0, 2));
    let (lmp, lm0, lmm) = (l(1, 0), l(1, 1), l(1, 2));
    let a = 0.25 * (lpp + lmp - lpm - lmm);
    let b = 0.5 * (lp0 - lm0);
    let c = 0.5 * (lp0 + lm0);
    let w = 0.25 * (lpp - lmp - lpm + lmm);
    let big_w = 0.25 * (lpp - lmp - 2.0 * lp0 + 2.0 * lm0 + lpm - lmm);
    let big_a = 0.25 * (lpp + lmp - 2.0 * lp0 - 2.0 * lm0 + lpm + lmm);
    [a, big_a, b, c, w, big_w]
}

/// Converts a coupling net into a spin-1 RBM.
///
/// Exact zeros are first replaced by `e^{-softening}`; other elements are
/// untouched. Returns the RBM and the global log-constant `K` with
/// `Ψ_net = e^K Ψ_rbm`.
pub fn couplings_to_rbm(net: &CouplingNet, softening: f64) -> (Spin1Rbm, Complex64) {
    let n = net.n_sites();
    let m = net.n_hidden();
    let floor = (-softening).exp();
    let mut rbm = Spin1Rbm::zeros(n, m);
    let mut constant = ZERO;
    for i in 0..m {
        for j in 0..n {
            let [a, big_a, b, c, w, big_w] = boltzmann_parts(net.matrix(i, j), floor);
            rbm.a[j] += a;
            rbm.big_a[j] += big_a;
            rbm.b[i] += b;
            rbm.w[i * n + j] = w;
            rbm.big_w[i * n + j] = big_w;
            constant += c;
        }
    }
    for (j, s) in net.site_bias.iter().enumerate() {
        let (lp, l0, lm) = (soften(s[0], floor).ln(), soften(s[1], floor).ln(), soften(s[2], floor).ln());
        rbm.a[j] += 0.5 * (lp - lm);
        rbm.big_a[j] += 0.5 * (lp + lm) - l0;
        constant += l0;
    }
    (rbm, constant)
}

/// Converts a spin-1 RBM into an equivalent coupling net.
///
/// Biases are split uniformly: `b̃_ij = b_i / N`, `ã_ij = a_j / M`,
/// `Ã_ij = A_j / M`. With no hidden units the visible biases go into the
/// per-site factors instead.
pub fn rbm_to_couplings(rbm: &Spin1Rbm) -> CouplingNet {
    let n = rbm.n_visible();
    let m = rbm.n_hidden();
    let mut net = CouplingNet::disconnected(n, 0);
    if m == 0 {
        for j in 0..n {
            for (s, &v) in VISIBLE.iter().enumerate() {
                net.site_bias[j][s] = (rbm.a[j] * v + rbm.big_a[j] * (v * v)).exp();
            }
        }
        return net;
    }
    let inv_n = 1.0 / n as f64;
    let inv_m = 1.0 / m as f64;
    for i in 0..m {
        let row = (0..n)
            .map(|j| {
                let mut mat = [[ZERO; 3]; 2];
                for (hr, &h) in [1.0, -1.0].iter().enumerate() {
                    for (s, &v) in VISIBLE.iter().enumerate() {
                        let e = rbm.b[i] * (h * inv_n)
                            + rbm.weight(i, j) * (h * v)
                            + rbm.quad_weight(i, j) * (h * v * v)
                            + rbm.a[j] * (v * inv_m)
                            + rbm.big_a[j] * (v * v * inv_m);
                        mat[hr][s] = e.exp();
                    }
                }
                mat
            })
            .collect();
        net.push_unit(row).expect("row length equals site count");
    }
    net
}

/// Projects a unary-encoded spin-½ RBM onto the spin-1 coupling-net form.
///
/// Visible biases of each cell become per-site factors and each hidden bias
/// is absorbed into the unit's first coupling matrix. The net reproduces the
/// spin-½ amplitudes on encoded configurations exactly.
pub fn project_unary(rbm: &Spin12Rbm) -> Result<CouplingNet> {
    let nv = rbm.n_visible();
    if !nv.is_multiple_of(3) {
        return Err(Error::NotUnary(nv));
    }
    let n = nv / 3;
    let mut net = CouplingNet::disconnected(n, 0);
    for j in 0..n {
        for (s, cell) in UNARY_CELLS.iter().enumerate() {
            let e: Complex64 = (0..3).map(|c| rbm.a[3 * j + c] * cell[c]).sum();
            net.site_bias[j][s] = e.exp();
        }
    }
    for i in 0..rbm.n_hidden() {
        let row = (0..n)
            .map(|j| {
                let mut mat = [[ZERO; 3]; 2];
                for (hr, &h) in [1.0, -1.0].iter().enumerate() {
                    for (s, cell) in UNARY_CELLS.iter().enumerate() {
                        let mut e: Complex64 = (0..3).map(|c| rbm.weight(i, 3 * j + c) * (h * cell[c])).sum();
                        if j == 0 {
                            e += rbm.b[i] * h;
                        }
                        mat[hr][s] = e.exp();
                    }
                }
                mat
            })
            .collect();
        net.push_unit(row)?;
    }
    Ok(net)
}

/// Which parameter-count formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Spin-1 RBM: `2MN + 2N + M`.
    Spin1,
    /// Unary-encoded spin-½ RBM: `M + 3N + 3NM`.
    Unary,
}

pub fn param_counts(kind: ParamKind, n_sites: usize, n_hidden: usize) -> usize {
    let (n, m) = (n_sites, n_hidden);
    match kind {
        ParamKind::Spin1 => 2 * m * n + 2 * n + m,
        ParamKind::Unary => m + 3 * n + 3 * n * m,
    }
}
