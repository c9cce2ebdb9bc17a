use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::ansatz::{CouplingMatrix, CouplingNet, IDENTITY_COUPLING};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, SpinConfig};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Bond-dimension-2 MPS of the AKLT state.
#[derive(Debug, Clone, PartialEq)]
pub struct AkltMps {
    pub basis: Basis,
    /// Matrices indexed by the local state.
    pub matrices: [Matrix2<Complex64>; 3],
}

impl AkltMps {
    pub fn new(basis: Basis) -> Self {
        let z = r(0.0);
        let matrices = match basis {
            Basis::Sz => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [Matrix2::new(z, r(s), z, z), Matrix2::new(r(-0.5), z, z, r(0.5)), Matrix2::new(z, z, r(-s), z)]
            }
            Basis::Xyz => [
                Matrix2::new(z, r(0.5), r(0.5), z),
                Matrix2::new(z, c(0.0, -0.5), c(0.0, 0.5), z),
                Matrix2::new(r(0.5), z, z, r(-0.5)),
            ],
        };
        Self { basis, matrices }
    }

    /// `tr(A^{s_1} ··· A^{s_N})` on raw local indices.
    pub fn amplitude_of_sites(&self, sites: &[u8]) -> Complex64 {
        let mut p = Matrix2::identity();
        for &s in sites {
            p *= self.matrices[s as usize];
        }
        p.trace()
    }
}

/// Unnormalized AKLT amplitude of `config`.
pub fn mps_amplitude(mps: &AkltMps, config: &SpinConfig) -> Result<Complex64> {
    if config.basis() != mps.basis {
        return Err(Error::BasisMismatch { expected: mps.basis.to_string(), got: config.basis().to_string() });
    }
    Ok(mps.amplitude_of_sites(config.sites()))
}

fn mat(plus: [f64; 3], minus: [f64; 3]) -> CouplingMatrix {
    [plus.map(r), minus.map(r)]
}

/// Coupling matrices of the xyz-basis construction, columns (x, y, z).
pub mod xyz_couplings {
    use super::*;

    pub fn c_xy() -> CouplingMatrix {
        mat([1.0, 1.0, 1.0], [-1.0, -1.0, 1.0])
    }
    pub fn c_yz() -> CouplingMatrix {
        mat([1.0, 1.0, 1.0], [1.0, -1.0, -1.0])
    }
    pub fn c_x() -> CouplingMatrix {
        mat([0.0, 1.0, 1.0], [1.0, 0.0, 0.0])
    }
    pub fn c_y() -> CouplingMatrix {
        mat([1.0, 1.0, 1.0], [1.0, -1.0, 1.0])
    }
    pub fn c_z() -> CouplingMatrix {
        mat([1.0, 1.0, 0.0], [0.0, 0.0, 1.0])
    }
}

/// Exact xyz-basis AKLT network with `2N` hidden units.
pub fn aklt_nqs_xyz(n_sites: usize) -> Result<CouplingNet> {
    use xyz_couplings::*;
    if n_sites < 2 {
        return Err(Error::InvalidArgument(format!("the xyz construction needs N >= 2, got {n_sites}")));
    }
    let n = n_sites;
    let mut rows = vec![vec![c_xy(); n], vec![c_yz(); n]];
    for k in 1..n {
        let mut row = vec![IDENTITY_COUPLING; n];
        row[..k].fill(c_yz());
        row[k] = c_x();
        rows.push(row);
    }
    for k in 0..n - 1 {
        let mut row = vec![IDENTITY_COUPLING; n];
        row[k] = c_z();
        row[k + 1..].fill(c_y());
        rows.push(row);
    }
    CouplingNet::from_rows(n, rows)
}

/// Coupling matrices of the S^z-basis construction, columns (⇑, 0, ⇓).
pub mod sz_couplings {
    use super::*;

    fn first_row_ones(minus: [Complex64; 3]) -> CouplingMatrix {
        [[r(1.0); 3], minus]
    }
    pub fn c_i_up() -> CouplingMatrix {
        first_row_ones([c(0.0, 1.0), r(0.0), r(0.0)])
    }
    pub fn c_i_down() -> CouplingMatrix {
        first_row_ones([r(0.0), r(0.0), c(0.0, 1.0)])
    }
    pub fn c_plus_zero() -> CouplingMatrix {
        first_row_ones([r(0.0), r(1.0), r(0.0)])
    }
    pub fn c_two_up() -> CouplingMatrix {
        first_row_ones([r(2.0), r(0.0), r(0.0)])
    }
    pub fn c_minus_up() -> CouplingMatrix {
        first_row_ones([r(-1.0), r(0.0), r(0.0)])
    }
    pub fn c_minus_down() -> CouplingMatrix {
        first_row_ones([r(0.0), r(0.0), r(-1.0)])
    }
    pub fn c_minus_zero() -> CouplingMatrix {
        first_row_ones([r(0.0), r(-1.0), r(0.0)])
    }
    /// Per-site factor applied to the columns of one unit.
    pub const SITE_FACTOR: [f64; 3] = [2.0, -1.0, -1.0];
}

/// Number of hidden units of the S^z-basis construction.
pub fn aklt_sz_hidden_count(n_sites: usize) -> usize {
    let n = n_sites;
    2 * n * n + n * ((n - 1) / 2) + 1
}

/// Exact S^z-basis AKLT network for a ring, `2N² + N⌊(N−1)/2⌋ + 1` units.
pub fn aklt_nqs_sz(n_sites: usize) -> Result<CouplingNet> {
    use sz_couplings::*;
    if n_sites < 3 {
        return Err(Error::InvalidArgument(format!("the S^z construction needs N >= 3, got {n_sites}")));
    }
    let n = n_sites;
    // filter on sites k..=k+1+l (mod N): `ends` at both ends, C_{+0} between
    let segment = |k: usize, l: usize, first: CouplingMatrix, last: CouplingMatrix| {
        let mut row = vec![IDENTITY_COUPLING; n];
        for t in 1..=l {
            row[(k + t) % n] = c_plus_zero();
        }
        row[k] = first;
        row[(k + 1 + l) % n] = last;
        row
    };
    let mut rows = Vec::with_capacity(aklt_sz_hidden_count(n));
    for k in 0..n {
        for l in 0..=n - 2 {
            rows.push(segment(k, l, c_i_up(), c_i_up()));
            rows.push(segment(k, l, c_i_down(), c_i_down()));
        }
    }
    for k in 0..n {
        for l in (1..=n - 2).step_by(2) {
            rows.push(segment(k, l, c_two_up(), c_minus_down()));
        }
    }
    for k in 0..n {
        for first in [c_minus_up(), c_minus_down()] {
            let mut row = vec![c_plus_zero(); n];
            row[k] = first;
            rows.push(row);
        }
    }
    let mut last = vec![c_minus_zero(); n];
    for m in &mut last {
        for h in m.iter_mut() {
            for (e, f) in h.iter_mut().zip(SITE_FACTOR) {
                *e *= f;
            }
        }
    }
    rows.push(last);
    CouplingNet::from_rows(n, rows)
}
