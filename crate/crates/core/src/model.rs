//! Spin-1 chain Hamiltonians written as lists of two-site bond terms.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Basis, SpinConfig};

pub type BondMatrix = SMatrix<Complex64, 9, 9>;

/// Matrix elements below this magnitude are treated as structural zeros.
const SPARSITY_CUTOFF: f64 = 1e-14;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Spin-1 operators `(S^x, S^y, S^z)` in the requested local basis.
pub fn spin1_matrices(basis: Basis) -> [Matrix3<Complex64>; 3] {
    let z = c(0.0, 0.0);
    match basis {
        Basis::Sz => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let sx = Matrix3::new(z, c(r, 0.0), z, c(r, 0.0), z, c(r, 0.0), z, c(r, 0.0), z);
            let sy = Matrix3::new(z, c(0.0, -r), z, c(0.0, r), z, c(0.0, -r), z, c(0.0, r), z);
            let sz = Matrix3::new(c(1.0, 0.0), z, z, z, z, z, z, z, c(-1.0, 0.0));
            [sx, sy, sz]
        }
        Basis::Xyz => {
            let i = c(0.0, 1.0);
            let sx = Matrix3::new(z, z, z, z, z, i, z, -i, z);
            let sy = Matrix3::new(z, z, i, z, z, z, -i, z, z);
            let sz = Matrix3::new(z, i, z, -i, z, z, z, z, z);
            [sx, sy, sz]
        }
    }
}

/// `S_1 · S_2` on the nine-dimensional two-site space, pair index `3 s_1 + s_2`.
pub fn heisenberg_bond(basis: Basis) -> BondMatrix {
    let ops = spin1_matrices(basis);
    let mut m = BondMatrix::zeros();
    for op in &ops {
        m += op.kronecker(op);
    }
    m
}

/// Constant energy offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyShift {
    pub value: f64,
    /// If set the shift is applied once per site, otherwise once globally.
    pub per_site: bool,
}

impl EnergyShift {
    pub const NONE: EnergyShift = EnergyShift { value: 0.0, per_site: false };

    pub fn total(&self, n_sites: usize) -> f64 {
        if self.per_site {
            self.value * n_sites as f64
        } else {
            self.value
        }
    }
}

/// One two-site term acting on the ordered pair `(first, second)`.
#[derive(Debug, Clone)]
pub struct BondTerm {
    pub sites: (usize, usize),
    pub matrix: BondMatrix,
    /// Non-zero entries of each row, `rows[p] = [(q, H_pq)]`.
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl BondTerm {
    pub fn new(sites: (usize, usize), matrix: BondMatrix) -> Self {
        let rows = (0..9)
            .map(|p| (0..9).filter(|&q| matrix[(p, q)].norm() > SPARSITY_CUTOFF).map(|q| (q, matrix[(p, q)])).collect())
            .collect();
        Self { sites, matrix, rows }
    }

    pub fn row(&self, pair: usize) -> &[(usize, Complex64)] {
        &self.rows[pair]
    }
}

/// Hamiltonian made of two-site terms plus a constant.
#[derive(Debug, Clone)]
pub struct BondHamiltonian {
    pub n_sites: usize,
    pub periodic: bool,
    pub basis: Basis,
    pub terms: Vec<BondTerm>,
    pub shift: EnergyShift,
}

fn chain_bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|j| (j, j + 1)).collect();
    if periodic {
        // for n = 2 this repeats the single bond
        bonds.push((n - 1, 0));
    }
    bonds
}

impl BondHamiltonian {
    pub fn from_bond_matrix(
        n_sites: usize,
        periodic: bool,
        basis: Basis,
        matrix: BondMatrix,
        shift: EnergyShift,
    ) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidArgument(format!("a chain needs at least 2 sites, got {n_sites}")));
        }
        let terms = chain_bonds(n_sites, periodic).into_iter().map(|b| BondTerm::new(b, matrix)).collect();
        Ok(Self { n_sites, periodic, basis, terms, shift })
    }

    pub fn constant(&self) -> f64 {
        self.shift.total(self.n_sites)
    }

    /// Calls `f(changes, element)` for every bond contribution of row `sites`,
    /// with the summed diagonal (constant included) reported first under an
    /// empty change list. Off-diagonal entries are not merged.
    pub fn for_each_connected<F: FnMut(&[(usize, u8)], Complex64)>(&self, sites: &[u8], mut f: F) {
        let mut diag = Complex64::new(self.constant(), 0.0);
        for term in &self.terms {
            let (i, j) = term.sites;
            let p = 3 * sites[i] as usize + sites[j] as usize;
            for &(q, h) in term.row(p) {
                if q == p {
                    diag += h;
                    continue;
                }
                let (ni, nj) = ((q / 3) as u8, (q % 3) as u8);
                let mut changes = [(0usize, 0u8); 2];
                let mut k = 0;
                if ni != sites[i] {
                    changes[k] = (i, ni);
                    k += 1;
                }
                if nj != sites[j] {
                    changes[k] = (j, nj);
                    k += 1;
                }
                f(&changes[..k], h);
            }
        }
        f(&[], diag);
    }

    /// Configurations `S'` with `⟨S|H|S'⟩ ≠ 0`, duplicates merged, the
    /// diagonal entry always included and listed first.
    pub fn connected_configs(&self, config: &SpinConfig) -> Result<Vec<(SpinConfig, Complex64)>> {
        if config.basis() != self.basis {
            return Err(Error::BasisMismatch { expected: self.basis.to_string(), got: config.basis().to_string() });
        }
        if config.len() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: config.len() });
        }
        let sites = config.sites();
        let mut diag = Complex64::new(0.0, 0.0);
        let mut off: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        self.for_each_connected(sites, |changes, h| {
            if changes.is_empty() {
                diag += h;
            } else {
                let mut s = sites.to_vec();
                for &(j, v) in changes {
                    s[j] = v;
                }
                *off.entry(s).or_default() += h;
            }
        });
        let mut out = vec![(config.clone(), diag)];
        out.extend(
            off.into_iter()
                .filter(|(_, h)| h.norm() > SPARSITY_CUTOFF)
                .map(|(s, h)| (SpinConfig::from_raw(s, self.basis), h)),
        );
        Ok(out)
    }
}

/// Antiferromagnetic Heisenberg chain `J Σ S_i · S_{i+1}`.
pub fn build_afh(n_sites: usize, j: f64, periodic: bool, basis: Basis) -> Result<BondHamiltonian> {
    let bond = heisenberg_bond(basis) * Complex64::new(j, 0.0);
    BondHamiltonian::from_bond_matrix(n_sites, periodic, basis, bond, EnergyShift::NONE)
}

/// Bilinear-biquadratic chain `Σ [S·S + β (S·S)²]` plus `shift` per site.
pub fn build_blbq(n_sites: usize, beta: f64, periodic: bool, basis: Basis, shift: f64) -> Result<BondHamiltonian> {
    let p = heisenberg_bond(basis);
    let bond = p + p * p * Complex64::new(beta, 0.0);
    BondHamiltonian::from_bond_matrix(n_sites, periodic, basis, bond, EnergyShift { value: shift, per_site: true })
}

/// AKLT point: β = 1/3 with a +2/3 shift per site on a ring.
pub fn build_aklt(n_sites: usize, basis: Basis) -> Result<BondHamiltonian> {
    build_blbq(n_sites, 1.0 / 3.0, true, basis, 2.0 / 3.0)
}
