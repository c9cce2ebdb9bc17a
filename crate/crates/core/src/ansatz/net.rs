use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Ansatz;
use crate::error::{Error, Result};

/// 2×3 coupling matrix: rows are the hidden values (+1, −1), columns the
/// local indices (+1, 0, −1).
pub type CouplingMatrix = [[Complex64; 3]; 2];

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// The all-ones matrix of a disconnected hidden/visible pair.
pub const IDENTITY_COUPLING: CouplingMatrix = [[ONE; 3]; 2];

/// Tensor-network form of the spin-1 NQS: `Ψ(v) = Π_j s_j[v_j] · Π_i Υ_i(v)`
/// with `Υ_i(v) = Π_j C^{ij}_{+,v_j} + Π_j C^{ij}_{−,v_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingNet {
    n_sites: usize,
    n_hidden: usize,
    /// Row-major M×N grid.
    mats: Vec<CouplingMatrix>,
    /// Per-site visible factors.
    pub site_bias: Vec<[Complex64; 3]>,
}

impl CouplingNet {
    /// Net with every coupling equal to the all-ones matrix.
    pub fn disconnected(n_sites: usize, n_hidden: usize) -> Self {
        Self {
            n_sites,
            n_hidden,
            mats: vec![IDENTITY_COUPLING; n_sites * n_hidden],
            site_bias: vec![[ONE; 3]; n_sites],
        }
    }

    pub fn from_rows(n_sites: usize, rows: Vec<Vec<CouplingMatrix>>) -> Result<Self> {
        let mut net = Self::disconnected(n_sites, 0);
        for row in rows {
            net.push_unit(row)?;
        }
        Ok(net)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn matrix(&self, i: usize, j: usize) -> &CouplingMatrix {
        &self.mats[i * self.n_sites + j]
    }

    pub fn matrix_mut(&mut self, i: usize, j: usize) -> &mut CouplingMatrix {
        &mut self.mats[i * self.n_sites + j]
    }

    pub fn unit(&self, i: usize) -> &[CouplingMatrix] {
        &self.mats[i * self.n_sites..(i + 1) * self.n_sites]
    }

    /// Appends a hidden unit given its N coupling matrices.
    pub fn push_unit(&mut self, row: Vec<CouplingMatrix>) -> Result<()> {
        if row.len() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, got: row.len() });
        }
        self.mats.extend(row);
        self.n_hidden += 1;
        Ok(())
    }

    /// Number of matrices not equal to the all-ones matrix for each unit.
    pub fn coordination(&self) -> Vec<usize> {
        (0..self.n_hidden).map(|i| self.unit(i).iter().filter(|m| **m != IDENTITY_COUPLING).count()).collect()
    }

    /// `Σ_i log Υ_i + Σ_j log s_j[v_j]`, or `None` when any factor vanishes.
    pub fn log_amplitude(&self, sites: &[u8]) -> Option<Complex64> {
        let mut acc = ZERO;
        for (j, &s) in sites.iter().enumerate() {
            let f = self.site_bias[j][s as usize];
            if f == ZERO {
                return None;
            }
            acc += f.ln();
        }
        for i in 0..self.n_hidden {
            let u = correlator(self, i, sites);
            if u == ZERO {
                return None;
            }
            acc += u.ln();
        }
        Some(acc)
    }

    /// Plain amplitude, with exact zeros preserved.
    pub fn amplitude(&self, sites: &[u8]) -> Complex64 {
        let mut acc = ONE;
        for (j, &s) in sites.iter().enumerate() {
            acc *= self.site_bias[j][s as usize];
        }
        for i in 0..self.n_hidden {
            acc *= correlator(self, i, sites);
        }
        acc
    }
}

/// Correlator `Υ_i(v)` of one hidden unit, computed in O(N).
pub fn correlator(net: &CouplingNet, unit: usize, sites: &[u8]) -> Complex64 {
    let mut plus = ONE;
    let mut minus = ONE;
    for (m, &s) in net.unit(unit).iter().zip(sites) {
        plus *= m[0][s as usize];
        minus *= m[1][s as usize];
    }
    plus + minus
}

impl Ansatz for CouplingNet {
    type Cache = ();

    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn log_psi(&self, sites: &[u8]) -> Option<Complex64> {
        self.log_amplitude(sites)
    }

    fn cache(&self, _sites: &[u8]) {}

    fn log_psi_ratio(&self, _cache: &(), sites: &[u8], changes: &[(usize, u8)]) -> Option<Complex64> {
        let old = self.log_amplitude(sites)?;
        let mut new_sites = sites.to_vec();
        for &(j, s) in changes {
            new_sites[j] = s;
        }
        Some(self.log_amplitude(&new_sites)? - old)
    }

    fn update_cache(&self, _cache: &mut (), _sites: &[u8], _changes: &[(usize, u8)], _old: &[u8]) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn all_identity_gives_two_per_unit() {
        let net = CouplingNet::disconnected(4, 3);
        for code in 0..81usize {
            let sites: Vec<u8> = (0..4).map(|j| ((code / 3usize.pow(j)) % 3) as u8).collect();
            assert_eq!(correlator(&net, 0, &sites), c(2.0));
            assert!((net.amplitude(&sites) - c(8.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn parity_unit_cancels_odd_strings() {
        let cxy = [[c(1.0), c(1.0), c(1.0)], [c(-1.0), c(-1.0), c(1.0)]];
        let net = CouplingNet::from_rows(4, vec![vec![cxy; 4]]).unwrap();
        // one x, rest z: #x + #y odd
        assert_eq!(correlator(&net, 0, &[0, 2, 2, 2]), c(0.0));
        assert_eq!(net.log_amplitude(&[0, 2, 2, 2]), None);
        assert_eq!(correlator(&net, 0, &[0, 1, 2, 2]), c(2.0));
    }

    #[test]
    fn random_net_matches_termwise_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut r = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let rows: Vec<Vec<CouplingMatrix>> =
            (0..3).map(|_| (0..4).map(|_| [[r(), r(), r()], [r(), r(), r()]]).collect()).collect();
        let net = CouplingNet::from_rows(4, rows.clone()).unwrap();
        for code in 0..81usize {
            let sites: Vec<u8> = (0..4).map(|j| ((code / 3usize.pow(j)) % 3) as u8).collect();
            let mut expect = c(1.0);
            for row in &rows {
                let mut up = c(1.0);
                let mut dn = c(1.0);
                for (m, &s) in row.iter().zip(&sites) {
                    up *= m[0][s as usize];
                    dn *= m[1][s as usize];
                }
                expect *= up + dn;
            }
            let got = net.log_amplitude(&sites).unwrap().exp();
            assert!((got - expect).norm() < 1e-12 * expect.norm().max(1e-3));
        }
    }

    #[test]
    fn hand_evaluated_three_site_correlator() {
        let m0 = [[c(1.0), c(2.0), c(3.0)], [c(4.0), c(5.0), c(6.0)]];
        let m1 = [[c(0.5), c(-1.0), c(2.0)], [c(1.0), c(0.0), c(-2.0)]];
        let m2 = [[c(1.0), c(1.0), c(-1.0)], [c(3.0), c(0.5), c(1.0)]];
        let net = CouplingNet::from_rows(3, vec![vec![m0, m1, m2]]).unwrap();
        // sites (0, 2, 1): 1·2·1 + 4·(−2)·0.5 = 2 − 4
        assert_eq!(correlator(&net, 0, &[0, 2, 1]), c(-2.0));
    }

    #[test]
    fn wrong_row_length_is_rejected() {
        let mut net = CouplingNet::disconnected(3, 0);
        assert!(net.push_unit(vec![IDENTITY_COUPLING; 2]).is_err());
    }
}
