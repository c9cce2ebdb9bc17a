use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DenseState;
use crate::error::{Error, Result};
use crate::hilbert::{enumerate_sector, SectorSpec, SpinConfig};
use crate::model::BondHamiltonian;

/// Sector dimension up to which the full dense eigensolver is used.
pub const DENSE_LIMIT: usize = 800;
/// Largest sector accepted for exact diagonalization.
pub const MAX_SECTOR_DIM: usize = 400_000;

const RESIDUAL_TOL: f64 = 1e-9;
const KRYLOV_DIM: usize = 60;
const MAX_RESTARTS: usize = 300;
const START_SEED: u64 = 0x5eed;
const ABSENT: u32 = u32::MAX;

/// Hamiltonian restricted to one sector, stored in compressed rows.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    pub sector: SectorSpec,
    configs: Vec<SpinConfig>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl SectorHamiltonian {
    pub fn new(h: &BondHamiltonian, sector: SectorSpec) -> Result<Self> {
        let n = h.n_sites;
        let configs = enumerate_sector(n, h.basis, sector)?;
        if configs.is_empty() {
            return Err(Error::EmptySector(sector.to_string()));
        }
        if configs.len() > MAX_SECTOR_DIM {
            return Err(Error::InvalidArgument(format!(
                "sector dimension {} exceeds the limit {MAX_SECTOR_DIM}",
                configs.len()
            )));
        }
        let mut lookup = vec![ABSENT; 3usize.pow(n as u32)];
        for (k, c) in configs.iter().enumerate() {
            lookup[c.code()] = k as u32;
        }
        let pow3: Vec<isize> = (0..n).map(|j| 3isize.pow((n - 1 - j) as u32)).collect();

        let mut row_ptr = Vec::with_capacity(configs.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(u32, Complex64)> = Vec::new();
        for (k, c) in configs.iter().enumerate() {
            let sites = c.sites();
            let code = c.code() as isize;
            row.clear();
            h.for_each_connected(sites, |changes, v| {
                let mut target = code;
                for &(j, s) in changes {
                    target += (s as isize - sites[j] as isize) * pow3[j];
                }
                let col = if changes.is_empty() { k as u32 } else { lookup[target as usize] };
                // terms leaving the sector vanish for symmetric Hamiltonians
                if col != ABSENT {
                    row.push((col, v));
                }
            });
            row.sort_by_key(|e| e.0);
            let mut last = ABSENT;
            for &(col, v) in row.iter() {
                if col == last {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(col);
                    vals.push(v);
                    last = col;
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { sector, configs, row_ptr, cols, vals })
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[SpinConfig] {
        &self.configs
    }

    pub fn n_nonzeros(&self) -> usize {
        self.vals.len()
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for r in 0..d {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }

    /// `⟨x|H|x⟩ / ⟨x|x⟩`.
    pub fn rayleigh_quotient(&self, x: &[Complex64]) -> Result<f64> {
        let nrm = norm_sqr(x);
        if nrm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut y);
        Ok(dot(x, &y).re / nrm)
    }

    /// `‖H x − λ x‖`.
    pub fn residual(&self, x: &[Complex64], lambda: f64) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut y);
        y.iter().zip(x).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Lowest `k` eigenpairs in ascending order with normalized vectors.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<Vec<(f64, Vec<Complex64>)>> {
        let k = k.min(self.dim());
        if self.dim() <= DENSE_LIMIT {
            return Ok(self.dense_eigenpairs(k));
        }
        let mut found: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(k);
        for level in 0..k {
            let locked: Vec<&[Complex64]> = found.iter().map(|p| p.1.as_slice()).collect();
            let pair = self.lanczos_lowest(&locked, START_SEED + level as u64)?;
            found.push(pair);
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(found)
    }

    fn dense_eigenpairs(&self, k: usize) -> Vec<(f64, Vec<Complex64>)> {
        let eig = self.to_dense().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order
            .into_iter()
            .take(k)
            .map(|c| {
                let v: Vec<Complex64> = eig.eigenvectors.column(c).iter().copied().collect();
                (eig.eigenvalues[c], normalized(v))
            })
            .collect()
    }

    /// Restarted Lanczos with full reorthogonalization, working in the
    /// orthogonal complement of `locked`.
    fn lanczos_lowest(&self, locked: &[&[Complex64]], seed: u64) -> Result<(f64, Vec<Complex64>)> {
        let d = self.dim();
        let m_max = KRYLOV_DIM.min(d - locked.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut start: Vec<Complex64> =
            (0..d).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let mut residual = f64::INFINITY;
        let mut w = vec![Complex64::new(0.0, 0.0); d];
        for _ in 0..MAX_RESTARTS {
            project_out(&mut start, locked);
            let nrm = norm_sqr(&start).sqrt();
            if nrm == 0.0 {
                return Err(Error::NoConvergence { residual });
            }
            let mut basis: Vec<Vec<Complex64>> = vec![start.iter().map(|z| z / nrm).collect()];
            let mut alpha: Vec<f64> = Vec::new();
            let mut beta: Vec<f64> = Vec::new();
            loop {
                let j = basis.len() - 1;
                self.apply(&basis[j], &mut w);
                let a = dot(&basis[j], &w).re;
                alpha.push(a);
                // two passes of Gram-Schmidt keep the basis orthogonal to roundoff
                for _ in 0..2 {
                    project_out(&mut w, locked);
                    for q in &basis {
                        let c = dot(q, &w);
                        for (wi, qi) in w.iter_mut().zip(q) {
                            *wi -= c * qi;
                        }
                    }
                }
                let b = norm_sqr(&w).sqrt();
                if basis.len() == m_max || b < 1e-12 {
                    break;
                }
                beta.push(b);
                basis.push(w.iter().map(|z| z / b).collect());
            }
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = t.symmetric_eigen();
            let (idx, _) = eig
                .eigenvalues
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty tridiagonal");
            let coeffs: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
            let mut y = vec![Complex64::new(0.0, 0.0); d];
            for (q, &cq) in basis.iter().zip(coeffs.iter()) {
                for (yi, qi) in y.iter_mut().zip(q) {
                    *yi += qi * cq;
                }
            }
            project_out(&mut y, locked);
            let y = normalized(y);
            let lambda = self.rayleigh_quotient(&y)?;
            residual = self.residual(&y, lambda);
            if residual <= RESIDUAL_TOL * lambda.abs().max(1.0) {
                return Ok((lambda, y));
            }
            start = y;
        }
        Err(Error::NoConvergence { residual })
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

fn normalized(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = norm_sqr(&v).sqrt();
    if n > 0.0 {
        for z in &mut v {
            *z /= n;
        }
    }
    v
}

fn project_out(v: &mut [Complex64], locked: &[&[Complex64]]) {
    for q in locked {
        let c = dot(q, v);
        for (vi, qi) in v.iter_mut().zip(q.iter()) {
            *vi -= c * qi;
        }
    }
}

/// Lowest sector energies and the ground state.
#[derive(Debug, Clone)]
pub struct LowSpectrum {
    pub ground_energy: f64,
    /// Second-lowest sector eigenvalue minus the lowest.
    pub gap: f64,
    pub ground_state: DenseState,
}

fn to_state(h: &BondHamiltonian, sh: SectorHamiltonian, amps: Vec<Complex64>) -> Result<DenseState> {
    DenseState::new(h.n_sites, h.basis, sh.sector, sh.configs, amps)
}

/// Lowest eigenpair of `h` restricted to `sector`.
pub fn exact_ground_state(h: &BondHamiltonian, sector: SectorSpec) -> Result<(f64, DenseState)> {
    let sh = SectorHamiltonian::new(h, sector)?;
    let (e0, v) = sh.lowest_eigenpairs(1)?.remove(0);
    Ok((e0, to_state(h, sh, v)?))
}

/// Ground state plus the gap between the two lowest sector eigenvalues.
pub fn exact_low_spectrum(h: &BondHamiltonian, sector: SectorSpec) -> Result<LowSpectrum> {
    let sh = SectorHamiltonian::new(h, sector)?;
    let mut pairs = sh.lowest_eigenpairs(2)?;
    let gap = if pairs.len() > 1 { pairs[1].0 - pairs[0].0 } else { f64::INFINITY };
    let (e0, v) = pairs.remove(0);
    Ok(LowSpectrum { ground_energy: e0, gap, ground_state: to_state(h, sh, v)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Basis;
    use crate::model::{build_afh, build_aklt};

    #[test]
    fn singlet_bond() {
        let h = build_afh(2, 1.0, false, Basis::Sz).unwrap();
        let (e0, _) = exact_ground_state(&h, SectorSpec::None).unwrap();
        assert!((e0 + 2.0).abs() < 1e-12);
    }

    #[test]
    fn sector_matrix_is_hermitian() {
        for basis in [Basis::Sz, Basis::Xyz] {
            let h = build_aklt(4, basis).unwrap();
            let m = SectorHamiltonian::new(&h, SectorSpec::None).unwrap().to_dense();
            assert!((&m - m.adjoint()).norm() < 1e-12);
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let h = build_afh(7, 1.0, true, Basis::Sz).unwrap();
        let sh = SectorHamiltonian::new(&h, SectorSpec::TotalSz(1)).unwrap();
        let dense = sh.dense_eigenpairs(2);
        let first = sh.lanczos_lowest(&[], 1).unwrap();
        let second = sh.lanczos_lowest(&[&first.1], 2).unwrap();
        assert!((first.0 - dense[0].0).abs() < 1e-10);
        assert!((second.0 - dense[1].0).abs() < 1e-10);
        assert!(sh.residual(&second.1, second.0) < 1e-8);
    }

    #[test]
    fn aklt_is_frustration_free() {
        for n in [4, 5, 6] {
            let h = build_aklt(n, Basis::Sz).unwrap();
            let (e0, _) = exact_ground_state(&h, SectorSpec::TotalSz(0)).unwrap();
            assert!(e0.abs() < 1e-10, "N={n}: {e0}");
        }
    }
}
