//! JSON parameter files for the three wave-function forms.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{CouplingNet, Spin1Rbm, UnaryRbm, Variational};
use crate::error::{Error, Result};
use crate::hilbert::Basis;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamFileKind {
    Spin1,
    Spin12,
    Net,
}

/// Parameters of any supported wave function.
#[derive(Debug, Clone)]
pub enum Parameters {
    Spin1(Spin1Rbm),
    /// Spin-½ machine on the unary encoding of N spin-1 sites.
    Spin12(UnaryRbm),
    Net(CouplingNet),
}

impl Parameters {
    pub fn kind(&self) -> ParamFileKind {
        match self {
            Parameters::Spin1(_) => ParamFileKind::Spin1,
            Parameters::Spin12(_) => ParamFileKind::Spin12,
            Parameters::Net(_) => ParamFileKind::Net,
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            Parameters::Spin1(r) => r.n_visible(),
            Parameters::Spin12(u) => u.rbm.n_visible() / 3,
            Parameters::Net(n) => n.n_sites(),
        }
    }

    pub fn n_hidden(&self) -> usize {
        match self {
            Parameters::Spin1(r) => r.n_hidden(),
            Parameters::Spin12(u) => u.rbm.n_hidden(),
            Parameters::Net(n) => n.n_hidden(),
        }
    }
}

/// On-disk layout. Machine parameters are listed in their frozen order; a
/// net lists its site factors (N×3) and then every coupling matrix in
/// row-major unit/site order, each as its h = +1 row followed by h = −1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamFile {
    pub version: u32,
    pub kind: ParamFileKind,
    #[serde(rename = "N")]
    pub n_sites: usize,
    #[serde(rename = "M")]
    pub n_hidden: usize,
    pub basis: Basis,
    pub params: Vec<[f64; 2]>,
}

fn pairs(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn complexes(values: &[[f64; 2]]) -> Vec<Complex64> {
    values.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

impl ParamFile {
    pub fn new(params: &Parameters, basis: Basis) -> Self {
        let flat = match params {
            Parameters::Spin1(r) => Variational::params(r),
            Parameters::Spin12(u) => Variational::params(u),
            Parameters::Net(net) => {
                let mut out: Vec<Complex64> = net.site_bias.iter().flatten().copied().collect();
                for i in 0..net.n_hidden() {
                    for m in net.unit(i) {
                        out.extend(m.iter().flatten());
                    }
                }
                out
            }
        };
        Self {
            version: FORMAT_VERSION,
            kind: params.kind(),
            n_sites: params.n_sites(),
            n_hidden: params.n_hidden(),
            basis,
            params: pairs(&flat),
        }
    }

    pub fn to_parameters(&self) -> Result<Parameters> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        let (n, m) = (self.n_sites, self.n_hidden);
        if n == 0 {
            return Err(Error::Format("N must be positive".into()));
        }
        let flat = complexes(&self.params);
        let expected = match self.kind {
            ParamFileKind::Spin1 => 2 * m * n + 2 * n + m,
            ParamFileKind::Spin12 => m + 3 * n + 3 * n * m,
            ParamFileKind::Net => 3 * n + 6 * n * m,
        };
        if flat.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: flat.len() });
        }
        Ok(match self.kind {
            ParamFileKind::Spin1 => {
                let mut r = Spin1Rbm::zeros(n, m);
                r.set_params(&flat);
                Parameters::Spin1(r)
            }
            ParamFileKind::Spin12 => {
                let mut u = UnaryRbm::zeros(n, m);
                u.set_params(&flat);
                Parameters::Spin12(u)
            }
            ParamFileKind::Net => {
                let mut net = CouplingNet::disconnected(n, m);
                for (j, chunk) in flat[..3 * n].chunks(3).enumerate() {
                    net.site_bias[j].copy_from_slice(chunk);
                }
                for (k, chunk) in flat[3 * n..].chunks(6).enumerate() {
                    let mat = net.matrix_mut(k / n, k % n);
                    mat[0].copy_from_slice(&chunk[..3]);
                    mat[1].copy_from_slice(&chunk[3..]);
                }
                Parameters::Net(net)
            }
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn save_parameters(path: &Path, params: &Parameters, basis: Basis) -> Result<()> {
    fs::write(path, ParamFile::new(params, basis).to_json()?)?;
    Ok(())
}

pub fn load_parameters(path: &Path) -> Result<(Parameters, Basis)> {
    let file = ParamFile::from_json(&fs::read_to_string(path)?)?;
    Ok((file.to_parameters()?, file.basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::IDENTITY_COUPLING;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0) / 3.0)).collect()
    }

    #[test]
    fn machine_files_round_trip_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut r = Spin1Rbm::zeros(4, 3);
        r.set_params(&random(&mut rng, Variational::n_params(&r)));
        let text = ParamFile::new(&Parameters::Spin1(r.clone()), Basis::Xyz).to_json().unwrap();
        let back = ParamFile::from_json(&text).unwrap();
        assert_eq!(back.basis, Basis::Xyz);
        match back.to_parameters().unwrap() {
            Parameters::Spin1(s) => assert_eq!(Variational::params(&s), Variational::params(&r)),
            _ => panic!("wrong kind"),
        }

        let mut u = UnaryRbm::zeros(3, 2);
        u.set_params(&random(&mut rng, Variational::n_params(&u)));
        let text = ParamFile::new(&Parameters::Spin12(u.clone()), Basis::Sz).to_json().unwrap();
        match ParamFile::from_json(&text).unwrap().to_parameters().unwrap() {
            Parameters::Spin12(s) => assert_eq!(Variational::params(&s), Variational::params(&u)),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn net_file_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut net = CouplingNet::disconnected(3, 2);
        for i in 0..2 {
            for j in 0..3 {
                let v = random(&mut rng, 6);
                *net.matrix_mut(i, j) = [[v[0], v[1], v[2]], [v[3], v[4], v[5]]];
            }
        }
        net.site_bias[1] = [Complex64::new(2.0, 0.5); 3];
        let file = ParamFile::new(&Parameters::Net(net.clone()), Basis::Sz);
        assert_eq!(file.params.len(), 9 + 36);
        match ParamFile::from_json(&file.to_json().unwrap()).unwrap().to_parameters().unwrap() {
            Parameters::Net(back) => assert_eq!(back, net),
            _ => panic!("wrong kind"),
        }
        assert_ne!(*net.matrix(0, 0), IDENTITY_COUPLING);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let mut file = ParamFile::new(&Parameters::Spin1(Spin1Rbm::zeros(2, 1)), Basis::Sz);
        file.params.pop();
        assert!(matches!(file.to_parameters(), Err(Error::DimensionMismatch { .. })));
        file.version = 9;
        assert!(matches!(file.to_parameters(), Err(Error::Format(_))));
    }
}
