//! Spin-1 configurations, local bases and symmetry sectors.
//!
//! A local state is stored as an index in `{0, 1, 2}`. In the S^z basis the
//! indices are (⇑, 0, ⇓); in the xyz basis they are (x, y, z). Both orderings
//! map onto the visible values (+1, 0, −1).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest site count accepted by full-sector enumeration.
pub const MAX_ENUMERATION_SITES: usize = 14;

/// Visible value assigned to each local index.
pub const VISIBLE: [f64; 3] = [1.0, 0.0, -1.0];

/// Local single-spin basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Sz,
    Xyz,
}

impl Basis {
    /// Characters used for the three local states.
    pub fn alphabet(self) -> [char; 3] {
        match self {
            Basis::Sz => ['+', '0', '-'],
            Basis::Xyz => ['x', 'y', 'z'],
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Sz => write!(f, "sz"),
            Basis::Xyz => write!(f, "xyz"),
        }
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sz" | "z" => Ok(Basis::Sz),
            "xyz" => Ok(Basis::Xyz),
            other => Err(Error::InvalidArgument(format!("unknown basis '{other}'"))),
        }
    }
}

/// A configuration of N spin-1 sites in a given basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    sites: Vec<u8>,
    basis: Basis,
}

impl SpinConfig {
    pub fn new(sites: Vec<u8>, basis: Basis) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("configuration has no sites".into()));
        }
        if let Some(&bad) = sites.iter().find(|&&s| s > 2) {
            return Err(Error::InvalidLocalState(bad));
        }
        Ok(Self { sites, basis })
    }

    pub(crate) fn from_raw(sites: Vec<u8>, basis: Basis) -> Self {
        debug_assert!(sites.iter().all(|&s| s < 3));
        Self { sites, basis }
    }

    pub fn sites(&self) -> &[u8] {
        &self.sites
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn into_sites(self) -> Vec<u8> {
        self.sites
    }

    /// Base-3 code with site 1 as the most significant digit. Lexicographic
    /// order of configurations equals numeric order of codes.
    pub fn code(&self) -> usize {
        code_of(&self.sites)
    }

    pub fn parse(s: &str, basis: Basis) -> Result<Self> {
        let alphabet = basis.alphabet();
        let sites = s
            .chars()
            .map(|c| {
                alphabet
                    .iter()
                    .position(|&a| a == c)
                    .map(|p| p as u8)
                    .ok_or_else(|| Error::ParseConfig(format!("'{c}' is not a {basis} state")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sites, basis)
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alphabet = self.basis.alphabet();
        for &s in &self.sites {
            write!(f, "{}", alphabet[s as usize])?;
        }
        Ok(())
    }
}

pub(crate) fn code_of(sites: &[u8]) -> usize {
    sites.iter().fold(0usize, |acc, &s| acc * 3 + s as usize)
}

/// Conserved-quantity sector used to restrict sampling and enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorSpec {
    /// Whole Hilbert space.
    None,
    /// Fixed total S^z (S^z basis only).
    TotalSz(i32),
    /// Parities of the x, y and z populations (xyz basis only).
    ParityXyz(u8, u8, u8),
}

impl SectorSpec {
    /// Sector holding the AKLT and AFH ground states of an N-site ring.
    pub fn ground_state_default(n_sites: usize, basis: Basis) -> Self {
        match basis {
            Basis::Sz => SectorSpec::TotalSz(0),
            Basis::Xyz => {
                let p = (n_sites % 2) as u8;
                SectorSpec::ParityXyz(p, p, p)
            }
        }
    }

    pub fn contains(&self, config: &SpinConfig) -> bool {
        match self {
            SectorSpec::None => true,
            _ => sector_of(config) == *self,
        }
    }

    pub(crate) fn contains_sites(&self, sites: &[u8], basis: Basis) -> bool {
        match (self, basis) {
            (SectorSpec::None, _) => true,
            (SectorSpec::TotalSz(t), Basis::Sz) => total_sz(sites) == *t,
            (SectorSpec::ParityXyz(px, py, pz), Basis::Xyz) => {
                let c = counts(sites);
                (c[0] % 2) as u8 == *px && (c[1] % 2) as u8 == *py && (c[2] % 2) as u8 == *pz
            }
            _ => false,
        }
    }

    /// Checks the sector is meaningful for the basis and site count.
    pub fn validate(&self, n_sites: usize, basis: Basis) -> Result<()> {
        match (self, basis) {
            (SectorSpec::None, _) => Ok(()),
            (SectorSpec::TotalSz(t), Basis::Sz) => {
                if t.unsigned_abs() as usize > n_sites {
                    Err(Error::EmptySector(self.to_string()))
                } else {
                    Ok(())
                }
            }
            (SectorSpec::ParityXyz(px, py, pz), Basis::Xyz) => {
                if *px > 1 || *py > 1 || *pz > 1 {
                    return Err(Error::InvalidArgument(format!("parities must be 0 or 1 in {self}")));
                }
                let odd = (*px + *py + *pz) as usize;
                if odd % 2 != n_sites % 2 || odd > n_sites {
                    Err(Error::EmptySector(self.to_string()))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::SectorBasisMismatch { sector: self.to_string(), basis: basis.to_string() }),
        }
    }
}

impl fmt::Display for SectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorSpec::None => write!(f, "none"),
            SectorSpec::TotalSz(t) => write!(f, "total_sz={t}"),
            SectorSpec::ParityXyz(x, y, z) => write!(f, "parity_xyz={x}{y}{z}"),
        }
    }
}

impl FromStr for SectorSpec {
    type Err = Error;

    /// Parses the [`fmt::Display`] form: `none`, `total_sz=<t>` or `parity_xyz=<bits>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown sector '{s}'"));
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(SectorSpec::None);
        }
        let (key, value) = s.split_once('=').ok_or_else(bad)?;
        match key.trim() {
            "total_sz" => value.trim().parse().map(SectorSpec::TotalSz).map_err(|_| bad()),
            "parity_xyz" => {
                let bits: Vec<u8> = value
                    .trim()
                    .chars()
                    .map(|c| match c {
                        '0' => Some(0),
                        '1' => Some(1),
                        _ => None,
                    })
                    .collect::<Option<_>>()
                    .ok_or_else(bad)?;
                match bits[..] {
                    [x, y, z] => Ok(SectorSpec::ParityXyz(x, y, z)),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

fn total_sz(sites: &[u8]) -> i32 {
    sites.iter().map(|&s| 1 - s as i32).sum()
}

fn counts(sites: &[u8]) -> [usize; 3] {
    let mut c = [0usize; 3];
    for &s in sites {
        c[s as usize] += 1;
    }
    c
}

/// Visible values (+1, 0, −1) of a configuration; identical for both bases.
pub fn visible_values(config: &SpinConfig) -> Vec<f64> {
    config.sites.iter().map(|&s| VISIBLE[s as usize]).collect()
}

/// Sector a configuration belongs to.
pub fn sector_of(config: &SpinConfig) -> SectorSpec {
    match config.basis {
        Basis::Sz => SectorSpec::TotalSz(total_sz(&config.sites)),
        Basis::Xyz => {
            let c = counts(&config.sites);
            SectorSpec::ParityXyz((c[0] % 2) as u8, (c[1] % 2) as u8, (c[2] % 2) as u8)
        }
    }
}

/// All configurations of the sector in lexicographic order.
pub fn enumerate_sector(n_sites: usize, basis: Basis, sector: SectorSpec) -> Result<Vec<SpinConfig>> {
    if n_sites > MAX_ENUMERATION_SITES {
        return Err(Error::TooManySites { n: n_sites, max: MAX_ENUMERATION_SITES });
    }
    if n_sites == 0 {
        return Err(Error::InvalidArgument("configuration has no sites".into()));
    }
    if !matches!(sector, SectorSpec::None) {
        sector.validate(n_sites, basis)?;
    }
    let total = 3usize.pow(n_sites as u32);
    let mut sites = vec![0u8; n_sites];
    let mut out = Vec::new();
    for _ in 0..total {
        if sector.contains_sites(&sites, basis) {
            out.push(SpinConfig::from_raw(sites.clone(), basis));
        }
        // increment base-3 counter, last site least significant
        for s in sites.iter_mut().rev() {
            if *s < 2 {
                *s += 1;
                break;
            }
            *s = 0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sz(s: &str) -> SpinConfig {
        SpinConfig::parse(s, Basis::Sz).unwrap()
    }

    #[test]
    fn visible_mapping() {
        assert_eq!(visible_values(&sz("+0-")), vec![1.0, 0.0, -1.0]);
        let x = SpinConfig::parse("xyz", Basis::Xyz).unwrap();
        assert_eq!(visible_values(&x), vec![1.0, 0.0, -1.0]);
        assert!(visible_values(&sz("00000")).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sectors() {
        assert_eq!(sector_of(&sz("+-00")), SectorSpec::TotalSz(0));
        assert_eq!(sector_of(&sz("++0")), SectorSpec::TotalSz(2));
        let x = SpinConfig::parse("xxyyzz", Basis::Xyz).unwrap();
        assert_eq!(sector_of(&x), SectorSpec::ParityXyz(0, 0, 0));
    }

    #[test]
    fn sector_strings_round_trip() {
        for s in [SectorSpec::None, SectorSpec::TotalSz(-2), SectorSpec::ParityXyz(1, 0, 1)] {
            assert_eq!(s.to_string().parse::<SectorSpec>().unwrap(), s);
        }
        for bad in ["", "total_sz=", "parity_xyz=012", "parity_xyz=00", "spin=1"] {
            assert!(bad.parse::<SectorSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn enumerate_small() {
        let two = enumerate_sector(2, Basis::Sz, SectorSpec::TotalSz(0)).unwrap();
        let strings: Vec<String> = two.iter().map(|c| c.to_string()).collect();
        assert_eq!(strings, vec!["+-", "00", "-+"]);
        assert_eq!(enumerate_sector(1, Basis::Sz, SectorSpec::None).unwrap().len(), 3);
    }

    #[test]
    fn enumerate_parity_matches_brute_force() {
        // brute-force filter over all 729 codes, decoded independently
        let mut expected = 0;
        for code in 0..729usize {
            let mut c = [0usize; 3];
            let mut k = code;
            for _ in 0..6 {
                c[k % 3] += 1;
                k /= 3;
            }
            if c.iter().all(|n| n % 2 == 0) {
                expected += 1;
            }
        }
        assert_eq!(expected, 183);
        let got = enumerate_sector(6, Basis::Xyz, SectorSpec::ParityXyz(0, 0, 0)).unwrap();
        assert_eq!(got.len(), expected);
    }

    #[test]
    fn enumerate_errors() {
        assert!(matches!(enumerate_sector(15, Basis::Sz, SectorSpec::None), Err(Error::TooManySites { .. })));
        assert!(matches!(
            enumerate_sector(4, Basis::Xyz, SectorSpec::TotalSz(0)),
            Err(Error::SectorBasisMismatch { .. })
        ));
        assert!(enumerate_sector(4, Basis::Xyz, SectorSpec::ParityXyz(1, 0, 0)).is_err());
    }

    #[test]
    fn string_round_trip() {
        let c = SpinConfig::parse("+0--0+", Basis::Sz).unwrap();
        assert_eq!(c.to_string(), "+0--0+");
        assert!(SpinConfig::parse("+x", Basis::Sz).is_err());
    }

    #[test]
    fn codes_follow_enumeration_order() {
        let all = enumerate_sector(4, Basis::Sz, SectorSpec::None).unwrap();
        for (i, c) in all.iter().enumerate() {
            assert_eq!(c.code(), i);
        }
    }
}
