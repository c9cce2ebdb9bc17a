//! Experiment configuration read from TOML files and command-line flags.

use std::path::PathBuf;

use nqs_core::hilbert::MAX_ENUMERATION_SITES;
use nqs_core::model::{build_afh, build_aklt, build_blbq, BondHamiltonian};
use nqs_core::vmc::{Estimator, GrowthConfig, MoveMix, SamplerConfig, SrConfig, SrSolver, VmcConfig};
use nqs_core::{Basis, SectorSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Version of the configuration layout understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest chain accepted for sampling-only commands.
pub const MAX_SAMPLED_SITES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Heisenberg antiferromagnet `J Σ S_i·S_{i+1}`.
    Afh,
    /// Bilinear-biquadratic chain at β = 1/3 with the +2/3 per-site shift.
    Aklt,
    /// Bilinear-biquadratic chain with free β and shift.
    Blbq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub preset: Preset,
    pub n_sites: usize,
    pub basis: Basis,
    pub periodic: bool,
    pub j: f64,
    pub beta: f64,
    pub shift_per_site: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            preset: Preset::Afh,
            n_sites: 6,
            basis: Basis::Sz,
            periodic: true,
            j: 1.0,
            beta: 0.0,
            shift_per_site: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    /// Spin-1 machine with quadratic visible terms.
    Spin1,
    /// Spin-½ machine on the one-hot encoding.
    Unary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzSection {
    pub kind: AnsatzKind,
    pub m_max: usize,
    pub reruns: usize,
    pub init_scale: f64,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        Self { kind: AnsatzKind::Spin1, m_max: 12, reruns: 5, init_scale: 0.01 }
    }
}

/// Sampler settings; unset chain lengths follow the site count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub estimator: Estimator,
    pub n_samp: usize,
    pub decorrelation: Option<usize>,
    pub burn_in: Option<usize>,
    pub n_chains: usize,
    pub exchange: f64,
    pub pair: f64,
    pub n_blocks: usize,
}

impl Default for SamplerSection {
    fn default() -> Self {
        let mix = MoveMix::default();
        Self {
            estimator: Estimator::Sampled,
            n_samp: 8000,
            decorrelation: None,
            burn_in: None,
            n_chains: 4,
            exchange: mix.exchange,
            pair: mix.pair,
            n_blocks: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Direct,
    Cg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SrSection {
    pub learning_rate: f64,
    pub diag_shift: f64,
    pub diag_shift_floor: f64,
    pub max_steps: usize,
    pub solver: SolverKind,
    pub cg_tolerance: f64,
    pub cg_max_iter: usize,
}

impl Default for SrSection {
    fn default() -> Self {
        let sr = SrConfig::default();
        Self {
            learning_rate: sr.learning_rate,
            diag_shift: sr.diag_shift,
            diag_shift_floor: sr.diag_shift_floor,
            max_steps: sr.max_steps,
            solver: SolverKind::Direct,
            cg_tolerance: 1e-10,
            cg_max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdSection {
    /// Write the ground-state amplitudes next to the summary.
    pub export_state: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsSource {
    /// The exact AKLT net converted to a spin-1 machine with finite softening.
    AkltRbm,
    /// The exact AKLT coupling net itself.
    AkltNet,
    /// A parameter file.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub source: StatsSource,
    pub params_file: Option<PathBuf>,
    pub softening: f64,
    pub n_samp_grid: Vec<usize>,
    pub n_runs: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        Self {
            source: StatsSource::AkltRbm,
            params_file: None,
            softening: nqs_core::ansatz::DEFAULT_SOFTENING,
            n_samp_grid: vec![1000, 2000, 4000, 8000, 16000],
            n_runs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactSection {
    /// Softening used when exporting the net as a spin-1 machine.
    pub softening: f64,
    /// Largest accepted relative deviation from the MPS amplitudes.
    pub tolerance: f64,
    pub export: Option<PathBuf>,
}

impl Default for ExactSection {
    fn default() -> Self {
        Self { softening: nqs_core::ansatz::DEFAULT_SOFTENING, tolerance: 1e-10, export: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Directory receiving result files; nothing is written when unset.
    pub output: Option<PathBuf>,
    /// `auto`, `none`, `total_sz=<t>` or `parity_xyz=<bits>`.
    pub sector: String,
    /// Compute the exact ground state to report infidelities and R.
    pub reference: bool,
    pub model: ModelSection,
    pub ansatz: AnsatzSection,
    pub sampler: SamplerSection,
    pub sr: SrSection,
    pub ed: EdSection,
    pub stats: StatsSection,
    pub exact: ExactSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 1,
            output: None,
            sector: "auto".into(),
            reference: true,
            model: ModelSection::default(),
            ansatz: AnsatzSection::default(),
            sampler: SamplerSection::default(),
            sr: SrSection::default(),
            ed: EdSection::default(),
            stats: StatsSection::default(),
            exact: ExactSection::default(),
        }
    }
}

fn field(name: &str, message: impl Into<String>) -> CliError {
    CliError::Config(format!("{name}: {}", message.into()))
}

/// Overlays `top` onto `base`, recursing into tables.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

impl ExperimentConfig {
    /// Parses a complete configuration file.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        Self::from_layers(toml::Table::new(), Some(text))
    }

    /// Builds a configuration from flag values with an optional file whose
    /// entries take precedence. Files must state `schema_version`.
    pub fn from_layers(flags: toml::Table, file: Option<&str>) -> Result<Self, CliError> {
        let mut table = flags;
        if let Some(text) = file {
            let parsed: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
            if !parsed.contains_key("schema_version") {
                return Err(field("schema_version", "missing from configuration file"));
            }
            merge(&mut table, parsed);
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Field-level checks that need no computation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version)));
        }
        let m = &self.model;
        if m.n_sites < 2 || m.n_sites > MAX_SAMPLED_SITES {
            return Err(field("model.n_sites", format!("must lie in 2..={MAX_SAMPLED_SITES}, got {}", m.n_sites)));
        }
        for (name, v) in [("model.j", m.j), ("model.beta", m.beta), ("model.shift_per_site", m.shift_per_site)] {
            if !v.is_finite() {
                return Err(field(name, "must be finite"));
            }
        }
        self.sector()?;
        let a = &self.ansatz;
        if a.m_max == 0 {
            return Err(field("ansatz.m_max", "must be at least 1"));
        }
        if a.reruns == 0 {
            return Err(field("ansatz.reruns", "must be at least 1"));
        }
        if !(a.init_scale >= 0.0 && a.init_scale.is_finite()) {
            return Err(field("ansatz.init_scale", "must be finite and non-negative"));
        }
        let s = &self.sampler;
        if s.n_samp < 2 {
            return Err(field("sampler.n_samp", "must be at least 2"));
        }
        if s.decorrelation == Some(0) {
            return Err(field("sampler.decorrelation", "must be at least 1"));
        }
        if s.n_chains == 0 {
            return Err(field("sampler.n_chains", "must be at least 1"));
        }
        if !(s.exchange >= 0.0 && s.pair >= 0.0 && s.exchange + s.pair > 0.0) {
            return Err(field("sampler.exchange", "move weights must be non-negative with a positive sum"));
        }
        if s.n_blocks < 2 {
            return Err(field("sampler.n_blocks", "must be at least 2"));
        }
        let r = &self.sr;
        if !(r.learning_rate > 0.0 && r.learning_rate.is_finite()) {
            return Err(field("sr.learning_rate", "must be positive"));
        }
        if !(r.diag_shift >= 0.0) {
            return Err(field("sr.diag_shift", "must be non-negative"));
        }
        if !(r.diag_shift_floor >= 0.0) {
            return Err(field("sr.diag_shift_floor", "must be non-negative"));
        }
        if r.solver == SolverKind::Cg && !(r.cg_tolerance > 0.0 && r.cg_max_iter > 0) {
            return Err(field("sr.cg_tolerance", "tolerance and cg_max_iter must be positive"));
        }
        let st = &self.stats;
        if st.n_runs < 2 {
            return Err(field("stats.n_runs", "must be at least 2"));
        }
        if st.n_samp_grid.is_empty() || st.n_samp_grid.contains(&0) {
            return Err(field("stats.n_samp_grid", "must be a non-empty list of positive sizes"));
        }
        if st.source == StatsSource::File && st.params_file.is_none() {
            return Err(field("stats.params_file", "required when stats.source = \"file\""));
        }
        if !(st.softening > 0.0) {
            return Err(field("stats.softening", "must be positive"));
        }
        let e = &self.exact;
        if !(e.softening > 0.0) {
            return Err(field("exact.softening", "must be positive"));
        }
        if !(e.tolerance > 0.0) {
            return Err(field("exact.tolerance", "must be positive"));
        }
        Ok(())
    }

    /// Checks the system is small enough for exact enumeration.
    pub fn require_enumerable(&self, purpose: &str) -> Result<(), CliError> {
        if self.model.n_sites > MAX_ENUMERATION_SITES {
            return Err(field(
                "model.n_sites",
                format!("{purpose} needs at most {MAX_ENUMERATION_SITES} sites, got {}", self.model.n_sites),
            ));
        }
        Ok(())
    }

    pub fn sector(&self) -> Result<SectorSpec, CliError> {
        let (n, basis) = (self.model.n_sites, self.model.basis);
        let sector = if self.sector.trim().eq_ignore_ascii_case("auto") {
            SectorSpec::ground_state_default(n, basis)
        } else {
            self.sector.parse::<SectorSpec>().map_err(|e| field("sector", e.to_string()))?
        };
        sector.validate(n, basis).map_err(|e| field("sector", e.to_string()))?;
        Ok(sector)
    }

    pub fn hamiltonian(&self) -> Result<BondHamiltonian, CliError> {
        let m = &self.model;
        let h = match m.preset {
            Preset::Afh => build_afh(m.n_sites, m.j, m.periodic, m.basis),
            Preset::Aklt => build_aklt(m.n_sites, m.basis),
            Preset::Blbq => build_blbq(m.n_sites, m.beta, m.periodic, m.basis, m.shift_per_site),
        };
        h.map_err(|e| field("model", e.to_string()))
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        let s = &self.sampler;
        let base = SamplerConfig::for_sites(self.model.n_sites);
        SamplerConfig {
            n_samp: s.n_samp,
            decorrelation: s.decorrelation.unwrap_or(base.decorrelation),
            burn_in: s.burn_in.unwrap_or(base.burn_in),
            rng_seed: self.seed,
            move_mix: MoveMix { exchange: s.exchange, pair: s.pair },
            n_chains: s.n_chains,
        }
    }

    pub fn sr_config(&self) -> SrConfig {
        let r = &self.sr;
        SrConfig {
            learning_rate: r.learning_rate,
            diag_shift: r.diag_shift,
            diag_shift_floor: r.diag_shift_floor,
            solver: match r.solver {
                SolverKind::Direct => SrSolver::Direct,
                SolverKind::Cg => SrSolver::ConjugateGradient { tolerance: r.cg_tolerance, max_iter: r.cg_max_iter },
            },
            max_steps: r.max_steps,
        }
    }

    pub fn growth_config(&self) -> GrowthConfig {
        GrowthConfig {
            m_max: self.ansatz.m_max,
            reruns: self.ansatz.reruns,
            seed: self.seed,
            vmc: VmcConfig {
                sampler: self.sampler_config(),
                sr: self.sr_config(),
                estimator: self.sampler.estimator,
                init_scale: self.ansatz.init_scale,
                n_blocks: self.sampler.n_blocks,
            },
        }
    }
}
