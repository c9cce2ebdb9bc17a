//! The subcommands. Each returns a report and, when an output directory is
//! configured, writes its tables and a JSON sidecar echoing the configuration.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nqs_core::ansatz::{
    couplings_to_rbm, project_unary, rbm_to_couplings, Ansatz, CouplingNet, Spin1Rbm, UnaryRbm, Variational,
};
use nqs_core::exact::{
    aklt_nqs_sz, aklt_nqs_xyz, aklt_sz_hidden_count, exact_ground_state, exact_low_spectrum, mps_amplitude, AkltMps,
    SectorHamiltonian,
};
use nqs_core::hilbert::{enumerate_sector, Basis, SectorSpec, SpinConfig};
use nqs_core::io::{load_parameters, save_parameters, ParamFileKind, Parameters};
use nqs_core::model::BondHamiltonian;
use nqs_core::vmc::{energy_statistics, sequential_growth, GrowthStep, StepRecord};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{AnsatzKind, ExperimentConfig, StatsSource};
use crate::CliError;

/// Largest system compared against the MPS over the whole Hilbert space;
/// larger ones are compared on the ground-state sector.
const FULL_SPACE_SITES: usize = 10;
/// Relative amplitude change accepted after a parameter file round trip.
const RELOAD_TOLERANCE: f64 = 1e-12;

fn output_dir(cfg: &ExperimentConfig) -> Result<Option<&Path>, CliError> {
    match cfg.output.as_deref() {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir))
        }
        None => Ok(None),
    }
}

fn write_sidecar<T: Serialize>(dir: &Path, command: &str, cfg: &ExperimentConfig, result: &T) -> Result<(), CliError> {
    let doc = serde_json::json!({
        "tool": "nqs",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
        "result": result,
    });
    let mut f = File::create(dir.join(format!("{command}.json")))?;
    serde_json::to_writer_pretty(&mut f, &doc)?;
    writeln!(f)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdReport {
    pub n_sites: usize,
    pub basis: Basis,
    pub sector: String,
    pub dim: usize,
    pub ground_energy: f64,
    /// Gap between the two lowest eigenvalues of the sector.
    pub gap: f64,
}

pub fn cmd_ed(cfg: &ExperimentConfig) -> Result<EdReport, CliError> {
    cfg.require_enumerable("exact diagonalization")?;
    let h = cfg.hamiltonian()?;
    let sector = cfg.sector()?;
    let dim = SectorHamiltonian::new(&h, sector)?.dim();
    let report = if dim > 1 {
        let spec = exact_low_spectrum(&h, sector)?;
        let out = output_dir(cfg)?;
        if let (Some(dir), true) = (out, cfg.ed.export_state) {
            spec.ground_state.write_csv(BufWriter::new(File::create(dir.join("ground_state.csv"))?))?;
        }
        EdReport {
            n_sites: h.n_sites,
            basis: h.basis,
            sector: sector.to_string(),
            dim,
            ground_energy: spec.ground_energy,
            gap: spec.gap,
        }
    } else {
        let (e0, _) = exact_ground_state(&h, sector)?;
        EdReport {
            n_sites: h.n_sites,
            basis: h.basis,
            sector: sector.to_string(),
            dim,
            ground_energy: e0,
            gap: f64::NAN,
        }
    };
    if let Some(dir) = output_dir(cfg)? {
        write_sidecar(dir, "ed", cfg, &report)?;
    }
    Ok(report)
}

fn growth<A: Variational>(
    initial: &A,
    cfg: &ExperimentConfig,
    h: &BondHamiltonian,
    sector: SectorSpec,
    log: &mut dyn FnMut(&StepRecord),
) -> Result<Vec<GrowthStep>, CliError> {
    let reference = if cfg.reference { Some(exact_low_spectrum(h, sector)?) } else { None };
    Ok(sequential_growth(initial, sector, h, &cfg.growth_config(), reference.as_ref(), log)?)
}

/// Sequential growth from one hidden unit to `ansatz.m_max`, one summary row per size.
pub fn cmd_vmc(cfg: &ExperimentConfig, log: &mut dyn FnMut(&StepRecord)) -> Result<Vec<GrowthStep>, CliError> {
    if cfg.reference {
        cfg.require_enumerable("the exact reference")?;
    }
    if cfg.sampler.estimator == nqs_core::vmc::Estimator::Exact {
        cfg.require_enumerable("the exact estimator")?;
    }
    let h = cfg.hamiltonian()?;
    let sector = cfg.sector()?;
    let n = cfg.model.n_sites;
    let out = output_dir(cfg)?;
    let mut log_file = match out {
        Some(dir) => Some(BufWriter::new(File::create(dir.join("vmc_log.jsonl"))?)),
        None => None,
    };
    let mut log_error = None;
    let mut record = |rec: &StepRecord| {
        if let Some(f) = log_file.as_mut() {
            if let Err(e) = serde_json::to_writer(&mut *f, rec).map_err(CliError::from).and_then(|_| Ok(writeln!(f)?)) {
                log_error.get_or_insert(e);
            }
        }
        log(rec);
    };
    let steps = match cfg.ansatz.kind {
        AnsatzKind::Spin1 => growth(&Spin1Rbm::zeros(n, 0), cfg, &h, sector, &mut record)?,
        AnsatzKind::Unary => growth(&UnaryRbm::zeros(n, 0), cfg, &h, sector, &mut record)?,
    };
    if let Some(e) = log_error {
        return Err(e);
    }
    if let Some(mut f) = log_file {
        f.flush()?;
    }
    if let Some(dir) = out {
        fs::write(dir.join("vmc.csv"), vmc_table_csv(&steps)?)?;
        write_sidecar(dir, "vmc", cfg, &steps)?;
        if let Some(last) = steps.last() {
            let params = match cfg.ansatz.kind {
                AnsatzKind::Spin1 => {
                    let mut r = Spin1Rbm::zeros(n, last.m);
                    r.set_params(&last.params);
                    Parameters::Spin1(r)
                }
                AnsatzKind::Unary => {
                    let mut u = UnaryRbm::zeros(n, last.m);
                    u.set_params(&last.params);
                    Parameters::Spin12(u)
                }
            };
            save_parameters(&dir.join("params.json"), &params, cfg.model.basis)?;
        }
    }
    Ok(steps)
}

fn opt_field(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Per-size table with columns `M, n_params, energy, energy_error, infidelity, R`.
pub fn vmc_table_csv(steps: &[GrowthStep]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["M", "n_params", "energy", "energy_error", "infidelity", "R"])?;
    for s in steps {
        w.write_record([
            s.m.to_string(),
            s.n_params.to_string(),
            format!("{:.12}", s.energy),
            format!("{:e}", s.energy_error),
            opt_field(s.infidelity),
            opt_field(s.resolution),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportCheck {
    pub path: PathBuf,
    pub softening: f64,
    /// Largest relative amplitude change after writing and reloading.
    pub reload_deviation: f64,
    /// Largest deviation of the softened machine from the MPS, relative to the largest amplitude.
    pub softened_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    pub n_sites: usize,
    pub basis: Basis,
    pub hidden_units: usize,
    pub expected_hidden_units: usize,
    pub configs_checked: usize,
    /// Largest `|mps − c·net|` over the largest MPS amplitude, `c` fixed on that amplitude.
    pub max_relative_deviation: f64,
    /// Configurations where exactly one of the two amplitudes vanishes.
    pub zero_mismatches: usize,
    pub global_constant: [f64; 2],
    pub tolerance: f64,
    pub export: Option<ExportCheck>,
}

impl ExactReport {
    pub fn passed(&self) -> bool {
        self.hidden_units == self.expected_hidden_units
            && self.zero_mismatches == 0
            && self.max_relative_deviation <= self.tolerance
            && self.export.as_ref().is_none_or(|e| e.reload_deviation <= RELOAD_TOLERANCE)
    }
}

/// Compares `amp` against the MPS table, returning (max deviation, zero mismatches, constant).
fn compare_to_mps(mps: &[Complex64], amp: &[Complex64]) -> (f64, usize, Complex64) {
    let (k, largest) =
        mps.iter().enumerate().map(|(k, z)| (k, z.norm())).max_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty table");
    let c = if amp[k].norm() > 0.0 { mps[k] / amp[k] } else { Complex64::new(f64::NAN, f64::NAN) };
    let mut dev = 0.0f64;
    let mut zeros = 0;
    for (m, a) in mps.iter().zip(amp) {
        let mps_zero = m.norm() <= 1e-12 * largest;
        if mps_zero != (a.norm() == 0.0) {
            zeros += 1;
        }
        let d = (m - c * a).norm() / largest;
        dev = if d.is_nan() { f64::INFINITY } else { dev.max(d) };
    }
    (dev, zeros, c)
}

/// Builds the analytic AKLT net for the configured size and basis and checks it against the MPS.
pub fn cmd_exact_aklt(cfg: &ExperimentConfig) -> Result<ExactReport, CliError> {
    cfg.require_enumerable("the MPS comparison")?;
    let (n, basis) = (cfg.model.n_sites, cfg.model.basis);
    let (net, expected) = match basis {
        Basis::Xyz => (aklt_nqs_xyz(n)?, 2 * n),
        Basis::Sz => {
            if n < 3 {
                return Err(CliError::Config("model.n_sites: the S^z construction needs at least 3 sites".into()));
            }
            (aklt_nqs_sz(n)?, aklt_sz_hidden_count(n))
        }
    };
    let sector = if n <= FULL_SPACE_SITES { SectorSpec::None } else { SectorSpec::ground_state_default(n, basis) };
    let configs = enumerate_sector(n, basis, sector)?;
    let mps = AkltMps::new(basis);
    let table: Vec<Complex64> = configs.iter().map(|c| mps_amplitude(&mps, c)).collect::<Result<_, _>>()?;
    let amps: Vec<Complex64> = configs.iter().map(|c| net.amplitude(c.sites())).collect();
    let (dev, zeros, c) = compare_to_mps(&table, &amps);
    let export = match &cfg.exact.export {
        Some(path) => Some(export_and_verify(&net, &configs, &table, path, cfg.exact.softening, basis)?),
        None => None,
    };
    Ok(ExactReport {
        n_sites: n,
        basis,
        hidden_units: net.n_hidden(),
        expected_hidden_units: expected,
        configs_checked: configs.len(),
        max_relative_deviation: dev,
        zero_mismatches: zeros,
        global_constant: [c.re, c.im],
        tolerance: cfg.exact.tolerance,
        export,
    })
}

fn export_and_verify(
    net: &CouplingNet,
    configs: &[SpinConfig],
    table: &[Complex64],
    path: &Path,
    softening: f64,
    basis: Basis,
) -> Result<ExportCheck, CliError> {
    let (rbm, _) = couplings_to_rbm(net, softening);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_parameters(path, &Parameters::Spin1(rbm.clone()), basis)?;
    let Parameters::Spin1(loaded) = load_parameters(path)?.0 else {
        return Err(CliError::Verification("reloaded file is not a spin-1 machine".into()));
    };
    // amplitudes relative to the largest one; the raw values overflow
    let log_max = configs.iter().filter_map(|c| rbm.log_psi(c.sites())).map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let scaled =
        |r: &Spin1Rbm, c: &SpinConfig| r.log_psi(c.sites()).map_or(Complex64::new(0.0, 0.0), |l| (l - log_max).exp());
    let mut reload = 0.0f64;
    let mut soft = Vec::with_capacity(configs.len());
    for c in configs {
        let (a, b) = (scaled(&rbm, c), scaled(&loaded, c));
        if a.norm() > 0.0 {
            reload = reload.max((a - b).norm() / a.norm());
        } else if b.norm() > 0.0 {
            reload = f64::INFINITY;
        }
        soft.push(a);
    }
    let (softened, _, _) = compare_to_mps(table, &soft);
    Ok(ExportCheck { path: path.to_path_buf(), softening, reload_deviation: reload, softened_deviation: softened })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub n_samp: usize,
    pub runs: usize,
    pub mean: f64,
    pub spread: f64,
    /// Spread over the sector gap.
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub rows: Vec<StatsRow>,
    pub slope: Option<f64>,
    pub gap: Option<f64>,
}

fn aklt_net(n: usize, basis: Basis) -> Result<CouplingNet, CliError> {
    Ok(match basis {
        Basis::Xyz => aklt_nqs_xyz(n)?,
        Basis::Sz => aklt_nqs_sz(n)?,
    })
}

/// Spread of independent energy estimates over the configured sample sizes.
pub fn cmd_sample_stats(cfg: &ExperimentConfig) -> Result<StatsReport, CliError> {
    if cfg.reference {
        cfg.require_enumerable("the exact reference")?;
    }
    let h = cfg.hamiltonian()?;
    let sector = cfg.sector()?;
    let (n, basis) = (cfg.model.n_sites, cfg.model.basis);
    let sampler = cfg.sampler_config();
    let (grid, runs) = (&cfg.stats.n_samp_grid, cfg.stats.n_runs);
    let stats = match cfg.stats.source {
        StatsSource::AkltRbm => {
            let (rbm, _) = couplings_to_rbm(&aklt_net(n, basis)?, cfg.stats.softening);
            energy_statistics(&rbm, sector, &h, &sampler, grid, runs)?
        }
        StatsSource::AkltNet => energy_statistics(&aklt_net(n, basis)?, sector, &h, &sampler, grid, runs)?,
        StatsSource::File => {
            let path = cfg.stats.params_file.as_deref().expect("validated");
            let (params, file_basis) = load_parameters(path)?;
            if file_basis != basis || params.n_sites() != n {
                return Err(CliError::Config(format!(
                    "stats.params_file: holds N={} in the {file_basis} basis, model is N={n} in the {basis} basis",
                    params.n_sites()
                )));
            }
            match params {
                Parameters::Spin1(r) => energy_statistics(&r, sector, &h, &sampler, grid, runs)?,
                Parameters::Spin12(u) => energy_statistics(&u, sector, &h, &sampler, grid, runs)?,
                Parameters::Net(net) => energy_statistics(&net, sector, &h, &sampler, grid, runs)?,
            }
        }
    };
    let gap = if cfg.reference { Some(exact_low_spectrum(&h, sector)?.gap) } else { None };
    let rows = stats
        .points
        .iter()
        .map(|p| StatsRow {
            n_samp: p.n_samp,
            runs: p.runs,
            mean: p.mean,
            spread: p.spread,
            resolution: gap.filter(|g| *g > 0.0).map(|g| p.spread / g),
        })
        .collect();
    let report = StatsReport { rows, slope: stats.slope, gap };
    if let Some(dir) = output_dir(cfg)? {
        fs::write(dir.join("sample_stats.csv"), stats_table_csv(&report)?)?;
        write_sidecar(dir, "sample_stats", cfg, &report)?;
    }
    Ok(report)
}

/// Table with columns `n_samp, runs, mean, spread, R`.
pub fn stats_table_csv(report: &StatsReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n_samp", "runs", "mean", "spread", "R"])?;
    for r in &report.rows {
        w.write_record([
            r.n_samp.to_string(),
            r.runs.to_string(),
            format!("{:e}", r.mean),
            format!("{:e}", r.spread),
            opt_field(r.resolution),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvertReport {
    pub from: ParamFileKind,
    pub to: ParamFileKind,
    pub n_sites: usize,
    pub n_hidden: usize,
}

/// Rewrites a parameter file in another form. Machines become nets exactly;
/// nets become spin-1 machines with the given softening for zero entries.
pub fn cmd_convert(input: &Path, output: &Path, to: ParamFileKind, softening: f64) -> Result<ConvertReport, CliError> {
    if !(softening > 0.0) {
        return Err(CliError::Config("softening: must be positive".into()));
    }
    let (params, basis) = load_parameters(input)?;
    let from = params.kind();
    let converted = match (params, to) {
        (p, k) if p.kind() == k => p,
        (Parameters::Spin1(r), ParamFileKind::Net) => Parameters::Net(rbm_to_couplings(&r)),
        (Parameters::Spin12(u), ParamFileKind::Net) => Parameters::Net(project_unary(&u.rbm)?),
        (Parameters::Net(net), ParamFileKind::Spin1) => Parameters::Spin1(couplings_to_rbm(&net, softening).0),
        (Parameters::Spin12(u), ParamFileKind::Spin1) => {
            Parameters::Spin1(couplings_to_rbm(&project_unary(&u.rbm)?, softening).0)
        }
        (p, ParamFileKind::Spin12) => {
            return Err(CliError::Config(format!("to: cannot convert a {:?} file into a spin-1/2 machine", p.kind())));
        }
        (p, k) => return Err(CliError::Config(format!("to: no conversion from {:?} to {k:?}", p.kind()))),
    };
    save_parameters(output, &converted, basis)?;
    Ok(ConvertReport { from, to, n_sites: converted.n_sites(), n_hidden: converted.n_hidden() })
}
