use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nqs_cli::{
    cmd_convert, cmd_ed, cmd_exact_aklt, cmd_sample_stats, cmd_vmc, stats_table_csv, vmc_table_csv, CliError,
    ExperimentConfig,
};
use nqs_core::io::ParamFileKind;

#[derive(Parser)]
#[command(
    name = "nqs",
    version,
    about = "Spin-1 neural quantum states: exact diagonalization, exact AKLT nets and VMC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground energy and sector gap by exact diagonalization.
    Ed(ConfigArgs),
    /// Sequential growth of a variational machine with per-size results.
    Vmc(ConfigArgs),
    /// Build the analytic AKLT net and verify it against the MPS.
    ExactAklt(ConfigArgs),
    /// Spread of sampled energies against the number of samples.
    SampleStats(ConfigArgs),
    /// Convert a parameter file between machine and net forms.
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Spin1,
    Spin12,
    Net,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    to: Kind,
    /// Log-magnitude standing in for zero coupling entries.
    #[arg(long, default_value_t = nqs_core::ansatz::DEFAULT_SOFTENING)]
    softening: f64,
}

/// Flags mirroring the configuration file; values from `--config` win.
#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for result files.
    #[arg(long)]
    output: Option<PathBuf>,
    /// auto, none, total_sz=<t> or parity_xyz=<bits>.
    #[arg(long)]
    sector: Option<String>,
    /// Skip the exact reference state.
    #[arg(long)]
    no_reference: bool,
    /// afh, aklt or blbq.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "sites", short = 'n')]
    n_sites: Option<i64>,
    /// sz or xyz.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    open: bool,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    shift_per_site: Option<f64>,
    /// spin1 or unary.
    #[arg(long)]
    ansatz: Option<String>,
    #[arg(long)]
    m_max: Option<i64>,
    #[arg(long)]
    reruns: Option<i64>,
    /// sampled or exact.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    n_samp: Option<i64>,
    #[arg(long)]
    decorrelation: Option<i64>,
    #[arg(long)]
    burn_in: Option<i64>,
    #[arg(long)]
    n_chains: Option<i64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    diag_shift: Option<f64>,
    #[arg(long)]
    max_steps: Option<i64>,
    /// Write the ground-state amplitudes (ed).
    #[arg(long)]
    export_state: bool,
    /// Parameter file for the softened machine (exact-aklt).
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long)]
    softening: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// aklt_rbm, aklt_net or file (sample-stats).
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    params_file: Option<PathBuf>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    n_samp_grid: Option<Vec<i64>>,
    #[arg(long)]
    n_runs: Option<i64>,
}

fn set(table: &mut toml::Table, path: &str, value: impl Into<toml::Value>) {
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().expect("non-empty path");
    let mut t = table;
    for k in keys {
        t = t
            .entry(k)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .expect("section is a table");
    }
    t.insert(last.into(), value.into());
}

impl ConfigArgs {
    fn flags(&self) -> toml::Table {
        let mut t = toml::Table::new();
        let path = |p: &PathBuf| p.to_string_lossy().into_owned();
        macro_rules! opt {
            ($field:expr, $key:literal) => {
                if let Some(v) = $field.clone() {
                    set(&mut t, $key, v);
                }
            };
        }
        if let Some(s) = self.seed {
            set(&mut t, "seed", s as i64);
        }
        if let Some(p) = &self.output {
            set(&mut t, "output", path(p));
        }
        opt!(self.sector, "sector");
        if self.no_reference {
            set(&mut t, "reference", false);
        }
        opt!(self.preset, "model.preset");
        opt!(self.n_sites, "model.n_sites");
        opt!(self.basis, "model.basis");
        if self.open {
            set(&mut t, "model.periodic", false);
        }
        opt!(self.j, "model.j");
        opt!(self.beta, "model.beta");
        opt!(self.shift_per_site, "model.shift_per_site");
        opt!(self.ansatz, "ansatz.kind");
        opt!(self.m_max, "ansatz.m_max");
        opt!(self.reruns, "ansatz.reruns");
        opt!(self.estimator, "sampler.estimator");
        opt!(self.n_samp, "sampler.n_samp");
        opt!(self.decorrelation, "sampler.decorrelation");
        opt!(self.burn_in, "sampler.burn_in");
        opt!(self.n_chains, "sampler.n_chains");
        opt!(self.learning_rate, "sr.learning_rate");
        opt!(self.diag_shift, "sr.diag_shift");
        opt!(self.max_steps, "sr.max_steps");
        if self.export_state {
            set(&mut t, "ed.export_state", true);
        }
        if let Some(p) = &self.export {
            set(&mut t, "exact.export", path(p));
        }
        if let Some(s) = self.softening {
            set(&mut t, "exact.softening", s);
            set(&mut t, "stats.softening", s);
        }
        opt!(self.tolerance, "exact.tolerance");
        opt!(self.source, "stats.source");
        if let Some(p) = &self.params_file {
            set(&mut t, "stats.params_file", path(p));
        }
        if let Some(grid) = &self.n_samp_grid {
            set(&mut t, "stats.n_samp_grid", toml::Value::Array(grid.iter().map(|&g| g.into()).collect()));
        }
        opt!(self.n_runs, "stats.n_runs");
        t
    }

    fn load(&self) -> Result<ExperimentConfig> {
        let text = match &self.config {
            Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
            None => None,
        };
        Ok(ExperimentConfig::from_layers(self.flags(), text.as_deref())?)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ed(args) => {
            let report = cmd_ed(&args.load()?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Vmc(args) => {
            let cfg = args.load()?;
            let steps = cmd_vmc(&cfg, &mut |rec| {
                if rec.step % 100 == 0 {
                    eprintln!(
                        "M={} rerun={} step={} E={:.8} ± {:.2e}",
                        rec.m, rec.rerun, rec.step, rec.e_mean, rec.e_std
                    );
                }
            })?;
            print!("{}", vmc_table_csv(&steps)?);
        }
        Command::ExactAklt(args) => {
            let report = cmd_exact_aklt(&args.load()?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.passed() {
                return Err(CliError::Verification(format!(
                    "deviation {:e}, {} zero mismatches, {} hidden units (expected {})",
                    report.max_relative_deviation,
                    report.zero_mismatches,
                    report.hidden_units,
                    report.expected_hidden_units
                ))
                .into());
            }
        }
        Command::SampleStats(args) => {
            let report = cmd_sample_stats(&args.load()?)?;
            print!("{}", stats_table_csv(&report)?);
            match report.slope {
                Some(s) => println!("# slope {s:.4}"),
                None => println!("# slope n/a"),
            }
        }
        Command::Convert(a) => {
            let to = match a.to {
                Kind::Spin1 => ParamFileKind::Spin1,
                Kind::Spin12 => ParamFileKind::Spin12,
                Kind::Net => ParamFileKind::Net,
            };
            let report = cmd_convert(&a.input, &a.output, to, a.softening)?;
            println!("{}", serde_json::to_string(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
