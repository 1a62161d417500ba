#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;
mod plot;

use clap::{Args, Parser, Subcommand};
use commands::{PeriodRule, S21Args, SynthS21Args, SynthSCurveArgs};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tlsnoise::resonfit::ResonanceParams;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { code: 2, msg: format!("{}: {e}", path.display()) }
    }

    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.msg = format!("{what}: {}", self.msg);
        self
    }
}

impl From<tlsnoise::Error> for CliError {
    fn from(e: tlsnoise::Error) -> Self {
        let code = if e.is_numerical() { 3 } else { 2 };
        CliError { code, msg: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

/// Pump-induced TLS noise suppression in superconducting resonators.
#[derive(Parser)]
#[command(name = "tlsnoise", version)]
struct Cli {
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset (r1, r2, s2).
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the ensemble seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the dynamics seed.
    #[arg(long)]
    dynamics_seed: Option<u64>,
}

impl Source {
    fn load(&self) -> Result<config::Resolved, CliError> {
        let mut r = commands::load_config(self.config.as_deref(), self.preset.as_deref())?;
        if let Some(s) = self.seed {
            r.preset.ensemble.seed = s;
        }
        if let Some(s) = self.dynamics_seed {
            r.preset.dynamics_seed = s;
        }
        Ok(r)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a Q-TLS ensemble with attached thermal fluctuators.
    Generate {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Produce Γ_int(t) and f_r(t) for every pump setting.
    Simulate {
        #[command(flatten)]
        src: Source,
        /// Previously generated ensemble.json.
        #[arg(long)]
        ensemble: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Welch PSDs and three-term noise fits of a time-series CSV.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// settings.csv with labels (defaults to the one next to the input).
        #[arg(long)]
        settings: Option<PathBuf>,
        /// Optional JSON analysis configuration.
        #[arg(long)]
        analysis_config: Option<PathBuf>,
        /// Period length used to split the record.
        #[arg(long, default_value_t = 432000.0)]
        period_s: f64,
        /// Split periods at gaps longer than this many median steps instead.
        #[arg(long)]
        split_gaps: Option<f64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Generate, simulate and analyze in one go.
    Run {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Fit a hanger-resonance S21 trace.
    FitS21 {
        #[arg(long)]
        input: PathBuf,
        /// Baseline points, split between the two ends of the trace.
        #[arg(long, default_value_t = 4)]
        n_normalization: usize,
        /// Divide by the mean of the baseline points first (raw traces with line gain).
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Fit Q_int versus photon number.
    FitScurve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Write a synthetic S21 trace.
    SynthS21 {
        #[arg(long, default_value_t = 5.5575e9)]
        f_r_hz: f64,
        #[arg(long, default_value_t = 2.0e5)]
        q_int: f64,
        #[arg(long, default_value_t = 1.0e5)]
        q_ext: f64,
        #[arg(long, default_value_t = 0.0)]
        phi_rad: f64,
        #[arg(long, default_value_t = 1e-3)]
        noise_std: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Uniform point spacing instead of a denser middle third.
        #[arg(long)]
        uniform: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Write a synthetic S-curve from the preset's parameters.
    SynthScurve {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 1e-2)]
        n_lo: f64,
        #[arg(long, default_value_t = 1e5)]
        n_hi: f64,
        #[arg(long, default_value_t = 30)]
        n_points: usize,
        #[arg(long, default_value_t = 0.02)]
        rel_noise: f64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Print a preset as a complete run configuration.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::config(format!("--threads: {e}")))?;
    }
    match cli.cmd {
        Cmd::Generate { src, out_dir } => commands::generate(&src.load()?, &out_dir),
        Cmd::Simulate { src, ensemble, out_dir } => commands::simulate(&src.load()?, ensemble.as_deref(), &out_dir),
        Cmd::Analyze { input, settings, analysis_config, period_s, split_gaps, out_dir } => {
            let cfg = match analysis_config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                    let de = &mut serde_json::Deserializer::from_str(&text);
                    serde_path_to_error::deserialize(de)
                        .map_err(|e| CliError::config(format!("{} (key `{}`): {}", p.display(), e.path(), e.inner())))?
                }
                None => Default::default(),
            };
            commands::analyze(&input, settings.as_deref(), &cfg, &PeriodRule { period_s, split_gaps }, &out_dir)
        }
        Cmd::Run { src, out_dir } => commands::run_all(&src.load()?, &out_dir),
        Cmd::FitS21 { input, n_normalization, normalize, out_dir } => {
            commands::fit_s21_cmd(&input, &S21Args { n_normalization, normalize }, &out_dir)
        }
        Cmd::FitScurve { input, out_dir } => commands::fit_scurve_cmd(&input, &out_dir),
        Cmd::SynthS21 { f_r_hz, q_int, q_ext, phi_rad, noise_std, seed, uniform, out_dir } => {
            let params = ResonanceParams { f_r_hz, q_int, q_ext, phi_rad };
            commands::synth_s21_cmd(&SynthS21Args { params, noise_std, seed, uniform }, &out_dir)
        }
        Cmd::SynthScurve { src, n_lo, n_hi, n_points, rel_noise, out_dir } => {
            let seed = src.seed.unwrap_or(1);
            commands::synth_scurve_cmd(&src.load()?, &SynthSCurveArgs { n_lo, n_hi, n_points, rel_noise, seed }, &out_dir)
        }
        Cmd::Preset { name, out } => commands::preset(&name, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
