// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. [`run`] parses arguments, dispatches to the
//! solvers and returns the process exit code: 0 on success, 1 for usage and
//! configuration errors, 2 when a solver fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::AnalyticPrediction;
use crate::dynamics::{evolve, thermal_state, uniform_grid, EvolveOptions};
use crate::model::{validate_config, ChainConfig, Geometry};
use crate::rate_fit::{crossing_time, fit_cooling_rate, steady_asymptote, CoolingRateFit, FitOptions};
use crate::reduced::{grid_csv, min_search, reduced_grid, solve_reduced_beta};
use crate::steady_state::{solve_config, SteadyOptions};
use crate::sweep::{figure_preset, run_grid, SweepSpec};
use crate::{Error, CODE_VERSION};

const UNITS: &str = "Units: the trap frequency is the unit of frequency (nu = 1). Rates, detuning and Rabi \
                     frequencies are given in units of nu; times are in units of 1/nu.";

#[derive(Parser, Debug)]
#[command(name = "chirocool", version, about = "Sideband cooling of ion chains with chiral couplings", after_help = UNITS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady state of the full master equation and its observables.
    #[command(after_help = UNITS, allow_negative_numbers = true)]
    Steady {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Time evolution from a thermal state, with optional cooling-rate fits.
    #[command(after_help = UNITS, allow_negative_numbers = true)]
    Evolve {
        #[command(flatten)]
        config: ConfigArgs,
        /// Final time (1/nu).
        #[arg(long)]
        t_end: f64,
        /// Number of output samples including t = 0.
        #[arg(long, default_value_t = 601)]
        samples: usize,
        /// Initial thermal phonon occupation of every ion.
        #[arg(long, default_value_t = 0.7)]
        n0: f64,
        /// Fit a*exp(-W t) + n_st to every ion.
        #[arg(long)]
        fit: bool,
        /// Start of the fit window (1/nu); defaults to 5/Gamma.
        #[arg(long)]
        fit_start: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form two-ion predictions.
    #[command(after_help = UNITS, allow_negative_numbers = true)]
    Analytic {
        #[arg(long)]
        eta: f64,
        /// Rabi frequency of the target ion (nu).
        #[arg(long)]
        omega: f64,
        /// Total decay rate Gamma = gamma_R + gamma_L + gamma_ng (nu).
        #[arg(long)]
        gamma: f64,
        /// Guided fraction gamma/Gamma.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Right-propagating rate gamma_R (nu) at which to evaluate the occupation.
        #[arg(long)]
        gamma_r: Option<f64>,
    },
    /// Reduced N-ion solver for the target ion (xi a multiple of 2*pi).
    #[command(after_help = UNITS, allow_negative_numbers = true)]
    Reduced {
        #[arg(long)]
        n_ions: usize,
        #[arg(long, default_value_t = 0.04)]
        eta: f64,
        /// Rabi frequency of the target ion (nu).
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Total decay rate Gamma (nu).
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// gamma_R / gamma for a single solve.
        #[arg(long, default_value_t = 0.5)]
        gamma_r_over_gamma: f64,
        /// Search the global minimum over (beta, gamma_R/gamma) instead.
        #[arg(long, conflicts_with = "grid")]
        min_search: bool,
        /// Grid points per axis for the minimum search.
        #[arg(long, default_value_t = 50)]
        resolution: usize,
        /// Write a (beta, gamma_R/gamma) grid with this many points per axis.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Parameter sweep from a preset or a JSON sweep definition.
    #[command(after_help = UNITS, allow_negative_numbers = true)]
    Sweep {
        /// One of fig2a, fig2b, fig2c, fig_corr_a, fig_corr_b, fig3a, fig3b, fig4_n2, fig4_n3, fig5a, fig5b.
        #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
        preset: Option<String>,
        /// JSON sweep definition file.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Override the axis-1 point count.
        #[arg(long)]
        points1: Option<usize>,
        /// Override the axis-2 point count.
        #[arg(long)]
        points2: Option<usize>,
        /// Worker threads; defaults to the number of logical cores.
        #[arg(long, env = "CHIROCOOL_JOBS")]
        jobs: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check a configuration and report errors and warnings.
    #[command(after_help = UNITS, allow_negative_numbers = true)]
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct ConfigArgs {
    /// JSON configuration file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_ions: Option<usize>,
    /// Detuning Delta (nu); defaults to -1.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Comma-separated Rabi frequencies, one per ion (nu).
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<f64>>,
    #[arg(long)]
    gamma_r: Option<f64>,
    #[arg(long)]
    gamma_l: Option<f64>,
    #[arg(long)]
    gamma_ng: Option<f64>,
    /// Phase between neighbouring ions, radians.
    #[arg(long, conflicts_with = "xi_pi")]
    xi: Option<f64>,
    /// Phase between neighbouring ions in units of pi.
    #[arg(long)]
    xi_pi: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    target: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output directory for result files and the run manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// On-disk configuration. Every key is optional so that flags can supply
/// missing values; required keys are checked after merging.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_ions: Option<usize>,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub omega: Option<Vec<f64>>,
    pub gamma_r: Option<f64>,
    pub gamma_l: Option<f64>,
    pub gamma_ng: Option<f64>,
    pub xi: Option<f64>,
    pub xi_pi: Option<f64>,
    pub phases: Option<Vec<f64>>,
    pub n_max: Option<usize>,
    pub target: Option<usize>,
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self { code: if e.is_usage() { 1 } else { 2 }, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError { code: 1, message: message.into() }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError { code: 2, message: format!("{}: {e}", path.display()) }
}

/// Parses a configuration file, reporting the offending key path on failure.
pub fn parse_config_file(text: &str) -> Result<ConfigFile, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            format!("{inner}")
        } else {
            format!("at key `{path}`: {inner}")
        }
    })
}

/// Reads `path` (if any), applies flag overrides and validates the result.
fn load_config(args: &ConfigArgs) -> Result<ChainConfig, CliError> {
    let config = merged_config(args)?;
    config.validated()?;
    Ok(config)
}

/// File values with flag overrides applied, before validation.
fn merged_config(args: &ConfigArgs) -> Result<ChainConfig, CliError> {
    let mut file = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            parse_config_file(&text).map_err(|m| usage(format!("{}: {m}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    macro_rules! flag {
        ($($f:ident),*) => { $( if args.$f.is_some() { file.$f = args.$f.clone(); } )* };
    }
    flag!(n_ions, delta, eta, omega, gamma_r, gamma_l, gamma_ng, n_max, target);
    if args.xi.is_some() || args.xi_pi.is_some() {
        file.xi = args.xi;
        file.xi_pi = args.xi_pi;
        file.phases = None;
    }
    resolve_config(file).map_err(usage)
}

/// Turns a merged [`ConfigFile`] into a [`ChainConfig`], applying defaults
/// (Δ = −1, no rates, ξ = 2π, `n_max = 1`, target 1).
pub fn resolve_config(file: ConfigFile) -> Result<ChainConfig, String> {
    let eta = file.eta.ok_or("missing required key `eta`")?;
    let omega = file.omega.ok_or("missing required key `omega`")?;
    let n_ions = file.n_ions.unwrap_or(omega.len());
    if n_ions != omega.len() {
        return Err(format!("`n_ions` = {n_ions} but `omega` has {} entries", omega.len()));
    }
    let geometry = match (file.xi, file.xi_pi, file.phases) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => {
            return Err("give only one of `xi`, `xi_pi` and `phases`".into())
        }
        (Some(xi), None, None) => Geometry::Equidistant { xi },
        (None, Some(x), None) => Geometry::Equidistant { xi: x * std::f64::consts::PI },
        (None, None, Some(phases)) => Geometry::Explicit { phases },
        (None, None, None) => Geometry::Equidistant { xi: 2.0 * std::f64::consts::PI },
    };
    let mut config = ChainConfig::new(eta, omega).with_rates(
        file.gamma_r.unwrap_or(0.0),
        file.gamma_l.unwrap_or(0.0),
        file.gamma_ng.unwrap_or(0.0),
    );
    config.n_ions = n_ions;
    config.geometry = geometry;
    config.delta = file.delta.unwrap_or(-1.0);
    config.n_max = file.n_max.unwrap_or(1);
    config.target = file.target.unwrap_or(1);
    Ok(config)
}

/// Record of one run, written after every other output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub subcommand: String,
    pub config: Option<ChainConfig>,
    pub sweep: Option<SweepSpec>,
    pub spec_hash: String,
    pub code_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<PathBuf>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn sha_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let p = self.dir.join(name);
        std::fs::write(&p, contents).map_err(|e| io_error(&p, e))?;
        self.written.push(p);
        Ok(())
    }

    fn finish(self, mut manifest: RunManifest) -> Result<(), CliError> {
        manifest.outputs = self.written;
        manifest.finished_unix = now();
        let p = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifests always serialize");
        std::fs::write(&p, text).map_err(|e| io_error(&p, e))
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("results always serialize")
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let command: Vec<String> = argv.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// One ion's fit in `fits.json`; a failed fit keeps its message in place of the parameters.
#[derive(Serialize)]
#[serde(untagged)]
enum FitEntry {
    Fit(CoolingRateFit),
    Failed { ion: usize, error: String },
}

fn manifest(command: &[String], sub: &str, config: Option<&ChainConfig>, started: f64) -> RunManifest {
    let hash = config.map(|c| sha_hex(&serde_json::to_vec(c).expect("configs serialize"))).unwrap_or_default();
    RunManifest {
        command: command.to_vec(),
        subcommand: sub.to_string(),
        config: config.cloned(),
        sweep: None,
        spec_hash: hash,
        code_version: CODE_VERSION.to_string(),
        started_unix: started,
        finished_unix: 0.0,
        outputs: Vec::new(),
    }
}

fn dispatch(cmd: Command, command: Vec<String>) -> Result<(), CliError> {
    let started = now();
    match cmd {
        Command::Steady { config, out } => {
            let cfg = load_config(&config)?;
            let (state, obs) = solve_config(&cfg, &SteadyOptions::default())?;
            #[derive(Serialize)]
            struct Report<'a> {
                config: &'a ChainConfig,
                observables: &'a crate::steady_state::SteadyObservables,
                sigma_min: f64,
                sigma_next: f64,
            }
            let text = pretty(&Report { config: &cfg, observables: &obs, sigma_min: state.sigma_min, sigma_next: state.sigma_next });
            println!("{text}");
            let mut o = Outputs::new(&out.out)?;
            o.write("steady.json", &text)?;
            o.finish(manifest(&command, "steady", Some(&cfg), started))
        }
        Command::Evolve { config, t_end, samples, n0, fit, fit_start, out } => {
            let cfg = load_config(&config)?;
            if !(t_end > 0.0) {
                return Err(usage("--t-end must be positive"));
            }
            let rho0 = thermal_state(n0, cfg.n_max, cfg.n_ions)?;
            let traj = evolve(&cfg, &rho0, &uniform_grid(t_end, samples), &EvolveOptions::default())?;
            let mut o = Outputs::new(&out.out)?;
            o.write("trajectory.csv", &traj.to_csv())?;
            let crossings = (1..=cfg.n_ions).map(|i| crossing_time(&traj, i)).collect::<crate::Result<Vec<_>>>()?;
            let mut fits = Vec::new();
            let mut asymptote_n_max = None;
            if fit {
                let (n_st, used) = steady_asymptote(&cfg)?;
                asymptote_n_max = Some(used);
                let opts = match fit_start {
                    Some(t_lo) => FitOptions { t_lo, ..FitOptions::default() },
                    None => FitOptions::after_transient(cfg.total_decay()),
                };
                for i in 1..=cfg.n_ions {
                    fits.push(match fit_cooling_rate(&traj, i, n_st[i - 1], &opts) {
                        Ok(f) => FitEntry::Fit(f),
                        Err(e) => {
                            eprintln!("warning: ion {i}: {e}");
                            FitEntry::Failed { ion: i, error: e.to_string() }
                        }
                    });
                }
                o.write("fits.json", &pretty(&fits))?;
            }
            #[derive(Serialize)]
            struct Summary<'a> {
                n_final: Vec<f64>,
                crossing_times: &'a [Option<f64>],
                fits: &'a [FitEntry],
                asymptote_n_max: Option<usize>,
                stats: &'a crate::dynamics::IntegratorStats,
            }
            let summary = Summary {
                n_final: traj.n.iter().map(|s| *s.last().expect("non-empty")).collect(),
                crossing_times: &crossings,
                fits: &fits,
                asymptote_n_max,
                stats: &traj.stats,
            };
            let text = pretty(&summary);
            println!("{text}");
            o.write("evolve.json", &text)?;
            o.finish(manifest(&command, "evolve", Some(&cfg), started))
        }
        Command::Analytic { eta, omega, gamma, beta, gamma_r } => {
            let p = AnalyticPrediction::new(eta, omega, gamma, beta, gamma_r)?;
            println!("{}", pretty(&p));
            Ok(())
        }
        Command::Reduced { n_ions, eta, omega, gamma, beta, gamma_r_over_gamma, min_search: search, resolution, grid, out } => {
            let mut o = Outputs::new(&out.out)?;
            let text = if search {
                pretty(&min_search(n_ions, gamma, eta, omega, resolution)?)
            } else if let Some(points) = grid {
                if points < 2 {
                    return Err(usage("--grid needs at least 2 points"));
                }
                let axis: Vec<f64> = (0..points).map(|k| k as f64 / (points - 1) as f64).collect();
                let pts = reduced_grid(n_ions, gamma, eta, omega, &axis, &axis);
                o.write("reduced_grid.csv", &grid_csv(&pts))?;
                format!("{{\"points\": {}}}", pts.len())
            } else {
                pretty(&solve_reduced_beta(n_ions, gamma, beta, gamma_r_over_gamma, eta, omega)?)
            };
            println!("{text}");
            o.write("reduced.json", &text)?;
            let mut m = manifest(&command, "reduced", None, started);
            m.spec_hash = sha_hex(format!("{n_ions} {eta} {omega} {gamma} {beta} {gamma_r_over_gamma} {search} {resolution} {grid:?}").as_bytes());
            o.finish(m)
        }
        Command::Sweep { preset, spec, points1, points2, jobs, out } => {
            let spec = match (preset, spec) {
                (Some(name), _) => figure_preset(&name)?,
                (None, Some(p)) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    let de = &mut serde_json::Deserializer::from_str(&text);
                    serde_path_to_error::deserialize::<_, SweepSpec>(de)
                        .map_err(|e| usage(format!("{}: at key `{}`: {}", p.display(), e.path(), e.inner())))?
                }
                (None, None) => return Err(usage("give --preset or --spec")),
            };
            let spec = spec.with_points(points1, points2);
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let result = run_grid(&spec, jobs)?;
            let written = result.write(&out.out).map_err(|e| io_error(&out.out, e))?;
            let failed = result.cells.iter().flat_map(|c| &c.values).filter(|v| matches!(v, crate::sweep::CellValue::Error(_))).count();
            println!(
                "{}",
                pretty(&serde_json::json!({
                    "name": result.name,
                    "spec_hash": result.spec_hash,
                    "cells": result.cells.len(),
                    "failed_values": failed,
                    "outputs": written,
                }))
            );
            let mut o = Outputs::new(&out.out)?;
            o.written = written;
            let mut m = manifest(&command, "sweep", Some(&spec.base), started);
            m.spec_hash = result.spec_hash.clone();
            m.sweep = Some(spec);
            o.finish(m)
        }
        Command::Validate { config } => {
            let cfg = merged_config(&config)?;
            let report = validate_config(&cfg);
            println!("{}", pretty(&report));
            if report.is_ok() {
                Ok(())
            } else {
                Err(usage(format!("{} configuration error(s)", report.errors.len())))
            }
        }
    }
}
