// SPDX-License-Identifier: Apache-2.0

//! Two-dimensional parameter sweeps over any of the solvers, with named
//! presets for the standard figures.
//!
//! Grid points are evaluated on a rayon pool of the requested size and
//! collected in grid order, so output does not depend on the worker count.
//! A point that fails keeps its error message in the result instead of a
//! value.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{evolve, thermal_state, uniform_grid, EvolveOptions};
use crate::model::{ChainConfig, Geometry};
use crate::rate_fit::{crossing_time, fit_cooling_rate, steady_asymptote, FitOptions};
use crate::reduced::{min_search, solve_reduced_beta};
use crate::steady_state::{solve_config, SteadyOptions};
use crate::{Error, Result, CODE_VERSION};

/// Swept parameter. Rates are always derived from the base total decay Γ
/// through `split_rates(Γ, β, γ_R/γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    GammaROverGamma,
    /// Ω₁, with every Ω_i/Ω₁ kept.
    Omega1,
    /// Ω_i/Ω₁ for all refrigerant ions.
    Omega2OverOmega1,
    Xi,
    Beta,
    NIons,
}

impl Parameter {
    fn name(self) -> &'static str {
        match self {
            Parameter::GammaROverGamma => "gamma_r_over_gamma",
            Parameter::Omega1 => "omega1",
            Parameter::Omega2OverOmega1 => "omega2_over_omega1",
            Parameter::Xi => "xi",
            Parameter::Beta => "beta",
            Parameter::NIons => "n_ions",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub parameter: Parameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(parameter: Parameter, start: f64, stop: f64, points: usize) -> Self {
        Self { parameter, start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let m = (self.points - 1) as f64;
        (0..self.points).map(|k| self.start + (self.stop - self.start) * k as f64 / m).collect()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let name = self.parameter.name();
        if self.points == 0 {
            return Err(format!("axis {name} has no points"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(format!("axis {name} has a non-finite bound"));
        }
        let (lo, hi) = (self.start.min(self.stop), self.start.max(self.stop));
        let ok = match self.parameter {
            Parameter::GammaROverGamma | Parameter::Beta => lo >= 0.0 && hi <= 1.0,
            Parameter::Omega1 | Parameter::Omega2OverOmega1 => lo >= 0.0,
            Parameter::Xi => true,
            Parameter::NIons => lo >= 1.0 && self.values().iter().all(|v| v.fract() == 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("axis {name} range [{}, {}] is outside its physical bounds", self.start, self.stop))
        }
    }
}

/// Quantity recorded at each grid point; ion indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observable {
    NTilde(usize),
    N(usize),
    CStRe,
    /// Fitted cooling rate.
    W(usize),
    /// Time at which ñ_i drops below one for good.
    TCross(usize),
    NTildeMin,
    BetaStar,
    GammaRStar,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::NTilde(i) => write!(f, "ntilde_{i}"),
            Observable::N(i) => write!(f, "n_{i}"),
            Observable::CStRe => f.write_str("c_st_re"),
            Observable::W(i) => write!(f, "w_{i}"),
            Observable::TCross(i) => write!(f, "t_cross_{i}"),
            Observable::NTildeMin => f.write_str("ntilde_min"),
            Observable::BetaStar => f.write_str("beta_star"),
            Observable::GammaRStar => f.write_str("gamma_r_star"),
        }
    }
}

impl std::str::FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let indexed = |prefix: &str| -> Option<usize> { s.strip_prefix(prefix)?.parse().ok().filter(|&i| i >= 1) };
        match s {
            "c_st_re" => return Ok(Observable::CStRe),
            "ntilde_min" => return Ok(Observable::NTildeMin),
            "beta_star" => return Ok(Observable::BetaStar),
            "gamma_r_star" => return Ok(Observable::GammaRStar),
            _ => {}
        }
        if let Some(i) = indexed("ntilde_") {
            Ok(Observable::NTilde(i))
        } else if let Some(i) = indexed("t_cross_") {
            Ok(Observable::TCross(i))
        } else if let Some(i) = indexed("n_") {
            Ok(Observable::N(i))
        } else if let Some(i) = indexed("w_") {
            Ok(Observable::W(i))
        } else {
            Err(format!("unknown observable `{s}`"))
        }
    }
}

impl TryFrom<String> for Observable {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Observable> for String {
    fn from(o: Observable) -> String {
        o.to_string()
    }
}

impl Observable {
    fn ion(self) -> Option<usize> {
        match self {
            Observable::NTilde(i) | Observable::N(i) | Observable::W(i) | Observable::TCross(i) => Some(i),
            _ => None,
        }
    }

    fn supported_by(self, solver: Solver) -> bool {
        match solver {
            Solver::FullSteady => matches!(self, Observable::NTilde(_) | Observable::N(_) | Observable::CStRe),
            Solver::Reduced => matches!(self, Observable::NTilde(1) | Observable::N(1)),
            Solver::DynamicsFit => {
                matches!(self, Observable::NTilde(_) | Observable::N(_) | Observable::W(_) | Observable::TCross(_))
            }
            Solver::ReducedMinSearch => {
                matches!(self, Observable::NTildeMin | Observable::BetaStar | Observable::GammaRStar)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    FullSteady,
    Reduced,
    DynamicsFit,
    ReducedMinSearch,
}

/// Settings of the `dynamics_fit` solver; the truncation is the base `n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSettings {
    /// Initial thermal occupation of every ion.
    pub n0: f64,
    pub t_end: f64,
    pub samples: usize,
}

impl Default for DynamicsSettings {
    fn default() -> Self {
        Self { n0: 0.7, t_end: 3.0e4, samples: 601 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub base: ChainConfig,
    pub axis1: Axis,
    #[serde(default)]
    pub axis2: Option<Axis>,
    pub observables: Vec<Observable>,
    pub solver: Solver,
    #[serde(default)]
    pub dynamics: Option<DynamicsSettings>,
    #[serde(default = "default_resolution")]
    pub min_search_resolution: usize,
}

fn default_resolution() -> usize {
    50
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let mut axes = vec![&self.axis1];
        axes.extend(self.axis2.as_ref());
        for a in &axes {
            if let Err(e) = a.validate() {
                errors.push(e);
            }
        }
        if let Some(b) = &self.axis2 {
            if b.parameter == self.axis1.parameter {
                errors.push("both axes sweep the same parameter".into());
            }
        }
        if let Err(Error::InvalidConfig(e)) = self.base.validated() {
            errors.extend(e.into_iter().map(|m| format!("base: {m}")));
        }
        if self.base.omega.is_empty() {
            errors.push("base: at least one Rabi frequency is required".into());
        }
        if self.observables.is_empty() {
            errors.push("no observables selected".into());
        }
        let max_ions = axes
            .iter()
            .filter(|a| a.parameter == Parameter::NIons)
            .flat_map(|a| a.values())
            .fold(self.base.n_ions as f64, f64::max) as usize;
        for o in &self.observables {
            if !o.supported_by(self.solver) {
                errors.push(format!("observable {o} is not produced by solver {:?}", self.solver));
            }
            if o.ion().is_some_and(|i| i > max_ions) {
                errors.push(format!("observable {o} refers to an ion beyond the chain"));
            }
        }
        match self.solver {
            Solver::DynamicsFit => match &self.dynamics {
                None => errors.push("dynamics_fit needs dynamics settings".into()),
                Some(d) if !(d.t_end > 0.0) || d.samples < 3 || !(d.n0 >= 0.0) => {
                    errors.push("dynamics settings need t_end > 0, samples >= 3 and n0 >= 0".into())
                }
                _ => {}
            },
            Solver::ReducedMinSearch => {
                if self.axis1.parameter != Parameter::NIons || self.axis2.is_some() {
                    errors.push("reduced_min_search sweeps n_ions on axis1 only".into());
                }
                if self.min_search_resolution < 50 {
                    errors.push("min_search_resolution must be at least 50".into());
                }
            }
            _ => {}
        }
        if matches!(self.solver, Solver::Reduced | Solver::ReducedMinSearch) {
            for a in &axes {
                if a.parameter == Parameter::Xi || a.parameter == Parameter::Omega2OverOmega1 {
                    errors.push(format!("the reduced solver does not take axis {}", a.parameter.name()));
                }
                if a.parameter == Parameter::NIons && a.start.min(a.stop) < 2.0 {
                    errors.push("the reduced solver needs n_ions >= 2".into());
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(errors.join("; ")))
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("sweep specs always serialize");
        format!("{:x}", Sha256::digest(bytes))
    }

    /// Replaces the point counts of both axes.
    pub fn with_points(mut self, points1: Option<usize>, points2: Option<usize>) -> Self {
        if let Some(p) = points1 {
            self.axis1.points = p;
        }
        if let (Some(p), Some(a)) = (points2, self.axis2.as_mut()) {
            a.points = p;
        }
        self
    }
}

/// Parameters of one grid point before they are turned into rates.
#[derive(Clone, Debug)]
struct PointParams {
    total: f64,
    beta: f64,
    right_fraction: f64,
    omega1: f64,
    ratio: Option<f64>,
    xi: Option<f64>,
    n_ions: usize,
}

impl PointParams {
    fn from_base(base: &ChainConfig) -> Self {
        let total = base.total_decay();
        let gamma = base.gamma();
        Self {
            total,
            beta: if total > 0.0 { gamma / total } else { 1.0 },
            right_fraction: if gamma > 0.0 { base.gamma_r / gamma } else { 0.5 },
            omega1: base.omega.first().copied().unwrap_or(0.0),
            ratio: None,
            xi: None,
            n_ions: base.n_ions,
        }
    }

    fn set(&mut self, p: Parameter, v: f64) {
        match p {
            Parameter::GammaROverGamma => self.right_fraction = v,
            Parameter::Beta => self.beta = v,
            Parameter::Omega1 => self.omega1 = v,
            Parameter::Omega2OverOmega1 => self.ratio = Some(v),
            Parameter::Xi => self.xi = Some(v),
            Parameter::NIons => self.n_ions = v as usize,
        }
    }

    fn config(&self, base: &ChainConfig) -> ChainConfig {
        let mut cfg = base.clone().with_beta(self.total, self.beta, self.right_fraction);
        let w1 = base.omega.first().copied().unwrap_or(0.0);
        let base_ratio = |i: usize| {
            let wi = base.omega.get(i).or(base.omega.last()).copied().unwrap_or(0.0);
            if w1 != 0.0 { wi / w1 } else { 0.0 }
        };
        cfg.n_ions = self.n_ions;
        cfg.omega = (0..self.n_ions)
            .map(|i| match (i, self.ratio) {
                (0, _) => self.omega1,
                (_, Some(r)) => r * self.omega1,
                (_, None) => base_ratio(i) * self.omega1,
            })
            .collect();
        if let Some(xi) = self.xi {
            cfg.geometry = Geometry::Equidistant { xi };
        } else if let Geometry::Explicit { phases } = &base.geometry {
            if phases.len() != self.n_ions {
                // explicit phases cannot follow a change of chain length
                cfg.geometry = Geometry::Explicit { phases: phases.iter().copied().cycle().take(self.n_ions).collect() };
            }
        }
        cfg
    }
}

/// Value of one observable at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellValue {
    Ok(f64),
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub axis1: f64,
    pub axis2: Option<f64>,
    /// One entry per selected observable, in selection order.
    pub values: Vec<CellValue>,
    /// Steady residual or worst relative fit residual, when available.
    pub diagnostic: Option<f64>,
}

impl Cell {
    pub fn value(&self, k: usize) -> Option<f64> {
        match self.values.get(k) {
            Some(CellValue::Ok(v)) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub name: String,
    pub spec_hash: String,
    pub code_version: String,
    pub solver: Solver,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub observables: Vec<Observable>,
    /// Row-major: axis2 varies fastest.
    pub cells: Vec<Cell>,
}

impl SweepResult {
    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.points, self.axis2.as_ref().map_or(1, |a| a.points))
    }

    /// Values of observable `k` in grid order.
    pub fn column(&self, k: usize) -> Vec<Option<f64>> {
        self.cells.iter().map(|c| c.value(k)).collect()
    }

    /// Long format: `axis1,axis2,observable,value,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis1,axis2,observable,value,status\n");
        for c in &self.cells {
            let a2 = c.axis2.map(|v| format!("{v:.12e}")).unwrap_or_default();
            for (o, v) in self.observables.iter().zip(&c.values) {
                let (value, status) = match v {
                    CellValue::Ok(x) => (format!("{x:.12e}"), "ok".to_string()),
                    CellValue::Error(m) => (String::new(), format!("error: {}", m.replace([',', '\n', '"'], " "))),
                };
                out.push_str(&format!("{:.12e},{a2},{o},{value},{status}\n", c.axis1));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep results always serialize")
    }

    /// One SVG per observable: a heat map for 2-D sweeps, a line plot otherwise.
    pub fn to_svg(&self, k: usize) -> String {
        svg_plot(self, k)
    }

    /// Writes `<name>.csv`, `<name>.json` and one `<name>_<observable>.svg` per
    /// observable into `dir`, returning the paths written.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let csv = dir.join(format!("{}.csv", self.name));
        std::fs::write(&csv, self.to_csv())?;
        paths.push(csv);
        let json = dir.join(format!("{}.json", self.name));
        std::fs::write(&json, self.to_json())?;
        paths.push(json);
        for (k, o) in self.observables.iter().enumerate() {
            let svg = dir.join(format!("{}_{o}.svg", self.name));
            std::fs::write(&svg, self.to_svg(k))?;
            paths.push(svg);
        }
        Ok(paths)
    }
}

/// Evaluates every grid point on a pool of `jobs` workers.
pub fn run_grid(spec: &SweepSpec, jobs: usize) -> Result<SweepResult> {
    spec.validate()?;
    let a1 = spec.axis1.values();
    let a2: Vec<Option<f64>> = match &spec.axis2 {
        Some(a) => a.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let points: Vec<(f64, Option<f64>)> = a1.iter().flat_map(|&x| a2.iter().map(move |&y| (x, y))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| points.par_iter().map(|&(x, y)| evaluate(spec, x, y)).collect());
    Ok(SweepResult {
        name: spec.name.clone(),
        spec_hash: spec.hash(),
        code_version: CODE_VERSION.to_string(),
        solver: spec.solver,
        axis1: spec.axis1.clone(),
        axis2: spec.axis2.clone(),
        observables: spec.observables.clone(),
        cells,
    })
}

fn evaluate(spec: &SweepSpec, x: f64, y: Option<f64>) -> Cell {
    let mut p = PointParams::from_base(&spec.base);
    p.set(spec.axis1.parameter, x);
    if let (Some(a), Some(v)) = (&spec.axis2, y) {
        p.set(a.parameter, v);
    }
    let fail = |e: Error| Cell {
        axis1: x,
        axis2: y,
        values: vec![CellValue::Error(e.to_string()); spec.observables.len()],
        diagnostic: None,
    };
    let (values, diagnostic) = match spec.solver {
        Solver::FullSteady => match full_steady_point(spec, &p) {
            Ok(r) => r,
            Err(e) => return fail(e),
        },
        Solver::Reduced => {
            match solve_reduced_beta(p.n_ions, p.total, p.beta, p.right_fraction, spec.base.eta, p.omega1) {
                Ok(s) => (
                    spec.observables
                        .iter()
                        .map(|o| match o {
                            Observable::N(_) => CellValue::Ok(s.n1),
                            _ => CellValue::Ok(s.ntilde1),
                        })
                        .collect(),
                    Some(s.condition_estimate),
                ),
                Err(e) => return fail(e),
            }
        }
        Solver::DynamicsFit => dynamics_point(spec, &p),
        Solver::ReducedMinSearch => {
            match min_search(p.n_ions, p.total, spec.base.eta, p.omega1, spec.min_search_resolution) {
                Ok(m) => (
                    spec.observables
                        .iter()
                        .map(|o| {
                            CellValue::Ok(match o {
                                Observable::BetaStar => m.beta,
                                Observable::GammaRStar => m.gamma_r_over_gamma,
                                _ => m.ntilde1_min,
                            })
                        })
                        .collect(),
                    None,
                ),
                Err(e) => return fail(e),
            }
        }
    };
    Cell { axis1: x, axis2: y, values, diagnostic }
}

fn ion_value(v: Option<&f64>, o: Observable) -> CellValue {
    match v {
        Some(x) => CellValue::Ok(*x),
        None => CellValue::Error(format!("{o} is not available for this chain")),
    }
}

fn full_steady_point(spec: &SweepSpec, p: &PointParams) -> Result<(Vec<CellValue>, Option<f64>)> {
    let cfg = p.config(&spec.base);
    let (_, obs) = solve_config(&cfg, &SteadyOptions::default())?;
    let values = spec
        .observables
        .iter()
        .map(|&o| match o {
            Observable::N(i) => ion_value(obs.n.get(i - 1), o),
            Observable::NTilde(i) => match obs.ntilde.get(i - 1) {
                Some(Some(v)) => CellValue::Ok(*v),
                Some(None) => CellValue::Error(Error::UndefinedNormalization { ion: i }.to_string()),
                None => ion_value(None, o),
            },
            Observable::CStRe => match obs.c_st {
                Some(c) => CellValue::Ok(c.re),
                None => ion_value(None, o),
            },
            _ => ion_value(None, o),
        })
        .collect();
    Ok((values, Some(obs.residual)))
}

fn dynamics_point(spec: &SweepSpec, p: &PointParams) -> (Vec<CellValue>, Option<f64>) {
    let settings = spec.dynamics.clone().unwrap_or_default();
    let cfg = p.config(&spec.base);
    let err_all = |e: Error| (vec![CellValue::Error(e.to_string()); spec.observables.len()], None);
    let rho0 = match thermal_state(settings.n0, cfg.n_max, cfg.n_ions) {
        Ok(r) => r,
        Err(e) => return err_all(e),
    };
    let traj = match evolve(&cfg, &rho0, &uniform_grid(settings.t_end, settings.samples), &EvolveOptions::default()) {
        Ok(t) => t,
        Err(e) => return err_all(e),
    };
    let needs_fit = spec.observables.iter().any(|o| matches!(o, Observable::W(_)));
    let asymptote = if needs_fit { Some(steady_asymptote(&cfg)) } else { None };
    let fit_opts = FitOptions::after_transient(cfg.total_decay());
    let mut worst: Option<f64> = None;
    let values = spec
        .observables
        .iter()
        .map(|&o| match o {
            Observable::N(i) => ion_value(traj.n.get(i - 1).and_then(|s| s.last()), o),
            Observable::NTilde(i) => match traj.ntilde(i) {
                Ok(Some(s)) => CellValue::Ok(*s.last().expect("non-empty trajectory")),
                Ok(None) => CellValue::Error(Error::UndefinedNormalization { ion: i }.to_string()),
                Err(e) => CellValue::Error(e.to_string()),
            },
            Observable::W(i) => match asymptote.as_ref().expect("computed when a rate is requested") {
                Ok((n_st, _)) => match n_st.get(i - 1).ok_or(Error::SiteOutOfRange { site: i, n_ions: cfg.n_ions }).and_then(|&n| fit_cooling_rate(&traj, i, n, &fit_opts)) {
                    Ok(fit) => {
                        worst = Some(worst.unwrap_or(0.0).max(fit.relative_residual()));
                        CellValue::Ok(fit.w)
                    }
                    Err(e) => CellValue::Error(e.to_string()),
                },
                Err(e) => CellValue::Error(e.to_string()),
            },
            Observable::TCross(i) => match crossing_time(&traj, i) {
                Ok(Some(t)) => CellValue::Ok(t),
                Ok(None) => CellValue::Error(format!("ntilde_{i} never drops below 1 for good")),
                Err(e) => CellValue::Error(e.to_string()),
            },
            _ => ion_value(None, o),
        })
        .collect();
    (values, worst)
}

/// Names accepted by [`figure_preset`].
pub const PRESETS: [&str; 11] = [
    "fig2a", "fig2b", "fig2c", "fig_corr_a", "fig_corr_b", "fig3a", "fig3b", "fig4_n2", "fig4_n3", "fig5a", "fig5b",
];

/// Grid points per axis for steady-state presets.
pub const STEADY_POINTS: usize = 41;
/// Grid points per axis for dynamics presets.
pub const DYNAMICS_POINTS: usize = 9;

/// Two ions, η = 0.04, γ = 0.1, Ω = (Ω₁, Ω₂), ξ = 2π, Δ = −1.
fn two_ion_base(omega1: f64, ratio: f64, right_fraction: f64) -> ChainConfig {
    ChainConfig::new(0.04, vec![omega1, ratio * omega1]).with_beta(0.1, 1.0, right_fraction)
}

pub fn figure_preset(name: &str) -> Result<SweepSpec> {
    use Parameter::*;
    let s = STEADY_POINTS;
    let d = DYNAMICS_POINTS;
    let two = [Observable::NTilde(1), Observable::NTilde(2), Observable::N(1), Observable::N(2)];
    let steady = |base: ChainConfig, axis1: Axis, axis2: Axis, observables: &[Observable]| SweepSpec {
        name: name.to_string(),
        base,
        axis1,
        axis2: Some(axis2),
        observables: observables.to_vec(),
        solver: Solver::FullSteady,
        dynamics: None,
        min_search_resolution: 50,
    };
    let spec = match name {
        "fig2a" => steady(
            two_ion_base(1.0, 0.1, 0.5),
            Axis::new(GammaROverGamma, 0.0, 1.0, s),
            Axis::new(Omega2OverOmega1, 0.025, 1.0, s),
            &two,
        ),
        "fig2b" => steady(
            two_ion_base(1.0, 0.1, 0.5),
            Axis::new(GammaROverGamma, 0.0, 1.0, s),
            Axis::new(Omega1, 0.05, 2.0, s),
            &two,
        ),
        "fig2c" => steady(
            two_ion_base(1.0, 0.1, 0.5),
            Axis::new(GammaROverGamma, 0.0, 1.0, s),
            Axis::new(Xi, 0.0, 2.0 * PI, s),
            &two,
        ),
        "fig_corr_a" => steady(
            two_ion_base(0.2, 0.1, 0.5),
            Axis::new(Xi, 0.0, 2.0 * PI, s),
            Axis::new(GammaROverGamma, 0.4, 0.5, 2),
            &[Observable::CStRe],
        ),
        "fig_corr_b" => steady(
            two_ion_base(0.5, 0.1, 0.5),
            Axis::new(Omega2OverOmega1, 0.025, 1.0, s),
            Axis::new(GammaROverGamma, 0.25, 0.5, 2),
            &[Observable::CStRe],
        ),
        "fig3a" | "fig3b" => {
            let (base, axis1) = if name == "fig3a" {
                (two_ion_base(1.0, 0.1, 0.85), Axis::new(GammaROverGamma, 0.1, 0.9, d))
            } else {
                (two_ion_base(1.0, 0.1, 0.85), Axis::new(Omega1, 0.2, 3.2, d))
            };
            SweepSpec {
                name: name.to_string(),
                base: base.with_n_max(4),
                axis1,
                axis2: None,
                observables: vec![Observable::W(1), Observable::W(2), Observable::TCross(1)],
                solver: Solver::DynamicsFit,
                dynamics: Some(DynamicsSettings::default()),
                min_search_resolution: 50,
            }
        }
        "fig4_n2" => steady(
            two_ion_base(1.0, 0.1, 0.5),
            Axis::new(GammaROverGamma, 0.0, 1.0, s),
            Axis::new(Beta, 0.0, 1.0, s),
            &[Observable::NTilde(1), Observable::N(1)],
        ),
        "fig4_n3" => steady(
            ChainConfig::new(0.04, vec![1.0, 0.1, 0.1]).with_beta(0.1, 1.0, 0.5),
            Axis::new(GammaROverGamma, 0.0, 1.0, 11),
            Axis::new(Beta, 0.0, 1.0, 11),
            &[Observable::NTilde(1), Observable::N(1)],
        ),
        "fig5a" => SweepSpec {
            name: name.to_string(),
            base: ChainConfig::new(0.04, vec![1.0; 10]).with_beta(0.1, 1.0, 0.5),
            axis1: Axis::new(Beta, 0.0, 1.0, s),
            axis2: Some(Axis::new(GammaROverGamma, 0.0, 1.0, s)),
            observables: vec![Observable::NTilde(1), Observable::N(1)],
            solver: Solver::Reduced,
            dynamics: None,
            min_search_resolution: 50,
        },
        "fig5b" => SweepSpec {
            name: name.to_string(),
            base: ChainConfig::new(0.04, vec![1.0, 1.0]).with_beta(0.1, 1.0, 0.5),
            axis1: Axis::new(NIons, 2.0, 30.0, 29),
            axis2: None,
            observables: vec![Observable::NTildeMin, Observable::BetaStar, Observable::GammaRStar],
            solver: Solver::ReducedMinSearch,
            dynamics: None,
            min_search_resolution: 50,
        },
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

fn svg_plot(r: &SweepResult, k: usize) -> String {
    let (w, h, m) = (520.0, 420.0, 60.0);
    let col = r.column(k);
    let finite: Vec<f64> = col.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let title = format!("{} {}", r.name, r.observables[k]);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        w / 2.0,
        w / 2.0,
        h - 15.0,
        r.axis1.parameter.name()
    );
    let (pw, ph) = (w - 2.0 * m, h - 2.0 * m);
    let a1 = r.axis1.values();
    let x_of = |v: f64| {
        let (a, b) = (r.axis1.start, r.axis1.stop);
        m + if b != a { (v - a) / (b - a) * pw } else { pw / 2.0 }
    };
    match &r.axis2 {
        Some(ax2) => {
            s.push_str(&format!(
                "<text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">{}</text>\n",
                h / 2.0,
                h / 2.0,
                ax2.parameter.name()
            ));
            let (n1, n2) = (a1.len(), ax2.points);
            let (cw, ch) = (pw / n1 as f64, ph / n2 as f64);
            for (idx, v) in col.iter().enumerate() {
                let (i, j) = (idx / n2, idx % n2);
                let fill = match v {
                    Some(v) if v.is_finite() => color((v - lo) / span),
                    _ => "#bbbbbb".to_string(),
                };
                s.push_str(&format!(
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>\n",
                    m + i as f64 * cw,
                    m + ph - (j + 1) as f64 * ch,
                    cw + 0.5,
                    ch + 0.5
                ));
            }
        }
        None => {
            let pts: Vec<String> = a1
                .iter()
                .zip(&col)
                .filter_map(|(x, v)| v.filter(|v| v.is_finite()).map(|v| format!("{:.2},{:.2}", x_of(*x), m + ph - (v - lo) / span * ph)))
                .collect();
            s.push_str(&format!(
                "<rect x=\"{m}\" y=\"{m}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n\
                 <polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
        }
    }
    s.push_str(&format!(
        "<text x=\"{m}\" y=\"{}\">min {lo:.4e}</text>\n<text x=\"{}\" y=\"{}\" text-anchor=\"end\">max {hi:.4e}</text>\n</svg>\n",
        h - 35.0,
        w - m,
        h - 35.0
    ));
    s
}

/// Blue to white to red.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let u = t / 0.5;
        (40.0 + 215.0 * u, 70.0 + 185.0 * u, 160.0 + 95.0 * u)
    } else {
        let u = (t - 0.5) / 0.5;
        (255.0 - 45.0 * u, 255.0 - 195.0 * u, 255.0 - 205.0 * u)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}
