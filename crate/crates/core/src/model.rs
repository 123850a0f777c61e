// SPDX-License-Identifier: Apache-2.0

//! Chain configuration, Hamiltonian and dissipative channels.
//!
//! Frequencies and rates are in units of the trap frequency ν, which is 1.

use std::f64::consts::PI;

use faer::{c64, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::operator_algebra::{OperatorMatrix, SpaceDescriptor};
use crate::{Error, Result};

/// Trap positions, expressed as phases `k_s·r_μ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Equally spaced traps with phase `ξ = k_s·d` between neighbours; ion 1 sits at phase 0.
    Equidistant { xi: f64 },
    /// Explicit phases `k_s·r_μ`, one per ion, strictly increasing.
    Explicit { phases: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_ions: usize,
    /// Laser detuning Δ.
    pub delta: f64,
    /// Lamb-Dicke parameter η.
    pub eta: f64,
    /// Rabi frequency Ω_i of each ion.
    pub omega: Vec<f64>,
    pub gamma_r: f64,
    pub gamma_l: f64,
    /// Decay into non-guided modes.
    pub gamma_ng: f64,
    pub geometry: Geometry,
    /// Phonon truncation per ion.
    pub n_max: usize,
    /// 1-based index of the ion being cooled.
    pub target: usize,
}

impl ChainConfig {
    /// A chain with Δ = −1, no decay, ξ = 2π, `n_max = 1` and ion 1 as target.
    pub fn new(eta: f64, omega: Vec<f64>) -> Self {
        Self {
            n_ions: omega.len(),
            delta: -1.0,
            eta,
            omega,
            gamma_r: 0.0,
            gamma_l: 0.0,
            gamma_ng: 0.0,
            geometry: Geometry::Equidistant { xi: 2.0 * PI },
            n_max: 1,
            target: 1,
        }
    }

    pub fn with_rates(mut self, gamma_r: f64, gamma_l: f64, gamma_ng: f64) -> Self {
        self.gamma_r = gamma_r;
        self.gamma_l = gamma_l;
        self.gamma_ng = gamma_ng;
        self
    }

    /// Sets the rates from total decay `Γ`, guided fraction `β` and `γ_R/γ`.
    pub fn with_beta(self, total: f64, beta: f64, right_fraction: f64) -> Self {
        let (gamma_r, gamma_l, gamma_ng) = split_rates(total, beta, right_fraction);
        self.with_rates(gamma_r, gamma_l, gamma_ng)
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.geometry = Geometry::Equidistant { xi };
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Guided decay γ = γ_R + γ_L.
    pub fn gamma(&self) -> f64 {
        self.gamma_r + self.gamma_l
    }

    /// Total decay Γ = γ + γ_ng.
    pub fn total_decay(&self) -> f64 {
        self.gamma() + self.gamma_ng
    }

    /// Guided fraction β = γ/Γ.
    pub fn beta(&self) -> f64 {
        self.gamma() / self.total_decay()
    }

    /// Phase `k_s·r_μ` of each ion.
    pub fn phases(&self) -> Vec<f64> {
        match &self.geometry {
            Geometry::Equidistant { xi } => (0..self.n_ions).map(|k| k as f64 * xi).collect(),
            Geometry::Explicit { phases } => phases.clone(),
        }
    }

    pub fn space(&self) -> Result<SpaceDescriptor> {
        SpaceDescriptor::new(self.n_ions, self.n_max)
    }

    /// Fails with every violated invariant.
    pub fn validated(&self) -> Result<()> {
        let report = validate_config(self);
        if report.errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(report.errors))
        }
    }
}

/// `(γ_R, γ_L, γ_ng)` from total decay, guided fraction and `γ_R/γ`.
pub fn split_rates(total: f64, beta: f64, right_fraction: f64) -> (f64, f64, f64) {
    let guided = beta * total;
    let gamma_r = right_fraction * guided;
    (gamma_r, guided - gamma_r, total - guided)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Largest Γ or ηΩ still treated as small compared with ν.
pub const SIDEBAND_LIMIT: f64 = 0.25;

pub fn validate_config(config: &ChainConfig) -> ValidationReport {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let finite = |name: &str, v: f64, errors: &mut Vec<String>| {
        if !v.is_finite() {
            errors.push(format!("{name} is not finite"));
        }
    };

    if config.n_ions == 0 {
        errors.push("n_ions must be at least 1".into());
    }
    if config.omega.len() != config.n_ions {
        errors.push(format!(
            "omega has {} entries but n_ions = {}",
            config.omega.len(),
            config.n_ions
        ));
    }
    for (name, v) in [("gamma_r", config.gamma_r), ("gamma_l", config.gamma_l), ("gamma_ng", config.gamma_ng)] {
        finite(name, v, &mut errors);
        if v < 0.0 {
            errors.push(format!("negative rate: {name} = {v}"));
        }
    }
    if !(config.total_decay() > 0.0) {
        errors.push("total decay gamma_r + gamma_l + gamma_ng must be positive".into());
    }
    finite("eta", config.eta, &mut errors);
    if !(config.eta > 0.0) {
        errors.push(format!("eta must be positive, got {}", config.eta));
    }
    finite("delta", config.delta, &mut errors);
    for (i, &w) in config.omega.iter().enumerate() {
        finite(&format!("omega[{i}]"), w, &mut errors);
        if w < 0.0 {
            errors.push(format!("negative Rabi frequency: omega[{i}] = {w}"));
        }
    }
    if config.n_max < 1 {
        errors.push(format!("n_max must be at least 1, got {}", config.n_max));
    }
    if config.target == 0 || config.target > config.n_ions {
        errors.push(format!("target ion {} outside 1..={}", config.target, config.n_ions));
    }
    match &config.geometry {
        Geometry::Equidistant { xi } => finite("xi", *xi, &mut errors),
        Geometry::Explicit { phases } => {
            if phases.len() != config.n_ions {
                errors.push(format!(
                    "phases has {} entries but n_ions = {}",
                    phases.len(),
                    config.n_ions
                ));
            }
            if phases.iter().any(|p| !p.is_finite()) {
                errors.push("phases contain non-finite values".into());
            }
            if phases.windows(2).any(|w| w[1] <= w[0]) {
                errors.push("positions must be strictly increasing".into());
            }
        }
    }

    if errors.is_empty() {
        if (config.delta + 1.0).abs() > 1e-12 {
            warnings.push(format!(
                "resolved-sideband condition violated: delta = {} (analytic results assume delta = -1)",
                config.delta
            ));
        }
        if config.total_decay() > SIDEBAND_LIMIT {
            warnings.push(format!(
                "total decay {} is not small compared with the trap frequency",
                config.total_decay()
            ));
        }
        for (i, &w) in config.omega.iter().enumerate() {
            if config.eta * w > SIDEBAND_LIMIT {
                warnings.push(format!(
                    "eta*omega[{i}] = {} is not small compared with the trap frequency",
                    config.eta * w
                ));
            }
        }
    }
    ValidationReport { errors, warnings }
}

/// `H_LD + H_L + H_R`.
///
/// The coherent exchange terms use `e^{i|φ_μ − φ_ν|}` with `γ_L` for `μ < ν`
/// and `γ_R` for `μ > ν`.
pub fn build_hamiltonian(config: &ChainConfig, space: &SpaceDescriptor) -> Result<OperatorMatrix> {
    config.validated()?;
    if space.n_ions() != config.n_ions {
        return Err(Error::DimensionMismatch { expected: config.n_ions, found: space.n_ions() });
    }
    let re = |x: f64| c64::new(x, 0.0);
    let sigma: Vec<_> = (1..=config.n_ions).map(|s| space.lowering(s)).collect::<Result<_>>()?;
    let ann: Vec<_> = (1..=config.n_ions).map(|s| space.annihilation(s)).collect::<Result<_>>()?;
    let mut h = OperatorMatrix::zeros(space.total_dim());
    for i in 0..config.n_ions {
        let sd = sigma[i].adjoint();
        let ad = ann[i].adjoint();
        h = &h + &(&sd * &sigma[i]).scale(re(-config.delta));
        h = &h + &(&ad * &ann[i]);
        let coupling = &(&sigma[i] + &sd) * &(&ann[i] + &ad);
        h = &h + &coupling.scale(re(0.5 * config.eta * config.omega[i]));
    }
    let phases = config.phases();
    for mu in 0..config.n_ions {
        for nu in 0..config.n_ions {
            let rate = match mu.cmp(&nu) {
                std::cmp::Ordering::Less => config.gamma_l,
                std::cmp::Ordering::Greater => config.gamma_r,
                std::cmp::Ordering::Equal => continue,
            };
            if rate == 0.0 {
                continue;
            }
            let phase = c64::from_polar(1.0, (phases[mu] - phases[nu]).abs());
            let t = (&sigma[mu].adjoint() * &sigma[nu]).scale(phase);
            let term = &t - &t.adjoint();
            h = &h + &term.scale(c64::new(0.0, -0.5 * rate));
        }
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Left,
    Right,
    Nonguided,
}

/// One dissipative channel
/// `D[ρ] = Σ_{μν} Γ_{μν} (σ_ν ρ σ_μ† − ½{σ_μ†σ_ν, ρ})`.
#[derive(Clone, Debug)]
pub struct DissipatorSpec {
    pub channel: Channel,
    /// Hermitian positive semidefinite `Γ_{μν}`.
    pub coefficients: Mat<c64>,
}

/// A Lindblad jump `J = Σ_ν c_ν σ_ν` with rate `r`, contributing `r(JρJ† − ½{J†J, ρ})`.
#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub rate: f64,
    pub op: OperatorMatrix,
}

impl DissipatorSpec {
    /// Eigendecomposition `Γ = Σ_k λ_k u_k u_k†` as `(λ_k, conj(u_k))`, dropping null directions.
    ///
    /// The jump of mode `k` is `Σ_ν conj(u_k)_ν σ_ν`.
    pub fn jump_factors(&self) -> Result<Vec<(f64, Vec<c64>)>> {
        let n = self.coefficients.nrows();
        let scale = (0..n).map(|i| self.coefficients[(i, i)].re.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(Vec::new());
        }
        let evd = self
            .coefficients
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let mut out = Vec::new();
        for k in 0..n {
            let lambda = s[k].re;
            if lambda < -1e-12 * scale {
                return Err(Error::NonPhysical(format!(
                    "{:?} coefficient matrix has negative eigenvalue {lambda}",
                    self.channel
                )));
            }
            if lambda > 1e-13 * scale {
                out.push((lambda, (0..n).map(|nu| u[(nu, k)].conj()).collect()));
            }
        }
        Ok(out)
    }

    pub fn jumps(&self, space: &SpaceDescriptor) -> Result<Vec<JumpOperator>> {
        let sigma: Vec<_> = (1..=space.n_ions()).map(|s| space.lowering(s)).collect::<Result<_>>()?;
        self.jump_factors()?
            .into_iter()
            .map(|(rate, c)| {
                let mut op = OperatorMatrix::zeros(space.total_dim());
                for (cv, s) in c.iter().zip(&sigma) {
                    op = &op + &s.scale(*cv);
                }
                Ok(JumpOperator { rate, op })
            })
            .collect()
    }
}

/// The left-guided, right-guided and non-guided channels, in that order.
///
/// `Γ^L_{μν} = γ_L e^{−i(φ_μ−φ_ν)}`, `Γ^R_{μν} = γ_R e^{+i(φ_μ−φ_ν)}`, `Γ^ng = γ_ng·I`.
pub fn build_dissipators(config: &ChainConfig) -> Result<Vec<DissipatorSpec>> {
    config.validated()?;
    let n = config.n_ions;
    let phases = config.phases();
    let guided = |rate: f64, sign: f64| {
        Mat::from_fn(n, n, |mu, nu| c64::from_polar(rate, sign * (phases[mu] - phases[nu])))
    };
    Ok(vec![
        DissipatorSpec { channel: Channel::Left, coefficients: guided(config.gamma_l, -1.0) },
        DissipatorSpec { channel: Channel::Right, coefficients: guided(config.gamma_r, 1.0) },
        DissipatorSpec {
            channel: Channel::Nonguided,
            coefficients: Mat::from_fn(n, n, |mu, nu| {
                if mu == nu {
                    c64::new(config.gamma_ng, 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            }),
        },
    ])
}
