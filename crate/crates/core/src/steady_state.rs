// SPDX-License-Identifier: Apache-2.0

//! Steady state as the null vector of the generator, plus observables.
//!
//! Small superoperators (`D² ≤ 256`) go through a full SVD. Larger ones are
//! bordered with the trace functional and factorized once by dense LU; the
//! same factorization drives an inverse iteration that bounds the second
//! smallest singular value.

use faer::linalg::solvers::Solve;
use faer::{c64, Col, Mat, MatRef, Side};
use serde::Serialize;

use crate::liouvillian::{unvectorize, vectorize, Liouvillian, Superoperator, DEFAULT_ASSEMBLY_CAP};
use crate::model::ChainConfig;
use crate::operator_algebra::{LocalState, OperatorMatrix, SpaceDescriptor};
use crate::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Steady residual bound in units of Γ.
pub const RESIDUAL_TOL: f64 = 1e-10;

const SVD_LIMIT: usize = 256;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix(Mat<c64>);

impl DensityMatrix {
    pub fn new(m: Mat<c64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let rho = Self(m);
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::NonPhysical(format!("not Hermitian: |rho - rho^dag| = {herm:e}")));
        }
        let tr = rho.trace();
        if (tr - c64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::NonPhysical(format!("trace is {tr}, expected 1")));
        }
        let min = rho.min_eigenvalue()?;
        if min < -POSITIVITY_TOL {
            return Err(Error::NonPhysical(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a product basis state.
    pub fn pure(space: &SpaceDescriptor, states: &[LocalState]) -> Result<Self> {
        let idx = space.basis_index(states)?;
        let d = space.total_dim();
        Ok(Self(Mat::from_fn(d, d, |i, j| {
            if i == idx && j == idx {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })))
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.0.as_ref()
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm_max()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let h = Mat::from_fn(self.dim(), self.dim(), |i, j| (self.0[(i, j)] + self.0[(j, i)].conj()) * 0.5);
        let ev = h
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        Ok(ev.first().copied().unwrap_or(0.0))
    }

    /// `Tr(ρ O)`.
    pub fn expect(&self, op: &OperatorMatrix) -> c64 {
        op.iter().map(|(r, c, v)| v * self.0[(c, r)]).sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SteadyOptions {
    /// Largest superoperator dimension `D²` assembled explicitly.
    pub assembly_cap: usize,
    /// Required ratio between the two smallest singular values.
    pub degeneracy_ratio: f64,
    pub max_iterations: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { assembly_cap: DEFAULT_ASSEMBLY_CAP, degeneracy_ratio: 1e3, max_iterations: 40 }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// Frobenius norm of `L[ρ_st]`.
    pub residual: f64,
    pub sigma_min: f64,
    pub sigma_next: f64,
}

pub fn solve_steady(l: &Liouvillian, opts: &SteadyOptions) -> Result<SteadyState> {
    let sup = l.assemble(opts.assembly_cap)?;
    let (v, sigma_min, sigma_next) = if sup.superop_dim() <= SVD_LIMIT {
        null_vector_svd(&sup)?
    } else {
        null_vector_bordered(&sup, opts.max_iterations)?
    };
    let floor = 1e-12 * sup.norm_max();
    if sigma_next <= (opts.degeneracy_ratio * sigma_min).max(floor) {
        return Err(Error::AmbiguousSteadyState { smallest: sigma_min, second: sigma_next });
    }

    let d = sup.dim;
    let raw = unvectorize(v.as_ref(), d);
    let tr: c64 = (0..d).map(|i| raw[(i, i)]).sum();
    if tr.norm() < 1e-8 * raw.norm_l2() {
        return Err(Error::NoNormalizableSolution);
    }
    let scaled = raw * faer::Scale(tr.inv());
    let m = Mat::from_fn(d, d, |i, j| (scaled[(i, j)] + scaled[(j, i)].conj()) * 0.5);
    let residual = l.apply(m.as_ref())?.norm_l2();
    let bound = RESIDUAL_TOL * l.rate_scale().max(f64::MIN_POSITIVE);
    if residual > bound {
        return Err(Error::NonPhysical(format!(
            "steady residual {residual:e} exceeds {bound:e}"
        )));
    }
    let rho = DensityMatrix::new(m)?;
    Ok(SteadyState { rho, residual, sigma_min, sigma_next })
}

fn null_vector_svd(sup: &Superoperator) -> Result<(Col<c64>, f64, f64)> {
    let svd = sup.matrix.svd().map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let n = s.nrows();
    let v = svd.V().col(n - 1).to_owned();
    let next = if n >= 2 { s[n - 2].re } else { f64::INFINITY };
    Ok((v, s[n - 1].re, next))
}

fn pseudo_random_col(n: usize, seed: u64) -> Col<c64> {
    let mut s = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    Col::from_fn(n, |_| c64::new(next(), next()))
}

fn normalize(x: &mut Col<c64>) -> f64 {
    let n = x.norm_l2();
    if n > 0.0 && n.is_finite() {
        *x = &*x * faer::Scale(c64::new(1.0 / n, 0.0));
    }
    n
}

/// Null vector of `A` from the bordered matrix `B = A + s·w wᴴ` with `w = vec(I)/√D`.
///
/// Since `wᴴA = 0`, the solution of `B x = s·w` satisfies `A x = 0` and `wᴴx = 1`.
/// `B` is singular whenever the null space of `A` has dimension two or more;
/// its smallest singular value never exceeds the second one of `A` and is
/// returned in its place.
fn null_vector_bordered(sup: &Superoperator, max_iter: usize) -> Result<(Col<c64>, f64, f64)> {
    let a = &sup.matrix;
    let n = a.nrows();
    let d = sup.dim;
    let s = sup.norm_max();
    let w_entry = 1.0 / (d as f64).sqrt();
    let on_diag = |k: usize| k % (d + 1) == 0;
    let b = Mat::from_fn(n, n, |i, j| {
        if on_diag(i) && on_diag(j) {
            a[(i, j)] + s * w_entry * w_entry
        } else {
            a[(i, j)]
        }
    });
    let lu = b.partial_piv_lu();
    let finite = |x: &Col<c64>| x.iter().all(|z| z.re.is_finite() && z.im.is_finite());

    let rhs = Col::from_fn(n, |k| if on_diag(k) { c64::new(s * w_entry, 0.0) } else { c64::new(0.0, 0.0) });
    let mut x = lu.solve(&rhs);
    // one round of iterative refinement
    let r = &rhs - &b * &x;
    x = &x + lu.solve(&r);
    if !finite(&x) {
        return Err(Error::AmbiguousSteadyState { smallest: 0.0, second: 0.0 });
    }
    if normalize(&mut x) == 0.0 {
        return Err(Error::NoNormalizableSolution);
    }
    let sigma_min = (a * &x).norm_l2();

    // smallest singular value of B by inverse iteration on (BᴴB)⁻¹
    let mut y = pseudo_random_col(n, 2);
    normalize(&mut y);
    let mut sigma_b = f64::INFINITY;
    for _ in 0..max_iter {
        let mut z = y.clone();
        lu.solve_adjoint_in_place(z.as_mat_mut());
        lu.solve_in_place(z.as_mat_mut());
        if !finite(&z) {
            return Ok((x, sigma_min, 0.0));
        }
        let growth = normalize(&mut z);
        if growth == 0.0 {
            break;
        }
        y = z;
        let estimate = (&b * &y).norm_l2();
        let converged = (sigma_b - estimate).abs() <= 1e-8 * estimate;
        sigma_b = estimate;
        if converged {
            break;
        }
    }
    Ok((x, sigma_min, sigma_b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteadyObservables {
    /// `⟨a_i†a_i⟩` per ion.
    pub n: Vec<f64>,
    /// `⟨n_i⟩` over the isolated single-ion value; `None` when that reference vanishes (Ω_i = 0).
    pub ntilde: Vec<Option<f64>>,
    /// `⟨σ_i†σ_i⟩` per ion.
    pub excited: Vec<f64>,
    /// `⟨σ_1†σ_2⟩ − ⟨σ_1†⟩⟨σ_2⟩`, for chains of two or more ions.
    #[serde(serialize_with = "serialize_complex_opt")]
    pub c_st: Option<c64>,
    pub residual: f64,
}

fn serialize_complex_opt<S: serde::Serializer>(z: &Option<c64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    z.map(|z| [z.re, z.im]).serialize(s)
}

/// `⟨σ_μ†σ_ν⟩ − ⟨σ_μ†⟩⟨σ_ν⟩` (1-based sites).
pub fn spin_correlation(rho: &DensityMatrix, space: &SpaceDescriptor, mu: usize, nu: usize) -> Result<c64> {
    let smu = space.lowering(mu)?;
    let snu = space.lowering(nu)?;
    let sd = smu.adjoint();
    Ok(rho.expect(&(&sd * &snu)) - rho.expect(&sd) * rho.expect(&snu))
}

/// Observables without the single-ion normalization (`ntilde` left empty).
pub fn raw_observables(rho: &DensityMatrix, space: &SpaceDescriptor) -> Result<SteadyObservables> {
    let mut n = Vec::new();
    let mut excited = Vec::new();
    for site in 1..=space.n_ions() {
        n.push(rho.expect(&space.number(site)?).re);
        excited.push(rho.expect(&space.excited_projector(site)?).re);
    }
    let c_st = if space.n_ions() >= 2 { Some(spin_correlation(rho, space, 1, 2)?) } else { None };
    Ok(SteadyObservables { n, ntilde: Vec::new(), excited, c_st, residual: 0.0 })
}

pub fn observables(state: &SteadyState, config: &ChainConfig) -> Result<SteadyObservables> {
    let space = config.space()?;
    let mut obs = raw_observables(&state.rho, &space)?;
    obs.residual = state.residual;
    obs.ntilde = (1..=config.n_ions)
        .map(|i| match reference_occupation(config, i) {
            Ok(r) => Ok(Some(obs.n[i - 1] / r)),
            Err(Error::UndefinedNormalization { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(obs)
}

/// The isolated single ion matching ion `i`: same η, Δ and `n_max`, its own
/// Ω_i, and the chain's total decay Γ.
pub fn reference_config(config: &ChainConfig, ion: usize) -> Result<ChainConfig> {
    if ion == 0 || ion > config.n_ions {
        return Err(Error::SiteOutOfRange { site: ion, n_ions: config.n_ions });
    }
    let mut single = ChainConfig::new(config.eta, vec![config.omega[ion - 1]])
        .with_rates(0.0, 0.0, config.total_decay())
        .with_n_max(config.n_max)
        .with_delta(config.delta);
    single.target = 1;
    Ok(single)
}

/// `⟨n⟩_st` of the isolated reference ion for ion `i`.
pub fn reference_occupation(config: &ChainConfig, ion: usize) -> Result<f64> {
    let single = reference_config(config, ion)?;
    if single.omega[0] == 0.0 {
        return Err(Error::UndefinedNormalization { ion });
    }
    let l = Liouvillian::from_config(&single)?;
    let st = solve_steady(&l, &SteadyOptions::default())?;
    let n = st.rho.expect(&single.space()?.number(1)?).re;
    if n <= 0.0 {
        return Err(Error::UndefinedNormalization { ion });
    }
    Ok(n)
}

/// Full steady solve of the chain followed by the ion-`i` normalization.
pub fn normalized_occupation(config: &ChainConfig, ion: usize) -> Result<f64> {
    let reference = reference_occupation(config, ion)?;
    let (_, obs) = solve_config(config, &SteadyOptions::default())?;
    Ok(obs.n[ion - 1] / reference)
}

/// Builds the generator, solves for the steady state and evaluates all observables.
pub fn solve_config(config: &ChainConfig, opts: &SteadyOptions) -> Result<(SteadyState, SteadyObservables)> {
    let l = Liouvillian::from_config(config)?;
    let st = solve_steady(&l, opts)?;
    let obs = observables(&st, config)?;
    Ok((st, obs))
}

/// `vec(ρ)` helper re-exported for tests of the null-space route.
pub fn residual_vector(sup: &Superoperator, rho: &DensityMatrix) -> Col<c64> {
    &sup.matrix * vectorize(rho.matrix())
}
