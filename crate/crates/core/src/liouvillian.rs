// SPDX-License-Identifier: Apache-2.0

//! Lindblad generator `L[ρ] = −i[H, ρ] + Σ_channels D[ρ]`.
//!
//! Vectorization is column stacking throughout: `vec(AXB) = (Bᵀ ⊗ A) vec(X)`,
//! and the entry `ρ[(i, j)]` sits at position `i + j·D`.

use faer::prelude::ReborrowMut;
use faer::{c64, Col, Mat, MatMut, MatRef};

use crate::model::{build_dissipators, build_hamiltonian, ChainConfig, DissipatorSpec, JumpOperator};
use crate::operator_algebra::{OperatorMatrix, SpaceDescriptor};
use crate::{Error, Result};

/// Default limit on the superoperator dimension `D²` for explicit assembly.
pub const DEFAULT_ASSEMBLY_CAP: usize = 4096;

/// Hamiltonian and channels, with the jump factorization precomputed for
/// matrix-form application.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    space: SpaceDescriptor,
    hamiltonian: OperatorMatrix,
    channels: Vec<DissipatorSpec>,
    jumps: Vec<JumpOperator>,
    jumps_adj: Vec<OperatorMatrix>,
    /// `H − (i/2) Σ r J†J`
    h_eff: OperatorMatrix,
    h_eff_adj: OperatorMatrix,
    rate_scale: f64,
}

impl Liouvillian {
    pub fn from_config(config: &ChainConfig) -> Result<Self> {
        let space = config.space()?;
        let h = build_hamiltonian(config, &space)?;
        let channels = build_dissipators(config)?;
        Self::from_parts(space, h, channels)
    }

    pub fn from_parts(space: SpaceDescriptor, hamiltonian: OperatorMatrix, channels: Vec<DissipatorSpec>) -> Result<Self> {
        if hamiltonian.dim() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), found: hamiltonian.dim() });
        }
        for c in &channels {
            if c.coefficients.nrows() != space.n_ions() || c.coefficients.ncols() != space.n_ions() {
                return Err(Error::DimensionMismatch { expected: space.n_ions(), found: c.coefficients.nrows() });
            }
        }
        let mut jumps = Vec::new();
        for c in &channels {
            jumps.extend(c.jumps(&space)?);
        }
        let jumps_adj: Vec<_> = jumps.iter().map(|j| j.op.adjoint()).collect();
        let mut h_eff = hamiltonian.clone();
        for (j, jd) in jumps.iter().zip(&jumps_adj) {
            h_eff = &h_eff - &(jd * &j.op).scale(c64::new(0.0, 0.5 * j.rate));
        }
        let h_eff_adj = h_eff.adjoint();
        let rate_scale = channels
            .iter()
            .map(|c| (0..c.coefficients.nrows()).map(|i| c.coefficients[(i, i)].re).fold(0.0, f64::max))
            .sum();
        Ok(Self { space, hamiltonian, channels, jumps, jumps_adj, h_eff, h_eff_adj, rate_scale })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[DissipatorSpec] {
        &self.channels
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    /// Single-ion decay rate summed over channels (Γ for chains built from a config).
    pub fn rate_scale(&self) -> f64 {
        self.rate_scale
    }

    fn check(&self, rho: MatRef<'_, c64>) -> Result<()> {
        let d = self.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows().max(rho.ncols()) });
        }
        Ok(())
    }

    /// `L[ρ]` for an arbitrary square `ρ`.
    pub fn apply(&self, rho: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.check(rho)?;
        let d = self.dim();
        let mut out = Mat::zeros(d, d);
        self.h_eff.mul_dense_into(c64::new(0.0, -1.0), rho, out.as_mut());
        self.h_eff_adj.dense_mul_into(c64::new(0.0, 1.0), rho, out.as_mut());
        self.add_recycling(rho, out.as_mut());
        Ok(out)
    }

    /// `L[ρ]` for Hermitian `ρ`, written into `out`. Uses `L[ρ] = X + X† + Σ r JρJ†`
    /// with `X = −i H_eff ρ`, so the result is Hermitian by construction.
    pub fn apply_hermitian_into(&self, rho: MatRef<'_, c64>, out: MatMut<'_, c64>, work: &mut Mat<c64>) {
        let d = self.dim();
        debug_assert!(rho.nrows() == d && rho.ncols() == d);
        let mut out = out;
        work.fill(c64::new(0.0, 0.0));
        self.h_eff.mul_dense_into(c64::new(0.0, -1.0), rho, work.as_mut());
        for j in 0..d {
            for i in 0..d {
                out[(i, j)] = work[(i, j)] + work[(j, i)].conj();
            }
        }
        self.add_recycling(rho, out);
    }

    pub fn apply_hermitian(&self, rho: MatRef<'_, c64>) -> Result<Mat<c64>> {
        self.check(rho)?;
        let d = self.dim();
        let mut out = Mat::zeros(d, d);
        let mut work = Mat::zeros(d, d);
        self.apply_hermitian_into(rho, out.as_mut(), &mut work);
        Ok(out)
    }

    /// `out += Σ r J ρ J†`
    fn add_recycling(&self, rho: MatRef<'_, c64>, mut out: MatMut<'_, c64>) {
        for (j, jd) in self.jumps.iter().zip(&self.jumps_adj) {
            let t = j.op.mul_dense(rho);
            jd.dense_mul_into(c64::new(j.rate, 0.0), t.as_ref(), out.rb_mut());
        }
    }

    /// Explicit `D² × D²` superoperator, refused when `D² > cap`.
    pub fn assemble(&self, cap: usize) -> Result<Superoperator> {
        assemble(&self.hamiltonian, &self.channels, &self.space, cap)
    }
}

/// Explicit superoperator in column-stacking convention.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub dim: usize,
    pub matrix: Mat<c64>,
}

impl Superoperator {
    pub fn superop_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `L · vec(ρ)` reshaped back to a `D × D` matrix.
    pub fn action(&self, rho: MatRef<'_, c64>) -> Result<Mat<c64>> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.nrows() });
        }
        let v = vectorize(rho);
        let w = &self.matrix * &v;
        Ok(unvectorize(w.as_ref(), self.dim))
    }

    /// Largest `|vec(I)† L|` entry, zero for a trace-preserving generator.
    pub fn trace_row_residual(&self) -> f64 {
        let d = self.dim;
        let n = self.superop_dim();
        (0..n)
            .map(|col| (0..d).map(|i| self.matrix[(i + i * d, col)]).sum::<c64>().norm())
            .fold(0.0, f64::max)
    }

    pub fn norm_max(&self) -> f64 {
        self.matrix.norm_max()
    }
}

pub fn vectorize(rho: MatRef<'_, c64>) -> Col<c64> {
    let d = rho.nrows();
    Col::from_fn(d * rho.ncols(), |k| rho[(k % d, k / d)])
}

pub fn unvectorize(v: faer::ColRef<'_, c64>, dim: usize) -> Mat<c64> {
    Mat::from_fn(dim, dim, |i, j| v[i + j * dim])
}

/// `out[(ra·dB + rb, ca·dB + cb)] += alpha · A[ra, ca] · B[rb, cb]`
fn add_kron(out: &mut Mat<c64>, alpha: c64, a: &OperatorMatrix, b: &OperatorMatrix) {
    let db = b.dim();
    let b_entries: Vec<_> = b.iter().collect();
    for (ra, ca, va) in a.iter() {
        let w = alpha * va;
        for &(rb, cb, vb) in &b_entries {
            out[(ra * db + rb, ca * db + cb)] += w * vb;
        }
    }
}

/// `−i(I⊗H − Hᵀ⊗I) + Σ_{μν} Γ_{μν}[conj(σ_μ)⊗σ_ν − ½ I⊗σ_μ†σ_ν − ½ (σ_μ†σ_ν)ᵀ⊗I]`,
/// assembled straight from the coefficient matrices.
pub fn assemble(
    hamiltonian: &OperatorMatrix,
    channels: &[DissipatorSpec],
    space: &SpaceDescriptor,
    cap: usize,
) -> Result<Superoperator> {
    let d = space.total_dim();
    if hamiltonian.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: hamiltonian.dim() });
    }
    let n2 = d * d;
    if n2 > cap {
        return Err(Error::TooLarge { superop_dim: n2, cap });
    }
    let id = OperatorMatrix::identity(d);
    let mut m = Mat::<c64>::zeros(n2, n2);
    add_kron(&mut m, c64::new(0.0, -1.0), &id, hamiltonian);
    add_kron(&mut m, c64::new(0.0, 1.0), &hamiltonian.transpose(), &id);

    let sigma: Vec<_> = (1..=space.n_ions()).map(|s| space.lowering(s)).collect::<Result<_>>()?;
    let sigma_conj: Vec<_> = sigma.iter().map(|s| s.conj()).collect();
    let sigma_adj: Vec<_> = sigma.iter().map(|s| s.adjoint()).collect();
    let n = space.n_ions();
    for c in channels {
        if c.coefficients.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.coefficients.nrows() });
        }
        let mut k = OperatorMatrix::zeros(d);
        for mu in 0..n {
            for nu in 0..n {
                let g = c.coefficients[(mu, nu)];
                if g == c64::new(0.0, 0.0) {
                    continue;
                }
                add_kron(&mut m, g, &sigma_conj[mu], &sigma[nu]);
                k = &k + &(&sigma_adj[mu] * &sigma[nu]).scale(g);
            }
        }
        add_kron(&mut m, c64::new(-0.5, 0.0), &id, &k);
        add_kron(&mut m, c64::new(-0.5, 0.0), &k.transpose(), &id);
    }
    Ok(Superoperator { dim: d, matrix: m })
}


#[cfg(test)]
mod proptests {
    use super::tests::random_hermitian;
    use super::*;
    use crate::model::ChainConfig;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generator_keeps_hermiticity_and_trace(
            gr in 0.0f64..0.1, gl in 0.0f64..0.1, gng in 0.001f64..0.1, xi in -7.0f64..7.0,
            w1 in 0.0f64..1.5, w2 in 0.0f64..1.5, seed in 0u64..1000,
        ) {
            let cfg = ChainConfig::new(0.04, vec![w1, w2]).with_rates(gr, gl, gng).with_xi(xi);
            let l = Liouvillian::from_config(&cfg).unwrap();
            let rho = random_hermitian(l.dim(), seed);
            let out = l.apply(rho.as_ref()).unwrap();
            prop_assert!((&out - out.adjoint()).norm_max() <= 1e-13);
            let tr: c64 = (0..l.dim()).map(|i| out[(i, i)]).sum();
            prop_assert!(tr.norm() <= 1e-12 * cfg.total_decay() * rho.norm_l2().max(1.0));
            let s = l.assemble(DEFAULT_ASSEMBLY_CAP).unwrap();
            prop_assert!(s.trace_row_residual() <= 1e-12 * s.norm_max());
        }
    }
}
