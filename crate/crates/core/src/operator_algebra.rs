// SPDX-License-Identifier: Apache-2.0

//! Composite spin ⊗ phonon Hilbert space and sparse operators on it.
//!
//! Every ion carries a two-level internal state in the basis `(|g⟩, |e⟩)` and
//! one truncated motional mode `(|0⟩, …, |n_max⟩)`. A site is ordered
//! spin-major (`spin ⊗ phonon`) and ion 1 is the slowest-varying tensor
//! factor, so the flat index of `|α₁ n₁; α₂ n₂; …⟩` is the mixed-radix number
//! with digits `α_μ·(n_max+1) + n_μ`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use faer::prelude::ReborrowMut;
use faer::{c64, Mat, MatMut, MatRef};

use crate::{Error, Result};

/// Shape of the composite space of an `N`-ion chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceDescriptor {
    n_ions: usize,
    n_max: usize,
}

/// Which factor of a site a local operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteFactor {
    Spin,
    Phonon,
}

/// Single-ion basis label `|α, n⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalState {
    pub excited: bool,
    pub phonons: usize,
}

impl LocalState {
    pub const fn new(excited: bool, phonons: usize) -> Self {
        Self { excited, phonons }
    }

    pub const fn ground() -> Self {
        Self::new(false, 0)
    }
}

impl SpaceDescriptor {
    pub fn new(n_ions: usize, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidTruncation(n_max));
        }
        if n_ions == 0 {
            return Err(Error::InvalidConfig(vec!["n_ions must be positive".into()]));
        }
        Ok(Self { n_ions, n_max })
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub const fn spin_dim(&self) -> usize {
        2
    }

    pub fn phonon_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn site_dim(&self) -> usize {
        self.spin_dim() * self.phonon_dim()
    }

    pub fn total_dim(&self) -> usize {
        self.site_dim().pow(self.n_ions as u32)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n_ions {
            return Err(Error::SiteOutOfRange { site, n_ions: self.n_ions });
        }
        Ok(())
    }

    /// Flat index of a product basis state (one [`LocalState`] per ion).
    pub fn basis_index(&self, states: &[LocalState]) -> Result<usize> {
        if states.len() != self.n_ions {
            return Err(Error::DimensionMismatch { expected: self.n_ions, found: states.len() });
        }
        let mut idx = 0;
        for s in states {
            if s.phonons > self.n_max {
                return Err(Error::DimensionMismatch { expected: self.n_max, found: s.phonons });
            }
            idx = idx * self.site_dim() + usize::from(s.excited) * self.phonon_dim() + s.phonons;
        }
        Ok(idx)
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    pub fn basis_state(&self, mut index: usize) -> Vec<LocalState> {
        let d = self.site_dim();
        let mut out = vec![LocalState::ground(); self.n_ions];
        for slot in out.iter_mut().rev() {
            let local = index % d;
            index /= d;
            *slot = LocalState::new(local >= self.phonon_dim(), local % self.phonon_dim());
        }
        out
    }

    /// `σ_μ` embedded at `site` (1-based).
    pub fn lowering(&self, site: usize) -> Result<OperatorMatrix> {
        embed(&local_lowering_spin(), site, SiteFactor::Spin, self)
    }

    /// `a_μ` embedded at `site` (1-based).
    pub fn annihilation(&self, site: usize) -> Result<OperatorMatrix> {
        embed(&local_annihilation(self.n_max)?, site, SiteFactor::Phonon, self)
    }

    /// `a_μ†a_μ` embedded at `site`.
    pub fn number(&self, site: usize) -> Result<OperatorMatrix> {
        let a = self.annihilation(site)?;
        Ok(&a.adjoint() * &a)
    }

    /// `σ_μ†σ_μ` embedded at `site`.
    pub fn excited_projector(&self, site: usize) -> Result<OperatorMatrix> {
        let s = self.lowering(site)?;
        Ok(&s.adjoint() * &s)
    }
}

/// Square complex matrix in compressed sparse row storage.
///
/// Entries are addressable by index through [`get`](Self::get); the storage
/// never keeps explicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<c64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, c64::new(1.0, 0.0))))
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, c64)>) -> Self {
        let mut rows: Vec<BTreeMap<usize, c64>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside a {dim}x{dim} matrix");
            *rows[r].entry(c).or_insert(c64::new(0.0, 0.0)) += v;
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != c64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn from_dense(m: MatRef<'_, c64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j, m[(i, j)]))),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[span.clone()].binary_search(&col) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => c64::new(0.0, 0.0),
        }
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, c64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn conj(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (r, c, v.conj())))
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (r, c, v * factor)))
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self - &self.adjoint()).max_abs() <= tol
    }

    /// `A ⊗ B` with `A = self` as the slow factor.
    pub fn kron(&self, other: &Self) -> Self {
        let d = other.dim;
        Self::from_triplets(
            self.dim * d,
            self.iter().flat_map(|(r1, c1, v1)| {
                other.iter().map(move |(r2, c2, v2)| (r1 * d + r2, c1 * d + c2, v1 * v2))
            }),
        )
    }

    /// `out += alpha · self · x` for a dense column-major `x`.
    pub fn mul_dense_into(&self, alpha: c64, x: MatRef<'_, c64>, mut out: MatMut<'_, c64>) {
        debug_assert_eq!(x.nrows(), self.dim);
        for j in 0..x.ncols() {
            let xj = x.col(j);
            let mut oj = out.rb_mut().col_mut(j);
            for r in 0..self.dim {
                let mut acc = c64::new(0.0, 0.0);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.vals[k] * xj[self.cols[k]];
                }
                if acc != c64::new(0.0, 0.0) {
                    oj[r] += alpha * acc;
                }
            }
        }
    }

    /// `out += alpha · x · self` for a dense column-major `x`.
    pub fn dense_mul_into(&self, alpha: c64, x: MatRef<'_, c64>, mut out: MatMut<'_, c64>) {
        debug_assert_eq!(x.ncols(), self.dim);
        for (k, c, v) in self.iter() {
            let w = alpha * v;
            let xk = x.col(k);
            let mut oc = out.rb_mut().col_mut(c);
            for i in 0..x.nrows() {
                oc[i] += w * xk[i];
            }
        }
    }

    pub fn mul_dense(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let mut out = Mat::zeros(self.dim, x.ncols());
        self.mul_dense_into(c64::new(1.0, 0.0), x, out.as_mut());
        out
    }

    pub fn dense_mul(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let mut out = Mat::zeros(x.nrows(), self.dim);
        self.dense_mul_into(c64::new(1.0, 0.0), x, out.as_mut());
        out
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator sum");
        OperatorMatrix::from_triplets(self.dim, self.iter().chain(rhs.iter()))
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator difference");
        OperatorMatrix::from_triplets(self.dim, self.iter().chain(rhs.iter().map(|(r, c, v)| (r, c, -v))))
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator product");
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            let mut acc: BTreeMap<usize, c64> = BTreeMap::new();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (mid, a) = (self.cols[k], self.vals[k]);
                for l in rhs.row_ptr[mid]..rhs.row_ptr[mid + 1] {
                    *acc.entry(rhs.cols[l]).or_insert(c64::new(0.0, 0.0)) += a * rhs.vals[l];
                }
            }
            triplets.extend(acc.into_iter().map(|(c, v)| (r, c, v)));
        }
        OperatorMatrix::from_triplets(self.dim, triplets)
    }
}

impl Mul<c64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: c64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

/// `σ` on a single two-level system, basis `(|g⟩, |e⟩)`: maps `|e⟩ → |g⟩`.
pub fn local_lowering_spin() -> OperatorMatrix {
    OperatorMatrix::from_triplets(2, [(0, 1, c64::new(1.0, 0.0))])
}

/// Truncated annihilation operator `a|n⟩ = √n |n−1⟩` on `{|0⟩, …, |n_max⟩}`.
pub fn local_annihilation(n_max: usize) -> Result<OperatorMatrix> {
    if n_max < 1 {
        return Err(Error::InvalidTruncation(n_max));
    }
    Ok(OperatorMatrix::from_triplets(
        n_max + 1,
        (1..=n_max).map(|n| (n - 1, n, c64::new((n as f64).sqrt(), 0.0))),
    ))
}

/// Embeds a single-site operator as `I ⊗ … ⊗ local ⊗ … ⊗ I`.
///
/// `site` is 1-based. A spin operator must be 2×2 and a phonon operator
/// `(n_max+1)×(n_max+1)`.
pub fn embed(
    local: &OperatorMatrix,
    site: usize,
    kind: SiteFactor,
    space: &SpaceDescriptor,
) -> Result<OperatorMatrix> {
    space.check_site(site)?;
    let site_op = match kind {
        SiteFactor::Spin => {
            if local.dim() != space.spin_dim() {
                return Err(Error::DimensionMismatch { expected: space.spin_dim(), found: local.dim() });
            }
            local.kron(&OperatorMatrix::identity(space.phonon_dim()))
        }
        SiteFactor::Phonon => {
            if local.dim() != space.phonon_dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.phonon_dim(),
                    found: local.dim(),
                });
            }
            OperatorMatrix::identity(space.spin_dim()).kron(local)
        }
    };
    let d = space.site_dim();
    let left = d.pow((site - 1) as u32);
    let right = d.pow((space.n_ions() - site) as u32);
    let entries: Vec<_> = site_op.iter().collect();
    Ok(OperatorMatrix::from_triplets(
        space.total_dim(),
        (0..left).flat_map(|l| {
            let entries = &entries;
            (0..right).flat_map(move |k| {
                entries
                    .iter()
                    .map(move |&(r, c, v)| ((l * d + r) * right + k, (l * d + c) * right + k, v))
            })
        }),
    ))
}
