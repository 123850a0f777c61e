// SPDX-License-Identifier: Apache-2.0

//! Reduced linear system for the target-ion steady state of an `N`-ion chain.
//!
//! Valid when only the target (ion 1, leftmost) is driven and ξ is a multiple
//! of 2π. Refrigerant phonons are traced out and density-matrix elements are
//! kept to second order in `Γ/ν` and `ηΩ/ν`, normalized to `ρ_{g0g…g,g0g…g} = 1`.
//!
//! Unknowns: `A = ρ_{g1g…g,e0g…g}`, `B_i = ρ_{g1g…g, g0…e_i…}`,
//! `C_i = ρ_{e0g…g, g0…e_i…}`, the symmetric `D_ij = ρ_{g0…e_i…, g0…e_j…}` and
//! `ρ_{e0g…g,e0g…g}`, `N(N+3)/2` in total. With `A = iα` fixed by the
//! first equation, `B_i = i b_i` and every remaining unknown is real, so the
//! solve is a dense real system of size `N(N+3)/2 − 1`.
//!
//! The occupation is `⟨n₁⟩ = ρ_{e1g…g,e1g…g} + ρ_{g1g…g,g1g…g}`; the terms with an
//! excited refrigerant (`ρ_{e1e…}`, `ρ_{g1e…}`) are beyond the retained order.

use std::fmt;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::single_ion_nst;
use crate::model::split_rates;
use crate::{Error, Result};

/// Largest acceptable 1-norm condition estimate.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedSolution {
    pub n_ions: usize,
    #[serde(serialize_with = "ser_c64")]
    pub a: c64,
    #[serde(serialize_with = "ser_c64_vec")]
    pub b: Vec<c64>,
    #[serde(serialize_with = "ser_c64_vec")]
    pub c: Vec<c64>,
    /// Row-major `(N−1)×(N−1)`, symmetric.
    pub d: Vec<Vec<f64>>,
    pub rho_e0: f64,
    pub rho_g1: f64,
    pub rho_e1: f64,
    pub n1: f64,
    pub ntilde1: f64,
    /// Number of complex unknowns, `N(N+3)/2`.
    pub unknowns: usize,
    pub condition_estimate: f64,
}

fn ser_c64<S: serde::Serializer>(z: &c64, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&[z.re, z.im], s)
}

fn ser_c64_vec<S: serde::Serializer>(v: &[c64], s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(), s)
}

struct Layout {
    m: usize,
}

impl Layout {
    fn b(&self, i: usize) -> usize {
        i
    }
    fn c(&self, i: usize) -> usize {
        self.m + i
    }
    fn d(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        // rows 0..i of the upper triangle hold i·m − i(i−1)/2 entries
        2 * self.m + i * self.m - i * i.saturating_sub(1) / 2 + (j - i)
    }
    fn r(&self) -> usize {
        2 * self.m + self.m * (self.m + 1) / 2
    }
    fn size(&self) -> usize {
        self.r() + 1
    }
}

pub fn solve_reduced(n_ions: usize, gamma_r: f64, gamma_l: f64, gamma_ng: f64, eta: f64, omega: f64) -> Result<ReducedSolution> {
    if n_ions < 2 {
        return Err(Error::InvalidConfig(vec!["reduced system needs n_ions >= 2".into()]));
    }
    let mut errors = Vec::new();
    for (name, v) in [("gamma_r", gamma_r), ("gamma_l", gamma_l), ("gamma_ng", gamma_ng)] {
        if !(v >= 0.0) || !v.is_finite() {
            errors.push(format!("negative rate: {name} = {v}"));
        }
    }
    if !(eta > 0.0) {
        errors.push(format!("eta must be positive, got {eta}"));
    }
    if !(omega > 0.0) {
        errors.push(format!("target drive must be positive, got {omega}"));
    }
    let total = gamma_r + gamma_l + gamma_ng;
    if !(total > 0.0) {
        errors.push("total decay must be positive".into());
    }
    if !errors.is_empty() {
        return Err(Error::InvalidConfig(errors));
    }

    let m = n_ions - 1;
    let lay = Layout { m };
    let n = lay.size();
    debug_assert_eq!(n, n_ions * (n_ions + 3) / 2 - 1);
    let eo = eta * omega;
    let alpha = total * eo / 16.0;
    let (g, gr, gl) = (total, gamma_r, gamma_l);
    let mut a = Mat::<f64>::zeros(n, n);
    let mut rhs = Mat::<f64>::zeros(n, 1);
    let mut row = 0;

    for i in 0..m {
        a[(row, lay.b(i))] += g;
        for j in 0..i {
            a[(row, lay.b(j))] += 2.0 * gr;
        }
        for j in i + 1..m {
            a[(row, lay.b(j))] += 2.0 * gl;
        }
        a[(row, lay.c(i))] += eo;
        rhs[(row, 0)] = -2.0 * gr * alpha;
        row += 1;
    }
    for i in 0..m {
        a[(row, lay.c(i))] += 2.0 * g;
        for j in 0..i {
            a[(row, lay.c(j))] += 2.0 * gr;
        }
        for j in i + 1..m {
            a[(row, lay.c(j))] += 2.0 * gl;
        }
        for j in 0..m {
            a[(row, lay.d(j, i))] += 2.0 * gl;
        }
        a[(row, lay.b(i))] -= eo;
        a[(row, lay.r())] += 2.0 * gr;
        row += 1;
    }
    for i in 0..m {
        for j in i..m {
            a[(row, lay.d(i, j))] += g;
            for k in 0..i {
                a[(row, lay.d(k, j))] += gr;
            }
            for k in i + 1..m {
                a[(row, lay.d(k, j))] += gl;
            }
            for k in 0..j {
                a[(row, lay.d(i, k))] += gr;
            }
            for k in j + 1..m {
                a[(row, lay.d(i, k))] += gl;
            }
            a[(row, lay.c(i))] += gr;
            a[(row, lay.c(j))] += gr;
            row += 1;
        }
    }
    a[(row, lay.r())] += 2.0 * g;
    for j in 0..m {
        a[(row, lay.c(j))] += 4.0 * gl;
    }
    rhs[(row, 0)] = 2.0 * eo * alpha;
    row += 1;
    debug_assert_eq!(row, n);

    let lu = a.partial_piv_lu();
    let x = lu.solve(&rhs);
    let condition = condition_estimate(&a, &lu);
    if !condition.is_finite() || condition > CONDITION_LIMIT || x.col(0).iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem { condition });
    }

    let b: Vec<f64> = (0..m).map(|i| x[(lay.b(i), 0)]).collect();
    let c: Vec<f64> = (0..m).map(|i| x[(lay.c(i), 0)]).collect();
    let d: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| x[(lay.d(i, j), 0)]).collect()).collect();
    let rho_e0 = x[(lay.r(), 0)];
    let rho_g1 = rho_e0 + (g * alpha + 2.0 * gl * b.iter().sum::<f64>()) / eo;
    let rho_e1 = eo * eo / 16.0;
    let n1 = rho_e1 + rho_g1;
    Ok(ReducedSolution {
        n_ions,
        a: c64::new(0.0, alpha),
        b: b.iter().map(|&v| c64::new(0.0, v)).collect(),
        c: c.iter().map(|&v| c64::new(v, 0.0)).collect(),
        d,
        rho_e0,
        rho_g1,
        rho_e1,
        n1,
        ntilde1: n1 / single_ion_nst(total, eta, omega),
        unknowns: n + 1,
        condition_estimate: condition,
    })
}

/// `‖A‖₁ · est(‖A⁻¹‖₁)` with Hager's estimator.
fn condition_estimate(a: &Mat<f64>, lu: &faer::linalg::solvers::PartialPivLu<f64>) -> f64 {
    let n = a.nrows();
    let norm1 = (0..n).map(|j| (0..n).map(|i| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut x = Mat::<f64>::from_fn(n, 1, |_, _| 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x);
        est = y.col(0).iter().map(|v| v.abs()).sum::<f64>();
        if !est.is_finite() {
            return f64::INFINITY;
        }
        let xi = Mat::<f64>::from_fn(n, 1, |i, _| if y[(i, 0)] >= 0.0 { 1.0 } else { -1.0 });
        let z = lu.solve_transpose(&xi);
        let (jmax, zmax) = (0..n).map(|i| (i, z[(i, 0)].abs())).fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        let ztx: f64 = (0..n).map(|i| z[(i, 0)] * x[(i, 0)]).sum();
        if zmax <= ztx {
            break;
        }
        x = Mat::from_fn(n, 1, |i, _| if i == jmax { 1.0 } else { 0.0 });
    }
    norm1 * est
}

/// Reduced solve on the slice parametrized by `(Γ, β, γ_R/γ)`.
pub fn solve_reduced_beta(n_ions: usize, total: f64, beta: f64, right_fraction: f64, eta: f64, omega: f64) -> Result<ReducedSolution> {
    let (gr, gl, gng) = split_rates(total, beta, right_fraction);
    solve_reduced(n_ions, gr, gl.max(0.0), gng.max(0.0), eta, omega)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinSearchResult {
    pub n_ions: usize,
    pub beta: f64,
    pub gamma_r_over_gamma: f64,
    pub ntilde1_min: f64,
    pub evaluations: usize,
}

fn objective(n_ions: usize, total: f64, eta: f64, omega: f64, beta: f64, f: f64) -> f64 {
    solve_reduced_beta(n_ions, total, beta, f, eta, omega)
        .map(|s| s.ntilde1)
        .ok()
        .filter(|v| v.is_finite() && *v >= 0.0)
        .unwrap_or(f64::INFINITY)
}

fn golden(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64, evals: &mut usize) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    *evals += 2;
    while hi - lo > 1e-9 {
        // ties move toward the lower end
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
        *evals += 1;
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `v` beats `best` by more than rounding; near-equal values count as ties.
fn clearly_below(v: f64, best: f64) -> bool {
    v < best && (best.is_infinite() || v < best - 1e-12 * best.abs())
}

/// Global minimum of ñ₁ over `(β, γ_R/γ) ∈ [0,1]²`: a `resolution × resolution`
/// grid scan, then alternating golden-section refinement along each axis
/// within one grid cell of the best point. Ties go to the smaller `γ_R`.
pub fn min_search(n_ions: usize, total: f64, eta: f64, omega: f64, resolution: usize) -> Result<MinSearchResult> {
    if resolution < 50 {
        return Err(Error::InvalidConfig(vec![format!("grid resolution must be at least 50, got {resolution}")]));
    }
    solve_reduced(n_ions, total, 0.0, 0.0, eta, omega)?;
    let step = 1.0 / (resolution - 1) as f64;
    let points: Vec<(f64, f64)> = (0..resolution)
        .flat_map(|bi| (0..resolution).map(move |fi| (bi as f64 * step, fi as f64 * step)))
        .collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(b, f)| objective(n_ions, total, eta, omega, b, f))
        .collect();
    let mut best = (f64::INFINITY, f64::INFINITY, 0.0, 0.0);
    for (&(b, f), &v) in points.iter().zip(&values) {
        let gr = b * f;
        if clearly_below(v, best.0) || (!clearly_below(best.0, v) && gr < best.1) {
            best = (v, gr, b, f);
        }
    }
    let (mut value, _, mut beta, mut frac) = best;
    if !value.is_finite() {
        return Err(Error::SingularSystem { condition: f64::INFINITY });
    }
    let mut evals = points.len();
    for _ in 0..4 {
        let (f_new, v) = golden((frac - step).max(0.0), (frac + step).min(1.0), |f| objective(n_ions, total, eta, omega, beta, f), &mut evals);
        if v < value {
            value = v;
            frac = f_new;
        }
        let (b_new, v) = golden((beta - step).max(0.0), (beta + step).min(1.0), |b| objective(n_ions, total, eta, omega, b, frac), &mut evals);
        if v < value {
            value = v;
            beta = b_new;
        }
    }
    Ok(MinSearchResult { n_ions, beta, gamma_r_over_gamma: frac, ntilde1_min: value, evaluations: evals })
}

/// Minimum of ñ₁ over `γ_R/γ ∈ [0,1]` at fixed β, by grid scan and golden-section refinement.
pub fn slice_min(n_ions: usize, total: f64, eta: f64, omega: f64, beta: f64, resolution: usize) -> Result<(f64, f64)> {
    if resolution < 2 {
        return Err(Error::InvalidConfig(vec!["slice resolution must be at least 2".into()]));
    }
    let step = 1.0 / (resolution - 1) as f64;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..resolution {
        let f = k as f64 * step;
        let v = objective(n_ions, total, eta, omega, beta, f);
        if clearly_below(v, best.0) {
            best = (v, f);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::SingularSystem { condition: f64::INFINITY });
    }
    let mut evals = 0;
    let (f, v) = golden((best.1 - step).max(0.0), (best.1 + step).min(1.0), |f| objective(n_ions, total, eta, omega, beta, f), &mut evals);
    Ok(if v < best.0 { (f, v) } else { (best.1, best.0) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedGridPoint {
    pub beta: f64,
    pub gamma_r_over_gamma: f64,
    pub n1: Option<f64>,
    pub ntilde1: Option<f64>,
}

/// Reduced solves over `β ∈ betas` × `γ_R/γ ∈ fractions`, row-major in β.
pub fn reduced_grid(n_ions: usize, total: f64, eta: f64, omega: f64, betas: &[f64], fractions: &[f64]) -> Vec<ReducedGridPoint> {
    let points: Vec<(f64, f64)> = betas.iter().flat_map(|&b| fractions.iter().map(move |&f| (b, f))).collect();
    points
        .par_iter()
        .map(|&(beta, f)| {
            let s = solve_reduced_beta(n_ions, total, beta, f, eta, omega).ok();
            ReducedGridPoint { beta, gamma_r_over_gamma: f, n1: s.as_ref().map(|s| s.n1), ntilde1: s.map(|s| s.ntilde1) }
        })
        .collect()
}

/// CSV with columns `beta,gamma_r_over_gamma,n1,ntilde1`; failed points leave the values empty.
pub fn grid_csv(points: &[ReducedGridPoint]) -> String {
    let mut out = String::from("beta,gamma_r_over_gamma,n1,ntilde1\n");
    let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.beta, p.gamma_r_over_gamma, opt(p.n1), opt(p.ntilde1)));
    }
    out
}

/// One side of a reduced density-matrix index: target spin and phonon, then
/// the spin of each refrigerant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedIndex {
    pub target_excited: bool,
    pub target_phonon: u8,
    pub refrigerants: Vec<bool>,
}

impl ReducedIndex {
    pub fn ground(n_ions: usize) -> Self {
        Self { target_excited: false, target_phonon: 0, refrigerants: vec![false; n_ions - 1] }
    }

    fn flags(&self) -> Vec<bool> {
        let mut v = vec![self.target_excited, self.target_phonon == 1];
        v.extend(&self.refrigerants);
        v
    }

    fn from_flags(flags: &[bool]) -> Self {
        Self { target_excited: flags[0], target_phonon: u8::from(flags[1]), refrigerants: flags[2..].to_vec() }
    }

    fn spin_excitations(&self) -> usize {
        usize::from(self.target_excited) + self.refrigerants.iter().filter(|&&e| e).count()
    }

    /// Parses labels such as `"e1g"` or `"g0ge"`.
    pub fn parse(label: &str) -> Option<Self> {
        let chars: Vec<char> = label.chars().collect();
        if chars.len() < 3 {
            return None;
        }
        let spin = |c: char| match c {
            'g' => Some(false),
            'e' => Some(true),
            _ => None,
        };
        let phonon = match chars[1] {
            '0' => 0,
            '1' => 1,
            _ => return None,
        };
        Some(Self {
            target_excited: spin(chars[0])?,
            target_phonon: phonon,
            refrigerants: chars[2..].iter().map(|&c| spin(c)).collect::<Option<_>>()?,
        })
    }
}

impl fmt::Display for ReducedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |e: bool| if e { 'e' } else { 'g' };
        write!(f, "{}{}", s(self.target_excited), self.target_phonon)?;
        for &e in &self.refrigerants {
            write!(f, "{}", s(e))?;
        }
        Ok(())
    }
}

/// Selection rule for reduced density-matrix elements `ρ_{row,col}`: Hamming
/// distance at most 2 from the ground element over the full index string,
/// at most one excited spin per side, plus the doubly excited `ρ_{e1g…g,e1g…g}`.
pub fn is_retained(row: &ReducedIndex, col: &ReducedIndex) -> bool {
    let n_ions = row.refrigerants.len() + 1;
    let mut exception = ReducedIndex::ground(n_ions);
    exception.target_excited = true;
    exception.target_phonon = 1;
    if *row == exception && *col == exception {
        return true;
    }
    let distance = row.flags().iter().chain(col.flags().iter()).filter(|&&b| b).count();
    distance <= 2 && row.spin_excitations() <= 1 && col.spin_excitations() <= 1
}

/// All retained `(row, col)` pairs for an `N`-ion chain, sorted.
pub fn element_filter(n_ions: usize) -> Result<Vec<(ReducedIndex, ReducedIndex)>> {
    if n_ions < 2 {
        return Err(Error::InvalidConfig(vec!["element filter needs n_ions >= 2".into()]));
    }
    let width = n_ions + 1;
    let ground = vec![false; 2 * width];
    let mut out = Vec::new();
    let mut push = |flags: &[bool]| {
        let row = ReducedIndex::from_flags(&flags[..width]);
        let col = ReducedIndex::from_flags(&flags[width..]);
        if is_retained(&row, &col) {
            out.push((row, col));
        }
    };
    push(&ground);
    for p in 0..2 * width {
        let mut f = ground.clone();
        f[p] = true;
        push(&f);
        for q in p + 1..2 * width {
            let mut f2 = f.clone();
            f2[q] = true;
            push(&f2);
        }
    }
    let mut exception = ReducedIndex::ground(n_ions);
    exception.target_excited = true;
    exception.target_phonon = 1;
    out.push((exception.clone(), exception));
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::target_nst;
    use approx::assert_relative_eq;

    #[test]
    fn layout_is_dense_and_symmetric() {
        for m in 1..6 {
            let lay = Layout { m };
            let mut seen = vec![false; lay.size()];
            for i in 0..m {
                seen[lay.b(i)] = true;
                seen[lay.c(i)] = true;
                for j in 0..m {
                    assert_eq!(lay.d(i, j), lay.d(j, i));
                    seen[lay.d(i, j)] = true;
                }
            }
            seen[lay.r()] = true;
            assert!(seen.iter().all(|&s| s), "m = {m}");
        }
    }

    #[test]
    fn two_ions_reproduce_closed_form() {
        for (gr, gl, gng, omega) in [(0.03, 0.05, 0.02, 1.0), (0.085, 0.015, 0.0, 1.0), (0.02, 0.06, 0.0, 0.3), (0.04, 0.04, 0.02, 2.0)] {
            let s = solve_reduced(2, gr, gl, gng, 0.04, omega).unwrap();
            let exact = target_nst(gr, gl, gng, 0.04, omega).unwrap();
            assert_relative_eq!(s.n1, exact, max_relative = 1e-10);
            assert_eq!(s.unknowns, 5);
        }
    }

    #[test]
    fn unidirectional_gives_unit_ntilde() {
        let s = solve_reduced(2, 0.1, 0.0, 0.0, 0.04, 1.0).unwrap();
        assert_relative_eq!(s.ntilde1, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn solution_structure() {
        let s = solve_reduced(5, 0.06, 0.03, 0.01, 0.04, 1.0).unwrap();
        assert_eq!(s.unknowns, 5 * 8 / 2);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.d[i][j], s.d[j][i]);
            }
        }
        assert!(s.n1 >= 0.0);
        assert!(s.a.re == 0.0 && s.b.iter().all(|b| b.re == 0.0) && s.c.iter().all(|c| c.im == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(solve_reduced(1, 0.1, 0.0, 0.0, 0.04, 1.0), Err(Error::InvalidConfig(_))));
        assert!(matches!(solve_reduced(2, 0.1, 0.0, 0.0, 0.04, 0.0), Err(Error::InvalidConfig(_))));
        assert!(matches!(min_search(2, 0.1, 0.04, 1.0, 10), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn degenerate_point_reported() {
        // reciprocal, fully guided three-ion chain: the refrigerant pair has a dark state
        assert!(matches!(solve_reduced(3, 0.05, 0.05, 0.0, 0.04, 1.0), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn thirty_ions_is_fast() {
        let t = std::time::Instant::now();
        let s = solve_reduced(30, 0.07, 0.02, 0.01, 0.04, 1.0).unwrap();
        assert!(s.n1 > 0.0);
        assert!(t.elapsed().as_secs_f64() < 1.0);
    }

    #[test]
    fn beta_one_slice_minimum_for_two_ions() {
        let m = crate::analytic::minima(0.04, 1.0, 0.1, 1.0);
        let [lo, _] = m.gamma_r_min.unwrap();
        let analytic = m.n1_min.unwrap() / single_ion_nst(0.1, 0.04, 1.0);
        let (f, v) = slice_min(2, 0.1, 0.04, 1.0, 1.0, 51).unwrap();
        assert_relative_eq!(v, analytic, max_relative = 1e-8);
        assert!((f - lo / 0.1).abs() < 1e-4, "{f}");

        // for two ions the minimum value does not depend on β above β₀, so the
        // global search lands on the same value
        let r = min_search(2, 0.1, 0.04, 1.0, 51).unwrap();
        assert_relative_eq!(r.ntilde1_min, analytic, max_relative = 1e-8);
        assert!(r.beta >= m.beta0.unwrap() - 0.02, "{r:?}");
    }

    #[test]
    fn filter_excludes_listed_two_ion_elements() {
        let listed = [
            "e1g,e0e", "g0g,e0e", "g1e,e0e", "e1e,e0g", "e0g,e1e", "g0e,e1e", "g1g,e1e", "e0e,e1g", "g1e,e1g",
            "e1e,g0e", "e0e,g0g", "e0e,g1e", "e1g,g1e", "e1e,g1g", "e0e,e0e", "e1e,e1e", "g1e,g1e",
        ];
        assert_eq!(listed.len(), 17);
        for l in listed {
            let (r, c) = l.split_once(',').unwrap();
            assert!(!is_retained(&ReducedIndex::parse(r).unwrap(), &ReducedIndex::parse(c).unwrap()), "{l}");
        }
        let kept = element_filter(2).unwrap();
        let labels: Vec<String> = kept.iter().map(|(r, c)| format!("{r},{c}")).collect();
        for l in ["g0g,g0g", "e1g,e1g", "g1g,e0g", "g1g,g0e", "e0g,g0e", "g0e,g0e", "e0g,e0g", "g1g,g1g", "e1g,g0g", "g1e,g0g"] {
            assert!(labels.contains(&l.to_string()), "{l} missing");
        }
    }

    #[test]
    fn filter_exception_and_ground() {
        for n in 2..6 {
            let kept = element_filter(n).unwrap();
            let g = ReducedIndex::ground(n);
            assert!(kept.contains(&(g.clone(), g.clone())));
            let mut e1 = g.clone();
            e1.target_excited = true;
            e1.target_phonon = 1;
            assert!(kept.contains(&(e1.clone(), e1)));
        }
    }
}
