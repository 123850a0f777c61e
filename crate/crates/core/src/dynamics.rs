// SPDX-License-Identifier: Apache-2.0

//! Thermal initial states and adaptive time integration of the master
//! equation in matrix form.
//!
//! The integrator is the Dormand-Prince 5(4) pair with a PI step controller.
//! The trace is never renormalized during a run; its drift is tracked and a
//! run that drifts beyond [`TRACE_DRIFT_TOL`] is rejected.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use crate::liouvillian::Liouvillian;
use crate::model::ChainConfig;
use crate::operator_algebra::{LocalState, SpaceDescriptor};
use crate::steady_state::{reference_occupation, DensityMatrix};
use crate::{Error, Result};

pub const TRACE_DRIFT_TOL: f64 = 1e-8;
pub const HERMITICITY_DRIFT_TOL: f64 = 1e-8;

/// Occupation weights `n₀ⁿ/(n₀+1)^{n+1}` for `n = 0..=n_max`, before renormalization.
pub fn thermal_weights(n0: f64, n_max: usize) -> Vec<f64> {
    let q = n0 / (n0 + 1.0);
    (0..=n_max).map(|n| q.powi(n as i32) / (n0 + 1.0)).collect()
}

/// Product over ions of the truncated thermal phonon state with every spin in
/// `|g⟩`, renormalized to unit trace.
pub fn thermal_state(n0: f64, n_max: usize, n_ions: usize) -> Result<DensityMatrix> {
    if !(n0 >= 0.0) || !n0.is_finite() {
        return Err(Error::InvalidConfig(vec![format!("thermal occupation must be >= 0, got {n0}")]));
    }
    let space = SpaceDescriptor::new(n_ions, n_max)?;
    let w = thermal_weights(n0, n_max);
    let z: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / z).collect();
    let d = space.total_dim();
    let mut rho = Mat::<c64>::zeros(d, d);
    let mut digits = vec![0usize; n_ions];
    loop {
        let states: Vec<LocalState> = digits.iter().map(|&n| LocalState::new(false, n)).collect();
        let idx = space.basis_index(&states)?;
        rho[(idx, idx)] = c64::new(digits.iter().map(|&n| p[n]).product(), 0.0);
        // odometer over phonon numbers
        let mut k = n_ions;
        loop {
            if k == 0 {
                return DensityMatrix::new(rho);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] <= n_max {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// `t_end · k / (samples − 1)` for `k = 0..samples`.
pub fn uniform_grid(t_end: f64, samples: usize) -> Vec<f64> {
    let m = samples.max(2) - 1;
    (0..=m).map(|k| t_end * k as f64 / m as f64).collect()
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Times at which the full state is stored.
    pub checkpoints: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-9, initial_step: None, max_steps: 50_000_000, checkpoints: Vec::new() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// `n[i][k]`: ⟨a†a⟩ of ion `i+1` at `t[k]`.
    pub n: Vec<Vec<f64>>,
    /// Excited-state population of each ion.
    pub excited: Vec<Vec<f64>>,
    /// Single-ion reference occupations used for ñ; `None` when undefined.
    pub reference: Vec<Option<f64>>,
    pub snapshots: Vec<(f64, Mat<c64>)>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn n_ions(&self) -> usize {
        self.n.len()
    }

    /// ⟨n_i(t)⟩ for 1-based ion `i`.
    pub fn occupation(&self, ion: usize) -> Result<&[f64]> {
        self.check_ion(ion)?;
        Ok(&self.n[ion - 1])
    }

    /// ñ_i(t), or `None` when the reference occupation is undefined.
    pub fn ntilde(&self, ion: usize) -> Result<Option<Vec<f64>>> {
        self.check_ion(ion)?;
        Ok(self.reference[ion - 1].map(|r| self.n[ion - 1].iter().map(|x| x / r).collect()))
    }

    fn check_ion(&self, ion: usize) -> Result<()> {
        if ion == 0 || ion > self.n_ions() {
            return Err(Error::SiteOutOfRange { site: ion, n_ions: self.n_ions() });
        }
        Ok(())
    }

    /// Columns `t, n_1..n_N, ntilde_1..ntilde_N`; undefined ñ cells are empty.
    pub fn to_csv(&self) -> String {
        let m = self.n_ions();
        let mut out = String::from("t");
        for i in 1..=m {
            out.push_str(&format!(",n_{i}"));
        }
        for i in 1..=m {
            out.push_str(&format!(",ntilde_{i}"));
        }
        out.push('\n');
        for (k, t) in self.t.iter().enumerate() {
            out.push_str(&format!("{t:.12e}"));
            for i in 0..m {
                out.push_str(&format!(",{:.12e}", self.n[i][k]));
            }
            for i in 0..m {
                match self.reference[i] {
                    Some(r) => out.push_str(&format!(",{:.12e}", self.n[i][k] / r)),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Diagonal weights of the number and excited-state operators of every ion.
struct DiagonalObservables {
    number: Vec<Vec<f64>>,
    excited: Vec<Vec<f64>>,
}

impl DiagonalObservables {
    fn new(space: &SpaceDescriptor) -> Self {
        let d = space.total_dim();
        let m = space.n_ions();
        let mut number = vec![vec![0.0; d]; m];
        let mut excited = vec![vec![0.0; d]; m];
        for idx in 0..d {
            for (i, s) in space.basis_state(idx).iter().enumerate() {
                number[i][idx] = s.phonons as f64;
                excited[i][idx] = f64::from(u8::from(s.excited));
            }
        }
        Self { number, excited }
    }

    fn eval(w: &[f64], rho: MatRef<'_, c64>) -> f64 {
        w.iter().enumerate().map(|(k, x)| x * rho[(k, k)].re).sum()
    }
}

/// Integrates `dρ/dt = L[ρ]` from `ρ(0) = rho0`, sampling observables at
/// every time in `grid` (strictly increasing, non-negative). The final time is
/// the last grid entry.
pub fn evolve(config: &ChainConfig, rho0: &DensityMatrix, grid: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    let l = Liouvillian::from_config(config)?;
    let reference = (1..=config.n_ions)
        .map(|i| match reference_occupation(config, i) {
            Ok(r) => Ok(Some(r)),
            Err(Error::UndefinedNormalization { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut traj = evolve_generator(&l, rho0, grid, opts)?;
    traj.reference = reference;
    Ok(traj)
}

/// As [`evolve`] for a prebuilt generator; `reference` is left empty.
pub fn evolve_generator(l: &Liouvillian, rho0: &DensityMatrix, grid: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    let d = l.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.dim() });
    }
    if grid.is_empty() || grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig(vec!["output grid must be non-empty, non-negative and strictly increasing".into()]));
    }
    if !(grid[grid.len() - 1] > 0.0) {
        return Err(Error::InvalidConfig(vec!["t_end must be positive".into()]));
    }
    let diag = DiagonalObservables::new(l.space());
    let m = l.space().n_ions();
    let mut traj = Trajectory {
        t: Vec::with_capacity(grid.len()),
        n: vec![Vec::with_capacity(grid.len()); m],
        excited: vec![Vec::with_capacity(grid.len()); m],
        reference: vec![None; m],
        snapshots: Vec::new(),
        stats: IntegratorStats::default(),
    };
    let mut stops: Vec<f64> = grid.iter().chain(opts.checkpoints.iter().filter(|&&c| c > 0.0 && c <= grid[grid.len() - 1])).copied().collect();
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();

    let record = |t: f64, rho: MatRef<'_, c64>, traj: &mut Trajectory| {
        if grid.binary_search_by(|g| g.total_cmp(&t)).is_ok() {
            traj.t.push(t);
            for i in 0..m {
                traj.n[i].push(DiagonalObservables::eval(&diag.number[i], rho));
                traj.excited[i].push(DiagonalObservables::eval(&diag.excited[i], rho));
            }
        }
        if opts.checkpoints.iter().any(|&c| c == t) {
            traj.snapshots.push((t, rho.to_owned()));
        }
    };

    let mut stepper = Dopri5::new(l, rho0.matrix(), opts);
    let mut t = 0.0;
    for &target in &stops {
        if target > t {
            stepper.advance(&mut t, target, &mut traj.stats)?;
        }
        let drift = (stepper.trace() - 1.0).abs();
        traj.stats.max_trace_drift = traj.stats.max_trace_drift.max(drift);
        record(target, stepper.y.as_ref(), &mut traj);
    }
    if traj.stats.max_trace_drift > TRACE_DRIFT_TOL {
        return Err(Error::NonPhysical(format!("trace drift {:.3e} exceeds tolerance", traj.stats.max_trace_drift)));
    }
    if traj.stats.max_hermiticity_drift > HERMITICITY_DRIFT_TOL {
        return Err(Error::NonPhysical(format!("hermiticity drift {:.3e} exceeds tolerance", traj.stats.max_hermiticity_drift)));
    }
    Ok(traj)
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth minus embedded fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri5<'a> {
    l: &'a Liouvillian,
    y: Mat<c64>,
    ynew: Mat<c64>,
    k: Vec<Mat<c64>>,
    work: Mat<c64>,
    h: f64,
    err_old: f64,
    rtol: f64,
    atol: f64,
    max_steps: usize,
}

impl<'a> Dopri5<'a> {
    fn new(l: &'a Liouvillian, y0: MatRef<'_, c64>, opts: &EvolveOptions) -> Self {
        let d = l.dim();
        let mut s = Self {
            l,
            y: y0.to_owned(),
            ynew: Mat::zeros(d, d),
            k: (0..7).map(|_| Mat::zeros(d, d)).collect(),
            work: Mat::zeros(d, d),
            h: 0.0,
            err_old: 1e-4,
            rtol: opts.rtol,
            atol: opts.atol,
            max_steps: opts.max_steps,
        };
        s.l.apply_hermitian_into(s.y.as_ref(), s.k[0].as_mut(), &mut s.work);
        s.h = opts.initial_step.unwrap_or_else(|| {
            let f = s.k[0].norm_max();
            let y = s.y.norm_max();
            if f > 0.0 { (1e-3 * y / f).min(1e-2) } else { 1e-2 }
        });
        s
    }

    fn trace(&self) -> f64 {
        (0..self.y.nrows()).map(|i| self.y[(i, i)].re).sum()
    }

    /// Steps from `*t` to exactly `t_stop`.
    fn advance(&mut self, t: &mut f64, t_stop: f64, stats: &mut IntegratorStats) -> Result<()> {
        let d = self.y.nrows();
        while *t < t_stop {
            if stats.steps + stats.rejected >= self.max_steps {
                return Err(Error::StepSizeUnderflow { t: *t, h: self.h });
            }
            let last = *t + self.h >= t_stop;
            let h = if last { t_stop - *t } else { self.h };
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: *t, h });
            }
            for s in 1..7 {
                for j in 0..d {
                    for i in 0..d {
                        let mut acc = self.y[(i, j)];
                        for (r, a) in A[s].iter().enumerate().take(s) {
                            if *a != 0.0 {
                                acc += self.k[r][(i, j)] * (h * a);
                            }
                        }
                        self.ynew[(i, j)] = acc;
                    }
                }
                self.l.apply_hermitian_into(self.ynew.as_ref(), self.k[s].as_mut(), &mut self.work);
                stats.evaluations += 1;
            }
            // stage 7 evaluated at the proposed solution (FSAL), ynew already holds it
            let mut sum = 0.0;
            for j in 0..d {
                for i in 0..d {
                    let mut e = c64::new(0.0, 0.0);
                    for (r, w) in E.iter().enumerate() {
                        if *w != 0.0 {
                            e += self.k[r][(i, j)] * (h * w);
                        }
                    }
                    let scale = self.atol + self.rtol * self.y[(i, j)].norm().max(self.ynew[(i, j)].norm());
                    sum += e.norm_sqr() / (scale * scale);
                }
            }
            let err = (sum / (d * d) as f64).sqrt();
            if !err.is_finite() {
                stats.rejected += 1;
                self.h = h * 0.1;
                continue;
            }
            if err <= 1.0 {
                let err = err.max(1e-10);
                let fac = (0.9 * err.powf(-0.17) * self.err_old.powf(0.04)).clamp(0.2, 10.0);
                self.err_old = err;
                std::mem::swap(&mut self.y, &mut self.ynew);
                self.k.swap(0, 6);
                *t = if last { t_stop } else { *t + h };
                stats.steps += 1;
                let herm = hermiticity(self.y.as_ref());
                stats.max_hermiticity_drift = stats.max_hermiticity_drift.max(herm);
                if !last {
                    self.h = h * fac;
                }
            } else {
                stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).max(0.2);
                self.h = h * fac;
            }
        }
        Ok(())
    }
}

fn hermiticity(m: MatRef<'_, c64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..d {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady_state::{solve_steady, SteadyOptions};

    #[test]
    fn thermal_weights_and_renormalization() {
        let w = thermal_weights(0.7, 4);
        let z: f64 = w.iter().sum();
        assert!((z - (1.0 - (0.7f64 / 1.7).powi(5))).abs() < 1e-14);
        assert!((z - 0.9882).abs() < 1e-4);
        let rho = thermal_state(0.7, 4, 1).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        let space = SpaceDescriptor::new(1, 4).unwrap();
        let n = rho.expect(&space.number(1).unwrap()).re;
        assert!((n - 0.6401).abs() < 1e-4, "{n}");
        // mean of the truncated weights before renormalization
        let raw: f64 = w.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((raw - 0.633).abs() < 1e-3, "{raw}");
    }

    #[test]
    fn zero_temperature_is_ground() {
        let rho = thermal_state(0.0, 2, 2).unwrap();
        assert_eq!(rho.matrix()[(0, 0)], c64::new(1.0, 0.0));
        assert!(thermal_state(-0.1, 2, 1).is_err());
    }

    #[test]
    fn two_ion_thermal_is_product() {
        let rho = thermal_state(0.5, 2, 2).unwrap();
        let space = SpaceDescriptor::new(2, 2).unwrap();
        let n1 = rho.expect(&space.number(1).unwrap()).re;
        let n2 = rho.expect(&space.number(2).unwrap()).re;
        assert!((n1 - n2).abs() < 1e-14);
        let nn = rho.expect(&(&space.number(1).unwrap() * &space.number(2).unwrap())).re;
        assert!((nn - n1 * n2).abs() < 1e-14);
    }

    #[test]
    fn spontaneous_decay_is_exponential() {
        let cfg = ChainConfig::new(0.04, vec![0.0]).with_rates(0.0, 0.0, 0.1);
        let space = cfg.space().unwrap();
        let rho0 = DensityMatrix::pure(&space, &[LocalState::new(true, 0)]).unwrap();
        let grid = uniform_grid(40.0, 41);
        let traj = evolve(&cfg, &rho0, &grid, &EvolveOptions::default()).unwrap();
        assert_eq!(traj.reference, vec![None]);
        for (t, p) in traj.t.iter().zip(&traj.excited[0]) {
            let exact = (-0.1 * t).exp();
            assert!(((p - exact) / exact).abs() < 1e-6, "t={t} p={p} exact={exact}");
        }
        assert!(traj.stats.max_trace_drift <= TRACE_DRIFT_TOL);
    }

    #[test]
    fn single_ion_relaxes_to_steady_state_monotonically() {
        let cfg = ChainConfig::new(0.04, vec![1.0]).with_rates(0.0, 0.0, 0.1).with_n_max(4);
        let rho0 = thermal_state(0.7, 4, 1).unwrap();
        let grid = uniform_grid(1500.0, 1501);
        let traj = evolve(&cfg, &rho0, &grid, &EvolveOptions::default()).unwrap();
        let l = Liouvillian::from_config(&cfg).unwrap();
        let st = solve_steady(&l, &SteadyOptions::default()).unwrap();
        let n_st = st.rho.expect(&cfg.space().unwrap().number(1).unwrap()).re;
        let n_end = *traj.n[0].last().unwrap();
        assert!(((n_end - n_st) / n_st).abs() < 0.01, "{n_end} vs {n_st}");
        // non-increasing after a transient of 10/Γ, up to integration noise
        let n = &traj.n[0];
        for k in 101..n.len() {
            assert!(n[k] <= n[k - 1] + 1e-9, "rise at t={}", traj.t[k]);
        }
        assert!(traj.stats.max_hermiticity_drift <= HERMITICITY_DRIFT_TOL);
    }

    #[test]
    fn truncation_four_matches_five() {
        let base = ChainConfig::new(0.04, vec![1.0]).with_rates(0.0, 0.0, 0.1);
        let grid = uniform_grid(1500.0, 4);
        let run = |n_max: usize| {
            let cfg = base.clone().with_n_max(n_max);
            let rho0 = thermal_state(0.7, n_max, 1).unwrap();
            *evolve(&cfg, &rho0, &grid, &EvolveOptions::default()).unwrap().n[0].last().unwrap()
        };
        let (a, b) = (run(4), run(5));
        assert!(((a - b) / b).abs() < 0.02, "{a} vs {b}");
    }

    #[test]
    fn csv_layout() {
        let cfg = ChainConfig::new(0.04, vec![1.0, 0.0]).with_rates(0.085, 0.015, 0.0);
        let rho0 = thermal_state(0.2, 1, 2).unwrap();
        let traj = evolve(&cfg, &rho0, &[0.0, 1.0, 2.0], &EvolveOptions::default()).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,n_1,n_2,ntilde_1,ntilde_2");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 5);
        assert!(row[4].is_empty());
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn rejects_bad_grid_and_dimension() {
        let cfg = ChainConfig::new(0.04, vec![1.0]).with_rates(0.0, 0.0, 0.1);
        let rho0 = thermal_state(0.2, 1, 1).unwrap();
        assert!(evolve(&cfg, &rho0, &[0.0, 2.0, 1.0], &EvolveOptions::default()).is_err());
        assert!(evolve(&cfg, &rho0, &[0.0], &EvolveOptions::default()).is_err());
        let wrong = thermal_state(0.2, 2, 1).unwrap();
        assert!(matches!(
            evolve(&cfg, &wrong, &[0.0, 1.0], &EvolveOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn checkpoints_store_states() {
        let cfg = ChainConfig::new(0.04, vec![1.0]).with_rates(0.0, 0.0, 0.1);
        let rho0 = thermal_state(0.2, 1, 1).unwrap();
        let opts = EvolveOptions { checkpoints: vec![0.5, 1.5], ..Default::default() };
        let traj = evolve(&cfg, &rho0, &[0.0, 1.0, 2.0], &opts).unwrap();
        assert_eq!(traj.t, vec![0.0, 1.0, 2.0]);
        assert_eq!(traj.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0.5, 1.5]);
    }
}
