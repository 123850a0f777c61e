// SPDX-License-Identifier: Apache-2.0

//! Closed-form steady-state occupations for the two-ion chain with ξ = 2πk,
//! to leading order in Γ/ν and ηΩ/ν (ν = 1).
//!
//! Callers pass the channel rates `(γ_R, γ_L, γ_ng)` or `(Γ, β)` and never a
//! bare Γ together with separate rates.

use serde::Serialize;

use crate::model::SIDEBAND_LIMIT;
use crate::{Error, Result};

/// `⟨n⟩ˢ_st ≈ (Γ/4)² + (ηΩ)²/8` for an isolated ion with total decay Γ.
pub fn single_ion_nst(gamma_total: f64, eta: f64, omega: f64) -> f64 {
    (gamma_total / 4.0).powi(2) + (eta * omega).powi(2) / 8.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TargetOccupation {
    pub total: f64,
    /// Isolated-ion value with the chain's Γ.
    pub single_ion: f64,
    /// `total − single_ion`, the effect of the chiral coupling.
    pub chiral_modification: f64,
}

/// Target-ion `⟨n₁⟩_st` of a two-ion chain whose refrigerant is undriven:
///
/// `Γ²/16 + η²Ω²/8 − X/4 + η²Ω² X/(η²Ω² + 2Γ² − 8X)` with `X = γ_Rγ_L`.
pub fn target_nst_decomposed(gamma_r: f64, gamma_l: f64, gamma_ng: f64, eta: f64, omega: f64) -> Result<TargetOccupation> {
    if gamma_r < 0.0 || gamma_l < 0.0 || gamma_ng < 0.0 {
        return Err(Error::OutOfValidity("negative decay rate".into()));
    }
    let total = gamma_r + gamma_l + gamma_ng;
    let e = (eta * omega).powi(2);
    let x = gamma_r * gamma_l;
    let denom = e + 2.0 * total * total - 8.0 * x;
    if !(denom > 0.0) {
        return Err(Error::OutOfValidity(format!(
            "eta^2 Omega^2 + 2 Gamma^2 - 8 gamma_R gamma_L = {denom} is not positive"
        )));
    }
    let single = single_ion_nst(total, eta, omega);
    let modification = -x / 4.0 + e * x / denom;
    Ok(TargetOccupation { total: single + modification, single_ion: single, chiral_modification: modification })
}

pub fn target_nst(gamma_r: f64, gamma_l: f64, gamma_ng: f64, eta: f64, omega: f64) -> Result<f64> {
    target_nst_decomposed(gamma_r, gamma_l, gamma_ng, eta, omega).map(|t| t.total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Minima {
    /// Global minimum of `⟨n₁⟩_st`; `None` when `2Γ² < 3η²Ω²`.
    pub n1_min: Option<f64>,
    /// The two locations `γ_R^min` on the slice `γ_R + γ_L = βΓ`, ascending.
    pub gamma_r_min: Option<[f64; 2]>,
    /// Smallest β at which the minimum is attainable.
    pub beta0: Option<f64>,
    pub feasible: bool,
}

pub fn minima(eta: f64, omega: f64, total: f64, beta: f64) -> Minima {
    let eo = eta * omega;
    let e = eo * eo;
    let q = (e + 2.0 * total * total).sqrt();
    if 2.0 * total * total < 3.0 * e {
        return Minima { n1_min: None, gamma_r_min: None, beta0: None, feasible: false };
    }
    let n1_min = eo * q / 8.0 - e / 32.0;
    let beta0 = (1.0 - eo / (total * total) * (q - eo / 2.0)).max(0.0).sqrt();
    let disc = (beta * beta - 1.0) * total * total - e / 2.0 + eo * q;
    let feasible = beta >= beta0 && disc >= -1e-15 * total * total;
    let gamma_r_min = feasible.then(|| {
        let half = 0.5 * disc.max(0.0).sqrt();
        [beta * total / 2.0 - half, beta * total / 2.0 + half]
    });
    Minima { n1_min: Some(n1_min), gamma_r_min, beta0: Some(beta0), feasible }
}

/// Where `⟨n₁⟩_st < ⟨n⟩ˢ_st` on the slice `γ_R + γ_L = βΓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperiorRegion {
    /// For `γ_R` strictly between 0 and the lower boundary or between the upper boundary and βΓ.
    OutsideBoundaries,
    /// For every `0 < γ_R < βΓ`.
    Everywhere,
    Nowhere,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuperiorBoundary {
    /// `γ_R^s = βΓ/2 ± ½√((β²−1)Γ² + 3η²Ω²/2)`, ascending.
    pub gamma_r_s: Option<[f64; 2]>,
    pub exists: bool,
    pub region: SuperiorRegion,
}

pub fn superior_boundary(eta: f64, omega: f64, total: f64, beta: f64) -> SuperiorBoundary {
    let e = (eta * omega).powi(2);
    if 2.0 * total * total < 3.0 * e {
        return SuperiorBoundary { gamma_r_s: None, exists: false, region: SuperiorRegion::Nowhere };
    }
    let disc = (beta * beta - 1.0) * total * total + 1.5 * e;
    if disc < 0.0 {
        return SuperiorBoundary { gamma_r_s: None, exists: false, region: SuperiorRegion::Everywhere };
    }
    let half = 0.5 * disc.sqrt();
    SuperiorBoundary {
        gamma_r_s: Some([beta * total / 2.0 - half, beta * total / 2.0 + half]),
        exists: true,
        region: SuperiorRegion::OutsideBoundaries,
    }
}

/// Every closed-form prediction for one `(η, Ω, Γ, β)` point, optionally at a given `γ_R`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticPrediction {
    pub eta: f64,
    pub omega: f64,
    pub total_decay: f64,
    pub beta: f64,
    pub gamma_r: Option<f64>,
    pub n_st_single: f64,
    pub n1_st: Option<f64>,
    pub ntilde1: Option<f64>,
    /// Value at the reciprocal point `γ_R = γ_L = βΓ/2`.
    pub n1_max: f64,
    pub n1_min: Option<f64>,
    pub ntilde1_min: Option<f64>,
    pub gamma_r_min: Option<[f64; 2]>,
    pub beta0: Option<f64>,
    pub minima_feasible: bool,
    pub gamma_r_s: Option<[f64; 2]>,
    pub superior_exists: bool,
    pub superior_region: SuperiorRegion,
    /// Γ and ηΩ both small compared with ν.
    pub sideband_regime: bool,
}

impl AnalyticPrediction {
    pub fn new(eta: f64, omega: f64, total: f64, beta: f64, gamma_r: Option<f64>) -> Result<Self> {
        if !(total > 0.0) || !(0.0..=1.0).contains(&beta) || !(eta > 0.0) || omega < 0.0 {
            return Err(Error::InvalidConfig(vec![format!(
                "need total decay > 0, 0 <= beta <= 1, eta > 0, omega >= 0; got {total}, {beta}, {eta}, {omega}"
            )]));
        }
        let guided = beta * total;
        let gamma_ng = total - guided;
        if let Some(gr) = gamma_r {
            if !(0.0..=guided * (1.0 + 1e-12)).contains(&gr) {
                return Err(Error::InvalidConfig(vec![format!("gamma_r = {gr} outside [0, beta*Gamma = {guided}]")]));
            }
        }
        let single = single_ion_nst(total, eta, omega);
        let n1_st = gamma_r
            .map(|gr| target_nst(gr, (guided - gr).max(0.0), gamma_ng, eta, omega))
            .transpose()?;
        let m = minima(eta, omega, total, beta);
        let s = superior_boundary(eta, omega, total, beta);
        Ok(Self {
            eta,
            omega,
            total_decay: total,
            beta,
            gamma_r,
            n_st_single: single,
            n1_st,
            ntilde1: n1_st.map(|n| n / single),
            n1_max: target_nst(guided / 2.0, guided / 2.0, gamma_ng, eta, omega)?,
            n1_min: m.n1_min,
            ntilde1_min: m.n1_min.map(|n| n / single),
            gamma_r_min: m.gamma_r_min,
            beta0: m.beta0,
            minima_feasible: m.feasible,
            gamma_r_s: s.gamma_r_s,
            superior_exists: s.exists,
            superior_region: s.region,
            sideband_regime: total <= SIDEBAND_LIMIT && eta * omega <= SIDEBAND_LIMIT,
        })
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn swap_symmetry(gr in 0.0f64..0.2, gl in 0.0f64..0.2, gng in 0.0f64..0.1, omega in 0.0f64..3.0) {
            prop_assume!(gr + gl + gng > 1e-6);
            let a = target_nst(gr, gl, gng, 0.04, omega).unwrap();
            let b = target_nst(gl, gr, gng, 0.04, omega).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn reciprocal_point_is_maximum_at_beta_one(f in 0.0f64..=1.0, omega in 0.0f64..1.5, total in 0.02f64..0.2) {
            let top = target_nst(total / 2.0, total / 2.0, 0.0, 0.04, omega).unwrap();
            let v = target_nst(f * total, (1.0 - f) * total, 0.0, 0.04, omega).unwrap();
            prop_assert!(v <= top * (1.0 + 1e-14));
        }

        #[test]
        fn feasibility_is_monotone_in_beta(beta in 0.0f64..=1.0, up in 0.0f64..=1.0, omega in 0.0f64..3.0, total in 0.02f64..0.2) {
            let b2 = beta + up * (1.0 - beta);
            if minima(0.04, omega, total, beta).feasible {
                prop_assert!(minima(0.04, omega, total, b2).feasible);
            }
        }

        #[test]
        fn minimum_value_at_its_location(beta in 0.0f64..=1.0, omega in 0.01f64..3.0, total in 0.02f64..0.2) {
            let m = minima(0.04, omega, total, beta);
            if let (true, Some([lo, hi])) = (m.feasible, m.gamma_r_min) {
                prop_assert!(lo >= -1e-15 && hi <= beta * total * (1.0 + 1e-12));
                for gr in [lo, hi] {
                    let gl = (beta * total - gr).max(0.0);
                    let v = target_nst(gr.max(0.0), gl, total - beta * total, 0.04, omega).unwrap();
                    let n = m.n1_min.unwrap();
                    prop_assert!(((v - n) / n).abs() <= 1e-9, "{} vs {}", v, n);
                }
            }
        }
    }
}
