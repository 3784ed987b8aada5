//! Element-level demand measures: ductility, damage indices, hinge
//! lengths, and demand-capacity ratios.
//!
//! These reduce integration-point histories to the scalar quantities an
//! assessment report is built from.  All of them depend only on the
//! recorded extrema and accumulated dissipation, so they are invariant
//! under any resampling of the history that preserves its extrema.

use serde::{Deserialize, Serialize};

use hystereo_core::newmark::ElementHistory;

use crate::error::{invalid, Result};

/// Park–Ang damage index, split into its two contributions.
///
/// `di = di_mu + di_e` by construction; the terms are kept separate so a
/// report can show how much of the damage is attributed to peak ductility
/// versus accumulated dissipation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamageIndex {
    /// Ductility term `mu_m / mu_u`.
    pub di_mu: f64,
    /// Energy term `psi * e_h / (m_y * theta_y_mu_u)`.
    pub di_e: f64,
    /// Combined index.
    pub di: f64,
}

/// Everything the element rows of an assessment report need, bundled so
/// the index stays recomputable from its own ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDamage {
    /// Element id (position in model element order).
    pub id: usize,
    /// Peak curvature ductility demand [-].
    pub mu_m: f64,
    /// Ductility capacity [-].
    pub mu_u: f64,
    /// Dissipated hysteretic energy [J].
    pub e_h: f64,
    /// Normalizing energy capacity `m_y * theta_y_mu_u` [J].
    pub e_max: f64,
    /// Ductility term of the damage index [-].
    pub di_mu: f64,
    /// Energy term of the damage index [-].
    pub di_e: f64,
    /// Combined damage index [-].
    pub di: f64,
    /// Energy-term calibration factor [-].
    pub psi: f64,
    /// Yield moment [N·m].
    pub m_y: f64,
    /// Rotation capacity `theta_y * mu_u` [rad].
    pub theta_y_mu_u: f64,
    /// Plastic hinge length [m].
    pub l_p: f64,
}

impl ElementDamage {
    /// Assembles the report row, computing the index terms from the raw
    /// demands and capacities.
    pub fn assemble(
        id: usize,
        mu_m: f64,
        mu_u: f64,
        e_h: f64,
        m_y: f64,
        theta_y_mu_u: f64,
        psi: f64,
        l_p: f64,
    ) -> Result<Self> {
        let index = park_ang_di(mu_m, mu_u, e_h, m_y, theta_y_mu_u, psi)?;
        Ok(Self {
            id,
            mu_m,
            mu_u,
            e_h,
            e_max: m_y * theta_y_mu_u,
            di_mu: index.di_mu,
            di_e: index.di_e,
            di: index.di,
            psi,
            m_y,
            theta_y_mu_u,
            l_p,
        })
    }
}

/// Peak curvature ductility demand: the largest `|curvature| / phi_y`
/// seen by any integration point of the element.
///
/// # Errors
/// The yield curvature must be positive.
pub fn ductility_demand(element: &ElementHistory, phi_y: f64) -> Result<f64> {
    if phi_y <= 0.0 {
        return Err(invalid(format!("yield curvature must be positive, got {phi_y}")));
    }
    let peak = element
        .samples
        .iter()
        .flatten()
        .map(|s| s.curvature.abs())
        .fold(0.0, f64::max);
    Ok(peak / phi_y)
}

/// Demand-capacity ratio `max_t |demand(t)| / capacity`.
///
/// # Errors
/// The capacity must be positive.
pub fn dcr(demand: &[f64], capacity: f64) -> Result<f64> {
    if capacity <= 0.0 {
        return Err(invalid(format!("capacity must be positive, got {capacity}")));
    }
    Ok(demand.iter().fold(0.0f64, |m, &s| m.max(s.abs())) / capacity)
}

/// Nominal axial capacity of a reinforced-concrete column section:
/// `0.85 f'_c (A_g - A_s) + f_y A_s`.
pub fn axial_capacity(fc: f64, fy: f64, a_g: f64, a_s: f64) -> f64 {
    0.85 * fc * (a_g - a_s) + fy * a_s
}

/// Empirical plastic hinge length of a column [m]:
/// `l_p / h = max{ [0.3 P/P_o + A_s/A_g - 1] (L/h) + 0.25, 0.25 }`.
///
/// `h` is the section depth, `L` the shear span, `P` the axial load with
/// capacity `p_o`, and `a_s / a_g` the reinforcement ratio.  Expects
/// `h, a_g, p_o > 0` and `l >= 0`; the 0.25 h floor keeps the result
/// positive for any load level.
pub fn plastic_hinge_length(h: f64, l: f64, p: f64, p_o: f64, a_s: f64, a_g: f64) -> f64 {
    let bracket = (0.3 * p / p_o + a_s / a_g - 1.0) * (l / h) + 0.25;
    h * bracket.max(0.25)
}

/// Park–Ang damage index from peak ductility and dissipated energy.
///
/// `di_mu = mu_m / mu_u`, `di_e = psi * e_h / (m_y * theta_y_mu_u)`, and
/// the combined index is their sum.
///
/// # Errors
/// Capacities `mu_u`, `m_y`, `theta_y_mu_u` must be positive and `psi`
/// nonnegative.
pub fn park_ang_di(
    mu_m: f64,
    mu_u: f64,
    e_h: f64,
    m_y: f64,
    theta_y_mu_u: f64,
    psi: f64,
) -> Result<DamageIndex> {
    if mu_u <= 0.0 || m_y <= 0.0 || theta_y_mu_u <= 0.0 {
        return Err(invalid(format!(
            "capacities must be positive: mu_u = {mu_u}, m_y = {m_y}, theta_y*mu_u = {theta_y_mu_u}"
        )));
    }
    if psi < 0.0 {
        return Err(invalid(format!("calibration factor must be nonnegative, got {psi}")));
    }
    let di_mu = mu_m / mu_u;
    let di_e = psi * e_h / (m_y * theta_y_mu_u);
    Ok(DamageIndex { di_mu, di_e, di: di_mu + di_e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use hystereo_core::element::IpSample;
    use proptest::prelude::*;

    fn curvature_history(curvatures: &[f64]) -> ElementHistory {
        ElementHistory {
            weights: vec![1.0],
            samples: vec![curvatures
                .iter()
                .map(|&c| IpSample {
                    moment: 0.0,
                    curvature: c,
                    axial: 0.0,
                    axial_strain: 0.0,
                    unload_flexural: 1.0,
                })
                .collect()],
        }
    }

    #[test]
    fn ductility_is_the_peak_curvature_over_yield() {
        let phi_y = 2.0e-3;
        let history = curvature_history(&[0.0, 1.2e-3, -2.4 * phi_y, 0.5e-3]);
        assert_relative_eq!(ductility_demand(&history, phi_y).unwrap(), 2.4);

        let below = curvature_history(&[0.3e-3, -0.9e-3]);
        assert!(ductility_demand(&below, phi_y).unwrap() < 1.0);

        assert!(ductility_demand(&history, 0.0).is_err());
        assert!(ductility_demand(&history, -1.0).is_err());
    }

    #[test]
    fn dcr_is_the_peak_demand_over_capacity() {
        assert_relative_eq!(dcr(&[40.0e3, -100.0e3, 60.0e3], 250.0e3).unwrap(), 0.4);
        assert_relative_eq!(dcr(&[0.0; 16], 250.0e3).unwrap(), 0.0);
        assert!(dcr(&[1.0], 0.0).is_err());
        assert!(dcr(&[1.0], -5.0).is_err());
    }

    #[test]
    fn hinge_length_floor_and_formula_branches() {
        // Moderate axial load, slender column: the bracket is deeply
        // negative, (0.06 + 0.02 - 1) * 5 + 0.25 = -4.35, so the floor
        // governs.
        let h = 0.5;
        assert_relative_eq!(plastic_hinge_length(h, 5.0 * h, 0.2, 1.0, 0.02, 1.0), 0.25 * h);
        // Zero shear span: the slope term vanishes and the floor value is
        // the formula value.
        assert_relative_eq!(plastic_hinge_length(h, 0.0, 0.0, 1.0, 0.0, 1.0), 0.25 * h);
        // Fully loaded, fully reinforced (limit case): the bracket becomes
        // 0.3 (L/h) + 0.25 and grows past the floor.
        let l = 3.0 * h;
        assert_relative_eq!(
            plastic_hinge_length(h, l, 1.0, 1.0, 1.0, 1.0),
            h * (0.3 * (l / h) + 0.25)
        );
    }

    #[test]
    fn axial_capacity_matches_hand_arithmetic() {
        // 400 mm square column, 2% reinforcement, f'c = 30 MPa, fy = 420 MPa:
        // 0.85 * 30e6 * 0.1568 + 420e6 * 0.0032 = 5.3424 MN.
        assert_relative_eq!(
            axial_capacity(30.0e6, 420.0e6, 0.16, 0.0032),
            5.3424e6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn damage_index_sums_its_two_terms() {
        // No dissipation: the index reduces to the ductility ratio.
        let elastic = park_ang_di(0.8, 4.0, 0.0, 50.0e3, 0.08, 1.0).unwrap();
        assert_relative_eq!(elastic.di, 0.2);
        assert_abs_diff_eq!(elastic.di_e, 0.0);

        // mu_m/mu_u = 0.5 plus an energy term of 0.3.
        let m_y = 50.0e3;
        let theta = 0.08;
        let e_h = 0.3 * m_y * theta;
        let both = park_ang_di(2.0, 4.0, e_h, m_y, theta, 1.0).unwrap();
        assert_relative_eq!(both.di_mu, 0.5);
        assert_relative_eq!(both.di_e, 0.3);
        assert_relative_eq!(both.di, 0.8);

        // psi scales only the energy term.
        let scaled = park_ang_di(2.0, 4.0, e_h, m_y, theta, 0.5).unwrap();
        assert_relative_eq!(scaled.di_e, 0.15);
        assert_relative_eq!(scaled.di_mu, 0.5);
    }

    #[test]
    fn damage_index_rejects_bad_capacities() {
        assert!(park_ang_di(1.0, 0.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(park_ang_di(1.0, 4.0, 0.0, -1.0, 1.0, 1.0).is_err());
        assert!(park_ang_di(1.0, 4.0, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(park_ang_di(1.0, 4.0, 0.0, 1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn element_damage_row_is_self_consistent() {
        let row = ElementDamage::assemble(3, 2.0, 5.0, 1.2e3, 40.0e3, 0.1, 1.0, 0.125).unwrap();
        assert_relative_eq!(row.di, row.di_mu + row.psi * row.e_h / row.e_max);
        assert_relative_eq!(row.e_max, row.m_y * row.theta_y_mu_u);

        let json = serde_json::to_string(&row).unwrap();
        let back: ElementDamage = serde_json::from_str(&json).unwrap();
        assert_eq!(back, row);
    }

    proptest! {
        /// Both peak-based measures depend only on the extrema, so any
        /// reordering or duplication of samples leaves them unchanged.
        #[test]
        fn peak_measures_ignore_time_parameterization(
            values in prop::collection::vec(-10.0f64..10.0, 1..40),
            dup in 0usize..40,
        ) {
            let mut shuffled = values.clone();
            shuffled.reverse();
            shuffled.push(values[dup % values.len()]);

            let capacity = 2.5;
            prop_assert_eq!(dcr(&values, capacity).unwrap(), dcr(&shuffled, capacity).unwrap());

            let phi_y = 1.5;
            let a = curvature_history(&values);
            let b = curvature_history(&shuffled);
            prop_assert_eq!(
                ductility_demand(&a, phi_y).unwrap(),
                ductility_demand(&b, phi_y).unwrap()
            );
        }

        /// More dissipated energy never lowers the index.
        #[test]
        fn damage_index_monotone_in_energy(e1 in 0.0f64..1.0e5, extra in 0.0f64..1.0e5) {
            let lo = park_ang_di(1.5, 4.0, e1, 40.0e3, 0.1, 1.0).unwrap();
            let hi = park_ang_di(1.5, 4.0, e1 + extra, 40.0e3, 0.1, 1.0).unwrap();
            prop_assert!(hi.di_e >= lo.di_e);
            prop_assert!(hi.di >= lo.di);
        }
    }
}
