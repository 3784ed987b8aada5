//! Energy-balance accounting over a committed response history.
//!
//! Integrating the equation of motion against the velocity splits the input
//! work into kinetic, viscous, and deformation shares; the deformation share
//! further splits into a recoverable elastic part and the dissipated
//! hysteretic part.  Dissipation is assembled element by element from the
//! integration-point force–deformation records, so it can be localized,
//! while the global balance closing is a cross-check on the entire
//! simulation and assessment chain.

use hystereo_core::model::StructuralModel;
use hystereo_core::newmark::{ElementHistory, ResponseHistory};

use crate::error::{invalid, Result};

/// Time-resolved energy shares of one response history [J].
///
/// All cumulative series share the history's time grid.  The balance
/// `input = kinetic + viscous + elastic + hysteretic` holds up to
/// quadrature error; [`EnergyLedger::relative_residual`] reports how well
/// it closes.
#[derive(Debug, Clone)]
pub struct EnergyLedger {
    /// Time grid [s].
    pub time: Vec<f64>,
    /// Kinetic energy at each instant (exact, not a quadrature).
    pub kinetic: Vec<f64>,
    /// Cumulative viscous dissipation in the model's dampers.
    pub viscous: Vec<f64>,
    /// Cumulative work done by the applied external forces.
    pub input: Vec<f64>,
    /// Cumulative deformation work done on all elements.
    pub strain: Vec<f64>,
    /// Cumulative hysteretic dissipation, summed over elements.
    pub hysteretic: Vec<f64>,
    /// Recoverable share of the deformation work: `strain - hysteretic`.
    pub elastic: Vec<f64>,
    /// Hysteretic dissipation per element, in model element order.
    pub element_hysteretic: Vec<Vec<f64>>,
}

impl EnergyLedger {
    /// Worst instantaneous balance defect
    /// `max_t |input - kinetic - viscous - strain|` [J].
    pub fn balance_residual(&self) -> f64 {
        (0..self.time.len())
            .map(|k| {
                (self.input[k] - self.kinetic[k] - self.viscous[k] - self.strain[k]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Balance defect normalized by the larger of the peak input work and
    /// the peak kinetic energy (so free-vibration runs normalize sensibly).
    pub fn relative_residual(&self) -> f64 {
        let input_peak = self.input.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let kinetic_peak = self.kinetic.iter().fold(0.0f64, |m, &v| m.max(v));
        let scale = input_peak.max(kinetic_peak);
        if scale > 0.0 {
            self.balance_residual() / scale
        } else {
            0.0
        }
    }

    /// Final hysteretic dissipation per element [J].
    pub fn element_totals(&self) -> Vec<f64> {
        self.element_hysteretic
            .iter()
            .map(|series| series.last().copied().unwrap_or(0.0))
            .collect()
    }
}

/// Cumulative dissipated (non-recoverable) deformation work of one element.
///
/// Per integration point, the running force–deformation work is a
/// trapezoidal Stieltjes sum — exact on the piecewise-linear branches the
/// material laws produce — and the recoverable part `f^2 / (2 k_unload)`
/// is subtracted using the recorded unloading stiffness, so closed elastic
/// excursions contribute nothing.  Point contributions are combined with
/// the element's quadrature weights.
pub fn element_hysteretic_energy(element: &ElementHistory) -> Vec<f64> {
    let steps = element.samples.first().map_or(0, Vec::len);
    let mut total = vec![0.0; steps];
    for (ip, series) in element.samples.iter().enumerate() {
        let weight = element.weights[ip];
        let mut work = 0.0;
        let mut previous = None;
        for (k, sample) in series.iter().enumerate() {
            if let Some((m0, c0)) = previous {
                work += 0.5 * (m0 + sample.moment) * (sample.curvature - c0);
            }
            previous = Some((sample.moment, sample.curvature));
            let recoverable = if sample.unload_flexural > 0.0 {
                0.5 * sample.moment * sample.moment / sample.unload_flexural
            } else {
                0.0
            };
            total[k] += weight * (work - recoverable);
        }
    }
    total
}

/// Energy balance of a response history against the model that produced it.
///
/// Shares: kinetic `v' M v / 2` (exact); viscous `∫ v' C v dt` over the
/// model's full damping matrix; input `∫ v' p dt` over the recorded applied
/// forces (for ground motion `p = -M b1 ag`); deformation `∫ v' f_R dt`;
/// hysteretic from [`element_hysteretic_energy`].  All quadratures are
/// trapezoidal on the history grid.
///
/// # Errors
/// The history must be non-empty, internally consistent, and sized to the
/// model.
pub fn energy_balance(model: &StructuralModel, history: &ResponseHistory) -> Result<EnergyLedger> {
    let n = history.len();
    if n == 0 {
        return Err(invalid("empty response history"));
    }
    for (name, len) in [
        ("velocity", history.vel.len()),
        ("displacement", history.disp.len()),
        ("restoring-force", history.restoring.len()),
        ("applied-force", history.applied.len()),
    ] {
        if len != n {
            return Err(invalid(format!("{name} history has {len} steps, time grid has {n}")));
        }
    }
    if history.vel[0].len() != model.n_dof() {
        return Err(invalid(format!(
            "history has {} equations, model has {}",
            history.vel[0].len(),
            model.n_dof()
        )));
    }

    let mass = model.mass();
    let damping = model.damping_matrix();
    let dt = history.dt;

    let mut kinetic = Vec::with_capacity(n);
    let mut viscous = Vec::with_capacity(n);
    let mut input = Vec::with_capacity(n);
    let mut strain = Vec::with_capacity(n);
    let (mut e_xi, mut e_i, mut e_s) = (0.0, 0.0, 0.0);
    let mut previous: Option<(f64, f64, f64)> = None;
    for k in 0..n {
        let v = &history.vel[k];
        let p_viscous = (damping * v).dot(v);
        let p_input = history.applied[k].dot(v);
        let p_strain = history.restoring[k].dot(v);
        if let Some((pv, pi, ps)) = previous {
            e_xi += 0.5 * dt * (pv + p_viscous);
            e_i += 0.5 * dt * (pi + p_input);
            e_s += 0.5 * dt * (ps + p_strain);
        }
        previous = Some((p_viscous, p_input, p_strain));
        kinetic.push(0.5 * v.iter().zip(mass.iter()).map(|(vi, mi)| mi * vi * vi).sum::<f64>());
        viscous.push(e_xi);
        input.push(e_i);
        strain.push(e_s);
    }

    let element_hysteretic: Vec<Vec<f64>> =
        history.elements.iter().map(element_hysteretic_energy).collect();
    for (e, series) in element_hysteretic.iter().enumerate() {
        if series.len() != n {
            return Err(invalid(format!(
                "element {e} recorded {} states, time grid has {n}",
                series.len()
            )));
        }
    }
    let mut hysteretic = vec![0.0; n];
    for series in &element_hysteretic {
        for (acc, v) in hysteretic.iter_mut().zip(series) {
            *acc += v;
        }
    }
    let elastic: Vec<f64> = strain.iter().zip(&hysteretic).map(|(s, h)| s - h).collect();

    Ok(EnergyLedger {
        time: history.time.clone(),
        kinetic,
        viscous,
        input,
        strain,
        hysteretic,
        elastic,
        element_hysteretic,
    })
}
