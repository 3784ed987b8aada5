//! Feedback-gain selection by minimizing a steady-state error statistic.
//!
//! Every sensor channel gets its own damper constant; the search runs in
//! log10 space so gains spanning many orders of magnitude are explored on
//! an even footing.  The objective is a deterministic quadrature of the
//! error spectrum, so repeated runs give identical results.

use hystereo_core::model::StructuralModel;
use nalgebra::DVector;

use crate::covariance::{error_covariance, DisturbanceSpec, ErrorCovariance, FrequencyGrid};
use crate::error::{invalid, ObserverError, Result};
use crate::sensors::{GainMatrix, SensorMap};
use crate::simplex::{minimize, SimplexOptions};

/// What the gain search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainObjective {
    /// Trace of the displacement-error covariance.
    TraceP,
    /// Trace of the inter-story drift error covariance (needs story levels
    /// registered on the model).
    TraceIsd,
}

/// Search configuration; the defaults match the reported setup.
#[derive(Debug, Clone, Copy)]
pub struct GainSearchOptions {
    /// Box for the log10 of each damper constant [N·s/m].
    pub log10_bounds: (f64, f64),
    /// Starting exponent for every channel.
    pub initial_exponent: f64,
    /// Initial simplex step, in decades.
    pub step_decades: f64,
    /// Iteration cap per simplex run.
    pub max_iter: usize,
    /// Relative value-spread tolerance.
    pub tol: f64,
}

impl Default for GainSearchOptions {
    fn default() -> Self {
        Self {
            log10_bounds: (-3.0, 9.0),
            initial_exponent: 3.0,
            step_decades: 1.0,
            max_iter: 400,
            tol: 1e-8,
        }
    }
}

/// Outcome of the gain search.
#[derive(Debug, Clone)]
pub struct OptimizedGain {
    /// Per-channel damper constants at the optimum [N·s/m].
    pub gain: GainMatrix,
    /// Objective value at the optimum.
    pub objective_value: f64,
    /// Error covariance evaluated at the optimum.
    pub covariance: ErrorCovariance,
    /// Total objective evaluations across both simplex runs.
    pub evaluations: usize,
    /// Best objective after each simplex iteration; non-increasing.
    pub best_history: Vec<f64>,
}

/// Story lateral equations in ascending story order, as needed by the
/// drift objective.
pub fn story_equations(model: &StructuralModel) -> Result<Vec<usize>> {
    let mut levels: Vec<_> = model.stories().to_vec();
    if levels.is_empty() {
        return Err(invalid("model has no registered story levels"));
    }
    levels.sort_by_key(|s| s.story);
    Ok(levels.iter().map(|s| s.eq).collect())
}

/// Minimizes the chosen error statistic over per-channel damper constants.
///
/// The quadrature grid is fixed up front from the undamped model so every
/// candidate gain is scored on the same ordinates.  The simplex is run
/// twice: once from `initial_exponent`, then restarted from the best point
/// with a finer step.
pub fn optimize_gain(
    model: &StructuralModel,
    sensors: &SensorMap,
    spec: &DisturbanceSpec,
    b2: &DVector<f64>,
    objective: GainObjective,
    opts: &GainSearchOptions,
) -> Result<OptimizedGain> {
    let (lo, hi) = opts.log10_bounds;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("gain exponent bounds must be finite with lo < hi"));
    }
    if sensors.is_empty() {
        return Err(invalid("gain search needs at least one sensor"));
    }
    let grid = FrequencyGrid::for_model(model)?;
    let stories = match objective {
        GainObjective::TraceP => Vec::new(),
        GainObjective::TraceIsd => story_equations(model)?,
    };

    let score = |z: &[f64]| -> Result<f64> {
        let entries: Vec<f64> = z.iter().map(|&e| 10f64.powf(e)).collect();
        let gain = GainMatrix::new(entries)?;
        let cov = error_covariance(model, sensors, &gain, spec, b2, &grid)?;
        match objective {
            GainObjective::TraceP => Ok(cov.trace()),
            GainObjective::TraceIsd => cov.trace_isd(&stories),
        }
    };

    let d = sensors.len();
    let x0 = vec![opts.initial_exponent.clamp(lo, hi); d];
    let lower = vec![lo; d];
    let upper = vec![hi; d];
    let simplex = SimplexOptions { max_iter: opts.max_iter, tol: opts.tol };

    let first = minimize(score, &x0, &vec![opts.step_decades; d], &lower, &upper, &simplex)
        .map_err(|e| ObserverError::OptimizationFailure(format!("initial simplex run: {e}")))?;
    let second = minimize(
        score,
        &first.x,
        &vec![0.25 * opts.step_decades; d],
        &lower,
        &upper,
        &simplex,
    )
    .map_err(|e| ObserverError::OptimizationFailure(format!("restarted simplex run: {e}")))?;

    let (best_x, best_value) =
        if second.value <= first.value { (second.x, second.value) } else { (first.x, first.value) };
    if !best_value.is_finite() {
        return Err(ObserverError::OptimizationFailure(format!(
            "objective is not finite at the optimum ({best_value})"
        )));
    }

    let gain = GainMatrix::new(best_x.iter().map(|&e| 10f64.powf(e)).collect())?;
    let covariance = error_covariance(model, sensors, &gain, spec, b2, &grid)?;
    let mut best_history = first.best_history;
    best_history.extend(second.best_history.iter().map(|&v| v.min(first.value)));

    Ok(OptimizedGain {
        gain,
        objective_value: best_value,
        covariance,
        evaluations: first.evaluations + second.evaluations,
        best_history,
    })
}
