//! Observer construction and execution.
//!
//! The observer is a copy of the structural model with one modification:
//! grounded dampers of size `e_i` at the measured DoFs.  It is driven purely
//! by corrective forces `e_i * ydot_i(t)` built from measured velocities —
//! the assumed ground motion never enters, which is what makes the estimate
//! input-agnostic.  Because the modification is "more damping + nodal force
//! histories", the unmodified nonlinear integrator runs it as-is.
//!
//! The measurement model lives here too: an accelerometer reads the absolute
//! acceleration, which by the equation of motion equals
//! `-M^{-1} (C qdot + f_R - disturbance forces)` — a combination of recorded
//! quantities in which the ground-motion term has cancelled.

use hystereo_core::model::StructuralModel;
use hystereo_core::newmark::{
    newmark_nonlinear, Excitation, InitialState, NewmarkOptions, ResponseHistory,
};
use hystereo_core::timeseries::TimeSeries;
use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::sensors::{GainMatrix, SensorMap};

/// Accelerometer outputs for one instant of state.
///
/// `disturbance` is the total unmeasured external force (process noise);
/// pass `None` when manufacturing noiseless measurements from a truth run.
pub fn measured_acceleration(
    model: &StructuralModel,
    vel: &DVector<f64>,
    restoring: &DVector<f64>,
    disturbance: Option<&DVector<f64>>,
    sensors: &SensorMap,
) -> Result<DVector<f64>> {
    let n = model.n_dof();
    if vel.len() != n || restoring.len() != n || sensors.n_dof() != n {
        return Err(invalid("state/sensor dimensions do not match the model"));
    }
    let mut force = model.structural_damping_matrix() * vel + restoring;
    if let Some(w) = disturbance {
        force -= w;
    }
    let mass = model.mass();
    let accel = DVector::from_iterator(n, force.iter().zip(mass.iter()).map(|(f, m)| -f / m));
    Ok(sensors.select(&accel))
}

/// Accelerometer records for a whole simulated response.
///
/// The channels carry the sensor labels; add measurement noise separately.
pub fn measured_acceleration_history(
    model: &StructuralModel,
    history: &ResponseHistory,
    sensors: &SensorMap,
) -> Result<TimeSeries> {
    let mut channels = vec![Vec::with_capacity(history.len()); sensors.len()];
    for (vel, restoring) in history.vel.iter().zip(&history.restoring) {
        let y = measured_acceleration(model, vel, restoring, None, sensors)?;
        for (c, channel) in channels.iter_mut().enumerate() {
            channel.push(y[c]);
        }
    }
    TimeSeries::new(history.dt, sensors.labels().to_vec(), channels).map_err(Into::into)
}

/// Builds the observer model: the input model plus grounded dampers `e_i`
/// at the measured DoFs.  The element set, mass, and structural damping are
/// untouched; the input model's hysteretic state is carried over, so pass a
/// virgin model for a fresh observer.
pub fn build_nmbo(
    model: &StructuralModel,
    sensors: &SensorMap,
    gain: &GainMatrix,
) -> Result<StructuralModel> {
    if sensors.n_dof() != model.n_dof() {
        return Err(invalid(format!(
            "sensor map is for {} equations, model has {}",
            sensors.n_dof(),
            model.n_dof()
        )));
    }
    if gain.len() != sensors.len() {
        return Err(invalid("one gain entry per sensor required"));
    }
    let mut observer = model.clone();
    for (&eq, &e) in sensors.equations().iter().zip(gain.entries()) {
        observer.add_grounded_damper(eq, e)?;
    }
    Ok(observer)
}

/// Corrective force histories `e_i * ydot_i(t)`, one channel per sensor.
pub fn feedback_forces(
    sensors: &SensorMap,
    gain: &GainMatrix,
    velocities: &TimeSeries,
) -> Result<TimeSeries> {
    if velocities.channel_count() != sensors.len() {
        return Err(invalid(format!(
            "{} velocity channels for {} sensors",
            velocities.channel_count(),
            sensors.len()
        )));
    }
    if gain.len() != sensors.len() {
        return Err(invalid("one gain entry per sensor required"));
    }
    let channels: Vec<Vec<f64>> = gain
        .entries()
        .iter()
        .enumerate()
        .map(|(c, &e)| velocities.channel(c).iter().map(|&v| e * v).collect())
        .collect();
    TimeSeries::new(velocities.dt(), sensors.labels().to_vec(), channels).map_err(Into::into)
}

/// Integrates the observer under measured velocities.
///
/// `observer` must come from [`build_nmbo`]; the run starts from rest and
/// from the observer's current (normally virgin) hysteretic state.  The
/// result has the same shape as a forward simulation, so every downstream
/// assessment runs unchanged on estimated histories.
pub fn run_observer(
    observer: &mut StructuralModel,
    sensors: &SensorMap,
    gain: &GainMatrix,
    velocities: &TimeSeries,
    opts: &NewmarkOptions,
) -> Result<ResponseHistory> {
    let forces = feedback_forces(sensors, gain, velocities)?;
    let excitation = Excitation::Forces {
        series: &forces,
        equations: sensors.equations().to_vec(),
    };
    newmark_nonlinear(observer, &excitation, opts, InitialState::default()).map_err(Into::into)
}
