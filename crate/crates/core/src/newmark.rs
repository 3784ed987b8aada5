//! Implicit dynamic time stepping (Newmark family) with full Newton
//! equilibrium iterations and automatic step halving.
//!
//! The default constants (`gamma = 1/2`, `beta = 1/4`) give the
//! unconditionally stable average-acceleration scheme.  Within each step the
//! residual `r = p - M a - C v - f_R(d)` is driven below `tol` times a
//! reference force norm; if Newton stalls the step is retried in halves (up
//! to `max_halvings` levels) before reporting failure.

use crate::element::IpSample;
use crate::error::{CoreError, Result};
use crate::model::StructuralModel;
use crate::timeseries::TimeSeries;
use nalgebra::{DMatrix, DVector};

/// Integrator options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewmarkOptions {
    /// Output time step [s].
    pub dt: f64,
    /// Velocity weighting, `1/2` for average acceleration.
    pub gamma: f64,
    /// Displacement weighting, `1/4` for average acceleration.
    pub beta: f64,
    /// Relative residual tolerance.
    pub tol: f64,
    /// Newton iteration cap per (sub)step.
    pub max_iter: usize,
    /// Number of times a failed step may be halved.
    pub max_halvings: u32,
}

impl NewmarkOptions {
    /// Average-acceleration defaults at time step `dt`.
    pub fn with_dt(dt: f64) -> Self {
        NewmarkOptions { dt, gamma: 0.5, beta: 0.25, tol: 1e-8, max_iter: 30, max_halvings: 4 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(CoreError::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.beta > 0.0 && self.gamma >= 0.5) {
            return Err(CoreError::invalid(
                "Newmark constants must satisfy beta > 0 and gamma >= 1/2".to_string(),
            ));
        }
        if self.max_iter == 0 {
            return Err(CoreError::invalid("max_iter must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CoreError::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

/// External excitation for a response analysis.
#[derive(Debug, Clone)]
pub enum Excitation<'a> {
    /// Uniform base acceleration [m/s^2]: `p(t) = -M b1 ag(t)` with `b1`
    /// the lateral influence vector.
    Ground { motion: &'a TimeSeries, channel: usize },
    /// Nodal force histories: channel `c` of `series` drives
    /// `equations[c]` [N].
    Forces { series: &'a TimeSeries, equations: Vec<usize> },
    /// No external force; response to initial conditions.
    Free { duration: f64 },
}

impl Excitation<'_> {
    /// Duration covered by the excitation [s].
    pub fn duration(&self) -> f64 {
        match self {
            Excitation::Ground { motion, .. } => motion.duration(),
            Excitation::Forces { series, .. } => series.duration(),
            Excitation::Free { duration } => *duration,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Excitation::Ground { motion, channel } => {
                if *channel >= motion.channel_count() {
                    return Err(CoreError::invalid(format!(
                        "ground motion channel {channel} out of range"
                    )));
                }
            }
            Excitation::Forces { series, equations } => {
                if equations.len() != series.channel_count() {
                    return Err(CoreError::invalid(format!(
                        "{} force channels but {} target equations",
                        series.channel_count(),
                        equations.len()
                    )));
                }
                if equations.iter().any(|&e| e >= n) {
                    return Err(CoreError::invalid("force equation index out of range".to_string()));
                }
            }
            Excitation::Free { duration } => {
                if !(duration.is_finite() && *duration > 0.0) {
                    return Err(CoreError::invalid("free-vibration duration must be positive".to_string()));
                }
            }
        }
        Ok(())
    }
}

/// Optional initial conditions (defaults are zero vectors).
#[derive(Debug, Clone, Default)]
pub struct InitialState {
    pub disp: Option<DVector<f64>>,
    pub vel: Option<DVector<f64>>,
}

/// Recorded integration-point history of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementHistory {
    /// Quadrature weights [m] (or `[1.0]` for springs).
    pub weights: Vec<f64>,
    /// `samples[ip][step]`; `step` runs over the recorded time grid.
    pub samples: Vec<Vec<IpSample>>,
}

/// Full response record of a dynamic analysis on a uniform time grid.
#[derive(Debug, Clone)]
pub struct ResponseHistory {
    pub dt: f64,
    pub time: Vec<f64>,
    /// Displacements per step (relative to the ground).
    pub disp: Vec<DVector<f64>>,
    pub vel: Vec<DVector<f64>>,
    pub acc: Vec<DVector<f64>>,
    /// Restoring forces `f_R` at the converged states.
    pub restoring: Vec<DVector<f64>>,
    /// Applied external forces `p` (for ground motion: `-M b1 ag`).
    pub applied: Vec<DVector<f64>>,
    pub elements: Vec<ElementHistory>,
}

impl ResponseHistory {
    /// Number of recorded instants (steps + 1).
    pub fn len(&self) -> usize {
        self.time.len()
    }

    /// True when nothing was recorded.
    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Extracts a kinematic quantity on chosen equations as a time series.
    ///
    /// `field`: 0 = displacement, 1 = velocity, 2 = acceleration.
    pub fn to_timeseries(&self, field: usize, channels: &[(usize, String)]) -> Result<TimeSeries> {
        let source = match field {
            0 => &self.disp,
            1 => &self.vel,
            2 => &self.acc,
            _ => return Err(CoreError::invalid("field must be 0, 1 or 2")),
        };
        let names: Vec<String> = channels.iter().map(|(_, n)| n.clone()).collect();
        let data: Vec<Vec<f64>> = channels
            .iter()
            .map(|&(eq, _)| source.iter().map(|v| v[eq]).collect())
            .collect();
        TimeSeries::new(self.dt, names, data)
    }
}

struct Integrator<'m, 'e> {
    model: &'m mut StructuralModel,
    excitation: &'e Excitation<'e>,
    opts: NewmarkOptions,
    mass: DVector<f64>,
    damping: DMatrix<f64>,
    minus_mb1: DVector<f64>,
    q: DVector<f64>,
    v: DVector<f64>,
    a: DVector<f64>,
    step_index: usize,
}

impl Integrator<'_, '_> {
    fn force_at(&self, t: f64) -> DVector<f64> {
        let n = self.mass.len();
        match self.excitation {
            Excitation::Ground { motion, channel } => {
                let ag = motion.interp(*channel, t);
                &self.minus_mb1 * ag
            }
            Excitation::Forces { series, equations } => {
                let mut p = DVector::zeros(n);
                for (c, &eq) in equations.iter().enumerate() {
                    p[eq] += series.interp(c, t);
                }
                p
            }
            Excitation::Free { .. } => DVector::zeros(n),
        }
    }

    /// Advances the committed state from `t0` to `t0 + h`, halving on
    /// non-convergence.
    ///
    /// # Returns
    /// The restoring force at the converged end state.
    fn advance(&mut self, t0: f64, h: f64, depth: u32) -> Result<DVector<f64>> {
        let (gamma, beta) = (self.opts.gamma, self.opts.beta);
        let p1 = self.force_at(t0 + h);
        let mut d = self.q.clone();
        let c0 = 1.0 / (beta * h * h);
        let c1 = 1.0 / (beta * h);
        let c2 = 0.5 / beta - 1.0;
        let mut last_residual = f64::INFINITY;
        for _ in 0..self.opts.max_iter {
            let (f, kt) = self.model.assemble(&d)?;
            let a1 = (&d - &self.q) * c0 - &self.v * c1 - &self.a * c2;
            let v1 = &self.v + (&self.a * (1.0 - gamma) + &a1 * gamma) * h;
            let ma = self.mass.component_mul(&a1);
            let cv = &self.damping * &v1;
            let r = &p1 - &ma - &cv - &f;
            let reference = p1.norm().max(ma.norm()).max(cv.norm()).max(f.norm());
            last_residual = r.norm();
            if reference <= 1e-300 || last_residual <= self.opts.tol * reference {
                self.model.commit_elements();
                self.q = d;
                self.v = v1;
                self.a = a1;
                return Ok(f);
            }
            let mut k_eff = kt + &self.damping * (gamma * c1);
            for i in 0..self.mass.len() {
                k_eff[(i, i)] += c0 * self.mass[i];
            }
            let delta = k_eff
                .lu()
                .solve(&r)
                .ok_or_else(|| CoreError::SingularMatrix("effective stiffness is singular".into()))?;
            d += delta;
        }
        // Newton stalled: retry the interval in halves from the committed
        // state.
        self.model.revert_elements();
        if depth < self.opts.max_halvings {
            self.advance(t0, 0.5 * h, depth + 1)?;
            self.advance(t0 + 0.5 * h, 0.5 * h, depth + 1)
        } else {
            Err(CoreError::StepFailure {
                time: t0 + h,
                step: self.step_index,
                residual: last_residual,
                iterations: self.opts.max_iter,
            })
        }
    }
}

/// Integrates the equations of motion of `model` under `excitation`.
///
/// # Arguments
/// * `model` - integrated in place; element states end committed at the
///   final time.
/// * `excitation` - ground motion, nodal forces, or free vibration.
/// * `opts` - time step and iteration controls.
/// * `init` - optional initial displacement/velocity.
///
/// # Returns
/// The response history on the uniform output grid, including committed
/// integration-point samples for energy and damage accounting.
pub fn newmark_nonlinear(
    model: &mut StructuralModel,
    excitation: &Excitation,
    opts: &NewmarkOptions,
    init: InitialState,
) -> Result<ResponseHistory> {
    opts.validate()?;
    let n = model.n_dof();
    excitation.validate(n)?;
    let duration = excitation.duration();
    let steps = (duration / opts.dt).round().max(1.0) as usize;

    let q0 = init.disp.unwrap_or_else(|| DVector::zeros(n));
    let v0 = init.vel.unwrap_or_else(|| DVector::zeros(n));
    if q0.len() != n || v0.len() != n {
        return Err(CoreError::invalid(format!(
            "initial state length mismatch: model has {n} equations"
        )));
    }

    let mass = model.mass().clone();
    let damping = model.damping_matrix().clone();
    let minus_mb1 = -mass.component_mul(&model.influence_lateral());

    let mut integ = Integrator {
        model,
        excitation,
        opts: *opts,
        mass,
        damping,
        minus_mb1,
        q: q0,
        v: v0,
        a: DVector::zeros(n),
        step_index: 0,
    };

    // Consistent initial acceleration: M a0 = p(0) - C v0 - f_R(q0).
    let (f0, _) = integ.model.assemble(&integ.q)?;
    integ.model.commit_elements();
    let p0 = integ.force_at(0.0);
    let rhs = &p0 - &integ.damping * &integ.v - &f0;
    integ.a = DVector::from_iterator(n, rhs.iter().zip(integ.mass.iter()).map(|(r, m)| r / m));

    let mut history = ResponseHistory {
        dt: opts.dt,
        time: Vec::with_capacity(steps + 1),
        disp: Vec::with_capacity(steps + 1),
        vel: Vec::with_capacity(steps + 1),
        acc: Vec::with_capacity(steps + 1),
        restoring: Vec::with_capacity(steps + 1),
        applied: Vec::with_capacity(steps + 1),
        elements: integ
            .model
            .elements()
            .iter()
            .map(|e| ElementHistory {
                weights: e.ip_weights(),
                samples: vec![Vec::with_capacity(steps + 1); e.ip_weights().len()],
            })
            .collect(),
    };

    let record =
        |h: &mut ResponseHistory, integ: &Integrator, t: f64, f: DVector<f64>, p: DVector<f64>| {
            h.time.push(t);
            h.disp.push(integ.q.clone());
            h.vel.push(integ.v.clone());
            h.acc.push(integ.a.clone());
            h.restoring.push(f);
            h.applied.push(p);
            for (eh, samples) in h.elements.iter_mut().zip(integ.model.element_samples()) {
                for (ip, s) in samples.into_iter().enumerate() {
                    eh.samples[ip].push(s);
                }
            }
        };

    record(&mut history, &integ, 0.0, f0, p0);

    for step in 0..steps {
        integ.step_index = step;
        let t0 = step as f64 * opts.dt;
        let f1 = integ.advance(t0, opts.dt, 0)?;
        let t1 = (step + 1) as f64 * opts.dt;
        let p1 = integ.force_at(t1);
        record(&mut history, &integ, t1, f1, p1);
    }
    Ok(history)
}
