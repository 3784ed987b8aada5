//! Filtered white-noise ground-acceleration spectrum and envelope.
//!
//! The stationary power spectral density is the classic soil-filter form
//!
//! ```text
//! S(w) = G0 * (1 + 4 xi_g^2 (w/wg)^2) / ((1 - (w/wg)^2)^2 + 4 xi_g^2 (w/wg)^2)
//! ```
//!
//! interpreted one-sided over `w >= 0`: the variance of a synthesized record
//! equals the integral of `S` over the represented band.  Non-stationarity
//! comes from the amplitude envelope `I(t) = t * exp(-alpha t)`.

use crate::error::{ExciteError, Result};
use serde::{Deserialize, Serialize};

/// Parameters of the stationary soil-filter spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KanaiTajimiParams {
    /// Intensity scale [m^2/s^3] (PSD level units for acceleration).
    pub g0: f64,
    /// Soil damping ratio.
    pub xi_g: f64,
    /// Soil natural frequency [rad/s].
    pub omega_g: f64,
}

impl KanaiTajimiParams {
    pub fn new(g0: f64, xi_g: f64, omega_g: f64) -> Result<Self> {
        if !(g0.is_finite() && g0 >= 0.0) {
            return Err(ExciteError::invalid(format!("G0 must be >= 0, got {g0}")));
        }
        if !(xi_g.is_finite() && xi_g > 0.0) {
            return Err(ExciteError::invalid(format!("xi_g must be positive, got {xi_g}")));
        }
        if !(omega_g.is_finite() && omega_g > 0.0) {
            return Err(ExciteError::invalid(format!("omega_g must be positive, got {omega_g}")));
        }
        Ok(KanaiTajimiParams { g0, xi_g, omega_g })
    }

    /// One-sided PSD at circular frequency `omega` [rad/s].
    pub fn psd(&self, omega: f64) -> f64 {
        let r2 = (omega / self.omega_g).powi(2);
        let damp = 4.0 * self.xi_g * self.xi_g * r2;
        self.g0 * (1.0 + damp) / ((1.0 - r2).powi(2) + damp)
    }

    /// Same shape with `G0 = 1`.
    pub fn unit_psd(&self, omega: f64) -> f64 {
        let r2 = (omega / self.omega_g).powi(2);
        let damp = 4.0 * self.xi_g * self.xi_g * r2;
        (1.0 + damp) / ((1.0 - r2).powi(2) + damp)
    }

    /// Returns a copy with a different intensity.
    pub fn with_g0(&self, g0: f64) -> Self {
        KanaiTajimiParams { g0, ..*self }
    }
}

/// Amplitude envelope `I(t) = t exp(-alpha t)`; `t` must be non-negative.
pub fn modulation(t: f64, alpha: f64) -> f64 {
    debug_assert!(t >= 0.0, "modulation time must be non-negative");
    if t <= 0.0 {
        0.0
    } else {
        t * (-alpha * t).exp()
    }
}

/// Full specification of a synthetic ground motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundMotionSpec {
    pub kt: KanaiTajimiParams,
    /// Envelope decay rate [1/s]; the envelope peaks at `t = 1/alpha`.
    pub alpha: f64,
    /// Sampling interval [s].
    pub dt: f64,
    /// Record duration [s].
    pub duration: f64,
}

impl GroundMotionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ExciteError::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ExciteError::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration.is_finite() && self.duration > 4.0 * self.dt) {
            return Err(ExciteError::invalid("duration must cover at least a few samples".to_string()));
        }
        let nyquist = std::f64::consts::PI / self.dt;
        if nyquist < 2.5 * self.kt.omega_g {
            return Err(ExciteError::invalid(format!(
                "dt = {} is too coarse: Nyquist {nyquist:.2} rad/s does not cover 2.5 omega_g = {:.2} rad/s",
                self.dt,
                2.5 * self.kt.omega_g
            )));
        }
        Ok(())
    }
}
