//! Twin-experiment configuration: one JSON file drives the whole pipeline.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hystereo_observer::GainObjective;

use crate::error::{invalid, Result};

/// Ground-motion source; exactly one, enforced by the tagged enum.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MotionSource {
    /// Synthesize a filtered-white-noise record.
    Synth {
        /// PSD intensity [m^2/s^3].
        g0: f64,
        /// Ground filter damping ratio [-].
        xi_g: f64,
        /// Ground filter frequency [rad/s].
        omega_g: f64,
        /// Envelope sharpness [1/s].
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// Read an acceleration record from a CSV time series.
    File {
        /// Path, resolved relative to the config file.
        path: PathBuf,
    },
}

fn default_alpha() -> f64 {
    0.25
}

/// Per-element truth-model degradation for the damaged variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DamageOverride {
    /// Element id in model element order.
    pub element: usize,
    /// Multiplier on the element's yield strength.
    #[serde(default = "one")]
    pub strength_scale: f64,
    /// Multiplier on the element's stiffness.
    #[serde(default = "one")]
    pub stiffness_scale: f64,
}

fn one() -> f64 {
    1.0
}

/// Which scalar the gain search minimizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveChoice {
    /// Trace of the displacement-error covariance.
    #[default]
    TraceP,
    /// Inter-story-drift weighted trace.
    TraceIsd,
}

impl From<ObjectiveChoice> for GainObjective {
    fn from(c: ObjectiveChoice) -> Self {
        match c {
            ObjectiveChoice::TraceP => GainObjective::TraceP,
            ObjectiveChoice::TraceIsd => GainObjective::TraceIsd,
        }
    }
}

/// Observer-side knobs: deliberate model mismatch and optional disturbance
/// levels for the gain design (derived from the measurements when absent).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSettings {
    /// Multiplier on every observer-model stiffness.
    #[serde(default = "one")]
    pub stiffness_scale: f64,
    /// Multiplier on the observer's structural damping.
    #[serde(default = "one")]
    pub damping_scale: f64,
    /// Two-sided process-disturbance PSD level; derived from the base
    /// record when `None`.
    #[serde(default)]
    pub process_level: Option<f64>,
    /// Two-sided measurement-noise PSD level; derived from the configured
    /// noise ratio when `None`.
    #[serde(default)]
    pub noise_level: Option<f64>,
}

impl Default for ObserverSettings {
    fn default() -> Self {
        Self {
            stiffness_scale: 1.0,
            damping_scale: 1.0,
            process_level: None,
            noise_level: None,
        }
    }
}

/// Everything one twin experiment needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwinExperimentConfig {
    /// Model file path, resolved relative to the config file.
    pub model: PathBuf,
    /// Truth-model degradations; empty for an undamaged twin.
    #[serde(default)]
    pub damage: Vec<DamageOverride>,
    /// Instrumented equations (0-based model DoFs).
    pub sensors: Vec<usize>,
    /// Ground-motion source.
    pub motion: MotionSource,
    /// Measurement-noise RMS as a fraction of each channel's RMS.
    #[serde(default)]
    pub noise_rho: f64,
    /// Gain-search objective.
    #[serde(default)]
    pub objective: ObjectiveChoice,
    /// Time step [s] for synthesis, simulation, and observation.
    pub dt: f64,
    /// Record duration [s].
    pub duration: f64,
    /// Master seed; stage seeds derive from it.
    pub seed: u64,
    /// High-pass corner for velocity reconstruction [Hz]; 0 integrates
    /// without filtering.
    #[serde(default = "default_cutoff")]
    pub cutoff_hz: f64,
    /// Observer-side settings.
    #[serde(default)]
    pub observer: ObserverSettings,
}

fn default_cutoff() -> f64 {
    0.1
}

impl TwinExperimentConfig {
    /// Parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: TwinExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| invalid(format!("bad config {}: {e}", path.display())))?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        config.validate()?;
        Ok(config)
    }

    /// Makes the model and motion paths absolute relative to `base`.
    fn resolve_paths(&mut self, base: &Path) {
        if self.model.is_relative() {
            self.model = base.join(&self.model);
        }
        if let MotionSource::File { path } = &mut self.motion {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    /// Checks everything that does not need the model loaded.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration > self.dt) {
            return Err(invalid(format!(
                "duration {} must exceed the time step {}",
                self.duration, self.dt
            )));
        }
        if !(self.noise_rho >= 0.0 && self.noise_rho.is_finite()) {
            return Err(invalid(format!("noise_rho must be nonnegative, got {}", self.noise_rho)));
        }
        if !(self.cutoff_hz >= 0.0 && self.cutoff_hz.is_finite()) {
            return Err(invalid(format!("cutoff_hz must be nonnegative, got {}", self.cutoff_hz)));
        }
        if self.sensors.is_empty() {
            return Err(invalid("at least one sensor equation required"));
        }
        if !(self.observer.stiffness_scale > 0.0 && self.observer.damping_scale >= 0.0) {
            return Err(invalid("observer scales must be positive (damping may be zero)"));
        }
        for d in &self.damage {
            if !(d.strength_scale > 0.0 && d.stiffness_scale > 0.0) {
                return Err(invalid(format!(
                    "damage scales for element {} must be positive",
                    d.element
                )));
            }
        }
        if let MotionSource::Synth { g0, xi_g, omega_g, alpha } = &self.motion {
            if !(*g0 > 0.0 && *xi_g > 0.0 && *omega_g > 0.0 && *alpha > 0.0) {
                return Err(invalid("synthetic motion parameters must be positive"));
            }
        }
        Ok(())
    }

    /// Hash of the canonical JSON form, stamped into manifests so a run can
    /// be tied back to its exact configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Element ids the config declares damaged.
    pub fn damaged_elements(&self) -> Vec<usize> {
        self.damage.iter().map(|d| d.element).collect()
    }
}
