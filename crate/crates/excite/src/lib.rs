//! Stochastic excitation toolkit: filtered-white-noise ground-motion spectra,
//! amplitude modulation, spectral-representation synthesis, intensity
//! calibration against target records, and measurement-noise generation.
//!
//! Everything here is deterministic given a seed; ensembles derive one RNG
//! stream per member so results are independent of evaluation order.

pub mod calibrate;
pub mod error;
pub mod kt;
pub mod spectra;
pub mod synth;

pub use calibrate::{calibrate_g0, CalibrationOptions, CalibrationReport};
pub use error::{ExciteError, Result};
pub use kt::{modulation, GroundMotionSpec, KanaiTajimiParams};
pub use spectra::{fourier_amplitudes, moving_average, periodogram};
pub use synth::{
    synthesize_motion, synthesize_motion_with_rng, synthesize_noise, synthesize_stationary,
    white_noise, GROUND_CHANNEL,
};
