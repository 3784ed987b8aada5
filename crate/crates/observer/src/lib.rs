//! Model-based response reconstruction from sparse vibration sensors.
//!
//! A copy of the structural model is augmented with grounded dampers at
//! the instrumented degrees of freedom and driven by forces proportional
//! to the measured velocities.  The estimator needs no knowledge of the
//! ground motion: everything it reacts to comes through the sensors, so
//! it tracks the measured structure rather than an assumed input.
//!
//! The crate covers the full estimation workflow:
//!
//! - [`sensors`]: sensor selection maps and per-channel feedback gains;
//! - [`preprocess`]: measured accelerations to feedback velocities
//!   (integration plus zero-phase drift removal);
//! - [`nmbo`]: building the damped model copy and running it on records;
//! - [`covariance`]: closed-form steady-state error statistics under
//!   white process and measurement noise;
//! - [`optimize`]: picking gains that minimize those statistics;
//! - [`simplex`]: the derivative-free minimizer behind the search.

pub mod covariance;
pub mod error;
pub mod nmbo;
pub mod optimize;
pub mod preprocess;
pub mod sensors;
pub mod simplex;

pub use covariance::{
    error_covariance, ground_disturbance_influence, isd_error_trace, noise_level_from_rms,
    DisturbanceSpec, ErrorCovariance, FrequencyGrid,
};
pub use error::{ObserverError, Result};
pub use nmbo::{build_nmbo, measured_acceleration, measured_acceleration_history, run_observer};
pub use optimize::{optimize_gain, story_equations, GainObjective, GainSearchOptions, OptimizedGain};
pub use preprocess::{highpass_zero_phase, velocity_from_acceleration};
pub use sensors::{GainMatrix, SensorMap};
