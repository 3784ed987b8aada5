//! Damage assessment of simulated or reconstructed structural responses.
//!
//! A response history — whether from a direct simulation or from a
//! model-based observer — is reduced here to the quantities an engineer
//! acts on:
//!
//! - [`energy_balance`] splits the input work into kinetic, viscous,
//!   elastic, and hysteretic shares, with the balance residual as a
//!   self-check, and [`element_hysteretic_energy`] localizes the
//!   dissipated share element by element;
//! - [`ductility_demand`], [`park_ang_di`], and [`dcr`] express each
//!   element's peak and cumulative demands against its capacities,
//!   collected per element into an [`ElementDamage`] row;
//! - [`story_drifts`] extracts inter-story drift peaks with uncertainty
//!   bands and bins them into performance classes;
//! - [`localization_report`] scores how well a set of damage indices
//!   points at known damaged elements in controlled experiments.

pub mod demand;
pub mod drift;
pub mod energy;
pub mod error;
pub mod localization;

pub use demand::{
    axial_capacity, dcr, ductility_demand, park_ang_di, plastic_hinge_length, DamageIndex,
    ElementDamage,
};
pub use drift::{
    classify_performance, story_drifts, DriftThresholds, PerformanceClass, StoryAssessment,
};
pub use energy::{element_hysteretic_energy, energy_balance, EnergyLedger};
pub use error::{DamageError, Result};
pub use localization::{localization_report, ElementScore, LocalizationReport, StoryAggregate};
