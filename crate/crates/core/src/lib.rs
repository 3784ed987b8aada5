//! Structural mechanics core: hysteretic materials, fiber sections,
//! distributed-plasticity frame elements, model assembly, and implicit
//! nonlinear time integration.
//!
//! The crate is organized bottom-up:
//! * [`quadrature`] - Gauss-Lobatto rules (end points always monitored);
//! * [`material`] - bilinear steel and degrading concrete laws;
//! * [`section`] - fiber sections and moment-curvature capacity scans;
//! * [`element`] - displacement-based beam-columns and story springs;
//! * [`model`] - DoF numbering, constraints, damping, assembly;
//! * [`newmark`] - average-acceleration time stepping with Newton
//!   iterations and step halving;
//! * [`timeseries`] / [`response_io`] - uniform sampling and the CSV/JSON
//!   interchange formats.

pub mod element;
pub mod error;
pub mod fixtures;
pub mod material;
pub mod model;
pub mod newmark;
pub mod quadrature;
pub mod response_io;
pub mod section;
pub mod timeseries;

pub use element::{BeamColumnElement, Element, IpSample, ShearStoryElement};
pub use error::{CoreError, Result};
pub use material::{BilinearLaw, BilinearState, MaterialKind, UniaxialMaterial};
pub use model::{DampingSpec, ModelBuilder, StoryLevel, StructuralModel};
pub use newmark::{
    newmark_nonlinear, ElementHistory, Excitation, InitialState, NewmarkOptions, ResponseHistory,
};
pub use quadrature::{gauss_lobatto_on_length, gauss_lobatto_rule, QuadratureRule};
pub use section::{
    bilinear_rectangle, capacity_scan, rc_rectangle, Fiber, FiberSection, RcSectionParams,
    SectionCapacity, SectionForces, SectionTangent,
};
pub use timeseries::TimeSeries;
