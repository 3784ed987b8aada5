//! Workbench model files: shear-frame buildings described in JSON.
//!
//! A building is a stack of stories, each with a lumped mass and one or
//! more parallel columns idealized as bilinear story springs.  Capacities
//! for the assessment (shear capacity, ductility capacity) ride along per
//! column, so a model file is the single source for both simulation and
//! reporting.  Element ids run story by story, column by column.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hystereo_core::element::{Element, ShearStoryElement};
use hystereo_core::model::{DampingSpec, ModelBuilder, StructuralModel};

use crate::config::DamageOverride;
use crate::error::{invalid, Result};

/// One column of a story: a bilinear shear spring plus its capacities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnFile {
    /// Elastic story stiffness [N/m].
    pub stiffness: f64,
    /// Yield force [N].
    pub yield_force: f64,
    /// Post-yield stiffness ratio [-].
    #[serde(default)]
    pub hardening: f64,
    /// Shear capacity for the demand-capacity ratio [N].
    pub shear_capacity: f64,
    /// Ductility capacity mu_u [-].
    #[serde(default = "default_mu_u")]
    pub ductility_capacity: f64,
}

fn default_mu_u() -> f64 {
    6.0
}

/// One story: height, lumped mass, and its columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoryFile {
    /// Story height [m].
    pub height: f64,
    /// Lumped lateral mass [kg].
    pub mass: f64,
    /// Parallel columns, at least one.
    pub columns: Vec<ColumnFile>,
}

/// Viscous damping description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DampingFile {
    /// No viscous damping.
    None,
    /// Rayleigh damping anchored at two modes (0-based).
    RayleighModes {
        /// Damping ratio at the anchor modes.
        xi: f64,
        /// Anchor mode indices.
        modes: (usize, usize),
    },
    /// Explicit Rayleigh coefficients `C = a0 M + a1 K0`.
    Coefficients {
        /// Mass-proportional coefficient [1/s].
        a0: f64,
        /// Stiffness-proportional coefficient [s].
        a1: f64,
    },
}

/// A building model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    /// Human-readable name.
    pub name: String,
    /// Stories, bottom first.
    pub stories: Vec<StoryFile>,
    /// Viscous damping.
    pub damping: DampingFile,
    /// Damage-index energy-term calibration factor.
    #[serde(default = "default_psi")]
    pub psi: f64,
}

fn default_psi() -> f64 {
    1.0
}

/// Per-element build record: effective properties after any overrides,
/// plus the capacities the assessment needs.
#[derive(Debug, Clone)]
pub struct ElementInfo {
    /// Element id (model element order).
    pub id: usize,
    /// Story the element belongs to (1-based).
    pub story: usize,
    /// Effective stiffness [N/m].
    pub stiffness: f64,
    /// Effective yield force [N].
    pub yield_force: f64,
    /// Shear capacity [N].
    pub shear_capacity: f64,
    /// Ductility capacity [-].
    pub ductility_capacity: f64,
}

impl ElementInfo {
    /// Yield deformation of the effective spring [m].
    pub fn yield_deformation(&self) -> f64 {
        self.yield_force / self.stiffness
    }
}

impl ModelFile {
    /// Parses and validates a model file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read model {}: {e}", path.display())))?;
        let file: ModelFile = serde_json::from_str(&text)
            .map_err(|e| invalid(format!("bad model {}: {e}", path.display())))?;
        file.validate()?;
        Ok(file)
    }

    /// Structural sanity checks.
    pub fn validate(&self) -> Result<()> {
        if self.stories.is_empty() {
            return Err(invalid("model needs at least one story"));
        }
        if !(self.psi >= 0.0) {
            return Err(invalid(format!("psi must be nonnegative, got {}", self.psi)));
        }
        for (s, story) in self.stories.iter().enumerate() {
            if !(story.height > 0.0 && story.mass > 0.0) {
                return Err(invalid(format!("story {}: height and mass must be positive", s + 1)));
            }
            if story.columns.is_empty() {
                return Err(invalid(format!("story {} has no columns", s + 1)));
            }
            for (c, col) in story.columns.iter().enumerate() {
                if !(col.stiffness > 0.0
                    && col.yield_force > 0.0
                    && col.shear_capacity > 0.0
                    && col.ductility_capacity > 0.0
                    && col.hardening >= 0.0
                    && col.hardening < 1.0)
                {
                    return Err(invalid(format!(
                        "story {} column {c}: properties out of range",
                        s + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total number of elements.
    pub fn element_count(&self) -> usize {
        self.stories.iter().map(|s| s.columns.len()).sum()
    }

    /// Number of columns in the story of element `id`.
    pub fn columns_in_story_of(&self, id: usize) -> Option<usize> {
        let mut next = 0;
        for story in &self.stories {
            next += story.columns.len();
            if id < next {
                return Some(story.columns.len());
            }
        }
        None
    }

    /// Builds the runtime model.
    ///
    /// `damage` scales individual elements (the truth-model variant);
    /// `stiffness_scale` and `damping_scale` apply globally (the
    /// observer-mismatch knobs).  Returns the model next to the effective
    /// per-element records.
    pub fn build(
        &self,
        damage: &[DamageOverride],
        stiffness_scale: f64,
        damping_scale: f64,
    ) -> Result<(StructuralModel, Vec<ElementInfo>)> {
        let n_elements = self.element_count();
        for d in damage {
            if d.element >= n_elements {
                return Err(invalid(format!(
                    "damage override for element {}, model has {n_elements}",
                    d.element
                )));
            }
        }
        let mut b = ModelBuilder::new();
        let base = b.add_node(0.0, 0.0);
        b.fix_base(base);
        let mut below = base;
        let mut info = Vec::with_capacity(n_elements);
        let mut elevation = 0.0;
        let mut id = 0;
        for (s, story) in self.stories.iter().enumerate() {
            let story_no = s + 1;
            elevation += story.height;
            let node = b.add_node(0.0, elevation);
            b.fix(node, [false, true, true]);
            b.add_mass(node, [story.mass, 0.0, 0.0]);
            for col in &story.columns {
                let mut stiffness = col.stiffness * stiffness_scale;
                let mut yield_force = col.yield_force;
                if let Some(d) = damage.iter().find(|d| d.element == id) {
                    stiffness *= d.stiffness_scale;
                    yield_force *= d.strength_scale;
                }
                b.add_element(
                    Element::ShearStory(
                        ShearStoryElement::new([below, node], stiffness, yield_force, col.hardening)
                            .map_err(crate::error::CliError::from)?,
                    ),
                    Some(story_no),
                );
                info.push(ElementInfo {
                    id,
                    story: story_no,
                    stiffness,
                    yield_force,
                    shear_capacity: col.shear_capacity,
                    ductility_capacity: col.ductility_capacity,
                });
                id += 1;
            }
            b.add_story(story_no, node, story.height);
            below = node;
        }
        b.set_damping(scaled_damping(&self.damping, damping_scale)?);
        let model = b.build().map_err(crate::error::CliError::from)?;
        Ok((model, info))
    }
}

/// Applies the observer damping-scale knob to a damping description.
fn scaled_damping(file: &DampingFile, scale: f64) -> Result<DampingSpec> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(invalid(format!("damping scale must be nonnegative, got {scale}")));
    }
    Ok(match (file, scale) {
        (DampingFile::None, _) => DampingSpec::None,
        (_, 0.0) => DampingSpec::None,
        (DampingFile::RayleighModes { xi, modes }, s) => {
            DampingSpec::RayleighModes { xi: xi * s, modes: *modes }
        }
        (DampingFile::Coefficients { a0, a1 }, s) => {
            DampingSpec::Coefficients { a0: a0 * s, a1: a1 * s }
        }
    })
}
