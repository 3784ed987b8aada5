//! Small ready-made models used across the test suites and benchmark
//! drivers.  These are deliberately simple (uniform shear buildings); the
//! command-line workbench builds its richer frame models on top of
//! [`crate::model::ModelBuilder`] directly.

use crate::element::{Element, ShearStoryElement};
use crate::model::{DampingSpec, ModelBuilder, StructuralModel};

/// Uniform shear building: `stories` levels of lumped `mass` [kg] connected
/// by bilinear story springs (`stiffness` [N/m], `yield_force` [N],
/// `hardening` ratio).  Story height is 3 m.
pub fn shear_building(
    stories: usize,
    mass: f64,
    stiffness: f64,
    yield_force: f64,
    hardening: f64,
    damping: DampingSpec,
) -> StructuralModel {
    let mut b = ModelBuilder::new();
    let base = b.add_node(0.0, 0.0);
    b.fix_base(base);
    let mut below = base;
    for s in 1..=stories {
        let node = b.add_node(0.0, 3.0 * s as f64);
        b.fix(node, [false, true, true]);
        b.add_mass(node, [mass, 0.0, 0.0]);
        b.add_element(
            Element::ShearStory(
                ShearStoryElement::new([below, node], stiffness, yield_force, hardening).unwrap(),
            ),
            Some(s),
        );
        b.add_story(s, node, 3.0);
        below = node;
    }
    b.set_damping(damping);
    b.build().expect("fixture model must be valid")
}

/// Shear building with effectively elastic springs.
pub fn elastic_shear_building(
    stories: usize,
    mass: f64,
    stiffness: f64,
    damping: DampingSpec,
) -> StructuralModel {
    shear_building(stories, mass, stiffness, 1e30, 0.0, damping)
}

/// Bilinear single- or multi-story shear building.
pub fn bilinear_shear_building(
    stories: usize,
    mass: f64,
    stiffness: f64,
    yield_force: f64,
    hardening: f64,
    damping: DampingSpec,
) -> StructuralModel {
    shear_building(stories, mass, stiffness, yield_force, hardening, damping)
}

/// Elastic single degree of freedom oscillator.
pub fn sdof(mass: f64, stiffness: f64, damping: DampingSpec) -> StructuralModel {
    elastic_shear_building(1, mass, stiffness, damping)
}
