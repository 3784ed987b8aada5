//! End-to-end assessment of a simulated record: a three-story building
//! with a deliberately weakened middle story rides out a synthetic ground
//! motion, and the full damage chain — energy split, ductility, damage
//! indices, drifts, localization — must point at the weak story.

use approx::assert_relative_eq;
use hystereo_core::element::{Element, ShearStoryElement};
use hystereo_core::model::{DampingSpec, ModelBuilder, StructuralModel};
use hystereo_core::newmark::{newmark_nonlinear, Excitation, InitialState, NewmarkOptions};
use hystereo_damage::{
    ductility_demand, energy_balance, localization_report, story_drifts, DriftThresholds,
    ElementDamage, ElementScore,
};
use hystereo_excite::{synthesize_motion, GroundMotionSpec, KanaiTajimiParams};

const STIFFNESS: f64 = 2.0e6;
const MASS: f64 = 1000.0;
const STRONG_FY: f64 = 1.6e4;
const WEAK_FY: f64 = 6.0e3;
const WEAK_STORY: usize = 2;

/// Three-story shear building whose middle story yields first.
fn weakened_building() -> StructuralModel {
    let mut b = ModelBuilder::new();
    let base = b.add_node(0.0, 0.0);
    b.fix_base(base);
    let mut below = base;
    for s in 1..=3 {
        let node = b.add_node(0.0, 3.0 * s as f64);
        b.fix(node, [false, true, true]);
        b.add_mass(node, [MASS, 0.0, 0.0]);
        let fy = if s == WEAK_STORY { WEAK_FY } else { STRONG_FY };
        b.add_element(
            Element::ShearStory(
                ShearStoryElement::new([below, node], STIFFNESS, fy, 0.03).unwrap(),
            ),
            Some(s),
        );
        b.add_story(s, node, 3.0);
        below = node;
    }
    b.set_damping(DampingSpec::RayleighModes { xi: 0.02, modes: (0, 1) });
    b.build().unwrap()
}

#[test]
fn weak_story_dominates_every_damage_measure() {
    let model = weakened_building();
    let spec = GroundMotionSpec {
        kt: KanaiTajimiParams::new(0.02, 0.6, 12.0).unwrap(),
        alpha: 0.25,
        dt: 0.002,
        duration: 16.0,
    };
    let ag = synthesize_motion(&spec, 7).unwrap();
    let mut m = model.clone();
    let history = newmark_nonlinear(
        &mut m,
        &Excitation::Ground { motion: &ag, channel: 0 },
        &NewmarkOptions::with_dt(spec.dt),
        InitialState::default(),
    )
    .unwrap();

    // The books must close even with yielding excursions in the record.
    let ledger = energy_balance(&model, &history).unwrap();
    assert!(
        ledger.relative_residual() < 0.01,
        "balance residual {}",
        ledger.relative_residual()
    );
    let per_element = ledger.element_totals();
    let weak = WEAK_STORY - 1;
    assert!(per_element[weak] > 0.0, "weak story never yielded");
    for (e, &value) in per_element.iter().enumerate() {
        if e != weak {
            assert!(
                per_element[weak] > 5.0 * value.max(0.0),
                "story {} dissipated {value} J vs weak story {} J",
                e + 1,
                per_element[weak]
            );
        }
    }

    // Demand rows: the weak story carries the highest ductility and index.
    let mu_u = 6.0;
    let rows: Vec<ElementDamage> = history
        .elements
        .iter()
        .enumerate()
        .map(|(e, element)| {
            let fy = if e + 1 == WEAK_STORY { WEAK_FY } else { STRONG_FY };
            let uy = fy / STIFFNESS;
            let mu_m = ductility_demand(element, uy).unwrap();
            ElementDamage::assemble(
                e,
                mu_m,
                mu_u,
                per_element[e].max(0.0),
                fy,
                uy * mu_u,
                1.0,
                0.25 * 0.5,
            )
            .unwrap()
        })
        .collect();
    assert!(rows[weak].mu_m > 1.0, "weak story stayed elastic");
    assert!(rows.iter().all(|r| r.di >= 0.0));
    for row in &rows {
        assert_relative_eq!(row.di, row.di_mu + row.di_e);
    }

    // Localization: the weak story's element must top the ranking.
    let scores: Vec<ElementScore> = rows
        .iter()
        .map(|r| ElementScore {
            id: r.id,
            story: Some(r.id + 1),
            di: r.di,
            reference_energy: per_element[r.id],
        })
        .collect();
    let report = localization_report(&scores, &[weak]).unwrap();
    assert_eq!(report.ranking[0], weak);
    assert_relative_eq!(report.top_k_hit_rate, 1.0);
    let worst_story = report
        .stories
        .iter()
        .max_by(|a, b| a.di_max.total_cmp(&b.di_max))
        .unwrap();
    assert_eq!(worst_story.story, WEAK_STORY);

    // Drifts: the weak story concentrates the deformation as well.
    let drifts = story_drifts(
        &history,
        model.stories(),
        None,
        &DriftThresholds::default(),
    )
    .unwrap();
    let peak_story = drifts
        .iter()
        .max_by(|a, b| a.isd_max.total_cmp(&b.isd_max))
        .unwrap();
    assert_eq!(peak_story.story, WEAK_STORY);
}
