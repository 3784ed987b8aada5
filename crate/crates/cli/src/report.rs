//! Damage reports: assembly from a response history, plot-data CSVs, and
//! run-to-run comparison.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use hystereo_core::model::StructuralModel;
use hystereo_core::newmark::ResponseHistory;
use hystereo_damage::{
    dcr, ductility_demand, energy_balance, park_ang_di, story_drifts, DriftThresholds,
    EnergyLedger, PerformanceClass,
};

use crate::error::{invalid, Result};
use crate::model_io::ElementInfo;

/// Drift summary row of one story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryRow {
    /// Story number (1-based).
    pub id: usize,
    /// Peak inter-story drift ratio [-].
    pub isd_max: f64,
    /// Drift-ratio standard deviation [-].
    pub sigma: f64,
    /// Performance class of the peak.
    pub class: PerformanceClass,
}

/// Damage summary row of one element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementRow {
    /// Element id (model element order).
    pub id: usize,
    /// Dissipated hysteretic energy [J].
    #[serde(rename = "Eh")]
    pub e_h: f64,
    /// Peak ductility demand [-].
    pub mu_m: f64,
    /// Ductility term of the damage index [-].
    #[serde(rename = "DI_mu")]
    pub di_mu: f64,
    /// Energy term of the damage index [-].
    #[serde(rename = "DI_E")]
    pub di_e: f64,
    /// Combined damage index [-].
    #[serde(rename = "DI")]
    pub di: f64,
    /// Shear demand-capacity ratio [-].
    #[serde(rename = "DCR")]
    pub dcr: f64,
}

/// Global energy scalars of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    /// Peak kinetic energy [J].
    #[serde(rename = "Ek_peak")]
    pub ek_peak: f64,
    /// Final viscous dissipation [J].
    #[serde(rename = "Exi")]
    pub e_xi: f64,
    /// Final hysteretic dissipation [J].
    #[serde(rename = "Eh_total")]
    pub e_h_total: f64,
    /// Final input work [J].
    #[serde(rename = "Ei")]
    pub e_i: f64,
    /// Relative energy-balance residual [-].
    pub balance_residual: f64,
}

/// Full assessment of one response history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageReport {
    /// Per-story drift summary, ascending story.
    pub stories: Vec<StoryRow>,
    /// Per-element damage summary, ascending id.
    pub elements: Vec<ElementRow>,
    /// Global energy scalars.
    pub energy: EnergySummary,
}

impl DamageReport {
    /// Reads a report from `path`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read report {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| invalid(format!("bad report {}: {e}", path.display())))
    }

    /// Writes the report as pretty JSON.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Worst story class in the report.
    pub fn governing_class(&self) -> PerformanceClass {
        self.stories
            .iter()
            .map(|s| s.class)
            .max()
            .unwrap_or(PerformanceClass::Io)
    }
}

/// Assesses a response history against the element capacities.
///
/// `covariance` (displacement-error covariance over the model equations)
/// feeds the per-story drift uncertainty; pass `None` for truth runs.
/// Returns the report together with the full energy ledger for plotting.
pub fn build_report(
    model: &StructuralModel,
    info: &[ElementInfo],
    history: &ResponseHistory,
    covariance: Option<&DMatrix<f64>>,
    thresholds: &DriftThresholds,
    psi: f64,
) -> Result<(DamageReport, EnergyLedger)> {
    if info.len() != history.elements.len() {
        return Err(invalid(format!(
            "{} element records for {} element descriptions",
            history.elements.len(),
            info.len()
        )));
    }
    let ledger = energy_balance(model, history)?;
    let per_element = ledger.element_totals();

    let mut elements = Vec::with_capacity(info.len());
    for e in info {
        let element = &history.elements[e.id];
        let mu_m = ductility_demand(element, e.yield_deformation())?;
        let e_h = per_element[e.id].max(0.0);
        // For a story spring the single integration point's "moment" is the
        // story shear force, so its record is the shear-demand history.
        let shear: Vec<f64> = element.samples[0].iter().map(|s| s.moment).collect();
        let ratio = dcr(&shear, e.shear_capacity)?;
        let index = park_ang_di(
            mu_m,
            e.ductility_capacity,
            e_h,
            e.yield_force,
            e.yield_deformation() * e.ductility_capacity,
            psi,
        )?;
        elements.push(ElementRow {
            id: e.id,
            e_h,
            mu_m,
            di_mu: index.di_mu,
            di_e: index.di_e,
            di: index.di,
            dcr: ratio,
        });
    }

    let stories = story_drifts(history, model.stories(), covariance, thresholds)?
        .into_iter()
        .map(|s| StoryRow {
            id: s.story,
            isd_max: s.isd_max,
            sigma: s.sigma_isd,
            class: s.class,
        })
        .collect();

    let energy = EnergySummary {
        ek_peak: ledger.kinetic.iter().fold(0.0f64, |m, &v| m.max(v)),
        e_xi: *ledger.viscous.last().unwrap(),
        e_h_total: *ledger.hysteretic.last().unwrap(),
        e_i: *ledger.input.last().unwrap(),
        balance_residual: ledger.relative_residual(),
    };

    Ok((DamageReport { stories, elements, energy }, ledger))
}

/// Writes the plot-data CSV bundle next to a report.
///
/// Emits `drift_profile.csv` (story, isd_max, sigma), `elements_di.csv`
/// (per-element damage measures), and — when a ledger is supplied —
/// `energy_time.csv` (cumulative energy shares over time).  Values are
/// printed with full float precision so parsing them reproduces the report.
pub fn emit_plotdata(
    report: &DamageReport,
    ledger: Option<&EnergyLedger>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut drift = String::new();
    drift.push_str("# peak inter-story drift ratio and its standard deviation per story\n");
    drift.push_str("# columns: story number, peak drift ratio [-], drift-ratio sigma [-]\n");
    drift.push_str("story,isd_max,sigma\n");
    for s in &report.stories {
        let _ = writeln!(drift, "{},{:.17e},{:.17e}", s.id, s.isd_max, s.sigma);
    }
    let path = dir.join("drift_profile.csv");
    std::fs::write(&path, drift)?;
    written.push(path);

    let mut di = String::new();
    di.push_str("# per-element damage measures\n");
    di.push_str(
        "# columns: element id, damage index, ductility term, energy term, \
         hysteretic energy [J], peak ductility [-], shear demand-capacity ratio [-]\n",
    );
    di.push_str("element,DI,DI_mu,DI_E,Eh,mu_m,DCR\n");
    for e in &report.elements {
        let _ = writeln!(
            di,
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            e.id, e.di, e.di_mu, e.di_e, e.e_h, e.mu_m, e.dcr
        );
    }
    let path = dir.join("elements_di.csv");
    std::fs::write(&path, di)?;
    written.push(path);

    if let Some(ledger) = ledger {
        let mut energy = String::new();
        energy.push_str("# cumulative energy shares over the record\n");
        energy.push_str(
            "# columns: time [s], kinetic, viscous, elastic, hysteretic, input (all [J])\n",
        );
        energy.push_str("t,Ek,Exi,Ee,Eh,Ei\n");
        for k in 0..ledger.time.len() {
            let _ = writeln!(
                energy,
                "{:.6},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                ledger.time[k],
                ledger.kinetic[k],
                ledger.viscous[k],
                ledger.elastic[k],
                ledger.hysteretic[k],
                ledger.input[k]
            );
        }
        let path = dir.join("energy_time.csv");
        std::fs::write(&path, energy)?;
        written.push(path);
    }
    Ok(written)
}

/// Change in one element between two runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDelta {
    /// Element id.
    pub id: usize,
    /// Damage index in run A.
    pub di_a: f64,
    /// Damage index in run B.
    pub di_b: f64,
    /// `di_b - di_a`.
    pub delta_di: f64,
}

/// Change in one story between two runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryDelta {
    /// Story number.
    pub id: usize,
    /// `isd_max` change, B minus A.
    pub delta_isd_max: f64,
    /// Class in run A.
    pub from: PerformanceClass,
    /// Class in run B.
    pub to: PerformanceClass,
    /// Human-readable transition, e.g. `"IO → LS"`.
    pub transition: String,
}

/// Element and story deltas between two reports on the same model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    /// Per-element damage-index changes.
    pub elements: Vec<ElementDelta>,
    /// Per-story drift and class changes.
    pub stories: Vec<StoryDelta>,
    /// Governing-class transition for the whole building.
    pub governing_transition: String,
}

/// Compares two reports element by element and story by story.
///
/// # Errors
/// The reports must describe the same topology (same element ids and story
/// numbers in the same order).
pub fn compare_runs(a: &DamageReport, b: &DamageReport) -> Result<DeltaReport> {
    let ids = |r: &DamageReport| -> (Vec<usize>, Vec<usize>) {
        (r.elements.iter().map(|e| e.id).collect(), r.stories.iter().map(|s| s.id).collect())
    };
    if ids(a) != ids(b) {
        return Err(invalid("reports describe different model topologies"));
    }
    let elements = a
        .elements
        .iter()
        .zip(&b.elements)
        .map(|(ea, eb)| ElementDelta {
            id: ea.id,
            di_a: ea.di,
            di_b: eb.di,
            delta_di: eb.di - ea.di,
        })
        .collect();
    let stories = a
        .stories
        .iter()
        .zip(&b.stories)
        .map(|(sa, sb)| StoryDelta {
            id: sa.id,
            delta_isd_max: sb.isd_max - sa.isd_max,
            from: sa.class,
            to: sb.class,
            transition: format!("{} → {}", sa.class, sb.class),
        })
        .collect();
    let governing_transition =
        format!("{} → {}", a.governing_class(), b.governing_class());
    Ok(DeltaReport { elements, stories, governing_transition })
}
