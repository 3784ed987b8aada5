//! On-disk representation of a [`ResponseHistory`].
//!
//! A history is persisted as a directory:
//! * `meta.json` - sampling interval, sizes, quadrature weights;
//! * `state.csv` - displacements, velocities, accelerations, restoring and
//!   applied forces (`d*/v*/a*/f*/p*` columns);
//! * `elements.csv` - per integration point: moment, curvature, axial
//!   force, axial strain, unloading stiffness.
//!
//! Every pipeline stage can be re-run from these files alone.

use crate::element::IpSample;
use crate::error::{CoreError, Result};
use crate::newmark::{ElementHistory, ResponseHistory};
use crate::timeseries::TimeSeries;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct ElementMeta {
    weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct HistoryMeta {
    dt: f64,
    n_dof: usize,
    samples: usize,
    elements: Vec<ElementMeta>,
}

/// Writes `history` into directory `dir` (created if missing).
pub fn save_history(history: &ResponseHistory, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let n = history.disp.first().map_or(0, |v| v.len());
    let meta = HistoryMeta {
        dt: history.dt,
        n_dof: n,
        samples: history.len(),
        elements: history.elements.iter().map(|e| ElementMeta { weights: e.weights.clone() }).collect(),
    };
    let meta_json = serde_json::to_string_pretty(&meta)
        .map_err(|e| CoreError::Parse(format!("meta serialization failed: {e}")))?;
    std::fs::write(dir.join("meta.json"), meta_json)?;

    let mut names = Vec::new();
    let mut data: Vec<Vec<f64>> = Vec::new();
    for (prefix, field) in [
        ("d", &history.disp),
        ("v", &history.vel),
        ("a", &history.acc),
        ("f", &history.restoring),
        ("p", &history.applied),
    ] {
        for eq in 0..n {
            names.push(format!("{prefix}{eq}"));
            data.push(field.iter().map(|vec| vec[eq]).collect());
        }
    }
    TimeSeries::new(history.dt, names, data)?.write_csv(&dir.join("state.csv"))?;

    if !history.elements.is_empty() {
        let mut names = Vec::new();
        let mut data: Vec<Vec<f64>> = Vec::new();
        for (e, eh) in history.elements.iter().enumerate() {
            for (ip, series) in eh.samples.iter().enumerate() {
                for (suffix, get) in FIELDS {
                    names.push(format!("e{e}_ip{ip}_{suffix}"));
                    data.push(series.iter().map(|s| get(s)).collect());
                }
            }
        }
        TimeSeries::new(history.dt, names, data)?.write_csv(&dir.join("elements.csv"))?;
    }
    Ok(())
}

type FieldGetter = fn(&IpSample) -> f64;
const FIELDS: [(&str, FieldGetter); 5] = [
    ("m", |s| s.moment),
    ("phi", |s| s.curvature),
    ("n", |s| s.axial),
    ("eps", |s| s.axial_strain),
    ("ku", |s| s.unload_flexural),
];

/// Reads a history previously written by [`save_history`].
pub fn load_history(dir: &Path) -> Result<ResponseHistory> {
    let meta_text = std::fs::read_to_string(dir.join("meta.json"))?;
    let meta: HistoryMeta =
        serde_json::from_str(&meta_text).map_err(|e| CoreError::Parse(format!("bad meta.json: {e}")))?;
    let state = TimeSeries::read_csv(&dir.join("state.csv"))?;
    let n = meta.n_dof;
    if state.channel_count() != 5 * n {
        return Err(CoreError::Parse(format!(
            "state.csv has {} channels, expected {}",
            state.channel_count(),
            5 * n
        )));
    }
    let samples = state.len();
    let gather = |block: usize| -> Vec<DVector<f64>> {
        (0..samples)
            .map(|i| DVector::from_iterator(n, (0..n).map(|eq| state.channel(block * n + eq)[i])))
            .collect()
    };
    let mut history = ResponseHistory {
        dt: meta.dt,
        time: (0..samples).map(|i| i as f64 * meta.dt).collect(),
        disp: gather(0),
        vel: gather(1),
        acc: gather(2),
        restoring: gather(3),
        applied: gather(4),
        elements: Vec::new(),
    };
    if !meta.elements.is_empty() {
        let table = TimeSeries::read_csv(&dir.join("elements.csv"))?;
        let mut col = 0usize;
        for em in &meta.elements {
            let mut eh = ElementHistory { weights: em.weights.clone(), samples: Vec::new() };
            for _ip in 0..em.weights.len() {
                let mut series = Vec::with_capacity(samples);
                for i in 0..samples {
                    series.push(IpSample {
                        moment: table.channel(col)[i],
                        curvature: table.channel(col + 1)[i],
                        axial: table.channel(col + 2)[i],
                        axial_strain: table.channel(col + 3)[i],
                        unload_flexural: table.channel(col + 4)[i],
                    });
                }
                col += 5;
                eh.samples.push(series);
            }
            history.elements.push(eh);
        }
        if col != table.channel_count() {
            return Err(CoreError::Parse("elements.csv does not match meta.json".into()));
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::bilinear_shear_building;
    use crate::model::DampingSpec;
    use crate::newmark::{newmark_nonlinear, Excitation, InitialState, NewmarkOptions};

    #[test]
    fn history_round_trips_through_directory() {
        let mut model =
            bilinear_shear_building(2, 100.0, 4e5, 5e3, 0.05, DampingSpec::Coefficients { a0: 0.5, a1: 1e-4 });
        let dt = 0.01;
        let ag: Vec<f64> = (0..200).map(|i| 3.0 * (i as f64 * dt * 8.0).sin()).collect();
        let motion = TimeSeries::single(dt, "ag", ag).unwrap();
        let hist = newmark_nonlinear(
            &mut model,
            &Excitation::Ground { motion: &motion, channel: 0 },
            &NewmarkOptions::with_dt(dt),
            InitialState::default(),
        )
        .unwrap();
        let dir = std::env::temp_dir().join(format!("hystereo-io-{}", std::process::id()));
        save_history(&hist, &dir).unwrap();
        let loaded = load_history(&dir).unwrap();
        std::fs::remove_dir_all(&dir).ok();

        assert_eq!(loaded.len(), hist.len());
        assert_eq!(loaded.elements.len(), hist.elements.len());
        let last = hist.len() - 1;
        for eq in 0..2 {
            assert!((loaded.disp[last][eq] - hist.disp[last][eq]).abs() < 1e-12 + 1e-9 * hist.disp[last][eq].abs());
            assert!((loaded.restoring[last][eq] - hist.restoring[last][eq]).abs() < 1e-3);
        }
        let s0 = hist.elements[0].samples[0][last];
        let l0 = loaded.elements[0].samples[0][last];
        assert!((s0.moment - l0.moment).abs() <= 1e-9 * s0.moment.abs().max(1.0));
        assert!((s0.curvature - l0.curvature).abs() <= 1e-9 * s0.curvature.abs().max(1e-9));
    }
}
