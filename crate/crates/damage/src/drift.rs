//! Inter-story drift extraction, drift uncertainty, and performance
//! classification.
//!
//! Story drifts are the difference of consecutive story displacements over
//! the story height.  When an estimation-error covariance accompanies the
//! displacement history, it propagates through the same difference to a
//! per-story drift standard deviation, so each reported peak carries an
//! uncertainty band.  Peaks are then binned into the usual performance
//! classes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use hystereo_core::model::StoryLevel;
use hystereo_core::newmark::ResponseHistory;

use crate::error::{invalid, Result};

/// Structural performance class, ordered from best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PerformanceClass {
    /// Immediate occupancy.
    #[serde(rename = "IO")]
    Io,
    /// Life safety.
    #[serde(rename = "LS")]
    Ls,
    /// Collapse prevention.
    #[serde(rename = "CP")]
    Cp,
    /// Beyond the collapse-prevention limit.
    #[serde(rename = "exceeds-CP")]
    ExceedsCp,
}

impl std::fmt::Display for PerformanceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Io => "IO",
            Self::Ls => "LS",
            Self::Cp => "CP",
            Self::ExceedsCp => "exceeds-CP",
        })
    }
}

/// Drift-ratio limits separating the performance classes.
///
/// Defaults are the customary transient-drift values for concrete frames:
/// 1% / 2% / 4%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftThresholds {
    /// Upper drift ratio for immediate occupancy.
    pub io: f64,
    /// Upper drift ratio for life safety.
    pub ls: f64,
    /// Upper drift ratio for collapse prevention.
    pub cp: f64,
}

impl Default for DriftThresholds {
    fn default() -> Self {
        Self { io: 0.01, ls: 0.02, cp: 0.04 }
    }
}

impl DriftThresholds {
    /// Validated custom thresholds; they must be positive and strictly
    /// increasing.
    pub fn new(io: f64, ls: f64, cp: f64) -> Result<Self> {
        let t = Self { io, ls, cp };
        t.validate()?;
        Ok(t)
    }

    /// Checks that the limits are positive and strictly increasing.
    pub fn validate(&self) -> Result<()> {
        if !(self.io > 0.0 && self.io < self.ls && self.ls < self.cp) {
            return Err(invalid(format!(
                "thresholds must satisfy 0 < io < ls < cp, got {} / {} / {}",
                self.io, self.ls, self.cp
            )));
        }
        Ok(())
    }

    /// Class of a single peak drift ratio.
    pub fn classify(&self, isd_max: f64) -> PerformanceClass {
        if isd_max <= self.io {
            PerformanceClass::Io
        } else if isd_max <= self.ls {
            PerformanceClass::Ls
        } else if isd_max <= self.cp {
            PerformanceClass::Cp
        } else {
            PerformanceClass::ExceedsCp
        }
    }
}

/// Drift summary of one story.
#[derive(Debug, Clone)]
pub struct StoryAssessment {
    /// Story number (1-based, bottom story first).
    pub story: usize,
    /// Peak inter-story drift ratio `max_t |q_k - q_(k-1)| / h_k` [-].
    pub isd_max: f64,
    /// Drift-ratio standard deviation propagated from the estimation-error
    /// covariance; zero when no covariance is supplied.
    pub sigma_isd: f64,
    /// Relative drift between this story and the one below,
    /// `ISD_k(t) - ISD_(k-1)(t)`, over the whole record [-].
    pub risd: Vec<f64>,
    /// Performance class of `isd_max`.
    pub class: PerformanceClass,
}

/// Per-story drift assessment of a displacement history.
///
/// Stories must form a contiguous run starting at 1; the ground is story 0
/// with zero displacement.  `covariance` is the displacement-error
/// covariance over the model equations; its difference-projected diagonal
/// yields each story's drift standard deviation.
///
/// # Errors
/// Stories must be contiguous from 1 with positive heights, every story
/// equation must exist in the history, and the covariance (when given)
/// must match the equation count.
pub fn story_drifts(
    history: &ResponseHistory,
    stories: &[StoryLevel],
    covariance: Option<&DMatrix<f64>>,
    thresholds: &DriftThresholds,
) -> Result<Vec<StoryAssessment>> {
    thresholds.validate()?;
    if history.len() == 0 {
        return Err(invalid("empty response history"));
    }
    if stories.is_empty() {
        return Err(invalid("no story levels supplied"));
    }
    let n_eq = history.disp[0].len();
    let mut levels = stories.to_vec();
    levels.sort_by_key(|s| s.story);
    for (i, level) in levels.iter().enumerate() {
        if level.story != i + 1 {
            return Err(invalid(format!(
                "story levels must run 1..={} contiguously, found story {}",
                levels.len(),
                level.story
            )));
        }
        if level.height <= 0.0 {
            return Err(invalid(format!("story {} has nonpositive height", level.story)));
        }
        if level.eq >= n_eq {
            return Err(invalid(format!(
                "story {} reads equation {}, history has {}",
                level.story, level.eq, n_eq
            )));
        }
    }
    if let Some(p) = covariance {
        if p.nrows() != n_eq || p.ncols() != n_eq {
            return Err(invalid(format!(
                "covariance is {}x{}, history has {} equations",
                p.nrows(),
                p.ncols(),
                n_eq
            )));
        }
    }

    let n = history.len();
    // Drift-ratio series per story, ground row implicit.
    let mut isd: Vec<Vec<f64>> = Vec::with_capacity(levels.len());
    for (i, level) in levels.iter().enumerate() {
        let mut series = Vec::with_capacity(n);
        for k in 0..n {
            let upper = history.disp[k][level.eq];
            let lower = if i == 0 { 0.0 } else { history.disp[k][levels[i - 1].eq] };
            series.push((upper - lower) / level.height);
        }
        isd.push(series);
    }

    let mut out = Vec::with_capacity(levels.len());
    for (i, level) in levels.iter().enumerate() {
        let isd_max = isd[i].iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let sigma_isd = covariance.map_or(0.0, |p| {
            let var = if i == 0 {
                p[(level.eq, level.eq)]
            } else {
                let lo = levels[i - 1].eq;
                p[(level.eq, level.eq)] + p[(lo, lo)] - 2.0 * p[(level.eq, lo)]
            };
            var.max(0.0).sqrt() / level.height
        });
        let risd = if i == 0 {
            isd[0].clone()
        } else {
            isd[i].iter().zip(&isd[i - 1]).map(|(a, b)| a - b).collect()
        };
        out.push(StoryAssessment {
            story: level.story,
            isd_max,
            sigma_isd,
            risd,
            class: thresholds.classify(isd_max),
        });
    }
    Ok(out)
}

/// Classes for a set of peak drift ratios plus the governing (worst) class
/// for the whole building.  An empty input governs as immediate occupancy.
pub fn classify_performance(
    isd_max: &[f64],
    thresholds: &DriftThresholds,
) -> (Vec<PerformanceClass>, PerformanceClass) {
    let classes: Vec<PerformanceClass> =
        isd_max.iter().map(|&v| thresholds.classify(v)).collect();
    let governing = classes.iter().copied().max().unwrap_or(PerformanceClass::Io);
    (classes, governing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::{dmatrix, DVector};
    use proptest::prelude::*;

    /// History with only the displacement series populated.
    fn displacement_history(disp: Vec<DVector<f64>>) -> ResponseHistory {
        let n = disp.len();
        let n_eq = disp[0].len();
        let zero = vec![DVector::zeros(n_eq); n];
        ResponseHistory {
            dt: 0.01,
            time: (0..n).map(|k| 0.01 * k as f64).collect(),
            disp,
            vel: zero.clone(),
            acc: zero.clone(),
            restoring: zero.clone(),
            applied: zero,
            elements: Vec::new(),
        }
    }

    fn two_stories() -> Vec<StoryLevel> {
        vec![
            StoryLevel { story: 1, eq: 0, height: 3.0 },
            StoryLevel { story: 2, eq: 1, height: 2.64 },
        ]
    }

    #[test]
    fn rigid_body_translation_strains_only_the_bottom_story() {
        let disp = (0..50)
            .map(|k| DVector::from_element(2, 1.0e-3 * k as f64))
            .collect();
        let out = story_drifts(
            &displacement_history(disp),
            &two_stories(),
            None,
            &DriftThresholds::default(),
        )
        .unwrap();
        assert_relative_eq!(out[0].isd_max, 49.0e-3 / 3.0);
        assert_abs_diff_eq!(out[1].isd_max, 0.0);
        // The upper story's relative drift mirrors the bottom story's:
        // RISD_2 = ISD_2 - ISD_1 = -ISD_1.
        for (bottom, top) in out[0].risd.iter().zip(&out[1].risd) {
            assert_abs_diff_eq!(top + bottom, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn peak_relative_displacement_sets_the_drift_ratio() {
        // Story 2 moves 26.4 mm past story 1 at its peak; h_2 = 2.64 m.
        // Triangular pulse so the peak lands exactly on a sample.
        let mut disp = vec![DVector::zeros(2); 41];
        for (k, q) in disp.iter_mut().enumerate() {
            let s = 1.0 - (k as f64 - 20.0).abs() / 20.0;
            q[0] = 0.010 * s;
            q[1] = q[0] + 0.0264 * s;
        }
        let out = story_drifts(
            &displacement_history(disp),
            &two_stories(),
            None,
            &DriftThresholds::default(),
        )
        .unwrap();
        assert_relative_eq!(out[1].isd_max, 0.010, max_relative = 1e-12);
        assert_eq!(out[1].class, PerformanceClass::Io);
    }

    #[test]
    fn covariance_propagates_to_drift_uncertainty() {
        let disp = vec![DVector::zeros(2); 3];
        let p = dmatrix![4.0e-6, 1.0e-6; 1.0e-6, 9.0e-6];
        let out = story_drifts(
            &displacement_history(disp.clone()),
            &two_stories(),
            Some(&p),
            &DriftThresholds::default(),
        )
        .unwrap();
        assert_relative_eq!(out[0].sigma_isd, 2.0e-3 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(
            out[1].sigma_isd,
            (4.0e-6 + 9.0e-6 - 2.0e-6_f64).sqrt() / 2.64,
            max_relative = 1e-12
        );

        // No covariance (or a zero one) collapses the band to the point
        // estimate.
        let zero = DMatrix::zeros(2, 2);
        let out = story_drifts(
            &displacement_history(disp),
            &two_stories(),
            Some(&zero),
            &DriftThresholds::default(),
        )
        .unwrap();
        assert!(out.iter().all(|s| s.sigma_isd == 0.0));
    }

    #[test]
    fn drift_is_linear_in_the_displacements() {
        let disp: Vec<DVector<f64>> = (0..30)
            .map(|k| {
                let t = k as f64 * 0.1;
                DVector::from_vec(vec![0.004 * t.sin(), 0.007 * (1.3 * t).sin()])
            })
            .collect();
        let scaled: Vec<DVector<f64>> = disp.iter().map(|q| q * 2.0).collect();
        let thresholds = DriftThresholds::default();
        let a = story_drifts(&displacement_history(disp), &two_stories(), None, &thresholds)
            .unwrap();
        let b = story_drifts(&displacement_history(scaled), &two_stories(), None, &thresholds)
            .unwrap();
        for (sa, sb) in a.iter().zip(&b) {
            // Doubling is exact in floating point, so so is the scaling.
            assert_eq!(sb.isd_max, 2.0 * sa.isd_max);
            for (ra, rb) in sa.risd.iter().zip(&sb.risd) {
                assert_eq!(*rb, 2.0 * ra);
            }
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let history = displacement_history(vec![DVector::zeros(2); 4]);
        let thresholds = DriftThresholds::default();
        // Gap in the story numbering.
        let gap = vec![
            StoryLevel { story: 1, eq: 0, height: 3.0 },
            StoryLevel { story: 3, eq: 1, height: 3.0 },
        ];
        assert!(story_drifts(&history, &gap, None, &thresholds).is_err());
        // Equation index outside the history.
        let out_of_range = vec![StoryLevel { story: 1, eq: 7, height: 3.0 }];
        assert!(story_drifts(&history, &out_of_range, None, &thresholds).is_err());
        // Nonpositive height.
        let flat = vec![StoryLevel { story: 1, eq: 0, height: 0.0 }];
        assert!(story_drifts(&history, &flat, None, &thresholds).is_err());
        // Covariance of the wrong size.
        let p = DMatrix::zeros(3, 3);
        let ok = vec![StoryLevel { story: 1, eq: 0, height: 3.0 }];
        assert!(story_drifts(&history, &ok, Some(&p), &thresholds).is_err());
        // Bad threshold table.
        assert!(DriftThresholds::new(0.02, 0.01, 0.04).is_err());
        assert!(DriftThresholds::new(0.0, 0.01, 0.04).is_err());
    }

    #[test]
    fn classification_covers_all_bands() {
        let thresholds = DriftThresholds::default();
        let (classes, governing) =
            classify_performance(&[0.003, 0.015, 0.025, 0.05], &thresholds);
        assert_eq!(
            classes,
            vec![
                PerformanceClass::Io,
                PerformanceClass::Ls,
                PerformanceClass::Cp,
                PerformanceClass::ExceedsCp
            ]
        );
        assert_eq!(governing, PerformanceClass::ExceedsCp);
        assert_eq!(classify_performance(&[], &thresholds).1, PerformanceClass::Io);
        assert_eq!(format!("{}", PerformanceClass::ExceedsCp), "exceeds-CP");
        assert_eq!(serde_json::to_string(&PerformanceClass::Ls).unwrap(), "\"LS\"");
    }

    proptest! {
        /// A larger peak drift never maps to a less severe class.
        #[test]
        fn classification_is_monotone(a in 0.0f64..0.08, b in 0.0f64..0.08) {
            let thresholds = DriftThresholds::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(thresholds.classify(lo) <= thresholds.classify(hi));
        }
    }
}
