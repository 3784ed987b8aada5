//! Pipeline stages, each re-runnable from persisted intermediates.
//!
//! Every stage reads its inputs from files and writes its outputs to
//! files, so a pipeline is just a sequence of stage calls on a run
//! directory — and any stage can be repeated in isolation with identical
//! results.  [`run_twin`] chains them all: synthesize motion, simulate the
//! (possibly damaged) truth model, synthesize sensor records, design the
//! observer gain on the nominal model, run the observer, assess both
//! histories, and score the estimates against the truth.
//!
//! Seeds derive from the config's master seed: the motion uses it as-is,
//! measurement noise uses `seed + 1`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use hystereo_core::model::StructuralModel;
use hystereo_core::newmark::{newmark_nonlinear, Excitation, InitialState, NewmarkOptions};
use hystereo_core::response_io::{load_history, save_history};
use hystereo_core::timeseries::TimeSeries;
use hystereo_damage::{localization_report, DriftThresholds, ElementScore, PerformanceClass};
use hystereo_excite::{synthesize_motion, synthesize_noise, GroundMotionSpec, KanaiTajimiParams};
use hystereo_observer::{
    build_nmbo, ground_disturbance_influence, measured_acceleration_history, noise_level_from_rms,
    optimize_gain, run_observer, velocity_from_acceleration, DisturbanceSpec, GainMatrix,
    GainSearchOptions, SensorMap,
};

use crate::config::{MotionSource, TwinExperimentConfig};
use crate::error::{invalid, Result};
use crate::manifest::RunManifest;
use crate::model_io::{ElementInfo, ModelFile};
use crate::report::{build_report, emit_plotdata, DamageReport};

/// Which variant of the configured model a stage should build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelVariant {
    /// As described in the model file.
    Nominal,
    /// With the config's damage overrides applied (the truth model).
    Truth,
    /// Nominal with the observer's global mismatch knobs applied.
    Observer,
}

/// Loads the model file and builds the requested variant.
pub fn build_variant(
    config: &TwinExperimentConfig,
    variant: ModelVariant,
) -> Result<(ModelFile, StructuralModel, Vec<ElementInfo>)> {
    let file = ModelFile::load(&config.model)?;
    let (damage, stiffness, damping): (&[_], f64, f64) = match variant {
        ModelVariant::Nominal => (&[], 1.0, 1.0),
        ModelVariant::Truth => (config.damage.as_slice(), 1.0, 1.0),
        ModelVariant::Observer => (
            &[],
            config.observer.stiffness_scale,
            config.observer.damping_scale,
        ),
    };
    let (model, info) = file.build(damage, stiffness, damping)?;
    Ok((file, model, info))
}

/// Sensor map for the configured equations, validated against the model.
pub fn sensor_map(config: &TwinExperimentConfig, model: &StructuralModel) -> Result<SensorMap> {
    SensorMap::new(config.sensors.clone(), model.n_dof()).map_err(Into::into)
}

/// Synthesizes (or loads) the ground motion and writes `motion.csv`.
pub fn gen_motion(config: &TwinExperimentConfig, seed: u64, out: &Path) -> Result<TimeSeries> {
    let motion = match &config.motion {
        MotionSource::Synth { g0, xi_g, omega_g, alpha } => {
            let spec = GroundMotionSpec {
                kt: KanaiTajimiParams::new(*g0, *xi_g, *omega_g)?,
                alpha: *alpha,
                dt: config.dt,
                duration: config.duration,
            };
            synthesize_motion(&spec, seed)?
        }
        MotionSource::File { path } => {
            let ts = TimeSeries::read_csv(path)?;
            if (ts.dt() - config.dt).abs() > 1e-12 * config.dt {
                return Err(invalid(format!(
                    "motion file dt = {} does not match configured dt = {}",
                    ts.dt(),
                    config.dt
                )));
            }
            if ts.duration() + ts.dt() < config.duration {
                return Err(invalid(format!(
                    "motion file covers {:.3} s, config needs {:.3} s",
                    ts.duration(),
                    config.duration
                )));
            }
            ts
        }
    };
    motion.write_csv(out)?;
    Ok(motion)
}

/// Simulates `model` under the persisted motion record into `out_dir`.
pub fn simulate(
    model: &StructuralModel,
    motion_path: &Path,
    dt: f64,
    out_dir: &Path,
) -> Result<()> {
    let motion = TimeSeries::read_csv(motion_path)?;
    let mut m = model.clone();
    let history = newmark_nonlinear(
        &mut m,
        &Excitation::Ground { motion: &motion, channel: 0 },
        &NewmarkOptions::with_dt(dt),
        InitialState::default(),
    )?;
    save_history(&history, out_dir)?;
    Ok(())
}

/// Synthesizes the instrument records from a persisted truth response.
///
/// The output CSV carries the base (ground) accelerometer first, then one
/// absolute-acceleration channel per sensor; every channel gets
/// independent noise at the configured RMS fraction.
pub fn sense(
    model: &StructuralModel,
    sensors: &SensorMap,
    truth_dir: &Path,
    motion_path: &Path,
    rho: f64,
    seed: u64,
    out: &Path,
) -> Result<TimeSeries> {
    let truth = load_history(truth_dir)?;
    let motion = TimeSeries::read_csv(motion_path)?;
    if motion.len() < truth.len() {
        return Err(invalid("motion record shorter than the response history"));
    }
    let absolute = measured_acceleration_history(model, &truth, sensors)?;

    let mut names = vec!["base".to_string()];
    names.extend(sensors.labels().iter().cloned());
    let mut data = vec![motion.channel(0)[..truth.len()].to_vec()];
    for c in 0..absolute.channel_count() {
        data.push(absolute.channel(c).to_vec());
    }
    let clean = TimeSeries::new(truth.dt, names, data)?;
    let measured = if rho > 0.0 {
        let noise = synthesize_noise(&clean, rho, seed)?;
        let data: Vec<Vec<f64>> = (0..clean.channel_count())
            .map(|c| {
                clean
                    .channel(c)
                    .iter()
                    .zip(noise.channel(c))
                    .map(|(s, n)| s + n)
                    .collect()
            })
            .collect();
        TimeSeries::new(clean.dt(), clean.names().to_vec(), data)?
    } else {
        clean
    };
    measured.write_csv(out)?;
    Ok(measured)
}

/// Gain design artifact: the optimized per-sensor gains plus everything
/// needed to audit or reuse the design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainsFile {
    /// Gain per sensor label.
    pub entries: BTreeMap<String, f64>,
    /// Objective value at the optimum.
    pub objective_value: f64,
    /// Two-sided process-disturbance PSD level used in the design.
    pub process_level: f64,
    /// Two-sided measurement-noise PSD level used in the design.
    pub noise_level: f64,
    /// Objective evaluations spent.
    pub evaluations: usize,
    /// Displacement-error covariance at the optimum (row-major).
    pub covariance: Vec<Vec<f64>>,
}

impl GainsFile {
    /// Reads a gains file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read gains {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| invalid(format!("bad gains {}: {e}", path.display())))
    }

    /// Gain matrix in sensor order.
    pub fn gain(&self, sensors: &SensorMap) -> Result<GainMatrix> {
        GainMatrix::from_named(&self.entries, sensors).map_err(Into::into)
    }

    /// Error covariance as a matrix.
    pub fn covariance_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.covariance.len();
        if self.covariance.iter().any(|row| row.len() != n) {
            return Err(invalid("gains covariance is not square"));
        }
        let flat: Vec<f64> = self.covariance.iter().flatten().copied().collect();
        Ok(DMatrix::from_row_slice(n, n, &flat))
    }
}

/// Designs the observer gain from the persisted measurements and writes
/// `gains.json`.
///
/// Disturbance levels come from the config when given, otherwise they are
/// inferred from the records: the process level from the base channel's
/// RMS, the noise level from the configured noise fraction of the mean
/// sensor RMS.
pub fn design_gain(
    config: &TwinExperimentConfig,
    observer_model: &StructuralModel,
    sensors: &SensorMap,
    measurements_path: &Path,
    out: &Path,
) -> Result<GainsFile> {
    let measurements = TimeSeries::read_csv(measurements_path)?;
    if measurements.channel_count() != sensors.len() + 1 {
        return Err(invalid(format!(
            "measurements have {} channels, expected base + {} sensors",
            measurements.channel_count(),
            sensors.len()
        )));
    }
    let dt = measurements.dt();
    let process_level = match config.observer.process_level {
        Some(level) => level,
        None => noise_level_from_rms(measurements.rms(0), dt),
    };
    let noise_level = match config.observer.noise_level {
        Some(level) => level,
        None => {
            let mean_rms = (1..measurements.channel_count())
                .map(|c| measurements.rms(c))
                .sum::<f64>()
                / sensors.len() as f64;
            noise_level_from_rms(config.noise_rho * mean_rms, dt)
        }
    };
    let spec = DisturbanceSpec::new(process_level, noise_level)?;
    let b2 = ground_disturbance_influence(observer_model);
    let optimized = optimize_gain(
        observer_model,
        sensors,
        &spec,
        &b2,
        config.objective.into(),
        &GainSearchOptions::default(),
    )?;
    let p = optimized.covariance.matrix();
    let gains = GainsFile {
        entries: optimized.gain.to_named(sensors)?,
        objective_value: optimized.objective_value,
        process_level,
        noise_level,
        evaluations: optimized.evaluations,
        covariance: (0..p.nrows())
            .map(|i| (0..p.ncols()).map(|j| p[(i, j)]).collect())
            .collect(),
    };
    std::fs::write(out, serde_json::to_string_pretty(&gains)?)?;
    Ok(gains)
}

/// Runs the observer from persisted measurements and gains into `out_dir`.
///
/// Feedback velocities follow field practice: subtract the base-instrument
/// record from each sensor channel, then integrate the relative
/// accelerations (with the configured high-pass corner).
pub fn observe(
    config: &TwinExperimentConfig,
    observer_model: &StructuralModel,
    sensors: &SensorMap,
    gains_path: &Path,
    measurements_path: &Path,
    out_dir: &Path,
) -> Result<()> {
    let measurements = TimeSeries::read_csv(measurements_path)?;
    if measurements.channel_count() != sensors.len() + 1 {
        return Err(invalid(format!(
            "measurements have {} channels, expected base + {} sensors",
            measurements.channel_count(),
            sensors.len()
        )));
    }
    let base = measurements.channel(0);
    let relative: Vec<Vec<f64>> = (1..measurements.channel_count())
        .map(|c| {
            measurements
                .channel(c)
                .iter()
                .zip(base)
                .map(|(a, g)| a - g)
                .collect()
        })
        .collect();
    let relative = TimeSeries::new(
        measurements.dt(),
        measurements.names()[1..].to_vec(),
        relative,
    )?;
    let velocities = velocity_from_acceleration(&relative, config.cutoff_hz)?;

    let gains = GainsFile::load(gains_path)?;
    let gain = gains.gain(sensors)?;
    let mut nmbo = build_nmbo(observer_model, sensors, &gain)?;
    let history = run_observer(
        &mut nmbo,
        sensors,
        &gain,
        &velocities,
        &NewmarkOptions::with_dt(measurements.dt()),
    )?;
    save_history(&history, out_dir)?;
    Ok(())
}

/// Assesses a persisted response and writes `report.json` plus the
/// plot-data bundle into `out_dir`.
///
/// `model` must be the variant that produced the history (so the energy
/// balance sees the right damping), `info` carries the capacities, and
/// `covariance` feeds the drift uncertainty when available.
pub fn assess(
    model: &StructuralModel,
    info: &[ElementInfo],
    psi: f64,
    response_dir: &Path,
    covariance: Option<&DMatrix<f64>>,
    out_dir: &Path,
) -> Result<(DamageReport, Vec<PathBuf>)> {
    let history = load_history(response_dir)?;
    let thresholds = DriftThresholds::default();
    let (report, ledger) = build_report(model, info, &history, covariance, &thresholds, psi)?;
    std::fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join("report.json");
    report.write(&report_path)?;
    let mut files = vec![report_path];
    files.extend(emit_plotdata(&report, Some(&ledger), out_dir)?);
    Ok((report, files))
}

/// What an [`assess_run`] call should assess the response as.
#[derive(Debug, Clone)]
pub enum AssessTarget {
    /// A forward simulation of the given model variant.
    Variant(ModelVariant),
    /// An observer run; the gains file supplies the added dampers (for the
    /// energy balance) and the drift-uncertainty covariance.
    ObserverRun { gains: PathBuf },
}

/// Standalone assessment of a persisted response directory.
///
/// Resolves the right model for the history — the variant that produced a
/// forward run, or the gain-augmented observer — then delegates to
/// [`assess`].  Capacities always come from the nominal model except for
/// truth-variant assessments, which use the degraded properties.
pub fn assess_run(
    config: &TwinExperimentConfig,
    target: &AssessTarget,
    response_dir: &Path,
    out_dir: &Path,
) -> Result<(DamageReport, Vec<PathBuf>)> {
    match target {
        AssessTarget::Variant(variant) => {
            let (file, model, info) = build_variant(config, *variant)?;
            assess(&model, &info, file.psi, response_dir, None, out_dir)
        }
        AssessTarget::ObserverRun { gains } => {
            let (file, observer_model, _) = build_variant(config, ModelVariant::Observer)?;
            let (_, _, info) = build_variant(config, ModelVariant::Nominal)?;
            let sensors = sensor_map(config, &observer_model)?;
            let gains = GainsFile::load(gains)?;
            let gain = gains.gain(&sensors)?;
            let model = build_nmbo(&observer_model, &sensors, &gain)?;
            let covariance = gains.covariance_matrix()?;
            assess(&model, &info, file.psi, response_dir, Some(&covariance), out_dir)
        }
    }
}

/// Localization metrics of a twin run with known damage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationSummary {
    /// Element ids by decreasing observer damage index.
    pub ranking: Vec<usize>,
    /// Fraction of damaged elements inside the top `|damaged|` ranks.
    pub top_k_hit_rate: f64,
    /// Spearman correlation between observer DI and truth dissipation.
    pub spearman: f64,
    /// The damaged element ids the run was scored against.
    pub damaged: Vec<usize>,
}

/// Estimate-vs-truth scores of one twin run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwinScoring {
    /// Per-equation displacement RMS error relative to the truth RMS.
    pub disp_rms_error: Vec<f64>,
    /// Per-story relative error of the peak drift ratio.
    pub isd_max_error: Vec<f64>,
    /// Governing class of the truth assessment.
    pub governing_truth: PerformanceClass,
    /// Governing class of the observer assessment.
    pub governing_observer: PerformanceClass,
    /// Localization metrics when the config declares damage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localization: Option<LocalizationSummary>,
}

/// Everything a twin run produces, beyond the files on disk.
#[derive(Debug, Clone)]
pub struct TwinArtifacts {
    /// Observer-side damage report.
    pub report: DamageReport,
    /// Truth-side damage report (the scoring reference).
    pub truth_report: DamageReport,
    /// Estimate-vs-truth scores.
    pub scoring: TwinScoring,
}

/// Runs the full twin pipeline into `out_dir` and writes `manifest.json`.
///
/// On a stage failure the partial manifest (with the failed stage tagged)
/// is still written before the error propagates.
pub fn run_twin(config: &TwinExperimentConfig, out_dir: &Path) -> Result<(RunManifest, TwinArtifacts)> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::new(config.hash(), config.seed);
    let outcome = run_twin_stages(config, out_dir, &mut manifest);
    manifest.write(&out_dir.join("manifest.json"))?;
    outcome.map(|artifacts| (manifest, artifacts))
}

fn run_twin_stages(
    config: &TwinExperimentConfig,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<TwinArtifacts> {
    let motion_path = out.join("motion.csv");
    let truth_dir = out.join("truth");
    let measurements_path = out.join("measurements.csv");
    let gains_path = out.join("gains.json");
    let observer_dir = out.join("observer");

    let (file, truth_model, truth_info) = build_variant(config, ModelVariant::Truth)?;
    let (_, observer_model, _) = build_variant(config, ModelVariant::Observer)?;
    let (_, _, nominal_info) = build_variant(config, ModelVariant::Nominal)?;
    let sensors = sensor_map(config, &truth_model)?;

    manifest.run_stage("gen-motion", out, || {
        gen_motion(config, config.seed, &motion_path)?;
        Ok(((), vec![motion_path.clone()]))
    })?;

    manifest.run_stage("simulate", out, || {
        simulate(&truth_model, &motion_path, config.dt, &truth_dir)?;
        Ok(((), history_files(&truth_dir)))
    })?;

    manifest.run_stage("sense", out, || {
        sense(
            &truth_model,
            &sensors,
            &truth_dir,
            &motion_path,
            config.noise_rho,
            config.seed.wrapping_add(1),
            &measurements_path,
        )?;
        Ok(((), vec![measurements_path.clone()]))
    })?;

    let gains = manifest.run_stage("optimize-gain", out, || {
        let gains =
            design_gain(config, &observer_model, &sensors, &measurements_path, &gains_path)?;
        Ok((gains, vec![gains_path.clone()]))
    })?;

    manifest.run_stage("observe", out, || {
        observe(
            config,
            &observer_model,
            &sensors,
            &gains_path,
            &measurements_path,
            &observer_dir,
        )?;
        Ok(((), history_files(&observer_dir)))
    })?;

    let (report, truth_report) = manifest.run_stage("assess", out, || {
        // The observer history was produced by the gain-augmented model;
        // assess it as such so its energy balance closes.
        let gain = gains.gain(&sensors)?;
        let nmbo = build_nmbo(&observer_model, &sensors, &gain)?;
        let covariance = gains.covariance_matrix()?;
        let (report, mut files) = assess(
            &nmbo,
            &nominal_info,
            file.psi,
            &observer_dir,
            Some(&covariance),
            out,
        )?;
        // Truth assessment: the scoring reference, with the truth model's
        // own capacities.
        let truth_history = load_history(&truth_dir)?;
        let (truth_report, _) = build_report(
            &truth_model,
            &truth_info,
            &truth_history,
            None,
            &DriftThresholds::default(),
            file.psi,
        )?;
        let truth_path = out.join("truth_report.json");
        truth_report.write(&truth_path)?;
        files.push(truth_path);
        Ok(((report, truth_report), files))
    })?;

    let scoring = manifest.run_stage("score", out, || {
        let scoring = score_twin(config, out, &report, &truth_report)?;
        let twin_path = out.join("twin.json");
        std::fs::write(&twin_path, serde_json::to_string_pretty(&scoring)?)?;
        Ok((scoring, vec![twin_path]))
    })?;

    Ok(TwinArtifacts { report, truth_report, scoring })
}

/// The files a persisted response directory consists of.
fn history_files(dir: &Path) -> Vec<PathBuf> {
    ["meta.json", "state.csv", "elements.csv"]
        .iter()
        .map(|f| dir.join(f))
        .filter(|p| p.exists())
        .collect()
}

/// Scores the observer run against the truth run.
fn score_twin(
    config: &TwinExperimentConfig,
    out: &Path,
    report: &DamageReport,
    truth_report: &DamageReport,
) -> Result<TwinScoring> {
    let truth = load_history(&out.join("truth"))?;
    let observer = load_history(&out.join("observer"))?;
    let n = truth.len().min(observer.len());
    if n == 0 {
        return Err(invalid("empty histories cannot be scored"));
    }
    let n_eq = truth.disp[0].len();
    let mut err_sq = vec![0.0; n_eq];
    let mut ref_sq = vec![0.0; n_eq];
    for k in 0..n {
        for eq in 0..n_eq {
            let d = observer.disp[k][eq] - truth.disp[k][eq];
            err_sq[eq] += d * d;
            ref_sq[eq] += truth.disp[k][eq] * truth.disp[k][eq];
        }
    }
    let disp_rms_error = err_sq
        .iter()
        .zip(&ref_sq)
        .map(|(e, r)| if *r > 0.0 { (e / r).sqrt() } else { 0.0 })
        .collect();

    let isd_max_error = report
        .stories
        .iter()
        .zip(&truth_report.stories)
        .map(|(o, t)| {
            if t.isd_max > 0.0 {
                (o.isd_max - t.isd_max).abs() / t.isd_max
            } else {
                0.0
            }
        })
        .collect();

    let localization = if config.damage.is_empty() {
        None
    } else {
        // Hysteretic-energy roundoff crumbs (work-integration residue many
        // orders below the dissipating elements) would otherwise outrank the
        // exactly-elastic elements and distort the rank correlation.
        let peak_energy = truth_report
            .elements
            .iter()
            .map(|t| t.e_h)
            .fold(0.0_f64, f64::max);
        let floor = 1.0e-9 * peak_energy;
        let scores: Vec<ElementScore> = report
            .elements
            .iter()
            .zip(&truth_report.elements)
            .map(|(o, t)| ElementScore {
                id: o.id,
                story: None,
                di: o.di,
                reference_energy: if t.e_h < floor { 0.0 } else { t.e_h },
            })
            .collect();
        let damaged = config.damaged_elements();
        let summary = localization_report(&scores, &damaged)?;
        Some(LocalizationSummary {
            ranking: summary.ranking,
            top_k_hit_rate: summary.top_k_hit_rate,
            spearman: summary.spearman,
            damaged,
        })
    };

    Ok(TwinScoring {
        disp_rms_error,
        isd_max_error,
        governing_truth: truth_report.governing_class(),
        governing_observer: report.governing_class(),
        localization,
    })
}
