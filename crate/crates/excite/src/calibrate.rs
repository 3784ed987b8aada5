//! Calibration of the white-noise intensity to a target record.
//!
//! The intensity is not solved from an equation; it is the smallest value on
//! a log-spaced grid for which an ensemble of synthetic motions is
//! statistically consistent with the target: at least 95% of the target's
//! Fourier-amplitude ordinates must fall within two standard deviations of
//! the ensemble mean amplitude.  The grid brackets a variance-matching
//! initial guess, so the search is reproducible and scales quadratically
//! with the target's amplitude, as it must.
//!
//! The band test deliberately uses *raw* amplitude ordinates.  Amplitudes of
//! enveloped records are Rayleigh-like, so mean ± 2·std covers ~96.3% of
//! ordinates at the true intensity — a real margin over the 95% threshold.
//! Averaging neighboring ordinates first would Gaussianize the statistic
//! (coverage ~95.4%) and shrink the effective ordinate count, which makes
//! the criterion fail sporadically at every candidate intensity.

use hystereo_core::timeseries::TimeSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{invalid, ExciteError, Result};
use crate::kt::{modulation, GroundMotionSpec, KanaiTajimiParams};
use crate::spectra::{delta_omega, fourier_amplitudes};
use crate::synth::synthesize_motion_with_rng;

/// Knobs for the intensity search; the defaults match the documented
/// calibration procedure.
#[derive(Debug, Clone)]
pub struct CalibrationOptions {
    /// Synthetic motions per grid point.
    pub ensemble_size: usize,
    /// Log-spaced intensity candidates.
    pub grid_points: usize,
    /// Total width of the candidate grid, in decades, centered on the
    /// variance-matching guess.
    pub grid_decades: f64,
    /// Fraction of amplitude ordinates that must fall inside the ensemble
    /// band.
    pub required_fraction: f64,
    /// Base seed; every (grid point, member) pair derives its own stream.
    pub seed: u64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            ensemble_size: 200,
            grid_points: 40,
            grid_decades: 6.0,
            required_fraction: 0.95,
            seed: 0xCA11_B8A7,
        }
    }
}

/// Outcome of a successful intensity calibration.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CalibrationReport {
    /// Smallest feasible intensity on the search grid.
    pub g0: f64,
    /// Fraction of target amplitude ordinates inside the ensemble band at
    /// the returned intensity.
    pub fraction_within_band: f64,
    /// Ensemble size used for the band statistics.
    pub ensemble_size: usize,
}

/// Calibrates the white-noise intensity so that ensembles of modulated
/// synthetic motions are spectrum-consistent with `target`.
///
/// # Errors
/// Returns a calibration failure (with the best fraction achieved) when no
/// grid candidate satisfies the band criterion, and invalid-argument errors
/// for degenerate targets or unresolvable filter parameters.
pub fn calibrate_g0(
    target: &TimeSeries,
    xi_g: f64,
    omega_g: f64,
    alpha: f64,
    opts: &CalibrationOptions,
) -> Result<CalibrationReport> {
    if opts.ensemble_size < 2 || opts.grid_points < 2 {
        return Err(invalid("calibration needs at least 2 members and 2 grid points"));
    }
    let record = target.channel(0);
    let m = record.len();
    let dt = target.dt();
    if m < 64 {
        return Err(invalid("target record too short to calibrate against"));
    }
    let variance = record.iter().map(|v| v * v).sum::<f64>() / m as f64;
    if variance <= 0.0 {
        return Err(ExciteError::CalibrationFailure {
            best_fraction: 0.0,
            best_g0: 0.0,
            required: opts.required_fraction,
        });
    }

    // Variance-matching guess: a modulated record with unit intensity has
    // time-averaged variance mean(I^2) * integral of the unit PSD over the
    // synthesis band.
    let unit = KanaiTajimiParams::new(1.0, xi_g, omega_g)?;
    let dw = delta_omega(m, dt);
    let unit_band: f64 = (1..=m / 2).map(|k| unit.psd(k as f64 * dw) * dw).sum();
    let mean_env_sq = (0..m)
        .map(|n| modulation(n as f64 * dt, alpha).powi(2))
        .sum::<f64>()
        / m as f64;
    let guess = variance / (unit_band * mean_env_sq);

    let target_amp = fourier_amplitudes(record, dt)[1..].to_vec();
    let half_span = opts.grid_decades / 2.0;

    let mut best_fraction = 0.0;
    let mut best_g0 = 0.0;
    for j in 0..opts.grid_points {
        let exponent = -half_span + opts.grid_decades * j as f64 / (opts.grid_points - 1) as f64;
        let g0 = guess * 10f64.powf(exponent);
        let spec = GroundMotionSpec {
            kt: unit.with_g0(g0),
            alpha,
            dt,
            duration: m as f64 * dt,
        };
        spec.validate()?;
        let fraction = band_fraction(&spec, &target_amp, j, opts)?;
        if fraction > best_fraction {
            best_fraction = fraction;
            best_g0 = g0;
        }
        // The grid ascends, so the first feasible candidate is the smallest.
        if fraction >= opts.required_fraction {
            return Ok(CalibrationReport {
                g0,
                fraction_within_band: fraction,
                ensemble_size: opts.ensemble_size,
            });
        }
    }
    Err(ExciteError::CalibrationFailure {
        best_fraction,
        best_g0,
        required: opts.required_fraction,
    })
}

/// Fraction of target ordinates inside mean ± 2·std of the ensemble's
/// Fourier amplitudes at one intensity candidate.
fn band_fraction(
    spec: &GroundMotionSpec,
    target_amp: &[f64],
    grid_index: usize,
    opts: &CalibrationOptions,
) -> Result<f64> {
    let spectra: Vec<Vec<f64>> = (0..opts.ensemble_size)
        .into_par_iter()
        .map(|member| -> Result<Vec<f64>> {
            // Independent, reproducible stream per (candidate, member); the
            // phases do not depend on the intensity value itself, so scaling
            // the target scales the whole search exactly.
            let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
            rng.set_stream(((grid_index as u64) << 32) | member as u64);
            let motion = synthesize_motion_with_rng(spec, &mut rng)?;
            Ok(fourier_amplitudes(motion.channel(0), spec.dt)[1..].to_vec())
        })
        .collect::<Result<_>>()?;

    let k = target_amp.len();
    let n = opts.ensemble_size as f64;
    let mut inside = 0usize;
    for ord in 0..k {
        let mean = spectra.iter().map(|s| s[ord]).sum::<f64>() / n;
        let var = spectra.iter().map(|s| (s[ord] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        if (target_amp[ord] - mean).abs() <= 2.0 * var.sqrt() {
            inside += 1;
        }
    }
    Ok(inside as f64 / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synthesize_motion;
    use approx::assert_relative_eq;

    fn quick_opts() -> CalibrationOptions {
        CalibrationOptions {
            ensemble_size: 40,
            ..CalibrationOptions::default()
        }
    }

    fn truth_spec(g0: f64) -> GroundMotionSpec {
        GroundMotionSpec {
            kt: KanaiTajimiParams::new(g0, 0.6, 12.0).unwrap(),
            alpha: 0.25,
            dt: 0.02,
            duration: 20.48,
        }
    }

    #[test]
    fn recovers_known_intensity_within_factor_two() {
        let g0_true = 0.03;
        let spec = truth_spec(g0_true);
        let target = synthesize_motion(&spec, 2024).unwrap();
        let report = calibrate_g0(&target, 0.6, 12.0, 0.25, &quick_opts()).unwrap();
        assert!(
            report.g0 / g0_true < 2.0 && g0_true / report.g0 < 2.0,
            "calibrated {} vs true {}",
            report.g0,
            g0_true
        );
        assert!(report.fraction_within_band >= 0.95);
        assert_eq!(report.ensemble_size, 40);
    }

    #[test]
    fn doubled_target_quadruples_intensity() {
        // Amplitude scales linearly with sqrt(intensity), so a x2 record must
        // calibrate to a x4 intensity; the shared phase streams make the
        // search scale-equivariant to round-off, far inside the 1.5 factor.
        let spec = truth_spec(0.02);
        let target = synthesize_motion(&spec, 77).unwrap();
        let doubled = TimeSeries::single(
            target.dt(),
            "ag",
            target.channel(0).iter().map(|v| 2.0 * v).collect(),
        )
        .unwrap();
        let base = calibrate_g0(&target, 0.6, 12.0, 0.25, &quick_opts()).unwrap();
        let scaled = calibrate_g0(&doubled, 0.6, 12.0, 0.25, &quick_opts()).unwrap();
        let ratio = scaled.g0 / base.g0;
        assert!(
            (ratio / 4.0 < 1.5) && (4.0 / ratio < 1.5),
            "intensity ratio {ratio}"
        );
        assert_relative_eq!(ratio, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn zero_target_is_a_calibration_failure() {
        let silent = TimeSeries::single(0.02, "ag", vec![0.0; 1024]).unwrap();
        match calibrate_g0(&silent, 0.6, 12.0, 0.25, &quick_opts()) {
            Err(ExciteError::CalibrationFailure { best_fraction, .. }) => {
                assert_eq!(best_fraction, 0.0)
            }
            other => panic!("expected calibration failure, got {other:?}"),
        }
    }

    #[test]
    fn larger_targets_never_calibrate_smaller() {
        let spec = truth_spec(0.01);
        let target = synthesize_motion(&spec, 5).unwrap();
        let mut last = 0.0;
        for scale in [1.0, 1.5, 3.0] {
            let scaled = TimeSeries::single(
                target.dt(),
                "ag",
                target.channel(0).iter().map(|v| scale * v).collect(),
            )
            .unwrap();
            let report = calibrate_g0(&scaled, 0.6, 12.0, 0.25, &quick_opts()).unwrap();
            assert!(report.g0 >= last, "{} < {last} at scale {scale}", report.g0);
            last = report.g0;
        }
    }
}
