//! Spectral synthesis of ground motions and measurement noise.
//!
//! Stationary records are built by the spectral-representation method: a sum
//! of cosines at the DFT grid frequencies with deterministic amplitudes
//! `A_k = sqrt(2 S(w_k) dw)` and independent uniform random phases.  Because
//! the amplitudes are deterministic, the one-sided periodogram of a
//! synthesized record equals the target PSD *exactly* at every grid bin,
//! which is what the intensity calibration leans on.  Evolutionary (peaked)
//! records multiply the stationary signal by the `t exp(-alpha t)` envelope.

use hystereo_core::timeseries::TimeSeries;
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::kt::{modulation, GroundMotionSpec};
use crate::spectra::delta_omega;

/// Channel name used for synthesized ground accelerations.
pub const GROUND_CHANNEL: &str = "ag";

/// Stationary zero-mean Gaussian-phase record with one-sided PSD `psd(w)`.
///
/// The record has `samples` points at spacing `dt`; harmonics live at the
/// DFT grid `w_k = k dw`, `k = 1..=samples/2`, so the sample variance equals
/// the band integral of the PSD by construction.
pub fn synthesize_stationary<F, R>(psd: F, dt: f64, samples: usize, rng: &mut R) -> Vec<f64>
where
    F: Fn(f64) -> f64,
    R: Rng + ?Sized,
{
    assert!(dt > 0.0 && samples >= 4, "need dt > 0 and at least 4 samples");
    let m = samples;
    let dw = delta_omega(m, dt);
    let mut bins = vec![Complex::new(0.0, 0.0); m];
    for (k, bin) in bins.iter_mut().enumerate().take(m / 2 + 1).skip(1) {
        let s = psd(k as f64 * dw);
        debug_assert!(s >= 0.0, "PSD must be nonnegative");
        let amplitude = (2.0 * s * dw).sqrt();
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        *bin = Complex::from_polar(amplitude, phase);
    }
    // Unnormalized inverse FFT of the positive-frequency half turns the bins
    // into sum_k A_k cos(w_k t_n + phi_k) after taking the real part.
    FftPlanner::new().plan_fft_inverse(m).process(&mut bins);
    bins.iter().map(|c| c.re).collect()
}

/// Full evolutionary ground motion for `spec`, reproducible from `seed`.
pub fn synthesize_motion(spec: &GroundMotionSpec, seed: u64) -> Result<TimeSeries> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    synthesize_motion_with_rng(spec, &mut rng)
}

/// Full evolutionary ground motion drawing phases from a caller-owned RNG.
pub fn synthesize_motion_with_rng<R>(spec: &GroundMotionSpec, rng: &mut R) -> Result<TimeSeries>
where
    R: Rng + ?Sized,
{
    spec.validate()?;
    let samples = (spec.duration / spec.dt).round() as usize;
    let mut x = synthesize_stationary(|w| spec.kt.psd(w), spec.dt, samples, rng);
    for (n, v) in x.iter_mut().enumerate() {
        *v *= modulation(n as f64 * spec.dt, spec.alpha);
    }
    TimeSeries::single(spec.dt, GROUND_CHANNEL, x).map_err(Into::into)
}

/// Discrete white Gaussian sequence matching a two-sided PSD level.
///
/// Sampling a flat two-sided spectrum `S2` over the representable band
/// `[-pi/dt, pi/dt]` gives variance `2 pi S2 / dt`, so the per-sample
/// standard deviation is `sqrt(2 pi S2 / dt)`.
pub fn white_noise<R>(level_two_sided: f64, dt: f64, samples: usize, rng: &mut R) -> Vec<f64>
where
    R: Rng + ?Sized,
{
    assert!(level_two_sided >= 0.0 && dt > 0.0);
    let sigma = (2.0 * std::f64::consts::PI * level_two_sided / dt).sqrt();
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    (0..samples).map(|_| normal.sample(rng)).collect()
}

/// Additive measurement noise scaled per channel to a fraction of its RMS.
///
/// Each channel of the returned series is an independent Gaussian sequence
/// with standard deviation `rho * rms(channel)`; the time axis matches
/// `reference`.
pub fn synthesize_noise(reference: &TimeSeries, rho: f64, seed: u64) -> Result<TimeSeries> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid("noise ratio must be finite and nonnegative"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = reference.len();
    let mut channels = Vec::with_capacity(reference.channel_count());
    for c in 0..reference.channel_count() {
        let sigma = rho * reference.rms(c);
        let normal = Normal::new(0.0, sigma).map_err(|_| invalid("non-finite noise sigma"))?;
        channels.push((0..n).map(|_| normal.sample(&mut rng)).collect::<Vec<f64>>());
    }
    TimeSeries::new(reference.dt(), reference.names().to_vec(), channels).map_err(Into::into)
}

/// Noise standard deviation implied by a per-channel RMS fraction.
pub fn noise_sigma(reference: &TimeSeries, channel: usize, rho: f64) -> f64 {
    rho * reference.rms(channel)
}
