//! Discrete spectra: scaled Fourier amplitudes, one-sided periodograms, and
//! the smoothing used by the intensity calibration.
//!
//! Conventions: for a record of `M` samples at spacing `dt` (total `T = M
//! dt`), the DFT is scaled by `dt` so amplitudes approximate the continuous
//! Fourier transform, and the one-sided PSD estimate is
//! `S(w_k) = |X_k|^2 / (pi T)`.  With these scales the integral of `S` over
//! the positive-frequency band recovers the sample variance (Parseval).

use num_complex::Complex;
use rustfft::FftPlanner;

/// Frequency spacing of the length-`m` DFT grid: `2 pi / (m dt)` [rad/s].
pub fn delta_omega(m: usize, dt: f64) -> f64 {
    2.0 * std::f64::consts::PI / (m as f64 * dt)
}

/// dt-scaled DFT of a real record; returns bins `k = 0..=m/2`.
pub fn fourier_transform(x: &[f64], dt: f64) -> Vec<Complex<f64>> {
    let m = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.truncate(m / 2 + 1);
    for c in &mut buf {
        *c *= dt;
    }
    buf
}

/// Fourier amplitude spectrum `|X_k|` at bins `k = 0..=m/2`.
pub fn fourier_amplitudes(x: &[f64], dt: f64) -> Vec<f64> {
    fourier_transform(x, dt).iter().map(|c| c.norm()).collect()
}

/// One-sided PSD estimate at `w_k = k delta_omega`, bins `k = 1..=m/2`.
///
/// # Returns
/// `(frequencies, psd)` with `sum(psd) * delta_omega ~= sample variance`.
pub fn periodogram(x: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let m = x.len();
    let t = m as f64 * dt;
    let dw = delta_omega(m, dt);
    let spec = fourier_transform(x, dt);
    let mut freqs = Vec::with_capacity(m / 2);
    let mut psd = Vec::with_capacity(m / 2);
    for (k, c) in spec.iter().enumerate().skip(1) {
        freqs.push(k as f64 * dw);
        psd.push(c.norm_sqr() / (std::f64::consts::PI * t));
    }
    psd.truncate(m / 2);
    freqs.truncate(m / 2);
    (freqs, psd)
}

/// Centered moving average with an odd `window`; edges use the available
/// (truncated) neighborhood.
pub fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    assert!(window % 2 == 1, "smoothing window must be odd");
    let half = window / 2;
    let n = x.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}
