//! Measurement preprocessing: acceleration records → velocity records.
//!
//! Recorded accelerations carry sensor offsets and baseline shifts that turn
//! into drift under integration.  The pipeline is trapezoidal integration
//! followed by an optional zero-phase (forward-backward) fourth-order
//! Butterworth high-pass.  Zero phase matters: the velocities drive feedback
//! forces, and a phase lag there acts like negative damping.

use hystereo_core::timeseries::TimeSeries;

use crate::error::{invalid, Result};

/// Cumulative trapezoidal integral with zero initial value.
pub fn cumulative_trapezoid(x: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in x.windows(2) {
        acc += 0.5 * dt * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}

/// One second-order filter section, normalized (a0 = 1).
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    /// High-pass section at `cutoff_hz` with the given quality factor
    /// (bilinear transform of the analog prototype, prewarped).
    fn highpass(cutoff_hz: f64, dt: f64, q: f64) -> Self {
        let w0 = std::f64::consts::TAU * cutoff_hz * dt;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 + cos) / (2.0 * a0),
            b1: -(1.0 + cos) / a0,
            b2: (1.0 + cos) / (2.0 * a0),
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    /// Runs the section over `x` in place (direct form II transposed).
    ///
    /// The state is seeded so a constant input equal to `x[0]` would pass
    /// through in steady state; without this the zero-state step transient
    /// decays on the scale of `1/cutoff` and bleeds into the record even
    /// through generous padding.
    fn run(&self, x: &mut [f64]) {
        let x0 = x.first().copied().unwrap_or(0.0);
        let dc = (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2);
        let mut s1 = (dc - self.b0) * x0;
        let mut s2 = (dc * (1.0 + self.a1) - self.b0 - self.b1) * x0;
        for v in x.iter_mut() {
            let y = self.b0 * *v + s1;
            s1 = self.b1 * *v - self.a1 * y + s2;
            s2 = self.b2 * *v - self.a2 * y;
            *v = y;
        }
    }
}

/// Butterworth order-4 = two cascaded sections with Q = 1/(2 cos(pi/8)) and
/// 1/(2 cos(3 pi/8)).
fn butterworth4_highpass(cutoff_hz: f64, dt: f64) -> [Biquad; 2] {
    let q1 = 0.5 / (std::f64::consts::PI / 8.0).cos();
    let q2 = 0.5 / (3.0 * std::f64::consts::PI / 8.0).cos();
    [Biquad::highpass(cutoff_hz, dt, q1), Biquad::highpass(cutoff_hz, dt, q2)]
}

/// Zero-phase fourth-order Butterworth high-pass.
///
/// The straight line through the record endpoints is removed first: that
/// component is below any sensible cutoff (the filter would discard it
/// anyway), and with it gone both ends sit at zero, so the odd-reflection
/// padding carries no offset jump into the filter.  The padded record is
/// run forward and backward through the cascade and cropped back.
///
/// As with any zero-phase filter on a finite record, fidelity in the outer
/// few multiples of `1/cutoff_hz` seconds depends on the record starting
/// and ending near rest; integrated seismic velocity records do.
///
/// # Errors
/// The cutoff must sit strictly below the Nyquist frequency `1/(2 dt)`.
pub fn highpass_zero_phase(x: &[f64], dt: f64, cutoff_hz: f64) -> Result<Vec<f64>> {
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0) {
        return Err(invalid("high-pass cutoff must be finite and positive"));
    }
    if cutoff_hz >= 0.5 / dt {
        return Err(invalid(format!(
            "high-pass cutoff {cutoff_hz} Hz is at or above Nyquist {} Hz",
            0.5 / dt
        )));
    }
    let n = x.len();
    if n < 4 {
        return Err(invalid("record too short to filter"));
    }
    let slope = (x[n - 1] - x[0]) / (n - 1) as f64;
    let line = |i: usize| x[0] + slope * i as f64;
    // Long enough padding for the transient of a low cutoff to die out.
    let pad = ((1.5 / (cutoff_hz * dt)).ceil() as usize).min(n - 1);
    let mut buf = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        buf.push(line(i) - x[i]);
    }
    buf.extend((0..n).map(|i| x[i] - line(i)));
    for i in 1..=pad {
        buf.push(line(n - 1 - i) - x[n - 1 - i]);
    }

    let sections = butterworth4_highpass(cutoff_hz, dt);
    for section in &sections {
        section.run(&mut buf);
    }
    buf.reverse();
    for section in &sections {
        section.run(&mut buf);
    }
    buf.reverse();
    Ok(buf[pad..pad + n].to_vec())
}

/// Converts acceleration channels to velocity channels: trapezoidal
/// integration, then (for `cutoff_hz > 0`) the zero-phase high-pass to strip
/// baseline drift.  `cutoff_hz = 0` disables filtering entirely.
pub fn velocity_from_acceleration(accel: &TimeSeries, cutoff_hz: f64) -> Result<TimeSeries> {
    if !(cutoff_hz.is_finite() && cutoff_hz >= 0.0) {
        return Err(invalid("high-pass cutoff must be finite and nonnegative"));
    }
    let dt = accel.dt();
    let mut channels = Vec::with_capacity(accel.channel_count());
    for c in 0..accel.channel_count() {
        let mut v = cumulative_trapezoid(accel.channel(c), dt);
        if cutoff_hz > 0.0 {
            v = highpass_zero_phase(&v, dt, cutoff_hz)?;
        }
        channels.push(v);
    }
    TimeSeries::new(dt, accel.names().to_vec(), channels).map_err(Into::into)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn series(dt: f64, x: Vec<f64>) -> TimeSeries {
        TimeSeries::single(dt, "a", x).unwrap()
    }

    #[test]
    fn integrates_cosine_to_scaled_sine() {
        // a = A cos(w t) -> v = (A/w) sin(w t); 2 Hz content sails through a
        // 0.1 Hz cutoff.  The record spans whole periods so the velocity
        // ends at rest, as integrated field records do; truncating a record
        // mid-swing degrades any finite-record zero-phase filter near the
        // cut.
        let (dt, n, amp) = (0.005, 4001usize, 1.3);
        let w = std::f64::consts::TAU * 2.0;
        let accel: Vec<f64> = (0..n).map(|i| amp * (w * i as f64 * dt).cos()).collect();
        let vel = velocity_from_acceleration(&series(dt, accel), 0.1).unwrap();
        let v = vel.channel(0);
        let peak = v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        assert_relative_eq!(peak, amp / w, max_relative = 0.02);
        // Interior samples track the closed form pointwise, not just in peak.
        for i in 400..n - 400 {
            let exact = amp / w * (w * i as f64 * dt).sin();
            assert_abs_diff_eq!(v[i], exact, epsilon = 0.02 * amp / w);
        }
    }

    #[test]
    fn constant_bias_produces_negligible_velocity() {
        // A 0.5 m/s^2 offset integrates to a 20 m/s ramp; the high-pass has
        // to eat essentially all of it.
        let (dt, n, bias) = (0.01, 4000usize, 0.5);
        let vel = velocity_from_acceleration(&series(dt, vec![bias; n]), 0.1).unwrap();
        let rms = vel.rms(0);
        assert!(rms < 0.01 * bias * (n as f64 * dt), "rms {rms}");
    }

    #[test]
    fn zero_cutoff_recovers_linear_drift_exactly() {
        let (dt, n, bias) = (0.02, 500usize, 0.3);
        let vel = velocity_from_acceleration(&series(dt, vec![bias; n]), 0.0).unwrap();
        for (i, &v) in vel.channel(0).iter().enumerate() {
            assert_abs_diff_eq!(v, bias * i as f64 * dt, epsilon = 1e-12);
        }
    }

    #[test]
    fn filter_is_zero_phase_and_unity_gain_in_passband() {
        // Whole periods again: the sine ends on its zero crossing.
        let (dt, n) = (0.005, 8001usize);
        let w = std::f64::consts::TAU * 1.0;
        let x: Vec<f64> = (0..n).map(|i| (w * i as f64 * dt).sin()).collect();
        let y = highpass_zero_phase(&x, dt, 0.1).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(y[i], x[i], epsilon = 0.02);
        }
    }

    #[test]
    fn stopband_attenuation_is_eighth_order() {
        // 0.01 Hz tone against a 0.1 Hz cutoff: two passes of a 4th-order
        // filter leave ~1e-8 of the amplitude; assert a conservative 1e-3.
        let (dt, n) = (0.05, 20_000usize);
        let w = std::f64::consts::TAU * 0.01;
        let x: Vec<f64> = (0..n).map(|i| (w * i as f64 * dt).sin()).collect();
        let y = highpass_zero_phase(&x, dt, 0.1).unwrap();
        let peak = y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(peak < 1e-3, "stopband leak {peak}");
    }

    #[test]
    fn cutoff_at_or_above_nyquist_is_rejected() {
        let x = vec![0.0; 100];
        assert!(highpass_zero_phase(&x, 0.01, 50.0).is_err());
        assert!(highpass_zero_phase(&x, 0.01, 60.0).is_err());
        assert!(highpass_zero_phase(&x, 0.01, 49.0).is_ok());
        assert!(velocity_from_acceleration(&series(0.01, vec![0.0; 100]), -1.0).is_err());
    }
}
