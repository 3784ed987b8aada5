//! Uniformly sampled multichannel time series and their CSV representation.
//!
//! The on-disk format is a plain CSV file with a header row `t,<name>,...`
//! and one row per sample.  Lines starting with `#` are comments and may be
//! used to carry units or provenance; they are ignored on read.

use crate::error::{CoreError, Result};
use std::fmt::Write as _;
use std::path::Path;

/// A uniformly sampled signal with one or more named channels.
///
/// Invariants: `dt > 0`, all channels share the same length, and all samples
/// are finite.  The time axis is implicit: sample `i` is at `t = i * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    names: Vec<String>,
    /// Channel-major storage: `data[c][i]` is sample `i` of channel `c`.
    data: Vec<Vec<f64>>,
}

impl TimeSeries {
    /// Builds a series from channel names and channel-major data.
    pub fn new(dt: f64, names: Vec<String>, data: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CoreError::invalid(format!("dt must be positive, got {dt}")));
        }
        if names.len() != data.len() {
            return Err(CoreError::invalid(format!(
                "{} channel names but {} channels",
                names.len(),
                data.len()
            )));
        }
        if data.is_empty() {
            return Err(CoreError::invalid("a time series needs at least one channel"));
        }
        let len = data[0].len();
        for (name, chan) in names.iter().zip(&data) {
            if chan.len() != len {
                return Err(CoreError::invalid(format!(
                    "channel {name} has {} samples, expected {len}",
                    chan.len()
                )));
            }
            if chan.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::invalid(format!("channel {name} contains non-finite samples")));
            }
        }
        Ok(TimeSeries { dt, names, data })
    }

    /// Single-channel constructor.
    pub fn single(dt: f64, name: &str, samples: Vec<f64>) -> Result<Self> {
        TimeSeries::new(dt, vec![name.to_string()], vec![samples])
    }

    /// Sampling interval in seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.data[0].len()
    }

    /// True when the series has zero samples.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total covered duration `(len - 1) * dt` (0 for empty/singleton series).
    pub fn duration(&self) -> f64 {
        self.len().saturating_sub(1) as f64 * self.dt
    }

    /// Number of channels.
    pub fn channel_count(&self) -> usize {
        self.data.len()
    }

    /// Channel names in storage order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Borrow a channel by index.
    pub fn channel(&self, index: usize) -> &[f64] {
        &self.data[index]
    }

    /// Borrow a channel by name.
    pub fn channel_by_name(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.data[i].as_slice())
    }

    /// Consumes the series, returning channel-major data.
    pub fn into_data(self) -> Vec<Vec<f64>> {
        self.data
    }

    /// Linear interpolation of channel `c` at time `t`; clamps outside the
    /// covered range (constant extrapolation).
    pub fn interp(&self, c: usize, t: f64) -> f64 {
        let chan = &self.data[c];
        if chan.is_empty() {
            return 0.0;
        }
        let x = t / self.dt;
        if x <= 0.0 {
            return chan[0];
        }
        let last = chan.len() - 1;
        if x >= last as f64 {
            return chan[last];
        }
        let i = x.floor() as usize;
        let frac = x - i as f64;
        chan[i] * (1.0 - frac) + chan[i + 1] * frac
    }

    /// Root-mean-square of a channel.
    pub fn rms(&self, c: usize) -> f64 {
        let chan = &self.data[c];
        if chan.is_empty() {
            return 0.0;
        }
        (chan.iter().map(|v| v * v).sum::<f64>() / chan.len() as f64).sqrt()
    }

    /// Serializes to the CSV interchange format.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push('t');
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{:.6}", i as f64 * self.dt);
            for chan in &self.data {
                let _ = write!(out, ",{:.9e}", chan[i]);
            }
            out.push('\n');
        }
        out
    }

    /// Writes the CSV representation to `path`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses the CSV interchange format produced by [`TimeSeries::to_csv`].
    ///
    /// The first column must be a uniform time axis starting at zero; comment
    /// lines (`#`) and blank lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| CoreError::Parse("empty time series file".into()))?;
        let mut cols = header.split(',').map(str::trim);
        match cols.next() {
            Some("t") => {}
            other => {
                return Err(CoreError::Parse(format!(
                    "first column must be 't', got {other:?}"
                )))
            }
        }
        let names: Vec<String> = cols.map(|s| s.to_string()).collect();
        if names.is_empty() {
            return Err(CoreError::Parse("time series file has no data columns".into()));
        }
        let mut times = Vec::new();
        let mut data: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (row, line) in lines.enumerate() {
            let mut fields = line.split(',');
            let t: f64 = fields
                .next()
                .unwrap()
                .trim()
                .parse()
                .map_err(|e| CoreError::Parse(format!("row {row}: bad time value ({e})")))?;
            times.push(t);
            for (c, field) in fields.enumerate() {
                if c >= names.len() {
                    return Err(CoreError::Parse(format!("row {row}: too many columns")));
                }
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| CoreError::Parse(format!("row {row}: bad value ({e})")))?;
                data[c].push(v);
            }
            if data.iter().any(|chan| chan.len() != times.len()) {
                return Err(CoreError::Parse(format!("row {row}: missing columns")));
            }
        }
        if times.len() < 2 {
            return Err(CoreError::Parse("time series needs at least two samples".into()));
        }
        let dt = times[1] - times[0];
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CoreError::Parse(format!("non-increasing time axis (dt = {dt})")));
        }
        for (i, &t) in times.iter().enumerate() {
            if (t - i as f64 * dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(CoreError::Parse(format!(
                    "time axis is not uniform at row {i}: {t} vs expected {}",
                    i as f64 * dt
                )));
            }
        }
        TimeSeries::new(dt, names, data)
    }

    /// Reads a CSV time series from `path`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        TimeSeries::from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn csv_round_trip_preserves_samples() {
        let ts = TimeSeries::new(
            0.01,
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.5, -2.25], vec![3.0, 4.0, 5.0]],
        )
        .unwrap();
        let parsed = TimeSeries::from_csv(&ts.to_csv()).unwrap();
        assert_eq!(parsed.names(), ts.names());
        assert_relative_eq!(parsed.dt(), 0.01, max_relative = 1e-12);
        for c in 0..2 {
            for i in 0..3 {
                assert_relative_eq!(parsed.channel(c)[i], ts.channel(c)[i], max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# units: m/s^2\n\nt,acc\n0.0,1.0\n0.5,2.0\n# trailing note\n1.0,3.0\n";
        let ts = TimeSeries::from_csv(text).unwrap();
        assert_eq!(ts.len(), 3);
        assert_relative_eq!(ts.dt(), 0.5);
        assert_eq!(ts.channel(0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn non_uniform_time_axis_is_rejected() {
        let text = "t,acc\n0.0,1.0\n0.1,2.0\n0.35,3.0\n";
        assert!(TimeSeries::from_csv(text).is_err());
    }

    #[test]
    fn interp_is_linear_and_clamped() {
        let ts = TimeSeries::single(1.0, "x", vec![0.0, 2.0, 4.0]).unwrap();
        assert_relative_eq!(ts.interp(0, 0.5), 1.0);
        assert_relative_eq!(ts.interp(0, 1.75), 3.5);
        assert_relative_eq!(ts.interp(0, -1.0), 0.0);
        assert_relative_eq!(ts.interp(0, 10.0), 4.0);
    }

    #[test]
    fn mismatched_channel_lengths_are_rejected() {
        let err = TimeSeries::new(0.1, vec!["a".into(), "b".into()], vec![vec![1.0], vec![1.0, 2.0]]);
        assert!(err.is_err());
    }
}
