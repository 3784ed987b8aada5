//! Sensor layout and feedback-gain containers.
//!
//! A sensor map is a Boolean selection of measured equations (one sensor per
//! selected DoF); the gain is a nonnegative diagonal over those sensors.
//! The feedback term the gain induces on the model is the grounded-damper
//! matrix `c2' E c2`, which touches only the measured diagonal entries.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Which equations are instrumented, and what the channels are called.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorMap {
    equations: Vec<usize>,
    labels: Vec<String>,
    n_dof: usize,
}

impl SensorMap {
    /// Sensor at each listed equation (0-based) of an `n_dof`-equation model;
    /// labels default to `dof<eq>`.
    pub fn new(equations: Vec<usize>, n_dof: usize) -> Result<Self> {
        let labels = equations.iter().map(|eq| format!("dof{eq}")).collect();
        Self::with_labels(equations, labels, n_dof)
    }

    /// Sensor map with explicit channel labels.
    pub fn with_labels(equations: Vec<usize>, labels: Vec<String>, n_dof: usize) -> Result<Self> {
        if equations.is_empty() {
            return Err(invalid("sensor map needs at least one sensor"));
        }
        if labels.len() != equations.len() {
            return Err(invalid("one label per sensor required"));
        }
        for (i, &eq) in equations.iter().enumerate() {
            if eq >= n_dof {
                return Err(invalid(format!("sensor equation {eq} out of range (n = {n_dof})")));
            }
            if equations[..i].contains(&eq) {
                return Err(invalid(format!("duplicate sensor at equation {eq}")));
            }
        }
        Ok(Self { equations, labels, n_dof })
    }

    /// Number of sensors `m`.
    pub fn len(&self) -> usize {
        self.equations.len()
    }

    /// True when no sensors are defined (never constructible via `new`).
    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Measured equation indices, in channel order.
    pub fn equations(&self) -> &[usize] {
        &self.equations
    }

    /// Channel labels, in channel order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Model size the map was built for.
    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    /// Applies the selection (an `m x n` Boolean row picker) to a state
    /// vector: returns the measured subvector.
    pub fn select(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.equations.iter().map(|&eq| v[eq]))
    }

    /// Applies the transpose of the selection: scatters measured values back
    /// to full length, zeros elsewhere.
    pub fn scatter(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.n_dof);
        for (c, &eq) in self.equations.iter().enumerate() {
            v[eq] = y[c];
        }
        v
    }

    /// Dense `m x n` selection matrix (one 1 per row).
    pub fn selection_matrix(&self) -> DMatrix<f64> {
        let mut c2 = DMatrix::zeros(self.len(), self.n_dof);
        for (row, &eq) in self.equations.iter().enumerate() {
            c2[(row, eq)] = 1.0;
        }
        c2
    }
}

/// Diagonal velocity-feedback gain, one nonnegative entry per sensor
/// [N·s/m].  Off-diagonal coupling is intentionally not representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainMatrix {
    entries: Vec<f64>,
}

impl GainMatrix {
    /// Gain with the given diagonal entries, one per sensor channel.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("gain needs at least one entry"));
        }
        for &e in &entries {
            if !(e.is_finite() && e >= 0.0) {
                return Err(invalid(format!("gain entries must be finite and >= 0, got {e}")));
            }
        }
        Ok(Self { entries })
    }

    /// Same value on every channel.
    pub fn uniform(value: f64, channels: usize) -> Result<Self> {
        Self::new(vec![value; channels])
    }

    /// All-zero gain (observer reduces to an unforced model copy).
    pub fn zeros(channels: usize) -> Self {
        Self { entries: vec![0.0; channels] }
    }

    /// Diagonal entries in channel order.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Number of channels.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True for a zero gain.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Feedback damping `c2' E c2`: zero except at measured diagonal
    /// entries, which receive the channel gains.
    pub fn added_damping(&self, sensors: &SensorMap) -> Result<DMatrix<f64>> {
        self.check_channels(sensors)?;
        let mut c = DMatrix::zeros(sensors.n_dof(), sensors.n_dof());
        for (channel, &eq) in sensors.equations().iter().enumerate() {
            c[(eq, eq)] = self.entries[channel];
        }
        Ok(c)
    }

    /// Keyed form used by the gain files: measured equation -> entry.
    pub fn to_named(&self, sensors: &SensorMap) -> Result<BTreeMap<String, f64>> {
        self.check_channels(sensors)?;
        Ok(sensors
            .equations()
            .iter()
            .zip(&self.entries)
            .map(|(eq, &e)| (eq.to_string(), e))
            .collect())
    }

    /// Inverse of [`GainMatrix::to_named`]; every sensor must be present.
    pub fn from_named(named: &BTreeMap<String, f64>, sensors: &SensorMap) -> Result<Self> {
        let entries = sensors
            .equations()
            .iter()
            .map(|eq| {
                named
                    .get(&eq.to_string())
                    .copied()
                    .ok_or_else(|| invalid(format!("gain file missing entry for equation {eq}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(entries)
    }

    fn check_channels(&self, sensors: &SensorMap) -> Result<()> {
        if self.entries.len() != sensors.len() {
            return Err(invalid(format!(
                "gain has {} channels but sensor map has {}",
                self.entries.len(),
                sensors.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sensor_map_validates_indices() {
        assert!(SensorMap::new(vec![0, 2], 3).is_ok());
        assert!(SensorMap::new(vec![], 3).is_err());
        assert!(SensorMap::new(vec![3], 3).is_err());
        assert!(SensorMap::new(vec![1, 1], 3).is_err());
    }

    #[test]
    fn select_and_scatter_are_adjoint() {
        let sensors = SensorMap::new(vec![0, 3], 5).unwrap();
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = DVector::from_vec(vec![10.0, 20.0]);
        let picked = sensors.select(&v);
        assert_eq!(picked.as_slice(), &[1.0, 4.0]);
        // <c2 v, y> = <v, c2' y>
        assert_relative_eq!(picked.dot(&y), v.dot(&sensors.scatter(&y)));
        let c2 = sensors.selection_matrix();
        assert_relative_eq!((&c2 * &v - picked).norm(), 0.0);
    }

    #[test]
    fn added_damping_touches_only_measured_diagonal() {
        let sensors = SensorMap::new(vec![1, 2], 4).unwrap();
        let gain = GainMatrix::new(vec![100.0, 250.0]).unwrap();
        let c = gain.added_damping(&sensors).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (1, 1) => 100.0,
                    (2, 2) => 250.0,
                    _ => 0.0,
                };
                assert_relative_eq!(c[(i, j)], expected);
            }
        }
    }

    #[test]
    fn gain_rejects_negative_and_roundtrips_named_form() {
        assert!(GainMatrix::new(vec![1.0, -0.5]).is_err());
        assert!(GainMatrix::new(vec![f64::NAN]).is_err());
        let sensors = SensorMap::new(vec![2, 0], 4).unwrap();
        let gain = GainMatrix::new(vec![7.0, 8.0]).unwrap();
        let named = gain.to_named(&sensors).unwrap();
        assert_eq!(named.get("2"), Some(&7.0));
        assert_eq!(named.get("0"), Some(&8.0));
        let back = GainMatrix::from_named(&named, &sensors).unwrap();
        assert_eq!(back, gain);
        let wrong = GainMatrix::new(vec![1.0]).unwrap();
        assert!(wrong.to_named(&sensors).is_err());
    }
}
