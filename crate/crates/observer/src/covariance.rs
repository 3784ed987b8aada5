//! Frequency-domain estimation-error statistics of the linearized observer.
//!
//! With the structure linearized at its virgin stiffness, the estimation
//! error `e = q - q_hat` obeys
//! `M e'' + (C + c2' E c2) e' + K0 e = b2 w - c2' E v`,
//! so its PSD is `Phi_ee = H (b2 Phi_ww b2' + c2' E Phi_vv E' c2) H*` with
//! `H(w) = (-M w^2 + i w (C + c2' E c2) + K0)^{-1}`.  The displacement error
//! covariance is the frequency integral of `Phi_ee`; all PSD levels here are
//! flat and two-sided, and the one-sided trapezoid is doubled accordingly.

use hystereo_core::model::StructuralModel;
use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, ObserverError, Result};
use crate::sensors::{GainMatrix, SensorMap};

/// Flat two-sided PSD levels of the two disturbance sources.
#[derive(Debug, Clone, Copy)]
pub struct DisturbanceSpec {
    /// Process (input-uncertainty) level, entering through the `b2` pattern.
    pub process_level: f64,
    /// Measurement-noise level per velocity channel.
    pub noise_level: f64,
}

impl DisturbanceSpec {
    /// Validated spec; levels must be finite and nonnegative.
    pub fn new(process_level: f64, noise_level: f64) -> Result<Self> {
        for (name, v) in [("process", process_level), ("noise", noise_level)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} PSD level must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { process_level, noise_level })
    }
}

/// Two-sided flat PSD level of a discrete white sequence with standard
/// deviation `sigma` sampled at `dt`: the sequence's variance is spread over
/// the representable band `[-pi/dt, pi/dt]`.
pub fn noise_level_from_rms(sigma: f64, dt: f64) -> f64 {
    sigma * sigma * dt / (2.0 * std::f64::consts::PI)
}

/// Force pattern of a uniform base-acceleration uncertainty: `M b1`.
pub fn ground_disturbance_influence(model: &StructuralModel) -> DVector<f64> {
    let b1 = model.influence_lateral();
    DVector::from_iterator(
        model.n_dof(),
        model.mass().iter().zip(b1.iter()).map(|(m, b)| m * b),
    )
}

/// Uniform frequency grid `[0, omega_max]` for the covariance quadrature.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    /// Grid with `points` ordinates from 0 to `omega_max` inclusive.
    pub fn new(omega_max: f64, points: usize) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(invalid("omega_max must be finite and positive"));
        }
        if points < 16 {
            return Err(invalid("frequency grid needs at least 16 points"));
        }
        let step = omega_max / (points - 1) as f64;
        Ok(Self { omegas: (0..points).map(|i| i as f64 * step).collect() })
    }

    /// Default grid for a model: up to 4x its highest undamped natural
    /// frequency, 2048 points.
    pub fn for_model(model: &StructuralModel) -> Result<Self> {
        let (omegas, _) = model.modal()?;
        let top = omegas.last().copied().ok_or_else(|| invalid("model has no modes"))?;
        Self::new(4.0 * top, 2048)
    }

    /// Ordinates in ascending order.
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Upper integration limit [rad/s].
    pub fn omega_max(&self) -> f64 {
        *self.omegas.last().unwrap()
    }

    /// Number of ordinates.
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    /// Always false; grids have at least 16 points.
    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// Displacement-error covariance with its quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct ErrorCovariance {
    p: DMatrix<f64>,
    omega_max: f64,
    points: usize,
    tail_fraction: f64,
}

impl ErrorCovariance {
    /// Covariance matrix `P` [m^2], symmetric positive semidefinite.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Total displacement-error variance `tr(P)` [m^2].
    pub fn trace(&self) -> f64 {
        self.p.trace()
    }

    /// Drift-error objective over the given story equations (ascending by
    /// story); see [`isd_error_trace`].
    pub fn trace_isd(&self, story_equations: &[usize]) -> Result<f64> {
        isd_error_trace(&self.p, story_equations)
    }

    /// Estimated integral fraction lost beyond `omega_max` (from the
    /// asymptotic `omega^-4` decay of the integrand).
    pub fn tail_fraction(&self) -> f64 {
        self.tail_fraction
    }

    /// True when the truncated tail is estimated below 1% of the trace.
    pub fn grid_adequate(&self) -> bool {
        self.tail_fraction <= 0.01
    }

    /// Upper integration limit used [rad/s].
    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// Number of quadrature ordinates used.
    pub fn points(&self) -> usize {
        self.points
    }
}

/// Precomputed matrices of the linearized observer error dynamics.
struct LinearizedObserver {
    mass: DMatrix<f64>,
    damping: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    /// `c2' E`, one column per sensor [n x m].
    e_cols: DMatrix<f64>,
    b2: DVector<f64>,
}

impl LinearizedObserver {
    fn new(
        model: &StructuralModel,
        sensors: &SensorMap,
        gain: &GainMatrix,
        b2: &DVector<f64>,
    ) -> Result<Self> {
        let n = model.n_dof();
        if sensors.n_dof() != n {
            return Err(invalid("sensor map does not match the model size"));
        }
        if b2.len() != n {
            return Err(invalid("disturbance influence vector has wrong length"));
        }
        let damping = model.structural_damping_matrix() + gain.added_damping(sensors)?;
        let mut e_cols = DMatrix::zeros(n, sensors.len());
        for (channel, (&eq, &e)) in sensors.equations().iter().zip(gain.entries()).enumerate() {
            e_cols[(eq, channel)] = e;
        }
        Ok(Self {
            mass: model.mass_matrix(),
            damping,
            stiffness: model.initial_stiffness().clone(),
            e_cols,
            b2: b2.clone(),
        })
    }

    /// `H(omega) b2` and `H(omega) c2' E`, via one complex factorization.
    fn frequency_response(
        &self,
        omega: f64,
    ) -> Result<(DVector<Complex<f64>>, DMatrix<Complex<f64>>)> {
        let n = self.mass.nrows();
        let m = self.e_cols.ncols();
        let mut dynamic: DMatrix<Complex<f64>> = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                dynamic[(i, j)] = Complex::new(
                    self.stiffness[(i, j)] - omega * omega * self.mass[(i, j)],
                    omega * self.damping[(i, j)],
                );
            }
        }
        let mut rhs: DMatrix<Complex<f64>> = DMatrix::zeros(n, m + 1);
        for i in 0..n {
            rhs[(i, 0)] = Complex::new(self.b2[i], 0.0);
            for c in 0..m {
                rhs[(i, c + 1)] = Complex::new(self.e_cols[(i, c)], 0.0);
            }
        }
        let solved = dynamic
            .lu()
            .solve(&rhs)
            .filter(|s| s.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .ok_or(ObserverError::Singular { omega })?;
        Ok((solved.column(0).into_owned(), solved.columns(1, m).into_owned()))
    }

    /// `Phi_ee(omega)`, Hermitian positive semidefinite.
    fn psd(&self, spec: &DisturbanceSpec, omega: f64) -> Result<DMatrix<Complex<f64>>> {
        let (hb, he) = self.frequency_response(omega)?;
        let n = hb.len();
        let mut phi: DMatrix<Complex<f64>> = DMatrix::zeros(n, n);
        accumulate_outer(&mut phi, &hb, spec.process_level);
        for c in 0..he.ncols() {
            accumulate_outer(&mut phi, &he.column(c).into_owned(), spec.noise_level);
        }
        Ok(phi)
    }
}

/// `phi += level * x x^H`.
fn accumulate_outer(phi: &mut DMatrix<Complex<f64>>, x: &DVector<Complex<f64>>, level: f64) {
    let n = x.len();
    for i in 0..n {
        for j in 0..n {
            phi[(i, j)] += Complex::new(level, 0.0) * x[i] * x[j].conj();
        }
    }
}

/// Estimation-error PSD at one frequency.
///
/// `b2` is the force pattern the process noise enters through (commonly
/// [`ground_disturbance_influence`]).
///
/// # Errors
/// A singular dynamic stiffness (undamped resonance with zero total damping)
/// reports the offending frequency.
pub fn error_psd(
    model: &StructuralModel,
    sensors: &SensorMap,
    gain: &GainMatrix,
    spec: &DisturbanceSpec,
    b2: &DVector<f64>,
    omega: f64,
) -> Result<DMatrix<Complex<f64>>> {
    if !omega.is_finite() {
        return Err(invalid("frequency must be finite"));
    }
    LinearizedObserver::new(model, sensors, gain, b2)?.psd(spec, omega)
}

/// Displacement-error covariance `P = 2 * integral of Re(Phi_ee)` over
/// `[0, omega_max]` by the trapezoid rule on `grid`.
///
/// The result carries a tail-fraction diagnostic estimated from the
/// integrand's `omega^-4` asymptote; [`ErrorCovariance::grid_adequate`] is
/// the "tail below 1% of the trace" flag.
pub fn error_covariance(
    model: &StructuralModel,
    sensors: &SensorMap,
    gain: &GainMatrix,
    spec: &DisturbanceSpec,
    b2: &DVector<f64>,
    grid: &FrequencyGrid,
) -> Result<ErrorCovariance> {
    let observer = LinearizedObserver::new(model, sensors, gain, b2)?;
    let n = model.n_dof();
    let omegas = grid.omegas();
    let step = omegas[1] - omegas[0];

    let terms: Vec<DMatrix<f64>> = omegas
        .par_iter()
        .enumerate()
        .map(|(i, &omega)| -> Result<DMatrix<f64>> {
            let phi = observer.psd(spec, omega)?;
            let weight = if i == 0 || i == omegas.len() - 1 { 0.5 * step } else { step };
            // Two-sided fold: the +/- omega halves contribute conjugate
            // transposes, so the real part doubles and the rest cancels.
            Ok(phi.map(|z| z.re) * (2.0 * weight))
        })
        .collect::<Result<_>>()?;
    // Sum in grid order (not in rayon's reduction order) so repeated runs
    // produce bit-identical covariances.
    let mut p = DMatrix::zeros(n, n);
    for term in &terms {
        p += term;
    }
    // Enforce exact symmetry against round-off.
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = avg;
            p[(j, i)] = avg;
        }
    }

    // omega^-4 asymptote: integral over [omega_max, inf) of a c*omega^-4
    // integrand equals f(omega_max) * omega_max / 3.
    let tail_trace =
        2.0 * observer.psd(spec, grid.omega_max())?.map(|z| z.re).trace() * grid.omega_max() / 3.0;
    let trace = p.trace();
    let tail_fraction = if trace > 0.0 { tail_trace / trace } else { 0.0 };

    Ok(ErrorCovariance { p, omega_max: grid.omega_max(), points: grid.len(), tail_fraction })
}

/// Drift-error objective: the trace of the covariance of successive-story
/// displacement differences,
/// `P(s1,s1) + sum_k [P(sk,sk) + P(sk-1,sk-1) - 2 P(sk,sk-1)]`,
/// with `story_equations` listing each story's lateral equation bottom-up.
pub fn isd_error_trace(p: &DMatrix<f64>, story_equations: &[usize]) -> Result<f64> {
    if story_equations.is_empty() {
        return Err(invalid("no story equations given"));
    }
    for &eq in story_equations {
        if eq >= p.nrows() {
            return Err(invalid(format!("story equation {eq} outside covariance of size {}", p.nrows())));
        }
    }
    let first = story_equations[0];
    let mut total = p[(first, first)];
    for pair in story_equations.windows(2) {
        let (below, above) = (pair[0], pair[1]);
        total += p[(above, above)] + p[(below, below)] - 2.0 * p[(above, below)];
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use hystereo_core::fixtures;
    use hystereo_core::model::DampingSpec;

    fn sdof_parts() -> (StructuralModel, SensorMap, DVector<f64>) {
        let model =
            fixtures::sdof(1000.0, 2.5e6, DampingSpec::Coefficients { a0: 0.4, a1: 1.0e-5 });
        let sensors = SensorMap::new(vec![0], 1).unwrap();
        let b2 = ground_disturbance_influence(&model);
        (model, sensors, b2)
    }

    #[test]
    fn sdof_psd_matches_scalar_closed_form() {
        let (model, sensors, b2) = sdof_parts();
        let (m, k) = (1000.0, 2.5e6);
        let (a0, a1) = model.rayleigh();
        let c = a0 * m + a1 * k;
        let e = 3.0e4;
        let gain = GainMatrix::new(vec![e]).unwrap();
        let spec = DisturbanceSpec::new(0.02, 1.0e-7).unwrap();
        for &omega in &[0.0, 10.0, 50.0, 120.0] {
            let phi = error_psd(&model, &sensors, &gain, &spec, &b2, omega).unwrap();
            let h2 = 1.0
                / ((k - m * omega * omega).powi(2) + (omega * (c + e)).powi(2));
            let expected = h2 * (b2[0] * b2[0] * spec.process_level + e * e * spec.noise_level);
            assert_relative_eq!(phi[(0, 0)].re, expected, max_relative = 1e-10);
            assert_abs_diff_eq!(phi[(0, 0)].im, 0.0, epsilon = 1e-25);
        }
    }

    #[test]
    fn zero_gain_ignores_measurement_noise_entirely() {
        let (model, sensors, b2) = sdof_parts();
        let zero = GainMatrix::zeros(1);
        let clean = DisturbanceSpec::new(0.05, 0.0).unwrap();
        let noisy = DisturbanceSpec::new(0.05, 1.0e6).unwrap();
        for &omega in &[5.0, 30.0, 90.0] {
            let a = error_psd(&model, &sensors, &zero, &clean, &b2, omega).unwrap();
            let b = error_psd(&model, &sensors, &zero, &noisy, &b2, omega).unwrap();
            assert_relative_eq!(a[(0, 0)].re, b[(0, 0)].re);
        }
    }

    #[test]
    fn psd_is_hermitian_positive_semidefinite() {
        let model = fixtures::elastic_shear_building(3, 1200.0, 2.0e6, DampingSpec::RayleighModes { xi: 0.03, modes: (0, 1) });
        let sensors = SensorMap::new(vec![0, 2], 3).unwrap();
        let gain = GainMatrix::new(vec![2.0e3, 8.0e3]).unwrap();
        let spec = DisturbanceSpec::new(0.01, 1.0e-6).unwrap();
        let b2 = ground_disturbance_influence(&model);
        let phi = error_psd(&model, &sensors, &gain, &spec, &b2, 25.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(phi[(i, j)].re, phi[(j, i)].re, epsilon = 1e-18);
                assert_abs_diff_eq!(phi[(i, j)].im, -phi[(j, i)].im, epsilon = 1e-18);
            }
        }
        // z^H Phi z must be real nonnegative for arbitrary complex z.
        let z = DVector::from_vec(vec![
            Complex::new(1.0, -0.3),
            Complex::new(-0.7, 0.2),
            Complex::new(0.1, 0.9),
        ]);
        let quad = (z.adjoint() * &phi * &z)[(0, 0)];
        assert!(quad.re >= 0.0);
        assert_abs_diff_eq!(quad.im, 0.0, epsilon = 1e-12 * quad.re.abs().max(1e-18));
    }

    #[test]
    fn covariance_scales_linearly_with_levels() {
        let model = fixtures::elastic_shear_building(2, 1000.0, 2.0e6, DampingSpec::RayleighModes { xi: 0.05, modes: (0, 1) });
        let sensors = SensorMap::new(vec![1], 2).unwrap();
        let gain = GainMatrix::new(vec![5.0e3]).unwrap();
        let b2 = ground_disturbance_influence(&model);
        let grid = FrequencyGrid::for_model(&model).unwrap();
        let base = DisturbanceSpec::new(0.02, 2.0e-7).unwrap();
        let scaled = DisturbanceSpec::new(0.06, 6.0e-7).unwrap();
        let p1 = error_covariance(&model, &sensors, &gain, &base, &b2, &grid).unwrap();
        let p3 = error_covariance(&model, &sensors, &gain, &scaled, &b2, &grid).unwrap();
        assert_relative_eq!(p3.trace(), 3.0 * p1.trace(), max_relative = 1e-12);
        assert_relative_eq!(
            (p3.matrix() - p1.matrix() * 3.0).norm(),
            0.0,
            epsilon = 1e-12 * p3.matrix().norm()
        );
    }

    #[test]
    fn doubling_omega_max_barely_moves_the_trace() {
        let model = fixtures::elastic_shear_building(2, 1000.0, 2.0e6, DampingSpec::RayleighModes { xi: 0.05, modes: (0, 1) });
        let sensors = SensorMap::new(vec![0, 1], 2).unwrap();
        let gain = GainMatrix::uniform(1.0e4, 2).unwrap();
        let spec = DisturbanceSpec::new(0.02, 1.0e-7).unwrap();
        let b2 = ground_disturbance_influence(&model);
        let base = FrequencyGrid::for_model(&model).unwrap();
        let wide = FrequencyGrid::new(2.0 * base.omega_max(), 2 * base.len()).unwrap();
        let p1 = error_covariance(&model, &sensors, &gain, &spec, &b2, &base).unwrap();
        let p2 = error_covariance(&model, &sensors, &gain, &spec, &b2, &wide).unwrap();
        assert_relative_eq!(p1.trace(), p2.trace(), max_relative = 0.01);
        assert!(p1.grid_adequate(), "tail fraction {}", p1.tail_fraction());
    }

    #[test]
    fn trace_is_invariant_under_sensor_relabeling() {
        let model = fixtures::elastic_shear_building(3, 900.0, 1.8e6, DampingSpec::RayleighModes { xi: 0.04, modes: (0, 1) });
        let spec = DisturbanceSpec::new(0.03, 5.0e-7).unwrap();
        let b2 = ground_disturbance_influence(&model);
        let grid = FrequencyGrid::for_model(&model).unwrap();
        let a = error_covariance(
            &model,
            &SensorMap::new(vec![0, 1, 2], 3).unwrap(),
            &GainMatrix::new(vec![1.0e3, 2.0e3, 3.0e3]).unwrap(),
            &spec,
            &b2,
            &grid,
        )
        .unwrap();
        let b = error_covariance(
            &model,
            &SensorMap::new(vec![2, 0, 1], 3).unwrap(),
            &GainMatrix::new(vec![3.0e3, 1.0e3, 2.0e3]).unwrap(),
            &spec,
            &b2,
            &grid,
        )
        .unwrap();
        assert_relative_eq!(a.trace(), b.trace(), max_relative = 1e-12);
    }

    #[test]
    fn undamped_resonance_reports_singularity() {
        let model = fixtures::sdof(1.0, 1.0, DampingSpec::None);
        let sensors = SensorMap::new(vec![0], 1).unwrap();
        let gain = GainMatrix::zeros(1);
        let spec = DisturbanceSpec::new(1.0, 0.0).unwrap();
        let b2 = DVector::from_vec(vec![1.0]);
        match error_psd(&model, &sensors, &gain, &spec, &b2, 1.0) {
            Err(ObserverError::Singular { omega }) => assert_relative_eq!(omega, 1.0),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn isd_trace_hand_values() {
        let eye = DMatrix::<f64>::identity(3, 3);
        assert_relative_eq!(isd_error_trace(&eye, &[0, 1, 2]).unwrap(), 5.0);
        let ones = DMatrix::<f64>::from_element(3, 3, 1.0);
        assert_relative_eq!(isd_error_trace(&ones, &[0, 1, 2]).unwrap(), 1.0);
        let zero = DMatrix::<f64>::zeros(3, 3);
        assert_relative_eq!(isd_error_trace(&zero, &[0, 1, 2]).unwrap(), 0.0);
        assert!(isd_error_trace(&eye, &[]).is_err());
        assert!(isd_error_trace(&eye, &[5]).is_err());
    }

    #[test]
    fn white_noise_level_convention_roundtrips() {
        // sigma^2 = level * 2 pi / dt, so the conversion must invert it.
        let (sigma, dt) = (0.35, 0.004);
        let level = noise_level_from_rms(sigma, dt);
        assert_relative_eq!((level * 2.0 * std::f64::consts::PI / dt).sqrt(), sigma);
    }
}
