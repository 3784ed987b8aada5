//! Uniaxial hysteretic material laws for fiber sections.
//!
//! Two laws are provided: a bilinear steel with kinematic hardening and a
//! degrading concrete (parabolic envelope, linear softening, residual
//! plateau, zero tension capacity) whose unload/reload path follows a secant
//! through a residual strain that grows with the largest compressive
//! excursion.
//!
//! All materials keep a committed state (the converged history) and a trial
//! state.  `set_trial` may be called any number of times per step; `commit`
//! freezes the last trial as history.  Stress at a trial strain is a
//! single-valued function of that strain and the committed state.

use crate::error::{ensure_finite, CoreError, Result};

/// Scalar bilinear law with kinematic hardening, usable both as a stress /
/// strain law and as a force / deformation law (e.g. story shear springs).
///
/// The post-yield tangent is exactly `hardening_ratio * stiffness`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearLaw {
    /// Initial (elastic) stiffness.
    pub stiffness: f64,
    /// Yield value in the force-like unit.
    pub yield_value: f64,
    /// Post-yield to elastic stiffness ratio, `0 <= b < 1`.
    pub hardening_ratio: f64,
    /// Plastic modulus `H = b k0 / (1 - b)` implied by the tangent target.
    plastic_modulus: f64,
}

/// History state of a [`BilinearLaw`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BilinearState {
    /// Accumulated plastic deformation.
    pub plastic: f64,
    /// Back force of the kinematic hardening rule.
    pub back: f64,
}

impl BilinearLaw {
    /// Builds the law, validating `stiffness > 0`, `yield_value > 0` and
    /// `0 <= hardening_ratio < 1`.
    pub fn new(stiffness: f64, yield_value: f64, hardening_ratio: f64) -> Result<Self> {
        ensure_finite(stiffness, "stiffness")?;
        ensure_finite(yield_value, "yield value")?;
        ensure_finite(hardening_ratio, "hardening ratio")?;
        if stiffness <= 0.0 {
            return Err(CoreError::invalid(format!("stiffness must be positive, got {stiffness}")));
        }
        if yield_value <= 0.0 {
            return Err(CoreError::invalid(format!(
                "yield value must be positive, got {yield_value}"
            )));
        }
        if !(0.0..1.0).contains(&hardening_ratio) {
            return Err(CoreError::invalid(format!(
                "hardening ratio must lie in [0, 1), got {hardening_ratio}"
            )));
        }
        let plastic_modulus = hardening_ratio * stiffness / (1.0 - hardening_ratio);
        Ok(BilinearLaw { stiffness, yield_value, hardening_ratio, plastic_modulus })
    }

    /// Radial return from the committed `state` to deformation `x`.
    ///
    /// # Returns
    /// `(force, tangent, new_state)`; the tangent is `stiffness` on the
    /// elastic branch and `hardening_ratio * stiffness` after yielding.
    pub fn trial(&self, state: BilinearState, x: f64) -> (f64, f64, BilinearState) {
        let k0 = self.stiffness;
        let h = self.plastic_modulus;
        let f_trial = k0 * (x - state.plastic);
        let xi = f_trial - state.back;
        let overshoot = xi.abs() - self.yield_value;
        if overshoot <= 0.0 {
            (f_trial, k0, state)
        } else {
            let sign = xi.signum();
            let dgamma = overshoot / (k0 + h);
            let force = f_trial - sign * k0 * dgamma;
            let new_state = BilinearState {
                plastic: state.plastic + sign * dgamma,
                back: state.back + sign * h * dgamma,
            };
            (force, self.hardening_ratio * k0, new_state)
        }
    }
}

/// Committed/trial bookkeeping of the steel law.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct SteelSnapshot {
    state: BilinearState,
    strain: f64,
    stress: f64,
}

/// Bilinear steel with kinematic hardening.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSteel {
    law: BilinearLaw,
    committed: SteelSnapshot,
    trial: SteelSnapshot,
}

impl BilinearSteel {
    /// # Arguments
    /// * `e0` - elastic modulus [Pa], positive.
    /// * `fy` - yield stress [Pa], positive.
    /// * `b` - post-yield stiffness ratio, `0 <= b < 1`.
    pub fn new(e0: f64, fy: f64, b: f64) -> Result<Self> {
        let law = BilinearLaw::new(e0, fy, b)?;
        Ok(BilinearSteel { law, committed: SteelSnapshot::default(), trial: SteelSnapshot::default() })
    }

    /// Yield strain `fy / e0`.
    pub fn yield_strain(&self) -> f64 {
        self.law.yield_value / self.law.stiffness
    }
}

/// History state of the concrete law.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ConcreteSnapshot {
    /// Most compressive strain ever committed (<= 0).
    eps_min: f64,
    /// Residual strain of the current unload/reload secant (<= 0).
    eps_p: f64,
    /// Slope of the unload/reload secant (>= 0).
    k_unload: f64,
    strain: f64,
    stress: f64,
}

/// Concrete with a parabolic envelope up to the peak, linear softening to a
/// residual plateau, zero tension capacity, and secant unload/reload through
/// a damage-dependent residual strain.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradingConcrete {
    /// Peak compressive strength magnitude [Pa].
    fpc: f64,
    /// Strain magnitude at peak strength.
    eps0: f64,
    /// Strain magnitude at the end of the softening branch.
    eps_u: f64,
    /// Residual (crushed) strength magnitude [Pa].
    fpcu: f64,
    committed: ConcreteSnapshot,
    trial: ConcreteSnapshot,
}

impl DegradingConcrete {
    /// # Arguments
    /// All magnitudes are positive; stresses and strains reported by the law
    /// are negative in compression.
    ///
    /// * `fpc` - peak compressive strength [Pa].
    /// * `eps0` - strain at peak strength.
    /// * `eps_u` - ultimate (crushing) strain, `> eps0`.
    /// * `fpcu` - residual strength on the plateau, `0 <= fpcu <= fpc`.
    pub fn new(fpc: f64, eps0: f64, eps_u: f64, fpcu: f64) -> Result<Self> {
        for (v, what) in [(fpc, "fpc"), (eps0, "eps0"), (eps_u, "eps_u"), (fpcu, "fpcu")] {
            ensure_finite(v, what)?;
        }
        if fpc <= 0.0 || eps0 <= 0.0 {
            return Err(CoreError::invalid(
                "concrete strength and peak strain must be positive magnitudes".to_string(),
            ));
        }
        if eps_u <= eps0 {
            return Err(CoreError::invalid(format!(
                "ultimate strain {eps_u} must exceed peak strain {eps0}"
            )));
        }
        if !(0.0..=fpc).contains(&fpcu) {
            return Err(CoreError::invalid(format!(
                "residual strength must lie in [0, fpc], got {fpcu}"
            )));
        }
        let virgin = ConcreteSnapshot {
            eps_min: 0.0,
            eps_p: 0.0,
            k_unload: 2.0 * fpc / eps0,
            strain: 0.0,
            stress: 0.0,
        };
        Ok(DegradingConcrete { fpc, eps0, eps_u, fpcu, committed: virgin, trial: virgin })
    }

    /// Initial tangent `2 fpc / eps0`.
    pub fn initial_modulus(&self) -> f64 {
        2.0 * self.fpc / self.eps0
    }

    /// Crushing strain (negative).
    pub fn crushing_strain(&self) -> f64 {
        -self.eps_u
    }

    /// Monotonic envelope at strain `eps <= 0`: `(stress, tangent)`.
    fn envelope(&self, eps: f64) -> (f64, f64) {
        let e = -eps; // compression magnitude
        if e <= self.eps0 {
            let r = e / self.eps0;
            let stress = -self.fpc * (2.0 * r - r * r);
            let tangent = self.initial_modulus() * (1.0 - r);
            (stress, tangent)
        } else if e < self.eps_u {
            let slope = (self.fpc - self.fpcu) / (self.eps_u - self.eps0);
            let stress = -(self.fpc - slope * (e - self.eps0));
            (stress, -slope)
        } else {
            (-self.fpcu, 0.0)
        }
    }

    /// Residual strain and secant slope for unloading from `eps_min`.
    ///
    /// The residual grows quadratically for moderate damage and linearly for
    /// heavy damage; the secant slope is capped at the initial modulus.
    fn unload_line(&self, eps_min: f64) -> (f64, f64) {
        if eps_min >= 0.0 {
            return (0.0, self.initial_modulus());
        }
        let eta = -eps_min / self.eps0;
        let mut ep = if eta < 2.0 {
            self.eps0 * (0.145 * eta * eta + 0.13 * eta)
        } else {
            self.eps0 * (0.707 * (eta - 2.0) + 0.834)
        };
        let (stress_min, _) = self.envelope(eps_min);
        let e0 = self.initial_modulus();
        let mut slope = if -eps_min > ep { -stress_min / (-eps_min - ep) } else { e0 };
        if slope > e0 {
            // Keep the secant no stiffer than the virgin tangent.
            slope = e0;
            ep = -eps_min - (-stress_min) / e0;
        }
        (-ep, slope)
    }

    /// Stress and tangent at `eps` given a committed history snapshot.
    fn respond(&self, history: &ConcreteSnapshot, eps: f64) -> (f64, f64) {
        if eps <= history.eps_min {
            self.envelope(eps)
        } else if eps >= history.eps_p {
            (0.0, 0.0) // crack open / in tension
        } else {
            (history.k_unload * (eps - history.eps_p), history.k_unload)
        }
    }
}

/// Material classification used by section capacity scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialKind {
    Steel,
    Concrete,
}

/// A uniaxial material with committed/trial state management.
#[derive(Debug, Clone, PartialEq)]
pub enum UniaxialMaterial {
    Steel(BilinearSteel),
    Concrete(DegradingConcrete),
}

impl UniaxialMaterial {
    /// Bilinear steel with kinematic hardening; see [`BilinearSteel::new`].
    pub fn bilinear_steel(e0: f64, fy: f64, b: f64) -> Result<Self> {
        Ok(UniaxialMaterial::Steel(BilinearSteel::new(e0, fy, b)?))
    }

    /// Degrading concrete; see [`DegradingConcrete::new`].
    pub fn degrading_concrete(fpc: f64, eps0: f64, eps_u: f64, fpcu: f64) -> Result<Self> {
        Ok(UniaxialMaterial::Concrete(DegradingConcrete::new(fpc, eps0, eps_u, fpcu)?))
    }

    /// Material classification.
    pub fn kind(&self) -> MaterialKind {
        match self {
            UniaxialMaterial::Steel(_) => MaterialKind::Steel,
            UniaxialMaterial::Concrete(_) => MaterialKind::Concrete,
        }
    }

    /// Stress and tangent at `strain` from the committed state, without
    /// touching the trial state.
    pub fn response(&self, strain: f64) -> Result<(f64, f64)> {
        ensure_finite(strain, "strain")?;
        Ok(match self {
            UniaxialMaterial::Steel(m) => {
                let (s, k, _) = m.law.trial(m.committed.state, strain);
                (s, k)
            }
            UniaxialMaterial::Concrete(m) => m.respond(&m.committed, strain),
        })
    }

    /// Sets the trial strain and returns `(stress, tangent)`.
    pub fn set_trial(&mut self, strain: f64) -> Result<(f64, f64)> {
        ensure_finite(strain, "strain")?;
        match self {
            UniaxialMaterial::Steel(m) => {
                let (stress, tangent, state) = m.law.trial(m.committed.state, strain);
                m.trial = SteelSnapshot { state, strain, stress };
                Ok((stress, tangent))
            }
            UniaxialMaterial::Concrete(m) => {
                let (stress, tangent) = m.respond(&m.committed, strain);
                let mut snap = m.committed;
                snap.strain = strain;
                snap.stress = stress;
                if strain < m.committed.eps_min {
                    snap.eps_min = strain;
                    let (eps_p, k_unload) = m.unload_line(strain);
                    snap.eps_p = eps_p;
                    snap.k_unload = k_unload;
                }
                m.trial = snap;
                Ok((stress, tangent))
            }
        }
    }

    /// Freezes the trial state as the new committed state.
    pub fn commit(&mut self) {
        match self {
            UniaxialMaterial::Steel(m) => m.committed = m.trial,
            UniaxialMaterial::Concrete(m) => m.committed = m.trial,
        }
    }

    /// Resets the trial state to the committed state.
    pub fn revert_to_commit(&mut self) {
        match self {
            UniaxialMaterial::Steel(m) => m.trial = m.committed,
            UniaxialMaterial::Concrete(m) => m.trial = m.committed,
        }
    }

    /// Erases all history, returning the material to the virgin state.
    pub fn reset_to_virgin(&mut self) {
        match self {
            UniaxialMaterial::Steel(m) => {
                m.committed = SteelSnapshot::default();
                m.trial = SteelSnapshot::default();
            }
            UniaxialMaterial::Concrete(m) => {
                let virgin = ConcreteSnapshot {
                    eps_min: 0.0,
                    eps_p: 0.0,
                    k_unload: 2.0 * m.fpc / m.eps0,
                    strain: 0.0,
                    stress: 0.0,
                };
                m.committed = virgin;
                m.trial = virgin;
            }
        }
    }

    /// Committed strain.
    pub fn committed_strain(&self) -> f64 {
        match self {
            UniaxialMaterial::Steel(m) => m.committed.strain,
            UniaxialMaterial::Concrete(m) => m.committed.strain,
        }
    }

    /// Committed stress.
    pub fn committed_stress(&self) -> f64 {
        match self {
            UniaxialMaterial::Steel(m) => m.committed.stress,
            UniaxialMaterial::Concrete(m) => m.committed.stress,
        }
    }

    /// Elastic (virgin) tangent.
    pub fn initial_stiffness(&self) -> f64 {
        match self {
            UniaxialMaterial::Steel(m) => m.law.stiffness,
            UniaxialMaterial::Concrete(m) => m.initial_modulus(),
        }
    }

    /// Slope of the unloading path from the committed state; used to split
    /// recoverable from dissipated energy.
    pub fn unloading_stiffness(&self) -> f64 {
        match self {
            UniaxialMaterial::Steel(m) => m.law.stiffness,
            UniaxialMaterial::Concrete(m) => {
                if m.committed.strain >= m.committed.eps_p {
                    0.0 // crack open: nothing stored
                } else {
                    m.committed.k_unload
                }
            }
        }
    }

    /// Steel yield strain, if this is a steel law.
    pub fn yield_strain(&self) -> Option<f64> {
        match self {
            UniaxialMaterial::Steel(m) => Some(m.yield_strain()),
            UniaxialMaterial::Concrete(_) => None,
        }
    }

    /// Concrete crushing strain (negative), if this is a concrete law.
    pub fn crushing_strain(&self) -> Option<f64> {
        match self {
            UniaxialMaterial::Steel(_) => None,
            UniaxialMaterial::Concrete(m) => Some(m.crushing_strain()),
        }
    }
}
