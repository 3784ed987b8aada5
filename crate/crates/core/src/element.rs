//! Frame elements with distributed plasticity.
//!
//! `BeamColumnElement` is a displacement-based 2D beam-column: cubic Hermite
//! transverse interpolation, linear axial interpolation, and fiber sections
//! monitored at Gauss-Lobatto points (so the end sections, where hinges
//! form, are always sampled).  `ShearStoryElement` is a scalar bilinear
//! spring between two translational DoFs, handy for shear-building models.

use crate::error::{CoreError, Result};
use crate::material::{BilinearLaw, BilinearState};
use crate::quadrature::gauss_lobatto_on_length;
use crate::section::FiberSection;
use nalgebra::DMatrix;

/// Snapshot of one integration point used by response recording and energy
/// accounting.  For shear springs, `moment`/`curvature` hold the spring
/// force and deformation and the weight is 1.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IpSample {
    /// Bending moment [N m] (or spring force [N]).
    pub moment: f64,
    /// Curvature [1/m] (or spring deformation [m]).
    pub curvature: f64,
    /// Axial force [N].
    pub axial: f64,
    /// Axial strain at the reference axis.
    pub axial_strain: f64,
    /// Flexural unloading stiffness condensed at constant axial force;
    /// bounds the recoverable part of the stored section work.
    pub unload_flexural: f64,
}

/// One monitored section of a beam-column.
#[derive(Debug, Clone, PartialEq)]
struct IntegrationPoint {
    /// Location along the element axis [m].
    x: f64,
    /// Quadrature weight [m].
    weight: f64,
    section: FiberSection,
    trial: IpSample,
    committed: IpSample,
}

/// Strain-displacement rows at axial coordinate `x` of an element of length
/// `l`: `(axial_row, curvature_row)` acting on local displacements (linear
/// axial field, cubic Hermite transverse field).
fn b_rows(l: f64, x: f64) -> ([f64; 6], [f64; 6]) {
    let xi = x / l;
    let axial = [-1.0 / l, 0.0, 0.0, 1.0 / l, 0.0, 0.0];
    let curv = [
        0.0,
        (12.0 * xi - 6.0) / (l * l),
        (6.0 * xi - 4.0) / l,
        0.0,
        (6.0 - 12.0 * xi) / (l * l),
        (6.0 * xi - 2.0) / l,
    ];
    (axial, curv)
}

/// Displacement-based 2D beam-column element.
///
/// Local DoF order: `[u1, v1, r1, u2, v2, r2]` with `u` along the element
/// axis; global DoF order per node: `[ux, uy, rz]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamColumnElement {
    nodes: [usize; 2],
    length: f64,
    cos: f64,
    sin: f64,
    ips: Vec<IntegrationPoint>,
    /// Gravity axial load bookkeeping [N], compression positive; feeds the
    /// hinge-length and capacity models downstream.
    pub axial_load: f64,
    /// Force capacity for demand-capacity ratios [N or N m], if known.
    pub shear_capacity: Option<f64>,
}

impl BeamColumnElement {
    /// Builds an element between `coords_i` and `coords_j`, cloning
    /// `section` at each of `n_ip` Gauss-Lobatto points.
    pub fn new(
        nodes: [usize; 2],
        coords_i: (f64, f64),
        coords_j: (f64, f64),
        section: &FiberSection,
        n_ip: usize,
    ) -> Result<Self> {
        let dx = coords_j.0 - coords_i.0;
        let dy = coords_j.1 - coords_i.1;
        let length = dx.hypot(dy);
        if !(length.is_finite() && length > 0.0) {
            return Err(CoreError::model(format!(
                "element between nodes {:?} has zero length",
                nodes
            )));
        }
        let rule = gauss_lobatto_on_length(n_ip, length)?;
        let ips = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| IntegrationPoint {
                x,
                weight: w,
                section: section.clone(),
                trial: IpSample::default(),
                committed: IpSample::default(),
            })
            .collect();
        Ok(BeamColumnElement {
            nodes,
            length,
            cos: dx / length,
            sin: dy / length,
            ips,
            axial_load: 0.0,
            shear_capacity: None,
        })
    }

    /// Element length [m].
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Depth of the monitored cross section [m].
    pub fn section_depth(&self) -> f64 {
        self.ips[0].section.depth()
    }

    /// Borrow the section at integration point `ip`.
    pub fn section(&self, ip: usize) -> &FiberSection {
        &self.ips[ip].section
    }

    /// Rotates global nodal displacements into the local frame.
    fn to_local(&self, d: &[f64]) -> [f64; 6] {
        let (c, s) = (self.cos, self.sin);
        [
            c * d[0] + s * d[1],
            -s * d[0] + c * d[1],
            d[2],
            c * d[3] + s * d[4],
            -s * d[3] + c * d[4],
            d[5],
        ]
    }

    /// Sets trial displacements (global frame, 6 entries) and returns the
    /// global restoring force vector and tangent matrix.
    pub fn set_trial(&mut self, d: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let dl = self.to_local(d);
        let mut f_loc = [0.0; 6];
        let mut k_loc = DMatrix::<f64>::zeros(6, 6);
        let length = self.length;
        for ip in &mut self.ips {
            let (ba, bc) = b_rows(length, ip.x);
            let eps_a: f64 = ba.iter().zip(&dl).map(|(b, d)| b * d).sum();
            let phi: f64 = bc.iter().zip(&dl).map(|(b, d)| b * d).sum();
            let (forces, k) = ip.section.set_trial(eps_a, phi)?;
            ip.trial = IpSample {
                moment: forces.m,
                curvature: phi,
                axial: forces.n,
                axial_strain: eps_a,
                unload_flexural: 0.0, // filled on commit
            };
            let w = ip.weight;
            for i in 0..6 {
                f_loc[i] += w * (ba[i] * forces.n + bc[i] * forces.m);
                for j in 0..6 {
                    k_loc[(i, j)] += w
                        * (k.k11 * ba[i] * ba[j]
                            + k.k12 * (ba[i] * bc[j] + bc[i] * ba[j])
                            + k.k22 * bc[i] * bc[j]);
                }
            }
        }
        Ok(self.to_global(&f_loc, &k_loc))
    }

    /// Rotates local forces/tangent back to the global frame.
    fn to_global(&self, f_loc: &[f64; 6], k_loc: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
        let (c, s) = (self.cos, self.sin);
        // T maps global -> local; the transpose scatters local -> global.
        let mut t = DMatrix::<f64>::zeros(6, 6);
        for b in [0, 3] {
            t[(b, b)] = c;
            t[(b, b + 1)] = s;
            t[(b + 1, b)] = -s;
            t[(b + 1, b + 1)] = c;
            t[(b + 2, b + 2)] = 1.0;
        }
        let mut f = vec![0.0; 6];
        for i in 0..6 {
            for j in 0..6 {
                f[i] += t[(j, i)] * f_loc[j];
            }
        }
        let k = t.transpose() * k_loc * &t;
        (f, k)
    }

    /// Commits all sections and refreshes the committed IP samples.
    pub fn commit(&mut self) {
        for ip in &mut self.ips {
            ip.section.commit();
            ip.committed = ip.trial;
            ip.committed.unload_flexural = ip.section.unloading_tangent().condensed_flexural();
        }
    }

    /// Reverts trial state to the committed history.
    pub fn revert_to_commit(&mut self) {
        for ip in &mut self.ips {
            ip.section.revert_to_commit();
            ip.trial = ip.committed;
        }
    }

    /// Erases all section history.
    pub fn reset_to_virgin(&mut self) {
        for ip in &mut self.ips {
            ip.section.reset_to_virgin();
            ip.trial = IpSample::default();
            ip.committed = IpSample::default();
        }
    }

    /// Quadrature weights of the monitored sections [m].
    pub fn ip_weights(&self) -> Vec<f64> {
        self.ips.iter().map(|ip| ip.weight).collect()
    }

    /// Committed samples at all integration points.
    pub fn ip_samples(&self) -> Vec<IpSample> {
        self.ips.iter().map(|ip| ip.committed).collect()
    }

    /// Axial force currently committed at mid-span, a proxy for the gravity
    /// load carried by the element.
    pub fn committed_axial(&self) -> f64 {
        let mid = self.ips.len() / 2;
        self.ips[mid].committed.axial
    }
}

/// Bilinear shear spring between the `ux` DoFs of two nodes (story model).
#[derive(Debug, Clone, PartialEq)]
pub struct ShearStoryElement {
    nodes: [usize; 2],
    law: BilinearLaw,
    committed: (BilinearState, IpSample),
    trial: (BilinearState, IpSample),
}

impl ShearStoryElement {
    /// # Arguments
    /// * `nodes` - `[below, above]`; the spring acts on `u_above - u_below`.
    /// * `stiffness` - elastic story stiffness [N/m].
    /// * `yield_force` - story yield shear [N].
    /// * `hardening` - post-yield stiffness ratio.
    pub fn new(nodes: [usize; 2], stiffness: f64, yield_force: f64, hardening: f64) -> Result<Self> {
        let law = BilinearLaw::new(stiffness, yield_force, hardening)?;
        let zero = (BilinearState::default(), IpSample::default());
        Ok(ShearStoryElement { nodes, law, committed: zero, trial: zero })
    }

    /// Spring deformation from the two `ux` displacements.
    pub fn set_trial(&mut self, d: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let u = d[1] - d[0];
        let (force, tangent, state) = self.law.trial(self.committed.0, u);
        self.trial = (
            state,
            IpSample {
                moment: force,
                curvature: u,
                axial: 0.0,
                axial_strain: 0.0,
                unload_flexural: self.law.stiffness,
            },
        );
        let f = vec![-force, force];
        let mut k = DMatrix::<f64>::zeros(2, 2);
        k[(0, 0)] = tangent;
        k[(0, 1)] = -tangent;
        k[(1, 0)] = -tangent;
        k[(1, 1)] = tangent;
        Ok((f, k))
    }

    /// Yield deformation [m].
    pub fn yield_deformation(&self) -> f64 {
        self.law.yield_value / self.law.stiffness
    }
}

/// Any element the assembler understands.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    BeamColumn(BeamColumnElement),
    ShearStory(ShearStoryElement),
}

impl Element {
    /// Connected node ids.
    pub fn node_ids(&self) -> [usize; 2] {
        match self {
            Element::BeamColumn(e) => e.nodes,
            Element::ShearStory(e) => e.nodes,
        }
    }

    /// Number of element DoFs (6 for beam-columns, 2 for shear springs).
    pub fn dof_count(&self) -> usize {
        match self {
            Element::BeamColumn(_) => 6,
            Element::ShearStory(_) => 2,
        }
    }

    /// True when the element only couples the `ux` DoFs of its nodes.
    pub fn is_shear_spring(&self) -> bool {
        matches!(self, Element::ShearStory(_))
    }

    /// Sets trial displacements (global frame) and returns restoring forces
    /// and the consistent tangent.
    pub fn set_trial(&mut self, d: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        match self {
            Element::BeamColumn(e) => e.set_trial(d),
            Element::ShearStory(e) => e.set_trial(d),
        }
    }

    /// Freezes the trial state.
    pub fn commit(&mut self) {
        match self {
            Element::BeamColumn(e) => e.commit(),
            Element::ShearStory(e) => {
                e.committed = e.trial;
            }
        }
    }

    /// Restores the trial state from history.
    pub fn revert_to_commit(&mut self) {
        match self {
            Element::BeamColumn(e) => e.revert_to_commit(),
            Element::ShearStory(e) => {
                e.trial = e.committed;
            }
        }
    }

    /// Erases all history.
    pub fn reset_to_virgin(&mut self) {
        match self {
            Element::BeamColumn(e) => e.reset_to_virgin(),
            Element::ShearStory(e) => {
                let zero = (BilinearState::default(), IpSample::default());
                e.committed = zero;
                e.trial = zero;
            }
        }
    }

    /// Quadrature weights for energy integration; `[1.0]` for springs.
    pub fn ip_weights(&self) -> Vec<f64> {
        match self {
            Element::BeamColumn(e) => e.ip_weights(),
            Element::ShearStory(_) => vec![1.0],
        }
    }

    /// Committed integration-point samples.
    pub fn ip_samples(&self) -> Vec<IpSample> {
        match self {
            Element::BeamColumn(e) => e.ip_samples(),
            Element::ShearStory(e) => vec![e.committed.1],
        }
    }
}

/// Convenience: uniform-curvature end rotations `[r1, r2]` that bend a beam
/// of length `l` to curvature `phi` with zero end deflections.
pub fn uniform_curvature_rotations(l: f64, phi: f64) -> (f64, f64) {
    (-phi * l / 2.0, phi * l / 2.0)
}
