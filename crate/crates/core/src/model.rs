//! Structural model: nodes, boundary conditions, lumped masses, elements,
//! classical damping, and global assembly.
//!
//! Degrees of freedom are numbered per node as `[ux, uy, rz]`.  Supported
//! constraints are full fixity per DoF and rigid-diaphragm slaving of `ux`
//! to a master node.  The mass model is lumped (diagonal) and must be
//! strictly positive on every free equation.

use crate::element::{Element, IpSample};
use crate::error::{CoreError, Result};
use nalgebra::{DMatrix, DVector};

/// Per-DoF constraint state after numbering.
#[derive(Debug, Clone, Copy, PartialEq)]
enum DofState {
    Free(usize),
    Fixed,
    /// `ux` tied to the same DoF of a master node.
    Slaved(usize),
}

/// Classical damping specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingSpec {
    /// No viscous damping.
    None,
    /// Initial-stiffness Rayleigh damping with ratio `xi` at two modes
    /// (0-based indices into the ascending mode list).
    RayleighModes { xi: f64, modes: (usize, usize) },
    /// Explicit Rayleigh coefficients `C = a0 M + a1 K0`.
    Coefficients { a0: f64, a1: f64 },
}

/// One story level: the lateral DoF that tracks it and the story height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoryLevel {
    /// 1-based story number (ground is 0).
    pub story: usize,
    /// Equation index of the story's lateral displacement.
    pub eq: usize,
    /// Inter-story height below this level [m].
    pub height: f64,
}

/// Incremental builder for [`StructuralModel`].
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    nodes: Vec<(f64, f64)>,
    fixes: Vec<[bool; 3]>,
    slaves: Vec<Option<usize>>,
    masses: Vec<[f64; 3]>,
    elements: Vec<Element>,
    element_story: Vec<Option<usize>>,
    damping: DampingSpec,
    stories: Vec<(usize, usize, f64)>,
}

impl Default for ModelBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl ModelBuilder {
    pub fn new() -> Self {
        ModelBuilder {
            nodes: Vec::new(),
            fixes: Vec::new(),
            slaves: Vec::new(),
            masses: Vec::new(),
            elements: Vec::new(),
            element_story: Vec::new(),
            damping: DampingSpec::None,
            stories: Vec::new(),
        }
    }

    /// Adds a node at `(x, y)` and returns its id.
    pub fn add_node(&mut self, x: f64, y: f64) -> usize {
        self.nodes.push((x, y));
        self.fixes.push([false; 3]);
        self.slaves.push(None);
        self.masses.push([0.0; 3]);
        self.nodes.len() - 1
    }

    /// Node coordinates (needed to construct elements).
    pub fn node_coords(&self, node: usize) -> (f64, f64) {
        self.nodes[node]
    }

    /// Fixes selected DoFs of a node.
    pub fn fix(&mut self, node: usize, dofs: [bool; 3]) {
        for (f, d) in self.fixes[node].iter_mut().zip(dofs) {
            *f |= d;
        }
    }

    /// Fully fixes a node (support).
    pub fn fix_base(&mut self, node: usize) {
        self.fix(node, [true, true, true]);
    }

    /// Ties the `ux` DoF of `slave` to that of `master` (rigid diaphragm).
    pub fn slave_ux(&mut self, slave: usize, master: usize) {
        self.slaves[slave] = Some(master);
    }

    /// Accumulates lumped mass `[mx, my, iz]` at a node.
    pub fn add_mass(&mut self, node: usize, mass: [f64; 3]) {
        for (m, v) in self.masses[node].iter_mut().zip(mass) {
            *m += v;
        }
    }

    /// Adds any element; returns its index.
    pub fn add_element(&mut self, element: Element, story: Option<usize>) -> usize {
        self.elements.push(element);
        self.element_story.push(story);
        self.elements.len() - 1
    }

    /// Sets the damping specification.
    pub fn set_damping(&mut self, spec: DampingSpec) {
        self.damping = spec;
    }

    /// Declares a story level tracked by `node`'s `ux`, with the inter-story
    /// `height` below it.
    pub fn add_story(&mut self, story: usize, node: usize, height: f64) {
        self.stories.push((story, node, height));
    }

    /// Numbers DoFs, assembles the initial stiffness, resolves damping, and
    /// validates the result.
    pub fn build(self) -> Result<StructuralModel> {
        let n_nodes = self.nodes.len();
        if n_nodes == 0 {
            return Err(CoreError::model("model has no nodes"));
        }
        for e in &self.elements {
            for id in e.node_ids() {
                if id >= n_nodes {
                    return Err(CoreError::model(format!("element references missing node {id}")));
                }
            }
        }
        // Number DoFs: fixed and slaved first, then free equations in
        // (node, dof) order.
        let mut dof_map = vec![[DofState::Fixed; 3]; n_nodes];
        let mut n = 0usize;
        let mut eq_kind = Vec::new();
        for node in 0..n_nodes {
            for dof in 0..3 {
                dof_map[node][dof] = if self.fixes[node][dof] {
                    DofState::Fixed
                } else if dof == 0 && self.slaves[node].is_some() {
                    let master = self.slaves[node].unwrap();
                    if master >= n_nodes || self.slaves[master].is_some() {
                        return Err(CoreError::model(format!(
                            "node {node}: diaphragm master {master} is invalid or chained"
                        )));
                    }
                    DofState::Slaved(master)
                } else {
                    let eq = n;
                    n += 1;
                    eq_kind.push((node, dof));
                    DofState::Free(eq)
                };
            }
        }
        if n == 0 {
            return Err(CoreError::model("model has no free DoFs"));
        }
        let resolve = |node: usize, dof: usize| -> Option<usize> {
            match dof_map[node][dof] {
                DofState::Free(eq) => Some(eq),
                DofState::Fixed => None,
                DofState::Slaved(master) => match dof_map[master][dof] {
                    DofState::Free(eq) => Some(eq),
                    _ => None,
                },
            }
        };
        // Masses accumulate onto the resolved equations.
        let mut mass = DVector::<f64>::zeros(n);
        for node in 0..n_nodes {
            for dof in 0..3 {
                let m = self.masses[node][dof];
                if m < 0.0 {
                    return Err(CoreError::model(format!("negative mass at node {node}")));
                }
                if let Some(eq) = resolve(node, dof) {
                    mass[eq] += m;
                }
            }
        }
        if mass.iter().any(|&m| m <= 0.0) {
            let (node, dof) = eq_kind[mass.iter().position(|&m| m <= 0.0).unwrap()];
            return Err(CoreError::model(format!(
                "mass matrix is not positive definite: node {node} dof {dof} has no mass"
            )));
        }
        // Element equation lists.
        let mut element_eqs = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let [i, j] = e.node_ids();
            let eqs: Vec<Option<usize>> = if e.is_shear_spring() {
                vec![resolve(i, 0), resolve(j, 0)]
            } else {
                (0..3)
                    .map(|d| resolve(i, d))
                    .chain((0..3).map(|d| resolve(j, d)))
                    .collect()
            };
            element_eqs.push(eqs);
        }
        // Story table.
        let mut stories: Vec<StoryLevel> = Vec::new();
        for (story, node, height) in &self.stories {
            if !(height.is_finite() && *height > 0.0) {
                return Err(CoreError::model(format!("story {story}: height must be positive")));
            }
            let eq = resolve(*node, 0).ok_or_else(|| {
                CoreError::model(format!("story {story}: node {node} has no lateral DoF"))
            })?;
            stories.push(StoryLevel { story: *story, eq, height: *height });
        }
        stories.sort_by_key(|s| s.story);
        for (i, s) in stories.iter().enumerate() {
            if s.story != i + 1 {
                return Err(CoreError::model("story numbers must be contiguous starting at 1".to_string()));
            }
        }

        let mut model = StructuralModel {
            nodes: self.nodes,
            elements: self.elements,
            element_story: self.element_story,
            element_eqs,
            dof_map,
            n,
            mass,
            a0: 0.0,
            a1: 0.0,
            dampers: Vec::new(),
            k0: DMatrix::zeros(n, n),
            damping: DMatrix::zeros(n, n),
            eq_kind,
            stories,
        };
        // Initial stiffness from the virgin trial state.
        let zero = DVector::zeros(n);
        let (_, k0) = model.assemble(&zero)?;
        model.revert_elements();
        if k0.clone().cholesky().is_none() {
            return Err(CoreError::model(
                "initial stiffness is not positive definite (mechanism or unstable model)".to_string(),
            ));
        }
        model.k0 = k0;
        // Resolve damping.
        let (a0, a1) = match self.damping {
            DampingSpec::None => (0.0, 0.0),
            DampingSpec::Coefficients { a0, a1 } => {
                if a0 < 0.0 || a1 < 0.0 {
                    return Err(CoreError::model("Rayleigh coefficients must be non-negative".to_string()));
                }
                (a0, a1)
            }
            DampingSpec::RayleighModes { xi, modes } => {
                if xi < 0.0 {
                    return Err(CoreError::model("damping ratio must be non-negative".to_string()));
                }
                let (omegas, _) = model.modal()?;
                let (i, j) = modes;
                if i >= omegas.len() || j >= omegas.len() || i == j {
                    return Err(CoreError::model(format!(
                        "Rayleigh anchor modes ({i}, {j}) out of range for {} modes",
                        omegas.len()
                    )));
                }
                let (wi, wj) = (omegas[i], omegas[j]);
                (2.0 * xi * wi * wj / (wi + wj), 2.0 * xi / (wi + wj))
            }
        };
        model.a0 = a0;
        model.a1 = a1;
        model.rebuild_damping();
        Ok(model)
    }
}

/// Assembled structural model ready for static or dynamic analysis.
#[derive(Debug, Clone)]
pub struct StructuralModel {
    nodes: Vec<(f64, f64)>,
    elements: Vec<Element>,
    element_story: Vec<Option<usize>>,
    element_eqs: Vec<Vec<Option<usize>>>,
    dof_map: Vec<[DofState; 3]>,
    n: usize,
    mass: DVector<f64>,
    a0: f64,
    a1: f64,
    dampers: Vec<(usize, f64)>,
    k0: DMatrix<f64>,
    damping: DMatrix<f64>,
    eq_kind: Vec<(usize, usize)>,
    stories: Vec<StoryLevel>,
}

impl StructuralModel {
    /// Number of free equations.
    pub fn n_dof(&self) -> usize {
        self.n
    }

    /// Lumped mass per equation.
    pub fn mass(&self) -> &DVector<f64> {
        &self.mass
    }

    /// Mass as a (diagonal) matrix.
    pub fn mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.mass)
    }

    /// Initial (virgin) tangent stiffness.
    pub fn initial_stiffness(&self) -> &DMatrix<f64> {
        &self.k0
    }

    /// Full damping matrix `a0 M + a1 K0 + grounded dampers`.
    pub fn damping_matrix(&self) -> &DMatrix<f64> {
        &self.damping
    }

    /// Damping without the grounded dampers (the structural part only).
    pub fn structural_damping_matrix(&self) -> DMatrix<f64> {
        let mut c = &self.k0 * self.a1;
        for i in 0..self.n {
            c[(i, i)] += self.a0 * self.mass[i];
        }
        c
    }

    /// Rayleigh coefficients `(a0, a1)`.
    pub fn rayleigh(&self) -> (f64, f64) {
        (self.a0, self.a1)
    }

    /// Grounded dampers `(equation, coefficient)` added after construction.
    pub fn grounded_dampers(&self) -> &[(usize, f64)] {
        &self.dampers
    }

    /// Adds a grounded viscous damper `c >= 0` on one equation.
    pub fn add_grounded_damper(&mut self, eq: usize, c: f64) -> Result<()> {
        if eq >= self.n {
            return Err(CoreError::invalid(format!("damper equation {eq} out of range")));
        }
        if !(c.is_finite() && c >= 0.0) {
            return Err(CoreError::invalid(format!("damper coefficient must be >= 0, got {c}")));
        }
        self.dampers.push((eq, c));
        self.damping[(eq, eq)] += c;
        Ok(())
    }

    fn rebuild_damping(&mut self) {
        self.damping = self.structural_damping_matrix();
        for &(eq, c) in &self.dampers {
            self.damping[(eq, eq)] += c;
        }
    }

    /// Influence vector: 1 on every lateral (`ux`) equation.
    pub fn influence_lateral(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n,
            self.eq_kind.iter().map(|&(_, dof)| if dof == 0 { 1.0 } else { 0.0 }),
        )
    }

    /// Resolved equation index of `(node, dof)` with dof 0 = ux, 1 = uy,
    /// 2 = rz; returns `None` for fixed DoFs and follows diaphragm slaving.
    pub fn dof_equation(&self, node: usize, dof: usize) -> Option<usize> {
        match self.dof_map[node][dof] {
            DofState::Free(eq) => Some(eq),
            DofState::Fixed => None,
            DofState::Slaved(master) => match self.dof_map[master][dof] {
                DofState::Free(eq) => Some(eq),
                _ => None,
            },
        }
    }

    /// Story levels (sorted ascending).
    pub fn stories(&self) -> &[StoryLevel] {
        &self.stories
    }

    /// Elements (read access).
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Story tag of an element, if any.
    pub fn element_story(&self, idx: usize) -> Option<usize> {
        self.element_story[idx]
    }

    /// Global equations touched by an element.
    pub fn element_equations(&self, idx: usize) -> &[Option<usize>] {
        &self.element_eqs[idx]
    }

    /// Assembles the restoring force vector and tangent stiffness at trial
    /// displacements `q`; element trial states are left at `q`.
    pub fn assemble(&mut self, q: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let mut f = DVector::<f64>::zeros(self.n);
        let mut k = DMatrix::<f64>::zeros(self.n, self.n);
        for (element, eqs) in self.elements.iter_mut().zip(&self.element_eqs) {
            let d: Vec<f64> = eqs.iter().map(|eq| eq.map_or(0.0, |e| q[e])).collect();
            let (fe, ke) = element.set_trial(&d)?;
            for (i, eq_i) in eqs.iter().enumerate() {
                let Some(gi) = eq_i else { continue };
                f[*gi] += fe[i];
                for (j, eq_j) in eqs.iter().enumerate() {
                    let Some(gj) = eq_j else { continue };
                    k[(*gi, *gj)] += ke[(i, j)];
                }
            }
        }
        Ok((f, k))
    }

    /// Commits all element trial states.
    pub fn commit_elements(&mut self) {
        for e in &mut self.elements {
            e.commit();
        }
    }

    /// Reverts all element trial states to committed history.
    pub fn revert_elements(&mut self) {
        for e in &mut self.elements {
            e.revert_to_commit();
        }
    }

    /// Committed integration-point samples per element.
    pub fn element_samples(&self) -> Vec<Vec<IpSample>> {
        self.elements.iter().map(|e| e.ip_samples()).collect()
    }

    /// Undamped modal analysis on `(K0, M)`.
    ///
    /// # Returns
    /// `(omegas, shapes)`: ascending circular frequencies [rad/s] and
    /// mass-normalized mode shapes as matrix columns.
    pub fn modal(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.n;
        let d_inv_sqrt: Vec<f64> = self.mass.iter().map(|&m| 1.0 / m.sqrt()).collect();
        let mut a = self.k0.clone();
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] *= d_inv_sqrt[i] * d_inv_sqrt[j];
            }
        }
        // Symmetrize against round-off before the eigensolve.
        let a = (&a + a.transpose()) * 0.5;
        let eig = a.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let mut omegas = Vec::with_capacity(n);
        let mut shapes = DMatrix::<f64>::zeros(n, n);
        for (col, &idx) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[idx];
            if lambda <= 0.0 {
                return Err(CoreError::model(format!(
                    "non-positive eigenvalue {lambda:.3e}; stiffness is not positive definite"
                )));
            }
            omegas.push(lambda.sqrt());
            for i in 0..n {
                shapes[(i, col)] = d_inv_sqrt[i] * eig.eigenvectors[(i, idx)];
            }
        }
        Ok((omegas, shapes))
    }

    /// Static nonlinear solve `f_R(q) = p` by full Newton from the committed
    /// state; commits on success.
    pub fn static_solve(&mut self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let mut q = DVector::<f64>::zeros(self.n);
        let ref_norm = p.norm().max(1e-12);
        for _ in 0..100 {
            let (f, k) = self.assemble(&q)?;
            let r = p - &f;
            if r.norm() <= 1e-10 * ref_norm {
                self.commit_elements();
                return Ok(q);
            }
            let dq = k
                .clone()
                .lu()
                .solve(&r)
                .ok_or_else(|| CoreError::SingularMatrix("static solve: singular tangent".into()))?;
            q += dq;
        }
        Err(CoreError::SingularMatrix("static solve did not converge".into()))
    }

    /// Resets every element to the virgin state (no history).
    pub fn reset_to_virgin(&mut self) {
        for e in &mut self.elements {
            e.reset_to_virgin();
        }
    }

    /// Node coordinates.
    pub fn node_coords(&self, node: usize) -> (f64, f64) {
        self.nodes[node]
    }

    /// Kind of each equation as `(node, dof)` with dof 0 = ux, 1 = uy, 2 = rz.
    pub fn equation_kinds(&self) -> &[(usize, usize)] {
        &self.eq_kind
    }
}
