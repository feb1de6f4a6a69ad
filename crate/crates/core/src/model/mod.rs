//! Structural models reduced to per-member strain operators.
//!
//! A member is a bar (phase dimension 1) or a Gauss point (dimension 6).
//! Each carries a sparse strain operator `B_e` over the free dofs and a
//! weight `w_e`, so compatibility reads `eps_e = B_e U` and equilibrium reads
//! `sum_e w_e B_e' sigma_e = p`. For a truss `B_e = b_e'/l_e` and
//! `w_e = A_e l_e`; for a hex mesh `w_g` is the quadrature weight times the
//! Jacobian determinant.

pub mod continuum;
pub mod structures;
pub mod truss;

use serde::{Deserialize, Serialize};

use crate::linalg::{Cholesky, SkylineMatrix};
use crate::{Error, Result};

/// Strain operator of one member: `dim` sparse rows over the free dofs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub weight: f64,
}

impl Member {
    fn dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().flatten().map(|&(j, _)| j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructModel {
    pub label: String,
    /// Phase-space dimension per member, 1 or 6.
    pub dim: usize,
    pub n_free: usize,
    pub members: Vec<Member>,
    /// Load over free dofs.
    pub load: Vec<f64>,
}

impl StructModel {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        n_free: usize,
        members: Vec<Member>,
        load: Vec<f64>,
    ) -> Result<Self> {
        if dim != 1 && dim != 6 {
            return Err(Error::DimensionMismatch {
                expected: 6,
                got: dim,
            });
        }
        if load.len() != n_free {
            return Err(Error::DimensionMismatch {
                expected: n_free,
                got: load.len(),
            });
        }
        if members.is_empty() {
            return Err(Error::EmptyInput("members"));
        }
        for (e, m) in members.iter().enumerate() {
            if m.rows.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.rows.len(),
                });
            }
            if !(m.weight > 0.0) || !m.weight.is_finite() {
                return Err(Error::Geometry(format!("member {e} has weight {}", m.weight)));
            }
            if let Some(j) = m.dofs().find(|&j| j >= n_free) {
                return Err(Error::Geometry(format!("member {e} references dof {j} of {n_free}")));
            }
        }
        if load.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("load"));
        }
        Ok(Self {
            label: label.into(),
            dim,
            n_free,
            members,
            load,
        })
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    /// Member strains, member-major (`dim` entries per member).
    pub fn strains(&self, u: &[f64]) -> Vec<f64> {
        let mut eps = Vec::with_capacity(self.members.len() * self.dim);
        for m in &self.members {
            for row in &m.rows {
                eps.push(row.iter().map(|&(j, v)| v * u[j]).sum());
            }
        }
        eps
    }

    /// `sum_e w_e B_e' s_e` for a member-major stress field.
    pub fn internal_force(&self, stress: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.n_free];
        for (e, m) in self.members.iter().enumerate() {
            for (k, row) in m.rows.iter().enumerate() {
                let s = m.weight * stress[e * self.dim + k];
                if s != 0.0 {
                    for &(j, v) in row {
                        f[j] += v * s;
                    }
                }
            }
        }
        f
    }

    /// Skyline profile covering every `B_e' M B_e` block.
    fn profile(&self) -> Vec<usize> {
        let mut first: Vec<usize> = (0..self.n_free).collect();
        for m in &self.members {
            if let Some(lo) = m.dofs().min() {
                for j in m.dofs() {
                    first[j] = first[j].min(lo);
                }
            }
        }
        first
    }

    /// Assembles `sum_e w_e B_e' M_e B_e` where `metric(e)` returns the
    /// row-major `dim x dim` matrix `M_e`.
    pub fn assemble<F>(&self, metric: F) -> SkylineMatrix
    where
        F: Fn(usize) -> Vec<f64>,
    {
        let d = self.dim;
        let mut k = SkylineMatrix::with_profile(self.profile());
        let mut mb: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
        for (e, m) in self.members.iter().enumerate() {
            let me = metric(e);
            // rows of M B
            for (a, out) in mb.iter_mut().enumerate() {
                out.clear();
                for (b, row) in m.rows.iter().enumerate() {
                    let c = me[a * d + b];
                    if c != 0.0 {
                        out.extend(row.iter().map(|&(j, v)| (j, c * v)));
                    }
                }
            }
            for (a, row) in m.rows.iter().enumerate() {
                for &(i, bi) in row {
                    for &(j, v) in &mb[a] {
                        if i <= j {
                            k.add(i, j, m.weight * bi * v);
                        }
                    }
                }
            }
        }
        k
    }

    /// Factorizes `sum_e w_e B_e' M_e B_e`.
    pub fn factor<F>(&self, metric: F) -> Result<Cholesky>
    where
        F: Fn(usize) -> Vec<f64>,
    {
        self.assemble(metric).cholesky()
    }

    /// Linear solve `K U = p` with per-member constitutive matrix `C_e`.
    pub fn solve_linear<F>(&self, c: F) -> Result<Vec<f64>>
    where
        F: Fn(usize) -> Vec<f64>,
    {
        Ok(self.factor(c)?.solve(&self.load))
    }

    /// Flattened member state `(eps, sigma)` of member `e`.
    pub fn member_slice<'a>(&self, v: &'a [f64], e: usize) -> &'a [f64] {
        &v[e * self.dim..(e + 1) * self.dim]
    }
}

/// `sigma = C eps` for a dense row-major `C`.
pub(crate) fn mat_vec(c: &[f64], x: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..d)
        .map(|a| (0..d).map(|b| c[a * d + b] * x[b]).sum())
        .collect()
}

/// Isotropic elastic matrix in Voigt order (11, 22, 33, 23, 13, 12) with
/// engineering shear strains.
pub fn isotropic_elastic(e: f64, nu: f64) -> Result<Vec<f64>> {
    if !(e > 0.0) || !(0.0..0.5).contains(&nu) {
        return Err(Error::Config(format!("elastic constants E = {e}, nu = {nu}")));
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let g = e / (2.0 * (1.0 + nu));
    let mut c = vec![0.0; 36];
    for a in 0..3 {
        for b in 0..3 {
            c[a * 6 + b] = lambda;
        }
        c[a * 6 + a] = lambda + 2.0 * g;
        c[(a + 3) * 6 + a + 3] = g;
    }
    Ok(c)
}

/// Constitutive law used for reference solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Reference {
    /// `sigma = E eps` for bars.
    Linear { modulus: f64 },
    /// `sigma = cbrt(eps)` for bars.
    CubeRoot,
    /// Isotropic elasticity for Gauss points.
    Elastic { modulus: f64, poisson: f64 },
}

/// Displacements, strains and stresses of a reference solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceState {
    pub u: Vec<f64>,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
}

impl Reference {
    pub fn solve(&self, model: &StructModel) -> Result<ReferenceState> {
        let (u, strain, stress) = match *self {
            Reference::Linear { modulus } => {
                let s = truss::reference_solve(model, &truss::Linear(modulus))?;
                (s.u, s.strain, s.stress)
            }
            Reference::CubeRoot => {
                let s = truss::reference_solve(model, &truss::CubeRoot)?;
                (s.u, s.strain, s.stress)
            }
            Reference::Elastic { modulus, poisson } => {
                let s = continuum::reference_solve_elastic(model, modulus, poisson)?;
                (s.u, s.strain, s.stress)
            }
        };
        Ok(ReferenceState { u, strain, stress })
    }
}
