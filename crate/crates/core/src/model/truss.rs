use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Member, StructModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub a: usize,
    pub b: usize,
    pub area: f64,
}

/// Pin-jointed truss in 2-D or 3-D. Global dof `k` of node `i` is
/// `i * spatial_dim + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrussModel {
    pub nodes: Vec<Vec<f64>>,
    pub bars: Vec<Bar>,
    pub fixed_dofs: Vec<usize>,
    /// Global dof index to applied force.
    pub loads: BTreeMap<usize, f64>,
}

impl TrussModel {
    pub fn spatial_dim(&self) -> usize {
        self.nodes.first().map_or(0, Vec::len)
    }

    pub fn n_dofs(&self) -> usize {
        self.nodes.len() * self.spatial_dim()
    }

    /// Global dof of each free dof, ascending.
    pub fn free_dofs(&self) -> Vec<usize> {
        let mut fixed = vec![false; self.n_dofs()];
        for &d in &self.fixed_dofs {
            if d < fixed.len() {
                fixed[d] = true;
            }
        }
        (0..self.n_dofs()).filter(|&d| !fixed[d]).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn bar_length(&self, e: usize) -> f64 {
        let bar = &self.bars[e];
        self.nodes[bar.a]
            .iter()
            .zip(&self.nodes[bar.b])
            .map(|(x, y)| (y - x) * (y - x))
            .sum::<f64>()
            .sqrt()
    }

    /// Strain operators `b_e'/l_e` on the free dofs with weights `A_e l_e`.
    pub fn build_operators(&self) -> Result<StructModel> {
        let sd = self.spatial_dim();
        if sd != 2 && sd != 3 {
            return Err(Error::Geometry(format!("nodes must be 2-D or 3-D, got {sd}")));
        }
        if let Some(i) = self.nodes.iter().position(|n| n.len() != sd) {
            return Err(Error::Geometry(format!("node {i} has {} coordinates", self.nodes[i].len())));
        }
        let n = self.n_dofs();
        if let Some(&d) = self.fixed_dofs.iter().find(|&&d| d >= n) {
            return Err(Error::Geometry(format!("fixed dof {d} out of range")));
        }
        let free = self.free_dofs();
        let mut map = vec![usize::MAX; n];
        for (k, &g) in free.iter().enumerate() {
            map[g] = k;
        }
        let mut members = Vec::with_capacity(self.bars.len());
        for (e, bar) in self.bars.iter().enumerate() {
            if bar.a >= self.nodes.len() || bar.b >= self.nodes.len() {
                return Err(Error::Geometry(format!("bar {e} references a missing node")));
            }
            if !(bar.area > 0.0) {
                return Err(Error::Geometry(format!("bar {e} has area {}", bar.area)));
            }
            let l = self.bar_length(e);
            if !(l > 0.0) {
                return Err(Error::Geometry(format!("bar {e} has zero length")));
            }
            let mut row = Vec::with_capacity(2 * sd);
            for k in 0..sd {
                let cosine = (self.nodes[bar.b][k] - self.nodes[bar.a][k]) / l;
                if cosine == 0.0 {
                    continue;
                }
                let (ga, gb) = (bar.a * sd + k, bar.b * sd + k);
                if map[ga] != usize::MAX {
                    row.push((map[ga], -cosine / l));
                }
                if map[gb] != usize::MAX {
                    row.push((map[gb], cosine / l));
                }
            }
            members.push(Member {
                rows: vec![row],
                weight: bar.area * l,
            });
        }
        let mut load = vec![0.0; free.len()];
        for (&g, &v) in &self.loads {
            if g >= n || map[g] == usize::MAX {
                return Err(Error::Geometry(format!("load on fixed or missing dof {g}")));
            }
            load[map[g]] += v;
        }
        StructModel::new("truss", 1, free.len(), members, load)
    }
}

/// Uniaxial material law used by the model-based reference solver, given in
/// flexibility form `eps = strain(sigma)`.
pub trait Law: Sync {
    fn stress(&self, strain: f64) -> f64;
    fn strain(&self, stress: f64) -> f64;
    /// `d strain / d stress`, finite everywhere.
    fn compliance(&self, stress: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear(pub f64);

impl Law for Linear {
    fn stress(&self, strain: f64) -> f64 {
        self.0 * strain
    }
    fn strain(&self, stress: f64) -> f64 {
        stress / self.0
    }
    fn compliance(&self, _: f64) -> f64 {
        1.0 / self.0
    }
}

/// `sigma = cbrt(eps)`, i.e. `eps = sigma^3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CubeRoot;

impl Law for CubeRoot {
    fn stress(&self, strain: f64) -> f64 {
        strain.cbrt()
    }
    fn strain(&self, stress: f64) -> f64 {
        stress.powi(3)
    }
    fn compliance(&self, stress: f64) -> f64 {
        3.0 * stress * stress
    }
}

pub const MAX_NEWTON: usize = 200;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct MemberState {
    pub u: Vec<f64>,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
}

/// Newton-Raphson on the mixed system `B U = strain(sigma)`,
/// `sum w B' sigma = p` with backtracking on the residual max-norm. The
/// flexibility form keeps the Jacobian finite for force-free bars, where a
/// stiffness tangent like `eps^(-2/3)` would blow up.
pub fn reference_solve(model: &StructModel, law: &dyn Law) -> Result<MemberState> {
    if model.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: model.dim,
        });
    }
    let (n, m) = (model.n_free, model.n_members());
    let p = &model.load;
    let pmax = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-10 * (1.0 + pmax);
    // [compatibility; equilibrium], so F = 0 at the solution
    let residual = |u: &[f64], s: &[f64]| -> (Vec<f64>, f64) {
        let mut r: Vec<f64> = model
            .strains(u)
            .iter()
            .zip(s)
            .map(|(e, &s)| e - law.strain(s))
            .collect();
        r.extend(model.internal_force(s).iter().zip(p).map(|(f, p)| f - p));
        let norm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        (r, norm)
    };
    // Unit-modulus linear solve as the starting point.
    let mut u = model.solve_linear(|_| vec![1.0])?;
    let mut s = model.strains(&u).iter().map(|&e| law.stress(e)).collect::<Vec<_>>();
    let (mut r, mut rn) = residual(&u, &s);
    let mut history = vec![rn];
    let mut work = vec![0.0; n + m];
    for _ in 0..MAX_NEWTON {
        if rn <= tol {
            break;
        }
        // columns [U | sigma]; rows [compatibility | equilibrium]
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
        for (e, mem) in model.members.iter().enumerate() {
            for &(dof, v) in &mem.rows[0] {
                cols[dof].push((e, v));
                cols[n + e].push((m + dof, mem.weight * v));
            }
            cols[n + e].push((e, -law.compliance(s[e])));
        }
        let lu = crate::lp::lu::LuFactor::new(n + m, &cols)
            .map_err(|e| Error::Singular { pivot: e.position })?;
        let mut d: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve(&mut d, &mut work);
        let mut alpha = 1.0;
        let mut step = None;
        for _ in 0..=MAX_HALVINGS {
            let tu: Vec<f64> = u.iter().zip(&d[..n]).map(|(u, d)| u + alpha * d).collect();
            let ts: Vec<f64> = s.iter().zip(&d[n..]).map(|(s, d)| s + alpha * d).collect();
            let (tr, tn) = residual(&tu, &ts);
            if tn < rn {
                step = Some((tu, ts, tr, tn));
                break;
            }
            alpha *= 0.5;
        }
        let Some((tu, ts, tr, tn)) = step else { break };
        (u, s, r, rn) = (tu, ts, tr, tn);
        history.push(rn);
    }
    if !(rn <= tol) {
        return Err(Error::NewtonDivergence {
            iterations: history.len() - 1,
            history,
        });
    }
    let strain = model.strains(&u);
    Ok(MemberState { u, strain, stress: s })
}
