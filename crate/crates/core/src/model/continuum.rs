use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{isotropic_elastic, mat_vec, Member, StructModel};
use crate::{Error, Result};

/// Eight-node brick mesh. Element node order: bottom face counter-clockwise
/// from `(-,-,-)`, then the top face in the same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HexMesh {
    pub nodes: Vec<[f64; 3]>,
    pub hexes: Vec<[usize; 8]>,
    pub fixed_dofs: Vec<usize>,
    /// Global dof `3 * node + k` to applied force.
    pub loads: BTreeMap<usize, f64>,
}

const NATURAL: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

pub const GAUSS_PER_HEX: usize = 8;

/// Shape-function derivatives with respect to natural coordinates.
fn shape_derivatives(xi: [f64; 3]) -> [[f64; 3]; 8] {
    let mut d = [[0.0; 3]; 8];
    for (a, n) in NATURAL.iter().enumerate() {
        let f = [
            1.0 + n[0] * xi[0],
            1.0 + n[1] * xi[1],
            1.0 + n[2] * xi[2],
        ];
        d[a] = [
            0.125 * n[0] * f[1] * f[2],
            0.125 * n[1] * f[0] * f[2],
            0.125 * n[2] * f[0] * f[1],
        ];
    }
    d
}

fn gauss_points() -> [[f64; 3]; 8] {
    let g = 1.0 / 3f64.sqrt();
    let mut pts = [[0.0; 3]; 8];
    for (k, p) in pts.iter_mut().enumerate() {
        *p = [NATURAL[k][0] * g, NATURAL[k][1] * g, NATURAL[k][2] * g];
    }
    pts
}

fn inverse3(j: &[[f64; 3]; 3]) -> (f64, [[f64; 3]; 3]) {
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
            let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
            inv[r][c] = (j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]) / det;
        }
    }
    (det, inv)
}

/// Dense 6 x 24 strain-displacement matrix at one Gauss point, plus its
/// Jacobian determinant.
pub fn b_matrix(coords: &[[f64; 3]; 8], xi: [f64; 3]) -> ([[f64; 24]; 6], f64) {
    let dn = shape_derivatives(xi);
    let mut jac = [[0.0; 3]; 3];
    for a in 0..8 {
        for r in 0..3 {
            for c in 0..3 {
                jac[r][c] += dn[a][r] * coords[a][c];
            }
        }
    }
    let (det, inv) = inverse3(&jac);
    let mut b = [[0.0; 24]; 6];
    for a in 0..8 {
        // physical derivatives: dN/dx_c = sum_r inv[c][r] dN/dxi_r
        let mut g = [0.0; 3];
        for (c, gc) in g.iter_mut().enumerate() {
            *gc = (0..3).map(|r| inv[c][r] * dn[a][r]).sum();
        }
        let k = 3 * a;
        b[0][k] = g[0];
        b[1][k + 1] = g[1];
        b[2][k + 2] = g[2];
        b[3][k + 1] = g[2];
        b[3][k + 2] = g[1];
        b[4][k] = g[2];
        b[4][k + 2] = g[0];
        b[5][k] = g[1];
        b[5][k + 1] = g[0];
    }
    (b, det)
}

impl HexMesh {
    pub fn n_dofs(&self) -> usize {
        3 * self.nodes.len()
    }

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

    /// Uniform `nx x ny x nz` brick mesh of `[0,lx] x [0,ly] x [0,lz]`, node
    /// numbering lexicographic with x fastest. No supports or loads.
    pub fn uniform_box(size: [f64; 3], counts: [usize; 3]) -> Result<Self> {
        let [nx, ny, nz] = counts;
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::Config("box mesh needs at least one element per axis".into()));
        }
        let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    nodes.push([
                        size[0] * i as f64 / nx as f64,
                        size[1] * j as f64 / ny as f64,
                        size[2] * k as f64 / nz as f64,
                    ]);
                }
            }
        }
        let mut hexes = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    hexes.push([
                        id(i, j, k),
                        id(i + 1, j, k),
                        id(i + 1, j + 1, k),
                        id(i, j + 1, k),
                        id(i, j, k + 1),
                        id(i + 1, j, k + 1),
                        id(i + 1, j + 1, k + 1),
                        id(i, j + 1, k + 1),
                    ]);
                }
            }
        }
        Ok(Self {
            nodes,
            hexes,
            fixed_dofs: Vec::new(),
            loads: BTreeMap::new(),
        })
    }

    /// One member per Gauss point, element-major, eight per element.
    pub fn build_gauss_operators(&self) -> Result<StructModel> {
        let n = self.n_dofs();
        if let Some(&d) = self.fixed_dofs.iter().find(|&&d| d >= n) {
            return Err(Error::Geometry(format!("fixed dof {d} out of range")));
        }
        let free = self.free_dofs();
        let mut map = vec![usize::MAX; n];
        for (k, &g) in free.iter().enumerate() {
            map[g] = k;
        }
        let per_element: Vec<Result<Vec<Member>>> = self
            .hexes
            .par_iter()
            .enumerate()
            .map(|(el, hex)| {
                if let Some(&bad) = hex.iter().find(|&&a| a >= self.nodes.len()) {
                    return Err(Error::Mesh {
                        element: el,
                        reason: format!("node {bad} does not exist"),
                    });
                }
                let coords: [[f64; 3]; 8] = std::array::from_fn(|a| self.nodes[hex[a]]);
                let mut members = Vec::with_capacity(GAUSS_PER_HEX);
                for xi in gauss_points() {
                    let (b, det) = b_matrix(&coords, xi);
                    if !(det > 0.0) {
                        return Err(Error::Mesh {
                            element: el,
                            reason: format!("Jacobian determinant {det:e} at {xi:?}"),
                        });
                    }
                    let rows = b
                        .iter()
                        .map(|brow| {
                            brow.iter()
                                .enumerate()
                                .filter_map(|(k, &v)| {
                                    let g = map[3 * hex[k / 3] + k % 3];
                                    (v != 0.0 && g != usize::MAX).then_some((g, v))
                                })
                                .collect()
                        })
                        .collect();
                    members.push(Member { rows, weight: det });
                }
                Ok(members)
            })
            .collect();
        let mut members = Vec::with_capacity(self.hexes.len() * GAUSS_PER_HEX);
        for r in per_element {
            members.extend(r?);
        }
        let mut load = vec![0.0; free.len()];
        for (&g, &v) in &self.loads {
            if g >= n || map[g] == usize::MAX {
                return Err(Error::Geometry(format!("load on fixed or missing dof {g}")));
            }
            load[map[g]] += v;
        }
        StructModel::new("hex", 6, free.len(), members, load)
    }
}

/// Displacements, strains and stresses of an elastic continuum solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticState {
    pub u: Vec<f64>,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
}

pub fn reference_solve_elastic(model: &StructModel, e: f64, nu: f64) -> Result<ElasticState> {
    if model.dim != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            got: model.dim,
        });
    }
    let c = isotropic_elastic(e, nu)?;
    let u = model.solve_linear(|_| c.clone())?;
    let strain = model.strains(&u);
    let stress = strain.chunks(6).flat_map(|s| mat_vec(&c, s)).collect();
    Ok(ElasticState { u, strain, stress })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::structures;

    fn unit_cube() -> HexMesh {
        HexMesh::uniform_box([1.0; 3], [1, 1, 1]).unwrap()
    }

    #[test]
    fn rigid_translation_has_no_strain() {
        let m = unit_cube().build_gauss_operators().unwrap();
        let u: Vec<f64> = (0..24).map(|k| [0.3, -0.2, 0.7][k % 3]).collect();
        assert!(m.strains(&u).iter().all(|e| e.abs() < 1e-14));
    }

    #[test]
    fn uniaxial_stretch_patch() {
        let mesh = unit_cube();
        let m = mesh.build_gauss_operators().unwrap();
        let mut u = vec![0.0; 24];
        for (a, x) in mesh.nodes.iter().enumerate() {
            u[3 * a] = x[0];
        }
        for s in m.strains(&u).chunks(6) {
            for (k, v) in s.iter().enumerate() {
                assert!((v - if k == 0 { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn quadrature_recovers_volume() {
        let m = unit_cube().build_gauss_operators().unwrap();
        let v: f64 = m.members.iter().map(|g| g.weight).sum();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn distorted_patch_reproduces_linear_field() {
        let mut mesh = unit_cube();
        mesh.nodes[6] = [1.2, 1.1, 0.9];
        mesh.nodes[1] = [0.9, 0.05, -0.1];
        let m = mesh.build_gauss_operators().unwrap();
        let g = [[0.1, 0.2, -0.3], [0.05, -0.1, 0.4], [0.2, 0.0, 0.15]];
        let mut u = vec![0.0; 24];
        for (a, x) in mesh.nodes.iter().enumerate() {
            for i in 0..3 {
                u[3 * a + i] = (0..3).map(|j| g[i][j] * x[j]).sum();
            }
        }
        let expect = [
            g[0][0],
            g[1][1],
            g[2][2],
            g[1][2] + g[2][1],
            g[0][2] + g[2][0],
            g[0][1] + g[1][0],
        ];
        for s in m.strains(&u).chunks(6) {
            for k in 0..6 {
                assert!((s[k] - expect[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inverted_element_is_named() {
        let mut mesh = HexMesh::uniform_box([2.0, 1.0, 1.0], [2, 1, 1]).unwrap();
        mesh.hexes[1].swap(0, 1);
        mesh.hexes[1].swap(2, 3);
        mesh.hexes[1].swap(4, 5);
        mesh.hexes[1].swap(6, 7);
        assert!(matches!(mesh.build_gauss_operators(), Err(Error::Mesh { element: 1, .. })));
    }

    #[test]
    fn stiffness_is_symmetric() {
        let m = structures::cantilever(1.0).build_gauss_operators().unwrap();
        let c = isotropic_elastic(1.0, 0.3).unwrap();
        let k = m.assemble(|_| c.clone());
        for i in 0..m.n_free {
            for j in 0..m.n_free {
                assert!((k.get(i, j) - k.get(j, i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_element_uniaxial_solve() {
        // cube on rollers: x fixed at x = 0, y fixed at y = 0, z fixed at z = 0
        let mut mesh = unit_cube();
        for (a, x) in mesh.nodes.iter().enumerate() {
            for k in 0..3 {
                if x[k] == 0.0 {
                    mesh.fixed_dofs.push(3 * a + k);
                }
            }
        }
        for (a, x) in mesh.nodes.iter().enumerate() {
            if x[0] == 1.0 {
                mesh.loads.insert(3 * a, 0.25);
            }
        }
        let m = mesh.build_gauss_operators().unwrap();
        let s = reference_solve_elastic(&m, 2.0, 0.25).unwrap();
        for (eps, sig) in s.strain.chunks(6).zip(s.stress.chunks(6)) {
            assert!((sig[0] - 1.0).abs() < 1e-10);
            assert!((eps[0] - 0.5).abs() < 1e-10);
            assert!((eps[1] + 0.125).abs() < 1e-10);
            assert!((eps[2] + 0.125).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_load_zero_response() {
        let mut mesh = structures::cantilever(1.0);
        mesh.loads.clear();
        let m = mesh.build_gauss_operators().unwrap();
        let s = reference_solve_elastic(&m, 1.0, 0.3).unwrap();
        assert!(s.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn equilibrium_residual_is_small() {
        let m = structures::cantilever(1.0).build_gauss_operators().unwrap();
        let s = reference_solve_elastic(&m, 1.0, 0.3).unwrap();
        let f = m.internal_force(&s.stress);
        let pmax = m.load.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let r = f.iter().zip(&m.load).fold(0.0f64, |a, (f, p)| a.max((f - p).abs()));
        assert!(r <= 1e-10 * pmax);
    }

    #[test]
    fn tip_deflection_converges_under_refinement() {
        // Richardson extrapolation from three refinements; the coarse mesh
        // must sit within the usual stiff-element error of the limit.
        let tip = |r: usize| {
            let mesh = structures::cantilever_mesh([4 * r, 2 * r, 2 * r], 1.0);
            let m = mesh.build_gauss_operators().unwrap();
            let s = reference_solve_elastic(&m, 1.0, 0.3).unwrap();
            structures::tip_deflection(&mesh, &s.u)
        };
        let (u1, u2, u3) = (tip(1), tip(2), tip(3));
        assert!(u1.abs() < u2.abs() && u2.abs() < u3.abs());
        let limit = (9.0 * u3 - 4.0 * u2) / 5.0; // O(h^2) extrapolation
        let beam = -1.0 * 16f64.powi(3) / (3.0 * 1.0 * 8.0 * 4f64.powi(3) / 12.0);
        assert!((limit - beam).abs() / beam.abs() < 0.1, "limit {limit} vs beam {beam}");
        assert!(u1.abs() / limit.abs() > 0.3);
    }
}
