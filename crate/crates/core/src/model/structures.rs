//! Built-in test structures.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::continuum::HexMesh;
use super::truss::{Bar, TrussModel};
use super::StructModel;
use crate::Result;

/// A built-in structure or a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    ThreeBar,
    Tower,
    /// The `4 x 2 x 2` cantilever under `load` (default [`CANTILEVER_LOAD`]).
    Cantilever {
        #[serde(default = "cantilever_load")]
        load: f64,
    },
    /// JSON [`TrussModel`].
    Truss { path: PathBuf },
    /// JSON [`HexMesh`].
    Mesh { path: PathBuf },
}

fn cantilever_load() -> f64 {
    CANTILEVER_LOAD
}

impl Structure {
    pub fn build(&self) -> Result<StructModel> {
        let mut m = match self {
            Structure::ThreeBar => three_bar().build_operators()?,
            Structure::Tower => tower().build_operators()?,
            Structure::Cantilever { load } => cantilever(*load).build_gauss_operators()?,
            Structure::Truss { path } => TrussModel::load_file(path)?.build_operators()?,
            Structure::Mesh { path } => HexMesh::load_file(path)?.build_gauss_operators()?,
        };
        m.label = self.name();
        Ok(m)
    }

    pub fn name(&self) -> String {
        match self {
            Structure::ThreeBar => "three_bar".into(),
            Structure::Tower => "tower".into(),
            Structure::Cantilever { .. } => "cantilever".into(),
            Structure::Truss { path } | Structure::Mesh { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        }
    }
}

/// Free node at the origin, bars to `(1, -0.5)`, `(1, 0)` and `(1, 0.5)`,
/// unit areas, load in `+x` scaled so that a unit modulus gives
/// `U = (0.5, 0)`. Every bar is in compression (strains `-0.4`, `-0.5`,
/// `-0.4`), well away from zero strain.
pub fn three_bar() -> TrussModel {
    // x-stiffness at unit modulus: 1 + 2 / l^3 with l^2 = 1.25
    let k = 1.0 + 2.0 / 1.25f64.powf(1.5);
    TrussModel {
        nodes: vec![
            vec![0.0, 0.0],
            vec![1.0, -0.5],
            vec![1.0, 0.0],
            vec![1.0, 0.5],
        ],
        bars: vec![
            Bar { a: 1, b: 0, area: 1.0 },
            Bar { a: 2, b: 0, area: 1.0 },
            Bar { a: 3, b: 0, area: 1.0 },
        ],
        fixed_dofs: (2..8).collect(),
        loads: BTreeMap::from([(0, 0.5 * k)]),
    }
}

pub const TOWER_STORIES: usize = 5;

/// Square lattice tower: unit plan, unit story height, 16 bars per story
/// (4 columns, 4 crossed face-diagonal pairs, 4 ring beams), 80 bars in
/// total and statically indeterminate. The base is pinned. The load pattern
/// is irregular so that no bar is force-free.
pub fn tower() -> TrussModel {
    let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut nodes = Vec::new();
    for k in 0..=TOWER_STORIES {
        for c in corners {
            nodes.push(vec![c[0], c[1], k as f64]);
        }
    }
    let id = |k: usize, c: usize| 4 * k + c % 4;
    let mut bars = Vec::new();
    for k in 1..=TOWER_STORIES {
        for c in 0..4 {
            bars.push(Bar { a: id(k - 1, c), b: id(k, c), area: 1.0 });
            bars.push(Bar { a: id(k - 1, c), b: id(k, c + 1), area: 1.0 });
            bars.push(Bar { a: id(k - 1, c + 1), b: id(k, c), area: 1.0 });
            bars.push(Bar { a: id(k, c), b: id(k, c + 1), area: 1.0 });
        }
    }
    let mut loads = BTreeMap::new();
    for k in 1..=TOWER_STORIES {
        let h = k as f64 / TOWER_STORIES as f64;
        for c in 0..4 {
            let a = id(k, c);
            loads.insert(3 * a, 0.0294 * h * (1.0 + 0.5 * c as f64));
            loads.insert(3 * a + 1, 0.0147 * h * (c as f64 - 1.2));
            loads.insert(3 * a + 2, -0.0196 * (1.0 + 0.3 * c as f64));
        }
    }
    TrussModel {
        nodes,
        bars,
        fixed_dofs: (0..12).collect(),
        loads,
    }
}

/// Free-dof index of the lateral displacement at the tower top, node
/// `(1, 1, top)`.
pub fn tower_top_dof() -> usize {
    // Free dofs start after the 12 base dofs.
    3 * (4 * TOWER_STORIES + 2) - 12
}

pub const BEAM_SIZE: [f64; 3] = [16.0, 8.0, 4.0];

/// Total tip load of the desk-scale cantilever: the peak Gauss-point strain
/// of the unit-modulus solve is then about 0.08, inside the `[-0.1, 0.1]`
/// data grid.
pub const CANTILEVER_LOAD: f64 = 0.2229;

/// `16 x 8 x 4` beam clamped at `x = 0`, with total load `total_load` in
/// `-z` spread consistently over the face `x = 16`.
pub fn cantilever_mesh(counts: [usize; 3], total_load: f64) -> HexMesh {
    let mut mesh = HexMesh::uniform_box(BEAM_SIZE, counts).expect("positive counts");
    let [nx, ny, nz] = counts;
    let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    for k in 0..=nz {
        for j in 0..=ny {
            let a = id(0, j, k);
            mesh.fixed_dofs.extend([3 * a, 3 * a + 1, 3 * a + 2]);
        }
    }
    let face = (BEAM_SIZE[1] / ny as f64) * (BEAM_SIZE[2] / nz as f64);
    let traction = total_load / (BEAM_SIZE[1] * BEAM_SIZE[2]);
    for k in 0..nz {
        for j in 0..ny {
            for (dj, dk) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                let dof = 3 * id(nx, j + dj, k + dk) + 2;
                *mesh.loads.entry(dof).or_insert(0.0) -= 0.25 * face * traction;
            }
        }
    }
    mesh
}

/// The `4 x 2 x 2` desk-scale cantilever.
pub fn cantilever(total_load: f64) -> HexMesh {
    cantilever_mesh([4, 2, 2], total_load)
}

/// Free-dof index of the vertical displacement at the centre of the loaded
/// face. Requires even `ny` and `nz`.
pub fn cantilever_tip_dof(mesh: &HexMesh) -> usize {
    let tip = mesh
        .nodes
        .iter()
        .position(|x| {
            x[0] == BEAM_SIZE[0] && x[1] == 0.5 * BEAM_SIZE[1] && x[2] == 0.5 * BEAM_SIZE[2]
        })
        .expect("mesh has a node at the face centre");
    let g = 3 * tip + 2;
    mesh.free_dofs()
        .iter()
        .position(|&d| d == g)
        .expect("tip dof is free")
}

/// Mean vertical displacement over the loaded face.
pub fn tip_deflection(mesh: &HexMesh, u: &[f64]) -> f64 {
    let free = mesh.free_dofs();
    let mut sum = 0.0;
    let mut count = 0;
    for (k, &g) in free.iter().enumerate() {
        if g % 3 == 2 && mesh.nodes[g / 3][0] == BEAM_SIZE[0] {
            sum += u[k];
            count += 1;
        }
    }
    sum / count as f64
}
