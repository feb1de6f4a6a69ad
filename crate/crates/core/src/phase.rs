//! Phase-space points, datasets and the scaling matrix used to balance
//! strain and stress magnitudes.
//!
//! Strain vectors use Voigt order `(e11, e22, e33, g23, g13, g12)` with
//! engineering shear strains `g = 2 e` for the 6-component case.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strain components with magnitude below this are skipped when estimating
/// stress/strain ratios.
pub const SCALING_STRAIN_TOL: f64 = 1e-12;

/// One strain-stress pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
}

impl PhasePoint {
    pub fn new(strain: Vec<f64>, stress: Vec<f64>) -> Result<Self> {
        if strain.len() != stress.len() {
            return Err(Error::DimensionMismatch {
                expected: strain.len(),
                got: stress.len(),
            });
        }
        check_dim(strain.len())?;
        if strain.iter().chain(&stress).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase point"));
        }
        Ok(Self { strain, stress })
    }

    pub fn scalar(strain: f64, stress: f64) -> Result<Self> {
        Self::new(vec![strain], vec![stress])
    }

    pub fn dim(&self) -> usize {
        self.strain.len()
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 1 || d == 6 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "phase-space dimension must be 1 or 6, got {d}"
        )))
    }
}

/// `sign(e) * |(e, s)|` with `sign(0) = +1`.
pub fn sort_key_1d(p: &PhasePoint) -> Result<f64> {
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: p.dim(),
        });
    }
    Ok(key_1d(p.strain[0], p.stress[0]))
}

/// Sum of the six strain components.
pub fn sort_key_6d(p: &PhasePoint) -> Result<f64> {
    if p.dim() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            got: p.dim(),
        });
    }
    Ok(key_6d(&p.strain))
}

fn key_1d(e: f64, s: f64) -> f64 {
    let sign = if e < 0.0 { -1.0 } else { 1.0 };
    sign * e.hypot(s)
}

fn key_6d(strain: &[f64]) -> f64 {
    strain.iter().sum()
}

fn sort_key(strain: &[f64], stress: &[f64]) -> f64 {
    if strain.len() == 1 {
        key_1d(strain[0], stress[0])
    } else {
        key_6d(strain)
    }
}

/// Where a dataset came from. Serialized into the JSON sidecar.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// An ordered collection of phase points of equal dimension, stored flat
/// (point-major) with one sort key per point.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    dim: usize,
    strain: Vec<f64>,
    stress: Vec<f64>,
    sort_keys: Vec<f64>,
    sorted: bool,
    pub label: String,
    pub provenance: Provenance,
}

impl DataSet {
    pub fn empty(dim: usize, label: impl Into<String>) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            strain: Vec::new(),
            stress: Vec::new(),
            sort_keys: Vec::new(),
            sorted: false,
            label: label.into(),
            provenance: Provenance::default(),
        })
    }

    pub fn from_points(points: &[PhasePoint], label: impl Into<String>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput("dataset points"))?;
        let mut ds = Self::empty(first.dim(), label)?;
        for p in points {
            ds.push(p)?;
        }
        Ok(ds)
    }

    /// Builds a dataset from point-major flat arrays of length `n * dim`.
    pub fn from_flat(
        dim: usize,
        strain: Vec<f64>,
        stress: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_dim(dim)?;
        if strain.len() != stress.len() || strain.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: strain.len(),
                got: stress.len(),
            });
        }
        if strain.iter().chain(&stress).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        let sort_keys = strain
            .chunks_exact(dim)
            .zip(stress.chunks_exact(dim))
            .map(|(e, s)| sort_key(e, s))
            .collect();
        Ok(Self {
            dim,
            strain,
            stress,
            sort_keys,
            sorted: false,
            label: label.into(),
            provenance: Provenance::default(),
        })
    }

    pub fn push(&mut self, p: &PhasePoint) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        if p.strain.iter().chain(&p.stress).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase point"));
        }
        self.strain.extend_from_slice(&p.strain);
        self.stress.extend_from_slice(&p.stress);
        self.sort_keys.push(sort_key(&p.strain, &p.stress));
        self.sorted = false;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sort_keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sort_keys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn strain(&self, i: usize) -> &[f64] {
        &self.strain[i * self.dim..(i + 1) * self.dim]
    }

    pub fn stress(&self, i: usize) -> &[f64] {
        &self.stress[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point(&self, i: usize) -> PhasePoint {
        PhasePoint {
            strain: self.strain(i).to_vec(),
            stress: self.stress(i).to_vec(),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub fn sort_keys(&self) -> &[f64] {
        &self.sort_keys
    }

    /// The concatenated `(strain, stress)` vector of point `i`.
    pub fn phase_vector(&self, i: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.dim);
        v.extend_from_slice(self.strain(i));
        v.extend_from_slice(self.stress(i));
        v
    }

    /// Scales the stress of point `i` in place.
    pub(crate) fn scale_stress(&mut self, i: usize, factor: f64) {
        let d = self.dim;
        for s in &mut self.stress[i * d..(i + 1) * d] {
            *s *= factor;
        }
        self.sort_keys[i] = sort_key(self.strain(i), self.stress(i));
        self.sorted = false;
    }

    /// Returns a copy sorted ascending by sort key. Ties keep their original
    /// relative order.
    pub fn sort_canonical(&self) -> Result<DataSet> {
        if self.is_empty() {
            return Err(Error::EmptyInput("dataset"));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.sort_keys[a].total_cmp(&self.sort_keys[b]));
        let mut out = self.permuted(&order);
        out.sorted = true;
        Ok(out)
    }

    fn permuted(&self, order: &[usize]) -> DataSet {
        let d = self.dim;
        let mut strain = Vec::with_capacity(self.strain.len());
        let mut stress = Vec::with_capacity(self.stress.len());
        for &i in order {
            strain.extend_from_slice(&self.strain[i * d..(i + 1) * d]);
            stress.extend_from_slice(&self.stress[i * d..(i + 1) * d]);
        }
        DataSet {
            dim: d,
            strain,
            stress,
            sort_keys: order.iter().map(|&i| self.sort_keys[i]).collect(),
            sorted: false,
            label: self.label.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Median of `|stress/strain|` over all points and components, used as
    /// the scalar distance weight of the classical solver.
    pub fn median_modulus(&self) -> f64 {
        let ratios: Vec<f64> = self
            .strain
            .iter()
            .zip(&self.stress)
            .filter(|(e, _)| e.abs() >= SCALING_STRAIN_TOL)
            .map(|(e, s)| (s / e).abs())
            .collect();
        positive_or_one(median(ratios))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.len() * self.dim * 24);
        let header: Vec<String> = (1..=self.dim)
            .map(|i| format!("e{i}"))
            .chain((1..=self.dim).map(|i| format!("s{i}")))
            .collect();
        out.extend_from_slice(header.join(",").as_bytes());
        out.push(b'\n');
        for i in 0..self.len() {
            let row: Vec<String> = self
                .strain(i)
                .iter()
                .chain(self.stress(i))
                .map(|v| format!("{v}"))
                .collect();
            out.extend_from_slice(row.join(",").as_bytes());
            out.push(b'\n');
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&out).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<DataSet> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Parse(format!("{other:?}")),
        })?;
        let headers = rdr.headers()?.clone();
        if headers.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "{}: expected an even number of columns",
                path.display()
            )));
        }
        let dim = headers.len() / 2;
        for (i, h) in headers.iter().enumerate() {
            let want = if i < dim {
                format!("e{}", i + 1)
            } else {
                format!("s{}", i - dim + 1)
            };
            if h.trim() != want {
                return Err(Error::Parse(format!(
                    "{}: column {} is `{h}`, expected `{want}`",
                    path.display(),
                    i + 1
                )));
            }
        }
        let mut strain = Vec::new();
        let mut stress = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            for (i, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("{}: bad number `{field}`", path.display())))?;
                if i < dim {
                    strain.push(v);
                } else {
                    stress.push(v);
                }
            }
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        DataSet::from_flat(dim, strain, stress, label)
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            label: self.label.clone(),
            dimension: self.dim,
            n_points: self.len(),
            generator: self.provenance.generator.clone(),
            seed: self.provenance.seed,
        }
    }

    /// Writes `<stem>.csv` and the `<stem>.json` sidecar next to it.
    pub fn save(&self, csv_path: &Path) -> Result<PathBuf> {
        self.write_csv(csv_path)?;
        let side = sidecar_path(csv_path);
        let json = serde_json::to_string_pretty(&self.sidecar())?;
        fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))?;
        Ok(side)
    }

    /// Reads a CSV file and, when present, its JSON sidecar.
    pub fn load(csv_path: &Path) -> Result<DataSet> {
        let mut ds = DataSet::read_csv(csv_path)?;
        let side = sidecar_path(csv_path);
        if side.exists() {
            let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
            let meta: Sidecar = serde_json::from_str(&text)?;
            if meta.dimension != ds.dim {
                return Err(Error::DimensionMismatch {
                    expected: meta.dimension,
                    got: ds.dim,
                });
            }
            ds.label = meta.label;
            ds.provenance = Provenance {
                generator: meta.generator,
                seed: meta.seed,
            };
        }
        Ok(ds)
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// JSON metadata stored alongside a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub label: String,
    pub dimension: usize,
    pub n_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Diagonal stress/strain scaling, one strictly positive entry per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingMatrix {
    diag: Vec<f64>,
}

impl ScalingMatrix {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if diag.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config(format!(
                "scaling entries must be positive and finite: {diag:?}"
            )));
        }
        Ok(Self { diag })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            diag: vec![1.0; dim],
        }
    }

    pub fn uniform(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }
}

/// Per-component median of `|stress_i / strain_i|` over `points`.
///
/// Terms with `|strain_i| < SCALING_STRAIN_TOL` are skipped; a component with
/// no usable term (or a zero median) gets 1.
pub fn estimate_scaling<'a, I>(points: I) -> ScalingMatrix
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
{
    let mut per_comp: Vec<Vec<f64>> = Vec::new();
    for (strain, stress) in points {
        if per_comp.is_empty() {
            per_comp = vec![Vec::new(); strain.len()];
        }
        for (c, (e, s)) in strain.iter().zip(stress).enumerate() {
            if e.abs() >= SCALING_STRAIN_TOL {
                per_comp[c].push((s / e).abs());
            }
        }
    }
    ScalingMatrix {
        diag: per_comp
            .into_iter()
            .map(|r| positive_or_one(median(r)))
            .collect(),
    }
}

/// Convenience wrapper of [`estimate_scaling`] over owned points.
pub fn estimate_scaling_points(points: &[PhasePoint]) -> ScalingMatrix {
    estimate_scaling(points.iter().map(|p| (&p.strain[..], &p.stress[..])))
}

fn positive_or_one(v: Option<f64>) -> f64 {
    match v {
        Some(v) if v.is_finite() && v > 0.0 => v,
        _ => 1.0,
    }
}

/// Median with the mean of the two middle values for even counts.
pub(crate) fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(e: f64, s: f64) -> PhasePoint {
        PhasePoint::scalar(e, s).unwrap()
    }

    fn p6(e: [f64; 6], s: [f64; 6]) -> PhasePoint {
        PhasePoint::new(e.to_vec(), s.to_vec()).unwrap()
    }

    #[test]
    fn key_1d_examples() {
        assert_eq!(sort_key_1d(&p1(0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(sort_key_1d(&p1(-3.0, 4.0)).unwrap(), -5.0);
        assert!((sort_key_1d(&p1(1.0, 1.0)).unwrap() - 1.41421356).abs() < 1e-8);
        // sign(0) = +1
        assert_eq!(sort_key_1d(&p1(0.0, -2.0)).unwrap(), 2.0);
    }

    #[test]
    fn key_dimension_mismatch() {
        let six = p6([0.0; 6], [0.0; 6]);
        assert!(matches!(
            sort_key_1d(&six),
            Err(Error::DimensionMismatch { expected: 1, got: 6 })
        ));
        assert!(sort_key_6d(&p1(1.0, 1.0)).is_err());
    }

    #[test]
    fn key_6d_examples() {
        assert_eq!(sort_key_6d(&p6([0.0; 6], [1.0; 6])).unwrap(), 0.0);
        assert!((sort_key_6d(&p6([0.1; 6], [0.0; 6])).unwrap() - 0.6).abs() < 1e-15);
        let k = sort_key_6d(&p6([0.1, -0.1, 0.05, 0.0, 0.0, 0.0], [0.0; 6])).unwrap();
        assert!((k - 0.05).abs() < 1e-15);
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(PhasePoint::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(PhasePoint::new(vec![1.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(PhasePoint::scalar(f64::NAN, 0.0).is_err());
        assert!(PhasePoint::scalar(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn sort_orders_and_is_stable() {
        // keys 3, 1, 2 along the strain axis
        let ds = DataSet::from_points(&[p1(3.0, 0.0), p1(1.0, 0.0), p1(2.0, 0.0)], "t").unwrap();
        let s = ds.sort_canonical().unwrap();
        assert_eq!(s.sort_keys(), &[1.0, 2.0, 3.0]);
        assert!(s.is_sorted());
        assert_eq!(s.sort_canonical().unwrap(), s);

        // (0, 1) and (1, 0) share key 1; original order must survive
        let ds = DataSet::from_points(&[p1(0.0, 1.0), p1(5.0, 0.0), p1(1.0, 0.0)], "t").unwrap();
        let s = ds.sort_canonical().unwrap();
        assert_eq!(s.point(0), p1(0.0, 1.0));
        assert_eq!(s.point(1), p1(1.0, 0.0));
    }

    #[test]
    fn sort_empty_fails() {
        let ds = DataSet::empty(1, "e").unwrap();
        assert!(matches!(ds.sort_canonical(), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn scaling_examples() {
        let pts: Vec<PhasePoint> = (1..5)
            .map(|k| {
                let e = [0.1 * k as f64, -0.2, 0.3, 0.05, 0.01, 1.0];
                p6(e, e.map(|v| 2.0 * v))
            })
            .collect();
        assert!(estimate_scaling_points(&pts).diag().iter().all(|&d| d == 2.0));

        let single = p6([1.0; 6], [3.0; 6]);
        assert_eq!(estimate_scaling_points(&[single]).diag(), &[3.0; 6]);

        let pts = [
            p6([1.0; 6], [1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
            p6([1.0; 6], [2.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
            p6([1.0; 6], [100.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
        ];
        assert_eq!(estimate_scaling_points(&pts).diag()[0], 2.0);
    }

    #[test]
    fn scaling_degenerate_components_fall_back_to_one() {
        let pts = [p6([0.0, 1.0, 0.0, 0.0, 0.0, 0.0], [5.0, 4.0, 0.0, 0.0, 0.0, 0.0])];
        let d = estimate_scaling_points(&pts);
        assert_eq!(d.diag(), &[1.0, 4.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(d.diag().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn csv_round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.csv");
        let mut ds = DataSet::from_points(&[p1(-0.5, 0.25), p1(0.1, 1e-7)], "demo").unwrap();
        ds.provenance.seed = Some(9);
        ds.save(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "e1,s1\n-0.5,0.25\n0.1,0.0000001\n");
        let back = DataSet::load(&path).unwrap();
        assert_eq!(back.label, "demo");
        assert_eq!(back.provenance.seed, Some(9));
        assert_eq!(back.point(1), ds.point(1));
    }

    #[test]
    fn csv_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "x,y\n1,2\n").unwrap();
        assert!(matches!(DataSet::read_csv(&path), Err(Error::Parse(_))));
    }
}
