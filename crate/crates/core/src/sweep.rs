//! Seeded replicate experiments over a grid of noise levels and outliers.
//!
//! Cell order is noise-major, then outlier count, then factor. Replicate
//! `r` draws its dataset with `derive_seed(seed, [r, 0])` and its outliers
//! with `derive_seed(seed, [r, 1])`, so every cell sees the same base noise
//! realisations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{derive_seed, inject_outliers, GenSpec};
use crate::metrics::{compute_errors, mean_variance, Fields};
use crate::model::structures::Structure;
use crate::model::{Reference, ReferenceState, StructModel};
use crate::slp::{bounds, slp_solve, SlpConfig, SolveStatus};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub structure: Structure,
    #[serde(default)]
    pub reference: Option<Reference>,
    /// Generator template; its seed is replaced per replicate.
    pub data: GenSpec,
    /// Noise levels; empty keeps the template's.
    #[serde(default)]
    pub noise: Vec<f64>,
    #[serde(default = "zero_outliers")]
    pub outliers: Vec<usize>,
    #[serde(default = "unit_factor")]
    pub factors: Vec<f64>,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub slp: SlpConfig,
    /// Bounds of this dof; `None` runs the compliance objective only.
    #[serde(default)]
    pub dof: Option<usize>,
}

fn zero_outliers() -> Vec<usize> {
    vec![0]
}

fn unit_factor() -> Vec<f64> {
    vec![1.0]
}

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub noise: Option<f64>,
    pub outliers: usize,
    pub factor: f64,
}

/// One replicate, or the mean over a cell (`row = "aggregate"`), in which
/// case `var_*` hold population variances and `n`/`failed` count
/// replicates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub row: String,
    pub cell: usize,
    pub noise: Option<f64>,
    pub outliers: usize,
    pub factor: f64,
    pub replicate: Option<usize>,
    pub seed: Option<u64>,
    pub status: Option<String>,
    pub n: Option<usize>,
    pub failed: Option<usize>,
    pub iterations: Option<usize>,
    pub lower: Option<f64>,
    pub comparable: Option<f64>,
    pub upper: Option<f64>,
    pub u_re: Option<f64>,
    pub sigma_rms: Option<f64>,
    pub eps_rms: Option<f64>,
    pub var_lower: Option<f64>,
    pub var_comparable: Option<f64>,
    pub var_upper: Option<f64>,
    pub var_u_re: Option<f64>,
    pub var_sigma_rms: Option<f64>,
    pub var_eps_rms: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<Cell>,
    pub replicates: Vec<SweepRow>,
    pub aggregates: Vec<SweepRow>,
}

impl SweepReport {
    /// Replicate rows followed by aggregate rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in self.replicates.iter().chain(&self.aggregates) {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn aggregate(&self, cell: usize) -> &SweepRow {
        &self.aggregates[cell]
    }
}

impl SweepSpec {
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let noise: Vec<Option<f64>> = if self.noise.is_empty() {
            vec![self.data.noise()]
        } else {
            self.noise.iter().map(|&v| Some(v)).collect()
        };
        if self.outliers.is_empty() || self.factors.is_empty() {
            return Err(Error::Config("outlier counts and factors must be non-empty".into()));
        }
        let mut cells = Vec::new();
        for &n in &noise {
            for &k in &self.outliers {
                for &f in &self.factors {
                    cells.push(Cell {
                        noise: n,
                        outliers: k,
                        factor: f,
                    });
                }
            }
        }
        Ok(cells)
    }

    /// Seed of replicate `r`'s base dataset.
    pub fn data_seed(&self, r: usize) -> u64 {
        derive_seed(self.seed, &[r as u64, 0])
    }

    pub fn outlier_seed(&self, r: usize) -> u64 {
        derive_seed(self.seed, &[r as u64, 1])
    }
}

struct Outcome {
    status: SolveStatus,
    iterations: usize,
    lower: Option<f64>,
    comparable: f64,
    upper: Option<f64>,
    errors: Option<(f64, f64, f64)>,
}

fn run_one(spec: &SweepSpec, model: &StructModel, reference: Option<&ReferenceState>, cell: &Cell, r: usize) -> Result<Outcome> {
    let gen = match cell.noise {
        Some(v) if spec.data.noise().is_some() => spec.data.with_noise(v)?,
        _ => spec.data.clone(),
    };
    let mut ds = gen.with_seed(spec.data_seed(r)).generate()?;
    if cell.outliers > 0 {
        ds = inject_outliers(&ds, cell.outliers, cell.factor, spec.outlier_seed(r))?;
    }
    let cfg = SlpConfig {
        seed: derive_seed(spec.seed, &[r as u64, 2]),
        ..spec.slp.clone()
    };
    let (cmp, lower, upper, status, iterations) = match spec.dof {
        Some(dof) => {
            let b = bounds(model, &ds, &cfg, dof)?;
            let worst = [&b.lower_report, &b.comparable_report, &b.upper_report]
                .into_iter()
                .map(|r| r.status)
                .find(|s| *s != SolveStatus::Converged)
                .unwrap_or(SolveStatus::Converged);
            let it = b.comparable_report.iterations;
            (b.comparable_report, Some(b.lower), Some(b.upper), worst, it)
        }
        None => {
            let s = slp_solve(model, &ds, &cfg.with_objective(crate::slp::Objective::Compliance))?;
            let (st, it) = (s.status, s.iterations);
            (s, None, None, st, it)
        }
    };
    let errors = match reference {
        Some(rf) if !cmp.u.is_empty() => {
            let e = compute_errors(
                Fields::new(&cmp.u, &cmp.strain, &cmp.stress),
                Fields::new(&rf.u, &rf.strain, &rf.stress),
                model.n_members(),
            )?;
            Some((e.u_re, e.sigma_rms, e.eps_rms))
        }
        _ => None,
    };
    let comparable = match spec.dof {
        Some(dof) => cmp.u.get(dof).copied().unwrap_or(f64::NAN),
        None => cmp.objective_value.unwrap_or(f64::NAN),
    };
    Ok(Outcome {
        status,
        iterations,
        lower,
        comparable,
        upper,
        errors,
    })
}

fn status_name(s: SolveStatus) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Runs every replicate of every cell on up to `jobs` threads (`None` uses
/// the global pool). A replicate that errors is recorded and skipped in
/// the aggregates. `comparable` is the dof value when `dof` is set and the
/// compliance otherwise.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepReport> {
    if spec.replicates == 0 {
        return Err(Error::Config("replicates must be positive".into()));
    }
    let cells = spec.cells()?;
    let model = spec.structure.build()?;
    let reference = spec.reference.map(|r| r.solve(&model)).transpose()?;
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.replicates).map(move |r| (c, r)))
        .collect();
    let work = || -> Vec<SweepRow> {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                let cell = &cells[c];
                let mut row = SweepRow {
                    row: "replicate".into(),
                    cell: c,
                    noise: cell.noise,
                    outliers: cell.outliers,
                    factor: cell.factor,
                    replicate: Some(r),
                    seed: Some(spec.data_seed(r)),
                    ..Default::default()
                };
                match run_one(spec, &model, reference.as_ref(), cell, r) {
                    Ok(o) => {
                        row.status = Some(status_name(o.status));
                        row.iterations = Some(o.iterations);
                        row.lower = o.lower;
                        row.comparable = Some(o.comparable);
                        row.upper = o.upper;
                        if let Some((u, s, e)) = o.errors {
                            (row.u_re, row.sigma_rms, row.eps_rms) = (Some(u), Some(s), Some(e));
                        }
                    }
                    Err(e) => {
                        row.status = Some("error".into());
                        row.error = Some(e.to_string());
                    }
                }
                row
            })
            .collect()
    };
    let rows = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let aggregates = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| aggregate(c, cell, rows.iter().filter(|r| r.cell == c)))
        .collect();
    Ok(SweepReport {
        cells,
        replicates: rows,
        aggregates,
    })
}

fn aggregate<'a>(c: usize, cell: &Cell, rows: impl Iterator<Item = &'a SweepRow>) -> SweepRow {
    let rows: Vec<&SweepRow> = rows.collect();
    let ok: Vec<&&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let stat = |f: fn(&SweepRow) -> Option<f64>| -> (Option<f64>, Option<f64>) {
        let xs: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
        match mean_variance(&xs) {
            Some((m, v)) => (Some(m), Some(v)),
            None => (None, None),
        }
    };
    let (lower, var_lower) = stat(|r| r.lower);
    let (comparable, var_comparable) = stat(|r| r.comparable);
    let (upper, var_upper) = stat(|r| r.upper);
    let (u_re, var_u_re) = stat(|r| r.u_re);
    let (sigma_rms, var_sigma_rms) = stat(|r| r.sigma_rms);
    let (eps_rms, var_eps_rms) = stat(|r| r.eps_rms);
    SweepRow {
        row: "aggregate".into(),
        cell: c,
        noise: cell.noise,
        outliers: cell.outliers,
        factor: cell.factor,
        n: Some(ok.len()),
        failed: Some(rows.len() - ok.len()),
        lower,
        comparable,
        upper,
        u_re,
        sigma_rms,
        eps_rms,
        var_lower,
        var_comparable,
        var_upper,
        var_u_re,
        var_sigma_rms,
        var_eps_rms,
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepSpec {
        SweepSpec {
            structure: Structure::ThreeBar,
            reference: Some(Reference::Linear { modulus: 1.0 }),
            data: GenSpec::Linear {
                n_d: 101,
                range: [-1.0, 1.0],
                modulus: 1.0,
                cap: 0.1,
                seed: 0,
            },
            noise: vec![0.02, 0.1],
            outliers: vec![0],
            factors: vec![1.0],
            replicates: 3,
            seed: 5,
            slp: SlpConfig {
                l1: Some(10.0),
                ..SlpConfig::default()
            },
            dof: Some(0),
        }
    }

    #[test]
    fn rows_and_aggregates() {
        let rep = run_sweep(&small(), Some(2)).unwrap();
        assert_eq!(rep.replicates.len(), 6);
        assert_eq!(rep.aggregates.len(), 2);
        let csv = rep.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 1 + 6 + 2);
        for a in &rep.aggregates {
            assert_eq!(a.n, Some(3));
            assert!(a.lower.unwrap() <= a.upper.unwrap());
        }
    }

    #[test]
    fn rerun_is_identical() {
        let a = run_sweep(&small(), Some(1)).unwrap().to_csv().unwrap();
        let b = run_sweep(&small(), Some(3)).unwrap().to_csv().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_replicate_has_zero_variance() {
        let spec = SweepSpec {
            replicates: 1,
            noise: vec![],
            ..small()
        };
        let rep = run_sweep(&spec, None).unwrap();
        assert_eq!(rep.aggregates[0].var_u_re, Some(0.0));
    }

    #[test]
    fn outlier_grid_shape() {
        let spec = SweepSpec {
            noise: vec![],
            outliers: vec![0, 4, 8, 16, 32],
            factors: vec![0.8, 1.2],
            ..small()
        };
        assert_eq!(spec.cells().unwrap().len(), 10);
    }

    #[test]
    fn failed_replicate_is_recorded() {
        let spec = SweepSpec {
            outliers: vec![500],
            noise: vec![],
            replicates: 2,
            ..small()
        };
        let rep = run_sweep(&spec, None).unwrap();
        assert!(rep.replicates.iter().all(|r| r.status.as_deref() == Some("error")));
        assert_eq!(rep.aggregates[0].failed, Some(2));
        assert_eq!(rep.aggregates[0].n, Some(0));
    }
}
