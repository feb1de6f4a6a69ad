use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::args::{parse_objective, GenArgs, ModelArgs, SlpArgs};
use super::{merge_config, Ctx, Done, Format};
use crate::datagen::{derive_seed, inject_outliers};
use crate::ddcm::{ddcm_solve, DdcmOptions, MAX_FP};
use crate::metrics::{compute_errors, ErrorReport, Fields};
use crate::model::{ReferenceState, StructModel};
use crate::phase::DataSet;
use crate::slp::{self, global_hull_solve, slp_solve, Objective, SolveReport, SolveStatus};
use crate::sweep::{run_sweep, SweepSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct GenCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub gen: GenArgs,
    /// Number of stress outliers to inject.
    #[arg(long)]
    pub outliers: Option<usize>,
    /// Stress factor of the outliers.
    #[arg(long)]
    pub factor: Option<f64>,
    /// Dataset file name inside the output directory.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct SolveCmd {
    /// Dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub slp: SlpArgs,
    /// `compliance`, `plus:i` or `minus:i`.
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct BoundsCmd {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub slp: SlpArgs,
    /// Free dof whose bounds are sought.
    #[arg(long)]
    pub dof: Option<usize>,
    /// Run only this objective instead of all three.
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct SweepCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub gen: GenArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub slp: SlpArgs,
    /// Noise levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub noise: Vec<f64>,
    /// Outlier counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub outliers: Vec<usize>,
    /// Outlier stress factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub factors: Vec<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Bounds of this dof; compliance runs only when absent.
    #[arg(long)]
    pub dof: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct BaselineCmd {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Fixed-point sweep limit.
    #[arg(long)]
    pub max_fp: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct GlobalHullCmd {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub objective: Option<String>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Writes `files` and the manifest, and lists the paths on stdout.
fn emit(ctx: &Ctx, command: &str, config: &impl Serialize, files: Vec<(String, String)>) -> Result<()> {
    prepare(&ctx.out_dir)?;
    let mut names = Vec::new();
    for (name, text) in &files {
        let p = ctx.out_dir.join(name);
        write(&p, text)?;
        println!("wrote {}", p.display());
        names.push(name.clone());
    }
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "format": ctx.format,
        "jobs": ctx.jobs,
        "config": config,
        "outputs": names,
    });
    write(&ctx.out_dir.join("manifest.json"), &pretty(&manifest)?)
}

fn require<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn load_problem(data: &Option<PathBuf>, model: &ModelArgs) -> Result<(DataSet, StructModel, Option<ReferenceState>)> {
    let ds = DataSet::load(&require(data, "data")?)?;
    let m = model.structure()?.build()?;
    let reference = model.reference()?.map(|r| r.solve(&m)).transpose()?;
    Ok((ds, m, reference))
}

fn errors_of(m: &StructModel, reference: Option<&ReferenceState>, u: &[f64], strain: &[f64], stress: &[f64]) -> Result<Option<ErrorReport>> {
    match reference {
        Some(r) if !u.is_empty() => Ok(Some(compute_errors(
            Fields::new(u, strain, stress),
            Fields::new(&r.u, &r.strain, &r.stress),
            m.n_members(),
        )?)),
        _ => Ok(None),
    }
}

fn run_errors(m: &StructModel, reference: Option<&ReferenceState>, r: &SolveReport) -> Result<Option<ErrorReport>> {
    Ok(errors_of(m, reference, &r.u, &r.strain, &r.stress)?.map(|e| ErrorReport {
        wall_time: r.wall_time,
        lp_time: r.lp_time,
        ..e
    }))
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    objective: String,
    status: SolveStatus,
    iterations: usize,
    objective_value: Option<f64>,
    dof_value: Option<f64>,
    u_re: Option<f64>,
    sigma_rms: Option<f64>,
    eps_rms: Option<f64>,
    wall_time: f64,
    lp_time: f64,
    #[serde(skip)]
    _r: std::marker::PhantomData<&'a ()>,
}

fn objective_name(o: Objective) -> String {
    match o {
        Objective::Compliance => "compliance".into(),
        Objective::PlusDof(i) => format!("plus:{i}"),
        Objective::MinusDof(i) => format!("minus:{i}"),
    }
}

fn summary_row<'a>(r: &SolveReport, e: Option<&ErrorReport>, dof: Option<usize>) -> SummaryRow<'a> {
    SummaryRow {
        objective: objective_name(r.config.objective),
        status: r.status,
        iterations: r.iterations,
        objective_value: r.objective_value,
        dof_value: dof.and_then(|d| r.u.get(d).copied()),
        u_re: e.map(|e| e.u_re),
        sigma_rms: e.map(|e| e.sigma_rms),
        eps_rms: e.map(|e| e.eps_rms),
        wall_time: r.wall_time,
        lp_time: r.lp_time,
        _r: std::marker::PhantomData,
    }
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn print_run(r: &SolveReport, dof: Option<usize>) {
    let v = dof.and_then(|d| r.u.get(d)).map(|v| format!(" U[{}] = {v:.6}", dof.unwrap_or(0)));
    println!(
        "{}: {:?} after {} iterations, objective {:?}{} ({:.2} s, LP {:.2} s)",
        objective_name(r.config.objective),
        r.status,
        r.iterations,
        r.objective_value,
        v.unwrap_or_default(),
        r.wall_time,
        r.lp_time
    );
}

pub(super) fn gen(ctx: &Ctx, cfg: Option<&Path>, flags: &GenCmd) -> Result<Done> {
    let c = merge_config(cfg, flags)?;
    let resolved = GenCmd {
        gen: c.gen.resolved()?,
        ..c.clone()
    };
    let spec = resolved.gen.spec()?;
    let mut ds = spec.generate()?;
    if let Some(k) = resolved.outliers.filter(|&k| k > 0) {
        let seed = derive_seed(resolved.gen.seed.unwrap_or(0), &[0, 1]);
        ds = inject_outliers(&ds, k, resolved.factor.unwrap_or(1.2), seed)?;
    }
    prepare(&ctx.out_dir)?;
    let name = resolved.name.clone().unwrap_or_else(|| format!("{}.csv", spec.label()));
    let path = ctx.out_dir.join(&name);
    let side = ds.save(&path)?;
    println!("N_d = {}", ds.len());
    println!("wrote {}", path.display());
    println!("wrote {}", side.display());
    emit(ctx, "gen", &resolved, Vec::new())?;
    Ok(Done { converged: true })
}

fn resolved_slp(slp: &SlpArgs, dim: usize) -> SlpArgs {
    slp.resolved(dim)
}

pub(super) fn solve(ctx: &Ctx, cfg: Option<&Path>, flags: &SolveCmd) -> Result<Done> {
    let c = merge_config(cfg, flags)?;
    let (ds, m, reference) = load_problem(&c.data, &c.model)?;
    let objective = parse_objective(c.objective.as_deref().unwrap_or("compliance"))?;
    let seed = c.seed.unwrap_or(0);
    let resolved = SolveCmd {
        slp: resolved_slp(&c.slp, m.dim),
        objective: Some(objective_name(objective)),
        seed: Some(seed),
        ..c.clone()
    };
    let cfg = resolved.slp.config(m.dim, seed).with_objective(objective);
    let r = slp_solve(&m, &ds, &cfg)?;
    let e = run_errors(&m, reference.as_ref(), &r)?;
    print_run(&r, objective.dof());
    let files = match ctx.format {
        Format::Json => vec![("solve.json".to_string(), pretty(&json!({ "report": r, "errors": e }))?)],
        Format::Csv => vec![
            ("solve.csv".to_string(), csv_rows(&[summary_row(&r, e.as_ref(), objective.dof())])?),
            ("solve_history.csv".to_string(), r.history_csv()?),
        ],
    };
    emit(ctx, "solve", &resolved, files)?;
    Ok(Done { converged: r.converged })
}

pub(super) fn bounds(ctx: &Ctx, cfg: Option<&Path>, flags: &BoundsCmd) -> Result<Done> {
    let c = merge_config(cfg, flags)?;
    let (ds, m, reference) = load_problem(&c.data, &c.model)?;
    let seed = c.seed.unwrap_or(0);
    let only = c.objective.as_deref().map(parse_objective).transpose()?;
    let dof = match (c.dof, only) {
        (Some(d), _) => Some(d),
        (None, Some(o)) => o.dof(),
        (None, None) => return Err(Error::Config("--dof is required".into())),
    };
    let resolved = BoundsCmd {
        slp: resolved_slp(&c.slp, m.dim),
        dof,
        seed: Some(seed),
        ..c.clone()
    };
    let base = resolved.slp.config(m.dim, seed);
    let runs: Vec<SolveReport> = match only {
        Some(o) => vec![slp_solve(&m, &ds, &base.with_objective(o))?],
        None => {
            let b = slp::bounds(&m, &ds, &base, dof.expect("dof set"))?;
            vec![b.lower_report, b.comparable_report, b.upper_report]
        }
    };
    let errs: Vec<Option<ErrorReport>> = runs
        .iter()
        .map(|r| run_errors(&m, reference.as_ref(), r))
        .collect::<Result<_>>()?;
    for r in &runs {
        print_run(r, dof);
    }
    let value = |o: Objective| -> Option<f64> {
        let r = runs.iter().find(|r| r.config.objective == o)?;
        dof.and_then(|d| r.u.get(d).copied())
    };
    let (lower, upper) = match dof {
        Some(d) => (value(Objective::PlusDof(d)), value(Objective::MinusDof(d))),
        None => (None, None),
    };
    let comparable = value(Objective::Compliance);
    if let (Some(lo), Some(hi)) = (lower, upper) {
        println!("bounds of U[{}]: [{lo:.6}, {hi:.6}], comparable {comparable:?}", dof.unwrap_or(0));
    }
    let converged = runs.iter().all(|r| r.converged);
    let files = match ctx.format {
        Format::Json => {
            let timings: Vec<_> = runs
                .iter()
                .map(|r| json!({ "objective": objective_name(r.config.objective), "total": r.wall_time, "lp": r.lp_time }))
                .collect();
            let body = json!({
                "dof": dof,
                "lower": lower,
                "comparable": comparable,
                "upper": upper,
                "converged": converged,
                "flagged": runs.iter().filter(|r| !r.converged).map(|r| objective_name(r.config.objective)).collect::<Vec<_>>(),
                "timings": timings,
                "errors": errs,
                "reports": runs,
            });
            vec![("bounds.json".to_string(), pretty(&body)?)]
        }
        Format::Csv => {
            let rows: Vec<_> = runs.iter().zip(&errs).map(|(r, e)| summary_row(r, e.as_ref(), dof)).collect();
            let mut files = vec![("bounds.csv".to_string(), csv_rows(&rows)?)];
            for r in &runs {
                let tag = objective_name(r.config.objective).replace(':', "_");
                files.push((format!("bounds_history_{tag}.csv"), r.history_csv()?));
            }
            files
        }
    };
    emit(ctx, "bounds", &resolved, files)?;
    Ok(Done { converged })
}

pub(super) fn sweep(ctx: &Ctx, cfg: Option<&Path>, flags: &SweepCmd) -> Result<Done> {
    let c = merge_config(cfg, flags)?;
    let gen = c.gen.resolved()?;
    let structure = c.model.structure()?;
    let dim = if gen.kind == Some(super::args::Kind::Gauss6d) { 6 } else { 1 };
    let resolved = SweepCmd {
        gen,
        slp: resolved_slp(&c.slp, dim),
        replicates: Some(c.replicates.unwrap_or(10)),
        outliers: if c.outliers.is_empty() { vec![0] } else { c.outliers.clone() },
        factors: if c.factors.is_empty() { vec![1.0] } else { c.factors.clone() },
        ..c.clone()
    };
    let seed = resolved.gen.seed.unwrap_or(0);
    let spec = SweepSpec {
        structure,
        reference: resolved.model.reference()?,
        data: resolved.gen.spec()?,
        noise: resolved.noise.clone(),
        outliers: resolved.outliers.clone(),
        factors: resolved.factors.clone(),
        replicates: resolved.replicates.expect("resolved"),
        seed,
        slp: resolved.slp.config(dim, seed),
        dof: resolved.dof,
    };
    let rep = run_sweep(&spec, ctx.jobs)?;
    for a in &rep.aggregates {
        println!(
            "cell {}: noise {:?} outliers {} x{}: n = {:?}, failed = {:?}, U_RE {:?}, sigma_RMS {:?}, lower {:?}, upper {:?}",
            a.cell, a.noise, a.outliers, a.factor, a.n, a.failed, a.u_re, a.sigma_rms, a.lower, a.upper
        );
    }
    let mut files = vec![("sweep.csv".to_string(), rep.to_csv()?)];
    if ctx.format == Format::Json {
        files.push(("sweep.json".to_string(), pretty(&json!({ "spec": spec, "report": rep }))?));
    }
    emit(ctx, "sweep", &resolved, files)?;
    Ok(Done { converged: true })
}

pub(super) fn baseline(ctx: &Ctx, cfg: Option<&Path>, flags: &BaselineCmd) -> Result<Done> {
    let c = merge_config(cfg, flags)?;
    let (ds, m, reference) = load_problem(&c.data, &c.model)?;
    let resolved = BaselineCmd {
        max_fp: Some(c.max_fp.unwrap_or(MAX_FP)),
        ..c.clone()
    };
    let opts = DdcmOptions {
        max_fp: resolved.max_fp.expect("resolved"),
        ..DdcmOptions::default()
    };
    let s = ddcm_solve(&m, &ds, None, &opts)?;
    let e = errors_of(&m, reference.as_ref(), &s.u, &s.strain, &s.stress)?;
    println!(
        "baseline: converged {} after {} sweeps, distance {:?}",
        s.converged,
        s.iterations,
        s.objective.last()
    );
    let files = match ctx.format {
        Format::Json => vec![("baseline.json".to_string(), pretty(&json!({ "state": s, "errors": e }))?)],
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                sweep: usize,
                distance: f64,
            }
            let rows: Vec<Row> = s.objective.iter().enumerate().map(|(i, &d)| Row { sweep: i + 1, distance: d }).collect();
            vec![("baseline.csv".to_string(), csv_rows(&rows)?)]
        }
    };
    emit(ctx, "baseline", &resolved, files)?;
    Ok(Done { converged: s.converged })
}

pub(super) fn globalhull(ctx: &Ctx, cfg: Option<&Path>, flags: &GlobalHullCmd) -> Result<Done> {
    let c = merge_config(cfg, flags)?;
    let (ds, m, reference) = load_problem(&c.data, &c.model)?;
    let objective = parse_objective(c.objective.as_deref().unwrap_or("compliance"))?;
    let resolved = GlobalHullCmd {
        objective: Some(objective_name(objective)),
        ..c.clone()
    };
    let r = global_hull_solve(&m, &ds, objective)?;
    let e = run_errors(&m, reference.as_ref(), &r)?;
    print_run(&r, objective.dof());
    let files = match ctx.format {
        Format::Json => vec![("globalhull.json".to_string(), pretty(&json!({ "report": r, "errors": e }))?)],
        Format::Csv => vec![("globalhull.csv".to_string(), csv_rows(&[summary_row(&r, e.as_ref(), objective.dof())])?)],
    };
    emit(ctx, "globalhull", &resolved, files)?;
    Ok(Done { converged: r.converged })
}
