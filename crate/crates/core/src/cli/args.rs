//! Flag sets. Every field is optional so that a JSON config file and the
//! command line can be overlaid; `resolved` fills in the defaults.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::datagen::GenSpec;
use crate::model::structures::{Structure, CANTILEVER_LOAD};
use crate::model::Reference;
use crate::nn::NnMode;
use crate::slp::{LambdaBounds, Objective, SlpConfig};
use crate::{Error, Result};

/// Overlays the non-null fields of `flags` onto `file`.
pub fn overlay<T: Serialize + DeserializeOwned>(file: T, flags: &T) -> Result<T> {
    let mut base = serde_json::to_value(file)?;
    if let (Some(b), serde_json::Value::Object(f)) = (base.as_object_mut(), serde_json::to_value(flags)?) {
        for (k, v) in f {
            let empty = v.is_null() || v.as_array().is_some_and(|a| a.is_empty()) || v == serde_json::Value::Bool(false);
            if !empty {
                b.insert(k, v);
            }
        }
    }
    Ok(serde_json::from_value(base)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Linear,
    Cuberoot,
    Regularized,
    Gauss6d,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct GenArgs {
    /// Data generator.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Number of points (linear, cuberoot).
    #[arg(long)]
    pub nd: Option<usize>,
    /// Points per line (regularized).
    #[arg(long)]
    pub per_line: Option<usize>,
    /// Grid points per strain component (gauss6d).
    #[arg(long)]
    pub per_axis: Option<usize>,
    /// Strain range as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    pub range: Vec<f64>,
    /// Noise amplitude of the cube-root data.
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Noise cap of the linear data.
    #[arg(long)]
    pub cap: Option<f64>,
    /// Young's modulus (linear, gauss6d).
    #[arg(long)]
    pub modulus: Option<f64>,
    /// Line moduli (regularized), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub moduli: Vec<f64>,
    /// Gaussian noise variance (gauss6d).
    #[arg(long, conflicts_with = "std")]
    pub variance: Option<f64>,
    /// Gaussian noise standard deviation (gauss6d).
    #[arg(long)]
    pub std: Option<f64>,
    #[arg(long)]
    pub poisson: Option<f64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl GenArgs {
    pub fn resolved(&self) -> Result<Self> {
        let kind = self
            .kind
            .ok_or_else(|| Error::Config("--kind is required".into()))?;
        let mut out = self.clone();
        let range = |lo: f64, hi: f64| if self.range.is_empty() { vec![lo, hi] } else { self.range.clone() };
        out.seed.get_or_insert(0);
        match kind {
            Kind::Linear => {
                out.nd.get_or_insert(201);
                out.range = range(-1.0, 1.0);
                out.modulus.get_or_insert(1.0);
                out.cap.get_or_insert(0.1);
            }
            Kind::Cuberoot => {
                out.nd.get_or_insert(121);
                out.range = range(-1.5, 1.5);
                out.theta0.get_or_insert(0.04);
            }
            Kind::Regularized => {
                out.per_line.get_or_insert(201);
                out.range = range(-1.0, 1.0);
                if out.moduli.is_empty() {
                    out.moduli = vec![0.8, 1.2];
                }
                out.seed = None;
            }
            Kind::Gauss6d => {
                out.per_axis.get_or_insert(5);
                out.range = range(-0.1, 0.1);
                out.modulus.get_or_insert(1.0);
                out.poisson.get_or_insert(0.3);
                if out.std.is_none() {
                    out.variance.get_or_insert(0.005);
                }
            }
        }
        if out.range.len() != 2 {
            return Err(Error::Config("--range takes two values".into()));
        }
        Ok(out)
    }

    /// Generator spec of resolved flags.
    pub fn spec(&self) -> Result<GenSpec> {
        let r = self.resolved()?;
        let range = [r.range[0], r.range[1]];
        let seed = r.seed.unwrap_or(0);
        Ok(match r.kind.expect("resolved") {
            Kind::Linear => GenSpec::Linear {
                n_d: r.nd.expect("resolved"),
                range,
                modulus: r.modulus.expect("resolved"),
                cap: r.cap.expect("resolved"),
                seed,
            },
            Kind::Cuberoot => GenSpec::CubeRoot {
                n_d: r.nd.expect("resolved"),
                range,
                theta0: r.theta0.expect("resolved"),
                seed,
            },
            Kind::Regularized => GenSpec::Regularized {
                per_line: r.per_line.expect("resolved"),
                range,
                moduli: r.moduli,
            },
            Kind::Gauss6d => GenSpec::Gauss6d {
                per_axis: r.per_axis.expect("resolved"),
                range,
                noise: r.std.or(r.variance).expect("resolved"),
                noise_is_std: r.std.is_some(),
                modulus: r.modulus.expect("resolved"),
                poisson: r.poisson.expect("resolved"),
                seed,
            },
        })
    }
}

/// `three-bar`, `tower`, `cantilever` or a JSON model file.
pub fn parse_structure(s: &str, load: Option<f64>) -> Result<Structure> {
    Ok(match s {
        "three-bar" | "three_bar" => Structure::ThreeBar,
        "tower" => Structure::Tower,
        "cantilever" => Structure::Cantilever {
            load: load.unwrap_or(CANTILEVER_LOAD),
        },
        path => {
            let p = PathBuf::from(path);
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            let v: serde_json::Value = serde_json::from_str(&text)?;
            if v.get("hexes").is_some() {
                Structure::Mesh { path: p }
            } else {
                Structure::Truss { path: p }
            }
        }
    })
}

/// `linear:E`, `cuberoot` or `elastic:E,nu`.
pub fn parse_reference(s: &str) -> Result<Reference> {
    let bad = || Error::Config(format!("bad reference `{s}`"));
    let (law, rest) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = rest
        .split(',')
        .filter(|t| !t.is_empty())
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    Ok(match (law, nums.as_slice()) {
        ("linear", []) => Reference::Linear { modulus: 1.0 },
        ("linear", [e]) => Reference::Linear { modulus: *e },
        ("cuberoot", []) => Reference::CubeRoot,
        ("elastic", []) => Reference::Elastic {
            modulus: 1.0,
            poisson: 0.3,
        },
        ("elastic", [e, nu]) => Reference::Elastic {
            modulus: *e,
            poisson: *nu,
        },
        _ => return Err(bad()),
    })
}

/// `compliance`, `plus:i` (lower bound of dof `i`) or `minus:i`.
pub fn parse_objective(s: &str) -> Result<Objective> {
    let bad = || Error::Config(format!("bad objective `{s}`"));
    if s == "compliance" {
        return Ok(Objective::Compliance);
    }
    let (kind, i) = s.split_once(':').ok_or_else(bad)?;
    let i: usize = i.parse().map_err(|_| bad())?;
    match kind {
        "plus" => Ok(Objective::PlusDof(i)),
        "minus" => Ok(Objective::MinusDof(i)),
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct ModelArgs {
    /// `three-bar`, `tower`, `cantilever` or a JSON truss/mesh file.
    #[arg(long)]
    pub model: Option<String>,
    /// Total load of the built-in cantilever.
    #[arg(long)]
    pub load: Option<f64>,
    /// Reference law for error measures: `linear:E`, `cuberoot`,
    /// `elastic:E,nu`.
    #[arg(long)]
    pub reference: Option<String>,
}

impl ModelArgs {
    pub fn structure(&self) -> Result<Structure> {
        let m = self
            .model
            .as_deref()
            .ok_or_else(|| Error::Config("--model is required".into()))?;
        parse_structure(m, self.load)
    }

    pub fn reference(&self) -> Result<Option<Reference>> {
        self.reference.as_deref().map(parse_reference).transpose()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct SlpArgs {
    /// Points per local hull.
    #[arg(long)]
    pub nc: Option<usize>,
    /// Initial hull size (stride for bars, simplex edge in 6-D).
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Simplex edge floor (6-D).
    #[arg(long)]
    pub lmin: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_lo: Option<f64>,
    #[arg(long)]
    pub lambda_hi: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Randomized kd-trees instead of brute-force search (6-D).
    #[arg(long)]
    pub ann: bool,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub checks: Option<usize>,
    /// Divide stresses by the dataset scaling before searching.
    #[arg(long)]
    pub nn_scaled: bool,
    /// Solve every LP from scratch.
    #[arg(long)]
    pub cold: bool,
}

impl SlpArgs {
    /// Fills unset fields from the defaults for phase dimension `dim`.
    pub fn resolved(&self, dim: usize) -> Self {
        let d = if dim == 6 { SlpConfig::continuum() } else { SlpConfig::default() };
        Self {
            nc: self.nc.or(Some(d.n_c)),
            l1: self.l1.or(d.l1),
            rho: self.rho.or(Some(d.rho)),
            lmin: self.lmin.or(Some(d.l_min)),
            tol: self.tol.or(Some(d.tol)),
            lambda_lo: self.lambda_lo.or(Some(d.lambda.lo)),
            lambda_hi: self.lambda_hi.or(Some(d.lambda.hi)),
            max_iter: self.max_iter.or(Some(d.max_iter)),
            ann: self.ann,
            trees: self.trees.or(Some(20)),
            checks: self.checks.or(Some(256)),
            nn_scaled: self.nn_scaled,
            cold: self.cold,
        }
    }

    pub fn config(&self, dim: usize, seed: u64) -> SlpConfig {
        let r = self.resolved(dim);
        SlpConfig {
            n_c: r.nc.expect("resolved"),
            l1: r.l1,
            rho: r.rho.expect("resolved"),
            l_min: r.lmin.expect("resolved"),
            tol: r.tol.expect("resolved"),
            lambda: LambdaBounds {
                lo: r.lambda_lo.expect("resolved"),
                hi: r.lambda_hi.expect("resolved"),
            },
            max_iter: r.max_iter.expect("resolved"),
            objective: Objective::Compliance,
            warm_start: !r.cold,
            nn: if r.ann {
                NnMode::RandomizedKdTrees {
                    trees: r.trees.expect("resolved"),
                    max_checks: r.checks.expect("resolved"),
                }
            } else {
                NnMode::BruteForce
            },
            nn_scaled: r.nn_scaled,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = GenArgs {
            kind: Some(Kind::Linear),
            nd: Some(51),
            seed: Some(3),
            ..Default::default()
        };
        let flags = GenArgs {
            nd: Some(101),
            ..Default::default()
        };
        let m = overlay(file, &flags).unwrap();
        assert_eq!((m.kind, m.nd, m.seed), (Some(Kind::Linear), Some(101), Some(3)));
    }

    #[test]
    fn objective_syntax() {
        assert_eq!(parse_objective("plus:3").unwrap(), Objective::PlusDof(3));
        assert_eq!(parse_objective("minus:0").unwrap(), Objective::MinusDof(0));
        assert!(parse_objective("max:1").is_err());
        assert!(parse_objective("plus").is_err());
    }

    #[test]
    fn reference_syntax() {
        assert_eq!(parse_reference("linear:2").unwrap(), Reference::Linear { modulus: 2.0 });
        assert_eq!(
            parse_reference("elastic:1,0.25").unwrap(),
            Reference::Elastic {
                modulus: 1.0,
                poisson: 0.25
            }
        );
        assert!(parse_reference("elastic:1").is_err());
    }

    #[test]
    fn gauss_defaults_to_variance() {
        let g = GenArgs {
            kind: Some(Kind::Gauss6d),
            ..Default::default()
        };
        match g.spec().unwrap() {
            GenSpec::Gauss6d { noise, noise_is_std, per_axis, .. } => {
                assert_eq!((noise, noise_is_std, per_axis), (0.005, false, 5));
            }
            other => panic!("{other:?}"),
        }
    }
}
