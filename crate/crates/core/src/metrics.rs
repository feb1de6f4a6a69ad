//! Error measures against a reference solution.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Borrowed displacement, strain and stress fields (member-major).
#[derive(Debug, Clone, Copy)]
pub struct Fields<'a> {
    pub u: &'a [f64],
    pub strain: &'a [f64],
    pub stress: &'a [f64],
}

impl<'a> Fields<'a> {
    pub fn new(u: &'a [f64], strain: &'a [f64], stress: &'a [f64]) -> Self {
        Self { u, strain, stress }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub u_re: f64,
    pub sigma_rms: f64,
    pub eps_rms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_gap: Option<f64>,
    pub wall_time: f64,
    pub lp_time: f64,
}

fn norm2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    norm2(a.iter().zip(b).map(|(x, y)| x - y))
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: a.len(),
        });
    }
    Ok(())
}

/// `||U - U_ref|| / ||U_ref||`.
pub fn relative_error(u: &[f64], reference: &[f64]) -> Result<f64> {
    check_len(u, reference)?;
    let r = norm2(reference.iter().copied());
    if r == 0.0 {
        return Err(Error::ZeroReference("displacement"));
    }
    Ok(diff_norm(u, reference) / r)
}

/// `||x - x_ref|| / (sqrt(m) ||x_ref||_inf)`.
pub fn rms_error(x: &[f64], reference: &[f64], m: usize, what: &'static str) -> Result<f64> {
    check_len(x, reference)?;
    let r = reference.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if r == 0.0 || m == 0 {
        return Err(Error::ZeroReference(what));
    }
    Ok(diff_norm(x, reference) / ((m as f64).sqrt() * r))
}

/// The three error measures for `m` members. Timings are left at zero.
pub fn compute_errors(sol: Fields, reference: Fields, m: usize) -> Result<ErrorReport> {
    Ok(ErrorReport {
        u_re: relative_error(sol.u, reference.u)?,
        sigma_rms: rms_error(sol.stress, reference.stress, m, "stress")?,
        eps_rms: rms_error(sol.strain, reference.strain, m, "strain")?,
        ..Default::default()
    })
}

/// Mean and population variance; `None` for an empty slice.
pub fn mean_variance(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var))
}
