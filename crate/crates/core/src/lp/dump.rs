use std::fmt::Write as _;

use super::LpProblem;

/// Renders `p` as fixed-column text: one `OBJ` line per nonzero cost, one
/// `ROW` line per matrix entry, one `RHS` line per row and one `BOUND` line
/// per variable. Infinite bounds print as `-inf`/`inf`.
pub fn write_dump(p: &LpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME      lp  vars {:>8}  rows {:>8}", p.n_vars(), p.n_rows());
    for (j, &c) in p.cost().iter().enumerate() {
        if c != 0.0 {
            let _ = writeln!(out, "OBJ   {:>10} {:>24.16e}", j, c);
        }
    }
    let a = p.matrix();
    let mut rows: Vec<(usize, usize, f64)> = Vec::with_capacity(a.nnz());
    for j in 0..a.ncols() {
        let (ri, vals) = a.col(j);
        rows.extend(ri.iter().zip(vals).map(|(&r, &v)| (r, j, v)));
    }
    rows.sort_by_key(|&(r, j, _)| (r, j));
    for (r, j, v) in rows {
        let _ = writeln!(out, "ROW   {:>10} {:>10} {:>24.16e}", r, j, v);
    }
    for (i, &b) in p.rhs().iter().enumerate() {
        let _ = writeln!(out, "RHS   {:>10} {:>24.16e}", i, b);
    }
    for (j, (&l, &h)) in p.lower().iter().zip(p.upper()).enumerate() {
        let _ = writeln!(out, "BOUND {:>10} {:>24} {:>24}", j, fmt_bound(l), fmt_bound(h));
    }
    out.push_str("ENDATA\n");
    out
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}
