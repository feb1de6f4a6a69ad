//! Two-phase revised simplex for equality-constrained problems with
//! per-variable bounds.
//!
//! Phase 1 starts from an all-artificial basis (one signed artificial column
//! per row) and minimizes the artificial sum. Phase 2 fixes the artificials
//! at zero and minimizes the true cost. Nonbasic variables sit at a finite
//! bound, or at zero when free. Pricing is Devex; after a long run of
//! degenerate pivots Bland's rule takes over until progress resumes.

use super::lu::{Eta, LuFactor};
use super::{Basis, LpError, LpProblem, LpSolution, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Primal feasibility tolerance.
    pub feas_tol: f64,
    /// Reduced-cost optimality tolerance.
    pub opt_tol: f64,
    /// Smallest admissible pivot element in the ratio test.
    pub pivot_tol: f64,
    /// Refactorize the basis after this many product-form updates.
    pub refactor_every: usize,
    /// Bland's rule engages after `bland_factor * n_rows` consecutive
    /// degenerate pivots.
    pub bland_factor: usize,
    /// Hard cap on pivots; `None` picks a size-dependent default.
    pub max_iter: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_every: 100,
            bland_factor: 50,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Simplex<'a> {
    p: &'a LpProblem,
    opts: SimplexOptions,
    m: usize,
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    art_sign: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    lu: Option<LuFactor>,
    etas: Vec<Eta>,
    work: Vec<f64>,
    iterations: usize,
    max_iter: usize,
    degenerate_run: usize,
    bland: bool,
    /// Devex reference weights, one per column.
    devex: Vec<f64>,
}

pub fn solve(p: &LpProblem) -> Result<LpSolution, LpError> {
    solve_with(p, &SimplexOptions::default(), None)
}

pub fn solve_with(
    p: &LpProblem,
    opts: &SimplexOptions,
    warm: Option<&Basis>,
) -> Result<LpSolution, LpError> {
    if let Some(basis) = warm {
        if basis.n_vars == p.n_vars() && basis.n_rows == p.n_rows() {
            let mut s = Simplex::new(p, *opts);
            if s.install_basis(basis) {
                if let Some(sol) = s.finish_phase2(true)? {
                    return Ok(sol);
                }
            }
        }
    }
    let mut s = Simplex::new(p, *opts);
    s.cold_start()?;
    match s.run()? {
        PhaseEnd::Unbounded => {
            return Err(LpError::Numerical("phase 1 reported unbounded".into()));
        }
        PhaseEnd::Optimal => {}
    }
    s.refactor()?;
    let infeas: f64 = (0..s.m).map(|i| s.x[s.n + i].max(0.0)).sum();
    let scale = 1.0 + p.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if infeas > opts.feas_tol * scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: None,
            objective: None,
            iterations: s.iterations,
            basis: None,
            warm_started: false,
        });
    }
    s.enter_phase2();
    s.finish_phase2(false)?
        .ok_or_else(|| LpError::Numerical("phase 2 lost feasibility".into()))
}

impl<'a> Simplex<'a> {
    fn new(p: &'a LpProblem, opts: SimplexOptions) -> Self {
        let m = p.n_rows();
        let n = p.n_vars();
        let mut lo = p.lo.clone();
        let mut hi = p.hi.clone();
        lo.extend(std::iter::repeat_n(0.0, m));
        hi.extend(std::iter::repeat_n(f64::INFINITY, m));
        let max_iter = opts
            .max_iter
            .unwrap_or(20_000 + 50 * (m + n));
        Self {
            p,
            opts,
            m,
            n,
            lo,
            hi,
            cost: vec![0.0; n + m],
            art_sign: vec![1.0; m],
            x: vec![0.0; n + m],
            state: vec![VarState::Lower; n + m],
            basis: Vec::with_capacity(m),
            lu: None,
            etas: Vec::new(),
            work: vec![0.0; m],
            iterations: 0,
            max_iter,
            degenerate_run: 0,
            bland: false,
            devex: vec![1.0; n + m],
        }
    }

    fn place_nonbasic(&mut self, j: usize, prefer_upper: bool) {
        let (l, h) = (self.lo[j], self.hi[j]);
        let (st, v) = if prefer_upper && h.is_finite() {
            (VarState::Upper, h)
        } else if l.is_finite() {
            (VarState::Lower, l)
        } else if h.is_finite() {
            (VarState::Upper, h)
        } else {
            (VarState::Zero, 0.0)
        };
        self.state[j] = st;
        self.x[j] = v;
    }

    fn cold_start(&mut self) -> Result<(), LpError> {
        for j in 0..self.n {
            self.place_nonbasic(j, false);
        }
        let ax = self.p.a.mul_vec(&self.x[..self.n]);
        self.basis.clear();
        for i in 0..self.m {
            let r = self.p.b[i] - ax[i];
            self.art_sign[i] = if r >= 0.0 { 1.0 } else { -1.0 };
            let j = self.n + i;
            self.state[j] = VarState::Basic;
            self.x[j] = r.abs();
            self.cost[j] = 1.0;
            self.basis.push(j);
        }
        self.refactor()
    }

    /// Sets up phase 2 from a previous basis. Returns false if the basis is
    /// singular or primal infeasible for this problem.
    fn install_basis(&mut self, warm: &Basis) -> bool {
        if warm.basic.len() != self.m || warm.at_upper.len() != self.n {
            return false;
        }
        let mut seen = vec![false; self.n + self.m];
        for &j in &warm.basic {
            if j >= self.n + self.m || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        self.enter_phase2();
        for j in 0..self.n + self.m {
            if !seen[j] {
                if j < self.n {
                    self.place_nonbasic(j, warm.at_upper[j]);
                } else {
                    self.state[j] = VarState::Lower;
                    self.x[j] = 0.0;
                }
            }
        }
        self.basis = warm.basic.clone();
        for &j in &self.basis {
            self.state[j] = VarState::Basic;
        }
        if self.refactor().is_err() {
            return false;
        }
        let tol = self.opts.feas_tol;
        self.basis
            .iter()
            .all(|&j| self.x[j] >= self.lo[j] - tol && self.x[j] <= self.hi[j] + tol)
    }

    fn enter_phase2(&mut self) {
        for j in 0..self.n {
            self.cost[j] = self.p.c[j];
        }
        for i in 0..self.m {
            let j = self.n + i;
            self.cost[j] = 0.0;
            self.hi[j] = 0.0;
        }
        self.bland = false;
        self.degenerate_run = 0;
        self.devex.iter_mut().for_each(|w| *w = 1.0);
    }

    /// Runs phase 2 to completion. `Ok(None)` means the final point failed
    /// verification and the caller should fall back (warm start only).
    fn finish_phase2(&mut self, warm: bool) -> Result<Option<LpSolution>, LpError> {
        let end = self.run()?;
        let status = match end {
            PhaseEnd::Unbounded => LpStatus::Unbounded,
            PhaseEnd::Optimal => LpStatus::Optimal,
        };
        if status == LpStatus::Unbounded {
            return Ok(Some(LpSolution {
                status,
                x: None,
                objective: None,
                iterations: self.iterations,
                basis: None,
                warm_started: warm,
            }));
        }
        self.refactor()?;
        let x: Vec<f64> = self.x[..self.n]
            .iter()
            .zip(self.p.lo.iter().zip(&self.p.hi))
            .map(|(&v, (&l, &h))| v.clamp(l, h))
            .collect();
        let scale = 1.0 + self.p.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let resid = self.p.residual_inf(&x);
        let viol = (0..self.n)
            .map(|j| (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]).max(0.0))
            .fold(0.0, f64::max);
        let tol = self.opts.feas_tol * scale;
        if resid > tol || viol > tol {
            if warm {
                return Ok(None);
            }
            return Err(LpError::Numerical(format!(
                "final residual {resid:.3e}, bound violation {viol:.3e}"
            )));
        }
        let objective = self.p.objective_at(&x);
        let basis = Basis {
            n_vars: self.n,
            n_rows: self.m,
            basic: self.basis.clone(),
            at_upper: (0..self.n)
                .map(|j| self.state[j] == VarState::Upper)
                .collect(),
        };
        Ok(Some(LpSolution {
            status,
            x: Some(x),
            objective: Some(objective),
            iterations: self.iterations,
            basis: Some(basis),
            warm_started: warm,
        }))
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            let (rows, vals) = self.p.a.col(j);
            rows.iter().copied().zip(vals.iter().copied()).collect()
        } else {
            let i = j - self.n;
            vec![(i, self.art_sign[i])]
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let cols: Vec<Vec<(usize, f64)>> = self.basis.iter().map(|&j| self.column(j)).collect();
        let lu = LuFactor::new(self.m, &cols).map_err(|s| {
            LpError::Numerical(format!(
                "singular basis at position {} (variable {})",
                s.position, self.basis[s.position]
            ))
        })?;
        self.lu = Some(lu);
        self.etas.clear();
        // x_B = B^{-1} (b - N x_N)
        let mut rhs = self.p.b.clone();
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                let (rows, vals) = self.p.a.col(j);
                for (&r, &v) in rows.iter().zip(vals) {
                    rhs[r] -= v * xj;
                }
            } else {
                rhs[j - self.n] -= self.art_sign[j - self.n] * xj;
            }
        }
        self.ftran(&mut rhs);
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[pos];
        }
        Ok(())
    }

    fn ftran(&mut self, a: &mut [f64]) {
        self.lu
            .as_ref()
            .expect("factorized")
            .solve(a, &mut self.work);
        for eta in &self.etas {
            eta.apply(a);
        }
    }

    fn btran(&mut self, c: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            eta.apply_transpose(c);
        }
        self.lu
            .as_ref()
            .expect("factorized")
            .solve_transpose(c, &mut self.work);
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let (rows, vals) = self.p.a.col(j);
            let mut d = self.cost[j];
            for (&r, &v) in rows.iter().zip(vals) {
                d -= y[r] * v;
            }
            d
        } else {
            let i = j - self.n;
            self.cost[j] - y[i] * self.art_sign[i]
        }
    }

    /// Picks the entering variable and its direction (+1 increase, -1 decrease).
    fn price(&self, y: &[f64]) -> Option<(usize, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == VarState::Basic || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.reduced_cost(j, y);
            let dir = match st {
                VarState::Lower if d < -tol => 1.0,
                VarState::Upper if d > tol => -1.0,
                VarState::Zero if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = d * d / self.devex[j];
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    fn run(&mut self) -> Result<PhaseEnd, LpError> {
        let m = self.m;
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut rho = vec![0.0; m];
        loop {
            if self.iterations >= self.max_iter {
                return Err(LpError::IterationLimit(self.iterations));
            }
            for (pos, &j) in self.basis.iter().enumerate() {
                y[pos] = self.cost[j];
            }
            self.btran(&mut y);
            let Some((q, dir)) = self.price(&y) else {
                return Ok(PhaseEnd::Optimal);
            };

            alpha.iter_mut().for_each(|v| *v = 0.0);
            for (r, v) in self.column(q) {
                alpha[r] = v;
            }
            self.ftran(&mut alpha);

            let Some(step) = self.ratio_test(q, dir, &alpha) else {
                return Ok(PhaseEnd::Unbounded);
            };
            self.iterations += 1;

            let theta = step.theta;
            if theta > 1e-12 {
                self.degenerate_run = 0;
                self.bland = false;
            } else {
                self.degenerate_run += 1;
                if self.degenerate_run > self.opts.bland_factor * m.max(1) {
                    self.bland = true;
                }
            }

            if theta != 0.0 {
                self.x[q] += dir * theta;
                for (pos, &j) in self.basis.iter().enumerate() {
                    if alpha[pos] != 0.0 {
                        self.x[j] -= dir * theta * alpha[pos];
                    }
                }
            }
            match step.leave {
                None => {
                    // bound flip
                    if dir > 0.0 {
                        self.state[q] = VarState::Upper;
                        self.x[q] = self.hi[q];
                    } else {
                        self.state[q] = VarState::Lower;
                        self.x[q] = self.lo[q];
                    }
                }
                Some((pos, to_upper)) => {
                    self.update_devex(q, pos, alpha[pos], &mut rho);
                    let leaving = self.basis[pos];
                    if to_upper {
                        self.state[leaving] = VarState::Upper;
                        self.x[leaving] = self.hi[leaving];
                    } else {
                        self.state[leaving] = VarState::Lower;
                        self.x[leaving] = self.lo[leaving];
                    }
                    self.state[q] = VarState::Basic;
                    self.basis[pos] = q;
                    self.etas.push(Eta::new(pos, &alpha));
                    if self.etas.len() >= self.opts.refactor_every {
                        self.refactor()?;
                    }
                }
            }
        }
    }

    /// Devex update for entering `q` replacing basis position `pos`, before
    /// the basis changes. `rho` is scratch of length `m`.
    fn update_devex(&mut self, q: usize, pos: usize, pivot: f64, rho: &mut [f64]) {
        rho.iter_mut().for_each(|v| *v = 0.0);
        rho[pos] = 1.0;
        self.btran(rho);
        let wq = self.devex[q];
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic || j == q {
                continue;
            }
            let a_rj = if j < self.n {
                let (rows, vals) = self.p.a.col(j);
                rows.iter().zip(vals).map(|(&r, &v)| rho[r] * v).sum::<f64>()
            } else {
                rho[j - self.n] * self.art_sign[j - self.n]
            };
            if a_rj != 0.0 {
                let ratio = a_rj / pivot;
                self.devex[j] = self.devex[j].max(ratio * ratio * wq);
            }
        }
        let leaving = self.basis[pos];
        self.devex[leaving] = (wq / (pivot * pivot)).max(1.0);
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64]) -> Option<Step> {
        let tol = self.opts.feas_tol;
        let ptol = self.opts.pivot_tol;
        let range = self.hi[q] - self.lo[q];

        // pass 1: relaxed bound
        let mut theta_max = f64::INFINITY;
        for (pos, &a) in alpha.iter().enumerate() {
            let g = dir * a;
            if g.abs() <= ptol {
                continue;
            }
            let j = self.basis[pos];
            let r = if g > 0.0 {
                let l = self.lo[j];
                if !l.is_finite() {
                    continue;
                }
                (self.x[j] - l + tol) / g
            } else {
                let h = self.hi[j];
                if !h.is_finite() {
                    continue;
                }
                (h - self.x[j] + tol) / -g
            };
            theta_max = theta_max.min(r);
        }

        if theta_max.is_infinite() {
            return if range.is_finite() {
                Some(Step {
                    theta: range,
                    leave: None,
                })
            } else {
                None
            };
        }

        // pass 2: largest pivot among candidates within the relaxed bound
        let mut chosen: Option<(usize, bool, f64)> = None;
        let mut best_piv = 0.0;
        let mut bland_best: Option<(usize, bool, f64, usize)> = None;
        for (pos, &a) in alpha.iter().enumerate() {
            let g = dir * a;
            if g.abs() <= ptol {
                continue;
            }
            let j = self.basis[pos];
            let (r, to_upper) = if g > 0.0 {
                let l = self.lo[j];
                if !l.is_finite() {
                    continue;
                }
                ((self.x[j] - l).max(0.0) / g, false)
            } else {
                let h = self.hi[j];
                if !h.is_finite() {
                    continue;
                }
                ((h - self.x[j]).max(0.0) / -g, true)
            };
            if r > theta_max {
                continue;
            }
            if self.bland {
                let better = match bland_best {
                    None => true,
                    Some((_, _, br, bj)) => r < br - 1e-12 || (r <= br + 1e-12 && j < bj),
                };
                if better {
                    bland_best = Some((pos, to_upper, r, j));
                }
            } else if g.abs() > best_piv {
                best_piv = g.abs();
                chosen = Some((pos, to_upper, r));
            }
        }
        if let Some((pos, up, r, _)) = bland_best {
            chosen = Some((pos, up, r));
        }
        let (pos, to_upper, r) = chosen?;
        if range.is_finite() && range <= r {
            return Some(Step {
                theta: range,
                leave: None,
            });
        }
        Some(Step {
            theta: r,
            leave: Some((pos, to_upper)),
        })
    }
}

struct Step {
    theta: f64,
    /// Basis position leaving and whether it leaves at its upper bound;
    /// `None` is a bound flip of the entering variable.
    leave: Option<(usize, bool)>,
}
