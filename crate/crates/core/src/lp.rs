//! Dense two-phase simplex with basic dual multipliers.
//!
//! Problems are stated as
//!
//! ```text
//! min  objectiveᵀ y
//! s.t. gᵢᵀ y >= bᵢ      (inequality rows)
//!      hᵢᵀ y  = dᵢ      (equality rows)
//!      lo <= y <= hi    (optional, per variable)
//! ```
//!
//! with free variables by default. The solver works on the Lagrangian dual
//! in standard form,
//!
//! ```text
//! min -bᵀw - dᵀv - loᵀz_lo + hiᵀz_hi
//! s.t. Gᵀw + Hᵀv + z_lo - z_hi = objective,   w, z >= 0, v free,
//! ```
//!
//! whose tableau has one row per primal variable. A basic optimal solution
//! therefore has at most `num_vars` nonzero multipliers, and the primal
//! point is read off the simplex multipliers of that basis. Bounds become
//! columns of their own, so their multipliers never mix with the row
//! multipliers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::dot;

pub const PIVOT_TOL: f64 = 1e-10;
const OPT_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    /// Lowest-index entering column; never cycles.
    #[default]
    Bland,
    /// Most negative reduced cost; falls back to Bland after a pivot budget.
    Dantzig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpOptions {
    pub rule: PivotRule,
    pub pivot_tol: f64,
    pub max_pivots: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { rule: PivotRule::Bland, pivot_tol: PIVOT_TOL, max_pivots: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub ineq_rows: Vec<(Vec<f64>, f64)>,
    pub eq_rows: Vec<(Vec<f64>, f64)>,
    /// `(lo, hi)` per variable; infinite ends are absent bounds.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            num_vars: n,
            objective,
            ineq_rows: Vec::new(),
            eq_rows: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    /// Adds `rowᵀ y >= rhs`; returns its index.
    pub fn add_ineq(&mut self, row: Vec<f64>, rhs: f64) -> usize {
        self.ineq_rows.push((row, rhs));
        self.ineq_rows.len() - 1
    }

    /// Adds `rowᵀ y = rhs`; returns its index.
    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> usize {
        self.eq_rows.push((row, rhs));
        self.eq_rows.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        if self.objective.len() != n || self.bounds.len() != n {
            return Err(Error::MalformedLp("objective or bounds length differs from num_vars".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) {
            return Err(Error::MalformedLp("non-finite objective coefficient".into()));
        }
        for (k, (row, rhs)) in self.ineq_rows.iter().chain(&self.eq_rows).enumerate() {
            if row.len() != n {
                return Err(Error::MalformedLp(format!("row {k} has length {} instead of {n}", row.len())));
            }
            if !finite(row) || !rhs.is_finite() {
                return Err(Error::MalformedLp(format!("row {k} has non-finite data")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::MalformedLp(format!("invalid bounds [{lo}, {hi}] on variable {j}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub y: Vec<f64>,
    pub value: f64,
    pub ineq_duals: Vec<f64>,
    pub eq_duals: Vec<f64>,
    pub lower_bound_duals: Vec<f64>,
    pub upper_bound_duals: Vec<f64>,
    pub pivots: usize,
}

impl LpSolution {
    fn non_optimal(lp: &LinearProgram, status: LpStatus, pivots: usize) -> Self {
        let value = if status == LpStatus::Unbounded { f64::NEG_INFINITY } else { f64::INFINITY };
        LpSolution {
            status,
            y: vec![0.0; lp.num_vars],
            value,
            ineq_duals: vec![0.0; lp.ineq_rows.len()],
            eq_duals: vec![0.0; lp.eq_rows.len()],
            lower_bound_duals: vec![0.0; lp.num_vars],
            upper_bound_duals: vec![0.0; lp.num_vars],
            pivots,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum ColKind {
    Ineq(usize),
    EqPos(usize),
    EqNeg(usize),
    Lo(usize),
    Hi(usize),
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, &LpOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &LpOptions) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars;
    if n == 0 {
        return Ok(solve_empty(lp));
    }
    let (cols, kinds, costs) = dual_columns(lp);
    match standard_form(&cols, &costs, &lp.objective, opts)? {
        StdOutcome::Optimal { u, pi, pivots } => {
            let y: Vec<f64> = pi.iter().map(|v| -v).collect();
            let mut sol = LpSolution {
                status: LpStatus::Optimal,
                value: dot(&lp.objective, &y),
                y,
                ineq_duals: vec![0.0; lp.ineq_rows.len()],
                eq_duals: vec![0.0; lp.eq_rows.len()],
                lower_bound_duals: vec![0.0; n],
                upper_bound_duals: vec![0.0; n],
                pivots,
            };
            for (k, kind) in kinds.iter().enumerate() {
                let v = u[k];
                match *kind {
                    ColKind::Ineq(i) => sol.ineq_duals[i] = v,
                    ColKind::EqPos(i) => sol.eq_duals[i] += v,
                    ColKind::EqNeg(i) => sol.eq_duals[i] -= v,
                    ColKind::Lo(j) => sol.lower_bound_duals[j] = v,
                    ColKind::Hi(j) => sol.upper_bound_duals[j] = v,
                }
            }
            Ok(sol)
        }
        StdOutcome::Unbounded { pivots } => Ok(LpSolution::non_optimal(lp, LpStatus::Infeasible, pivots)),
        StdOutcome::Infeasible { pivots } => {
            // No multipliers reproduce the objective: the primal is either
            // unbounded or infeasible. Decide with a zero objective.
            let zero = vec![0.0; n];
            let status = match standard_form(&cols, &costs, &zero, opts)? {
                StdOutcome::Unbounded { .. } => LpStatus::Infeasible,
                _ => LpStatus::Unbounded,
            };
            Ok(LpSolution::non_optimal(lp, status, pivots))
        }
    }
}

fn solve_empty(lp: &LinearProgram) -> LpSolution {
    let feasible = lp.ineq_rows.iter().all(|(_, b)| *b <= 1e-12) && lp.eq_rows.iter().all(|(_, d)| d.abs() <= 1e-12);
    if !feasible {
        return LpSolution::non_optimal(lp, LpStatus::Infeasible, 0);
    }
    LpSolution {
        status: LpStatus::Optimal,
        y: Vec::new(),
        value: 0.0,
        ineq_duals: vec![0.0; lp.ineq_rows.len()],
        eq_duals: vec![0.0; lp.eq_rows.len()],
        lower_bound_duals: Vec::new(),
        upper_bound_duals: Vec::new(),
        pivots: 0,
    }
}

/// Columns of the standard-form dual, in the order: inequality rows,
/// equality row pairs, lower bounds, upper bounds.
fn dual_columns(lp: &LinearProgram) -> (Vec<Vec<f64>>, Vec<ColKind>, Vec<f64>) {
    let n = lp.num_vars;
    let mut cols = Vec::new();
    let mut kinds = Vec::new();
    let mut costs = Vec::new();
    for (i, (row, b)) in lp.ineq_rows.iter().enumerate() {
        cols.push(row.clone());
        kinds.push(ColKind::Ineq(i));
        costs.push(-b);
    }
    for (i, (row, d)) in lp.eq_rows.iter().enumerate() {
        cols.push(row.clone());
        kinds.push(ColKind::EqPos(i));
        costs.push(-d);
        cols.push(row.iter().map(|v| -v).collect());
        kinds.push(ColKind::EqNeg(i));
        costs.push(*d);
    }
    for (j, &(lo, _)) in lp.bounds.iter().enumerate() {
        if lo.is_finite() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(e);
            kinds.push(ColKind::Lo(j));
            costs.push(-lo);
        }
    }
    for (j, &(_, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut e = vec![0.0; n];
            e[j] = -1.0;
            cols.push(e);
            kinds.push(ColKind::Hi(j));
            costs.push(hi);
        }
    }
    (cols, kinds, costs)
}

enum StdOutcome {
    Optimal { u: Vec<f64>, pi: Vec<f64>, pivots: usize },
    Unbounded { pivots: usize },
    Infeasible { pivots: usize },
}

/// Dense tableau for `min costᵀu, Σ u_k col_k = rhs, u >= 0`, with one
/// artificial column per row appended after the structural columns.
struct Tableau {
    rows: usize,
    width: usize,
    structural: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    sign: Vec<f64>,
    /// Reduced costs and objective of phase 1 (sum of artificials).
    d1: Vec<f64>,
    z1: f64,
    /// Reduced costs of the true objective, kept current through phase 1.
    d2: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn new(cols: &[Vec<f64>], costs: &[f64], rhs: &[f64]) -> Self {
        let rows = rhs.len();
        let structural = cols.len();
        let width = structural + rows;
        let mut a = vec![0.0; rows * width];
        let mut sign = vec![1.0; rows];
        let mut r = rhs.to_vec();
        for i in 0..rows {
            if r[i] < 0.0 {
                sign[i] = -1.0;
                r[i] = -r[i];
            }
            for (k, col) in cols.iter().enumerate() {
                a[i * width + k] = sign[i] * col[i];
            }
            a[i * width + structural + i] = 1.0;
        }
        let mut d1 = vec![0.0; width];
        for k in 0..structural {
            d1[k] = -(0..rows).map(|i| a[i * width + k]).sum::<f64>();
        }
        let mut d2 = vec![0.0; width];
        d2[..structural].copy_from_slice(costs);
        Tableau {
            rows,
            width,
            structural,
            a,
            rhs: r.clone(),
            basis: (structural..width).collect(),
            sign,
            d1,
            z1: r.iter().sum(),
            d2,
            pivots: 0,
        }
    }

    #[inline]
    fn at(&self, i: usize, k: usize) -> f64 {
        self.a[i * self.width + k]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.a[r * w + q];
        for k in 0..w {
            self.a[r * w + k] /= piv;
        }
        self.rhs[r] /= piv;
        self.a[r * w + q] = 1.0;
        let (prow, prhs) = (self.a[r * w..(r + 1) * w].to_vec(), self.rhs[r]);
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.a[i * w + q];
            if f != 0.0 {
                for k in 0..w {
                    self.a[i * w + k] -= f * prow[k];
                }
                self.a[i * w + q] = 0.0;
                self.rhs[i] -= f * prhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -1e-13 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f1 = self.d1[q];
        let f2 = self.d2[q];
        for k in 0..w {
            self.d1[k] -= f1 * prow[k];
            self.d2[k] -= f2 * prow[k];
        }
        self.d1[q] = 0.0;
        self.d2[q] = 0.0;
        self.z1 += f1 * prhs;
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Runs simplex pivots on the given reduced-cost row over the
    /// structural columns. Returns `Ok(true)` at optimality, `Ok(false)` on
    /// an unbounded ray.
    fn run(&mut self, phase_one: bool, opts: &LpOptions, cost_scale: f64) -> Result<bool> {
        let tol = OPT_TOL * cost_scale;
        let mut budget_rule = opts.rule;
        let dantzig_budget = self.pivots + 20 * (self.rows + self.structural);
        loop {
            if self.pivots >= opts.max_pivots {
                log::error!("simplex pivot cap {} reached", opts.max_pivots);
                return Err(Error::LpNotOptimal);
            }
            if budget_rule == PivotRule::Dantzig && self.pivots > dantzig_budget {
                budget_rule = PivotRule::Bland;
            }
            let d = if phase_one { &self.d1 } else { &self.d2 };
            let entering = match budget_rule {
                PivotRule::Bland => (0..self.structural).find(|&k| d[k] < -tol),
                PivotRule::Dantzig => {
                    (0..self.structural).filter(|&k| d[k] < -tol).min_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)))
                }
            };
            let Some(q) = entering else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aiq = self.at(i, q);
                if aiq > opts.pivot_tol {
                    let ratio = self.rhs[i] / aiq;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Ok(false) };
            self.pivot(r, q);
        }
    }
}

fn standard_form(cols: &[Vec<f64>], costs: &[f64], rhs: &[f64], opts: &LpOptions) -> Result<StdOutcome> {
    let mut t = Tableau::new(cols, costs, rhs);
    let rhs_scale = 1.0 + rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cost_scale = 1.0 + costs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));

    let entry_scale = 1.0 + cols.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
    t.run(true, opts, entry_scale)?;
    if t.z1 > PHASE1_TOL * rhs_scale {
        return Ok(StdOutcome::Infeasible { pivots: t.pivots });
    }
    // Drive zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and keep their artificial at zero.
    for r in 0..t.rows {
        if t.basis[r] >= t.structural {
            let best = (0..t.structural)
                .filter(|&k| t.at(r, k).abs() > opts.pivot_tol)
                .max_by(|&a, &b| t.at(r, a).abs().total_cmp(&t.at(r, b).abs()).then(b.cmp(&a)));
            if let Some(q) = best {
                t.pivot(r, q);
            }
        }
    }
    if !t.run(false, opts, cost_scale)? {
        return Ok(StdOutcome::Unbounded { pivots: t.pivots });
    }

    // Multipliers from the artificial reduced costs: d2[art_i] = -sign_i * pi_i.
    let mut pi: Vec<f64> = (0..t.rows).map(|i| -t.sign[i] * t.d2[t.structural + i]).collect();
    let mut u = vec![0.0; t.structural];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < t.structural {
            u[b] = t.rhs[i].max(0.0);
        }
    }
    refine_basis(cols, costs, rhs, &t, &mut u, &mut pi);
    Ok(StdOutcome::Optimal { u, pi, pivots: t.pivots })
}

/// Recomputes basic values and multipliers from the final basis with an LU
/// solve, which removes the drift accumulated by tableau updates.
fn refine_basis(cols: &[Vec<f64>], costs: &[f64], rhs: &[f64], t: &Tableau, u: &mut [f64], pi: &mut [f64]) {
    let m = t.rows;
    let mut b = DMatrix::<f64>::zeros(m, m);
    let mut cb = DVector::<f64>::zeros(m);
    for (c, &k) in t.basis.iter().enumerate() {
        if k < t.structural {
            for i in 0..m {
                b[(i, c)] = cols[k][i];
            }
            cb[c] = costs[k];
        } else {
            let i = k - t.structural;
            b[(i, c)] = t.sign[i];
        }
    }
    let lu = b.clone().lu();
    let Some(ub) = lu.solve(&DVector::from_column_slice(rhs)) else { return };
    let Some(p) = b.transpose().lu().solve(&cb) else { return };
    let resid = (&b * &ub - DVector::from_column_slice(rhs)).amax();
    if !resid.is_finite() || resid > 1e-8 * (1.0 + rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()))) {
        return;
    }
    for (c, &k) in t.basis.iter().enumerate() {
        if k < t.structural {
            u[k] = ub[c].max(0.0);
        }
    }
    for i in 0..m {
        pi[i] = p[i];
    }
}

/// Inequality rows whose multiplier exceeds `tol`.
pub fn active_support(sol: &LpSolution, tol: f64) -> Result<Vec<usize>> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::LpNotOptimal);
    }
    Ok(sol.ineq_duals.iter().enumerate().filter(|(_, w)| **w > tol).map(|(i, _)| i).collect())
}

/// Optimality residuals of a solution, all in absolute terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `max |objective - Σ w g - Σ v h - z_lo + z_hi|`.
    pub stationarity: f64,
    /// `max w_i * slack_i` (and the same for bounds).
    pub complementarity: f64,
    /// `max(0, -slack)` over rows and bounds, plus equality violations.
    pub primal: f64,
    /// `max(0, -w)` over inequality and bound multipliers.
    pub dual_sign: f64,
    /// `|objectiveᵀy - (bᵀw + dᵀv + loᵀz_lo - hiᵀz_hi)|`.
    pub duality_gap: f64,
}

pub fn kkt_residuals(lp: &LinearProgram, sol: &LpSolution) -> KktResiduals {
    let n = lp.num_vars;
    let mut r = KktResiduals::default();
    let mut grad = lp.objective.clone();
    let mut dual_obj = 0.0;
    for ((row, b), &w) in lp.ineq_rows.iter().zip(&sol.ineq_duals) {
        for j in 0..n {
            grad[j] -= w * row[j];
        }
        let slack = dot(row, &sol.y) - b;
        r.primal = r.primal.max(-slack);
        r.complementarity = r.complementarity.max((w * slack).abs());
        r.dual_sign = r.dual_sign.max(-w);
        dual_obj += w * b;
    }
    for ((row, d), &v) in lp.eq_rows.iter().zip(&sol.eq_duals) {
        for j in 0..n {
            grad[j] -= v * row[j];
        }
        r.primal = r.primal.max((dot(row, &sol.y) - d).abs());
        dual_obj += v * d;
    }
    for j in 0..n {
        let (lo, hi) = lp.bounds[j];
        let (zl, zh) = (sol.lower_bound_duals[j], sol.upper_bound_duals[j]);
        grad[j] -= zl - zh;
        if lo.is_finite() {
            r.primal = r.primal.max(lo - sol.y[j]);
            r.complementarity = r.complementarity.max((zl * (sol.y[j] - lo)).abs());
            dual_obj += zl * lo;
        }
        if hi.is_finite() {
            r.primal = r.primal.max(sol.y[j] - hi);
            r.complementarity = r.complementarity.max((zh * (hi - sol.y[j])).abs());
            dual_obj -= zh * hi;
        }
        r.dual_sign = r.dual_sign.max(-zl).max(-zh);
    }
    r.stationarity = grad.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    r.primal = r.primal.max(0.0);
    r.duality_gap = (dot(&lp.objective, &sol.y) - dual_obj).abs();
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn box_example() {
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.add_ineq(vec![-1.0], -1.0);
        lp.add_ineq(vec![1.0], 0.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.y[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.value, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.ineq_duals[0], 1.0, epsilon = 1e-12);
        assert_eq!(s.ineq_duals[1], 0.0);
    }

    #[test]
    fn equality_example() {
        let mut lp = LinearProgram::new(vec![0.0]);
        lp.add_eq(vec![1.0], 5.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.y[0], 5.0, epsilon = 1e-12);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn binding_row_carries_weight() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_ineq(vec![1.0], 1.0);
        lp.add_ineq(vec![1.0], 2.0);
        let s = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(s.y[0], 2.0, epsilon = 1e-12);
        assert_eq!(s.ineq_duals, vec![0.0, 1.0]);
        assert_eq!(active_support(&s, 1e-9).unwrap(), vec![1]);
    }

    #[test]
    fn support_examples() {
        let mut lp = LinearProgram::new(vec![0.0]);
        lp.add_ineq(vec![1.0], -1.0);
        lp.set_bounds(0, 0.0, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert!(active_support(&s, 1e-9).unwrap().is_empty());

        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_ineq(vec![1.0], 0.0);
        lp.add_ineq(vec![2.0], 0.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(active_support(&s, 1e-12).unwrap().len(), 1);

        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.add_ineq(vec![1.0], 0.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        assert!(matches!(active_support(&s, 1e-9), Err(Error::LpNotOptimal)));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_ineq(vec![1.0], 2.0);
        lp.add_ineq(vec![-1.0], -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        // infeasible with a zero objective, so the dual is trivially feasible
        let mut lp = LinearProgram::new(vec![0.0, 0.0]);
        lp.add_ineq(vec![1.0, 1.0], 1.0);
        lp.add_ineq(vec![-1.0, -1.0], 0.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(vec![1.0, -1.0]);
        lp.add_ineq(vec![1.0, 0.0], 0.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bounds_are_columns_not_rows() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_ineq(vec![1.0, 1.0], 1.0);
        lp.set_bounds(0, 0.25, 10.0);
        lp.set_bounds(1, 0.5, 10.0);
        let s = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-12);
        let k = kkt_residuals(&lp, &s);
        assert!(k.stationarity <= 1e-12 && k.primal <= 1e-12 && k.complementarity <= 1e-12);
        assert_eq!(s.ineq_duals.len(), 1);
    }

    #[test]
    fn malformed_input_is_an_error() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_ineq(vec![1.0], 0.0);
        assert!(matches!(solve_lp(&lp), Err(Error::MalformedLp(_))));
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.set_bounds(0, 1.0, 0.0);
        assert!(matches!(solve_lp(&lp), Err(Error::MalformedLp(_))));
    }

    #[test]
    fn zero_variables() {
        let mut lp = LinearProgram::new(vec![]);
        lp.add_ineq(vec![], -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Optimal);
        lp.add_ineq(vec![], 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn deterministic_and_rules_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lp = random_lp(&mut rng, 6, 40);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(a, b);
        let d = solve_lp_with(&lp, &LpOptions { rule: PivotRule::Dantzig, ..LpOptions::default() }).unwrap();
        assert_abs_diff_eq!(a.value, d.value, epsilon = 1e-8 * (1.0 + a.value.abs()));
    }

    /// Feasible at a random point, bounded because the objective is a
    /// positive combination of rows.
    fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LinearProgram {
        let y0: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut obj = vec![0.0; n];
        for row in rows.iter().take(n + 2) {
            let w: f64 = rng.gen_range(0.1..1.0);
            for j in 0..n {
                obj[j] += w * row[j];
            }
        }
        let mut lp = LinearProgram::new(obj);
        for row in rows {
            let b = dot(&row, &y0) - rng.gen_range(0.0..1.0);
            lp.add_ineq(row, b);
        }
        lp
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn kkt_and_strong_duality(seed in any::<u64>(), n in 1usize..12, extra in 0usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lp = random_lp(&mut rng, n, n + 2 + extra);
            let s = solve_lp(&lp).unwrap();
            prop_assert_eq!(s.status, LpStatus::Optimal);
            let k = kkt_residuals(&lp, &s);
            let scale = 1.0 + s.value.abs();
            prop_assert!(k.stationarity <= 1e-7, "{:?}", k);
            prop_assert!(k.complementarity <= 1e-7 * scale, "{:?}", k);
            prop_assert!(k.primal <= 1e-8, "{:?}", k);
            prop_assert!(k.duality_gap <= 1e-7 * scale, "{:?}", k);
            prop_assert!(active_support(&s, 1e-12).unwrap().len() <= n);
        }
    }
}
