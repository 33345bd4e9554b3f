//! Duality checks and the Slater probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cones::DEFAULT_GRID;
use crate::dualgen::{mu_problem, EqualityResiduals, ExtendedDualSolution, GridCache};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpStatus};
use crate::model::{feasibility_check, CopositiveProgram};
use crate::symcore::{quad_form, simplex_grid, SimplexGrid, SimplexPoint};

/// Gap and residual tolerance of the strong duality verdict.
pub const STRONG_TOL: f64 = 1e-6;
/// Slack accepted in weak duality checks.
pub const WEAK_TOL: f64 = 1e-6;
/// Tolerance of the decomposition audit.
pub const AUDIT_TOL: f64 = 1e-7;
/// Slater slack threshold of the probe.
pub const SLATER_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualFeasibility {
    pub residuals: EqualityResiduals,
    pub max_equality_residual: f64,
    pub min_factor_entry: f64,
    pub feasible: bool,
}

/// Checks every dual equality against `tol` and re-validates the factors.
/// Completely positive memberships hold by construction once the factors
/// are nonnegative; `W₀ = 0` is structural.
pub fn dual_feasible(prog: &CopositiveProgram, sol: &ExtendedDualSolution, tol: f64) -> Result<DualFeasibility> {
    let residuals = sol.equality_residuals(prog)?;
    let max_equality_residual = residuals.max_abs();
    let min_factor_entry = sol.min_factor_entry();
    let feasible = max_equality_residual <= tol && sol.check_factors().is_ok();
    Ok(DualFeasibility { residuals, max_equality_residual, min_factor_entry, feasible })
}

/// `cᵀx - [(U + W_{m0}) • 𝒜(x) - (U + W_{m0}) • A₀]`; zero whenever the top
/// equalities hold.
pub fn decomposition_audit(prog: &CopositiveProgram, x: &[f64], sol: &ExtendedDualSolution) -> Result<f64> {
    let ax = prog.constraint_matrix(x)?;
    Ok(prog.objective(x) - (sol.top_inner(&ax)? - sol.top_inner(prog.a(0))?))
}

/// `cᵀx + (U + W_{m0}) • A₀` for a feasible `x` and a feasible dual.
pub fn weak_duality_gap(prog: &CopositiveProgram, x: &[f64], sol: &ExtendedDualSolution) -> Result<f64> {
    let grid = simplex_grid(prog.p(), DEFAULT_GRID)?;
    let scale = prog.matrices().iter().fold(1.0_f64, |a, m| a.max(m.max_abs()));
    let xs = 1.0 + x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let feas = feasibility_check(prog, x, &grid, 1e-9 * scale * xs)?;
    if !feas.feasible {
        return Err(Error::PrimalInfeasible { min_value: feas.min_value });
    }
    let dual = dual_feasible(prog, sol, WEAK_TOL)?;
    if !dual.feasible {
        return Err(Error::DualInfeasible(format!(
            "equality residual {:e}, smallest factor entry {:e}",
            dual.max_equality_residual, dual.min_factor_entry
        )));
    }
    let audit = decomposition_audit(prog, x, sol)?;
    if audit.abs() > AUDIT_TOL * (1.0 + prog.objective(x).abs()) {
        log::warn!("decomposition audit off by {audit:e}");
    }
    Ok(prog.objective(x) - sol.dual_value(prog)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StrongDuality,
    WeakOnly,
    InfeasibleDual,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualityReport {
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub max_equality_residual: f64,
    pub min_factor_entry: f64,
    pub audit: f64,
    pub verdict: Verdict,
}

pub fn strong_duality_report(
    prog: &CopositiveProgram,
    x0: &[f64],
    sol: &ExtendedDualSolution,
) -> Result<DualityReport> {
    strong_duality_report_with_tol(prog, x0, sol, STRONG_TOL)
}

/// Strong duality iff `|gap| <= tol (1 + |primal|)` and every dual equality
/// holds to `tol`.
pub fn strong_duality_report_with_tol(
    prog: &CopositiveProgram,
    x0: &[f64],
    sol: &ExtendedDualSolution,
    tol: f64,
) -> Result<DualityReport> {
    let primal_value = prog.objective(x0);
    let dual_value = sol.dual_value(prog)?;
    let gap = primal_value - dual_value;
    let dual = dual_feasible(prog, sol, tol)?;
    let verdict = if !dual.feasible {
        Verdict::InfeasibleDual
    } else if gap.abs() <= tol * (1.0 + primal_value.abs()) {
        Verdict::StrongDuality
    } else {
        Verdict::WeakOnly
    };
    Ok(DualityReport {
        primal_value,
        dual_value,
        gap,
        max_equality_residual: dual.max_equality_residual,
        min_factor_entry: dual.min_factor_entry,
        audit: decomposition_audit(prog, x0, sol)?,
        verdict,
    })
}

/// Solves the unrestricted slack problem on `grid`; a slack below `-tol`
/// means the discretized constraint has a Slater point.
pub fn slater_probe(prog: &CopositiveProgram, grid: &SimplexGrid, tol: f64) -> Result<bool> {
    Ok(slater_slack(prog, grid)? < -tol)
}

/// Optimal slack `μ*` of the unrestricted problem.
pub fn slater_slack(prog: &CopositiveProgram, grid: &SimplexGrid) -> Result<f64> {
    let cache = GridCache::new(prog, grid.clone());
    let r = mu_problem(prog, &cache, &[], 0.0, 1e6)?;
    let sol = solve_lp(&r.lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        _ => Err(Error::LpNotOptimal),
    }
}

/// Smallest `tᵀ𝒜(x)t` over `samples` random convex combinations of
/// `points`. Nonnegative whenever `𝒜(x)τ ≥ 0` for every point.
pub fn hull_quad_min(
    prog: &CopositiveProgram,
    x: &[f64],
    points: &[SimplexPoint],
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyHull);
    }
    let ax = prog.constraint_matrix(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for s in 0..samples.max(points.len()) {
        let w: Vec<f64> = if s < points.len() {
            (0..points.len()).map(|i| if i == s { 1.0 } else { 0.0 }).collect()
        } else {
            (0..points.len()).map(|_| rng.gen_range(0.0..1.0)).collect()
        };
        let total: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        let mut t = vec![0.0; prog.p()];
        for (wi, pt) in w.iter().zip(points) {
            for (tk, pk) in t.iter_mut().zip(pt.coords()) {
                *tk += wi / total * pk;
            }
        }
        best = best.min(quad_form(&ax, &t)?);
    }
    Ok(best)
}
