//! Final step: the cost problem on the last restriction and the top block.

use serde::{Deserialize, Serialize};

use super::iterate::{lambda_factor, scaled_columns, IterationState};
use super::restriction::{cost_problem, GridCache};
use super::solution::{DualLevel, ExtendedDualSolution};
use super::GenConfig;
use crate::error::{Error, Result};
use crate::lp::{kkt_residuals, solve_lp_with, LpStatus};
use crate::model::CopositiveProgram;
use crate::symcore::{dot, quad_form};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FinalTrace {
    pub epsilon: f64,
    /// `τ(i)ᵀ𝒜(x⁰)τ(i)` for `i ∈ I_{m0}`.
    pub complementarity: Vec<f64>,
    /// Minimum of `tᵀ𝒜(x⁰)t` over the full grid.
    pub grid_min: f64,
    pub max_equality_residual: f64,
    pub stationarity: f64,
    /// Number of columns of the top factor.
    pub support_size: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinalResult {
    pub solution: ExtendedDualSolution,
    pub x0: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub trace: FinalTrace,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum FinalOutcome {
    Solved(Box<FinalResult>),
    Unbounded,
}

/// Solves `min cᵀx` over the restriction of level `state.m` with radius
/// `epsilon` and assembles the extended dual from its multipliers. The
/// result records whether `x⁰` is grid feasible and the gap is within
/// tolerance.
pub fn final_step(
    prog: &CopositiveProgram,
    state: &IterationState,
    cache: &GridCache,
    config: &GenConfig,
    epsilon: f64,
) -> Result<FinalOutcome> {
    let p = prog.p();
    let m0 = state.m;
    let points = state.points();
    let eps = if m0 == 0 { 0.0 } else { epsilon };
    let restriction = cost_problem(prog, cache, &points, eps)?;
    let sol = solve_lp_with(&restriction.lp, &config.lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return Ok(FinalOutcome::Unbounded),
        LpStatus::Infeasible => return Err(Error::Infeasible { mu: f64::INFINITY }),
    }
    let x0 = sol.y.clone();
    let stationarity = kkt_residuals(&restriction.lp, &sol).stationarity;
    let (lambda_raw, weights) = restriction.split_duals(&sol.ineq_duals);

    let top = restriction
        .grid_rows
        .iter()
        .zip(&weights)
        .filter(|(_, w)| **w > config.support_tol)
        .map(|(&k, &w)| (cache.point(k), w.sqrt()));
    let final_v = scaled_columns(p, top)?;

    let mut levels = state.levels.clone();
    if let Some(v) = &state.v_current {
        let lambdas: Vec<Vec<f64>> = lambda_raw.iter().map(|l| l.iter().map(|v| v.max(0.0)).collect()).collect();
        let l = lambda_factor(p, &lambdas, &state.betas)?;
        levels.push(DualLevel { v: v.clone(), l });
    }
    let solution = ExtendedDualSolution { p, m0, levels, final_v };
    let primal_value = prog.objective(&x0);
    let dual_value = solution.dual_value(prog)?;
    let gap = primal_value - dual_value;
    let max_equality_residual = solution.equality_residuals(prog)?.max_abs();

    let grid_min = (0..cache.len())
        .map(|k| {
            let q = cache.quads(k);
            q[0] + dot(&q[1..], &x0)
        })
        .fold(f64::INFINITY, f64::min);
    let a0 = prog.constraint_matrix(&x0)?;
    let complementarity = points.iter().map(|t| quad_form(&a0, t.coords())).collect::<Result<Vec<f64>>>()?;
    let scale = prog.matrices().iter().fold(1.0_f64, |acc, a| acc.max(a.max_abs()));
    let feasible = grid_min >= -config.feas_tol * scale * (1.0 + x0.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
    let gap_ok = gap.abs() <= config.gap_tol * (1.0 + primal_value.abs());
    if !feasible {
        log::debug!("final step at epsilon {eps:e}: x⁰ has grid minimum {grid_min:e}");
    }
    if !gap_ok {
        log::debug!("final step at epsilon {eps:e}: gap {gap:e}");
    }
    let trace = FinalTrace {
        epsilon: eps,
        complementarity,
        grid_min,
        max_equality_residual,
        stationarity,
        support_size: solution.final_v.cols(),
        passed: feasible && gap_ok,
    };
    Ok(FinalOutcome::Solved(Box::new(FinalResult { solution, x0, primal_value, dual_value, gap, trace })))
}
