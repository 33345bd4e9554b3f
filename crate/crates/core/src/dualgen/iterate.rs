//! One level of the construction.

use serde::{Deserialize, Serialize};

use super::immobile::verify_immobile;
use super::restriction::{mu_problem, GridCache};
use super::solution::{factor_inner, DualLevel};
use super::GenConfig;
use crate::dam::{run_dam, BaseItem, DataSet, DeltaItem};
use crate::error::{Error, Result};
use crate::lp::{kkt_residuals, solve_lp_with, LpStatus};
use crate::model::CopositiveProgram;
use crate::symcore::{dist_to_hull, trace_inner_general, Mat, SimplexPoint};

/// Band below zero inside which negative multipliers are clamped silently.
const CLAMP_WARN: f64 = 1e-9;
/// Stationarity residual above which a level is flagged.
const STATIONARITY_WARN: f64 = 1e-6;
/// New points closer than this to the earlier hull are rejected.
const HULL_REPEAT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub tau: SimplexPoint,
    pub gamma: f64,
    /// Level whose restriction problem produced this index.
    pub level: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: usize,
    pub mu: f64,
    pub delta_count: usize,
    pub epsilon: f64,
    pub retries: usize,
    pub dam_steps: usize,
    pub hull_flags: usize,
    /// `(U_{m+1} + W_m) • A_j`, `j = 0..n`.
    pub equality_residuals: Vec<f64>,
    pub stationarity: f64,
    /// Sum of the new weights before data modification.
    pub gamma_sum: f64,
    /// Zero-based supports of the new indices after data modification.
    pub supports: Vec<Vec<usize>>,
    /// Active grid points before data modification.
    pub raw_points: Vec<Vec<f64>>,
}

/// State at the start of level `m`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationState {
    pub m: usize,
    /// `I_m` in level order.
    pub indices: Vec<IndexEntry>,
    /// `λ^{m-1}(i)` for the first `|I_{m-1}|` entries of `indices`.
    pub lambdas: Vec<Vec<f64>>,
    /// `β_m(i) = √γ(i)` for `i ∈ I_m`.
    pub betas: Vec<f64>,
    /// Completed `(V_s, L_s)` for `s = 1..m-1`.
    pub levels: Vec<DualLevel>,
    /// `V_m`, absent at level zero.
    pub v_current: Option<Mat>,
    /// Radius used by the last restriction problem.
    pub epsilon: f64,
    /// Every point verified immobile so far.
    pub known: Vec<SimplexPoint>,
    pub trace: Vec<LevelTrace>,
}

impl IterationState {
    pub fn initial() -> Self {
        IterationState {
            m: 0,
            indices: Vec::new(),
            lambdas: Vec::new(),
            betas: Vec::new(),
            levels: Vec::new(),
            v_current: None,
            epsilon: 0.0,
            known: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn points(&self) -> Vec<SimplexPoint> {
        self.indices.iter().map(|e| e.tau.clone()).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Step {
    Continue(Box<IterationState>),
    SlaterDetected { x: Vec<f64>, mu: f64, epsilon: f64, retry: usize },
}

pub fn iterate(
    prog: &CopositiveProgram,
    state: &IterationState,
    cache: &GridCache,
    config: &GenConfig,
) -> Result<Step> {
    iterate_with(prog, state, cache, config, 0)
}

/// Solves level `state.m`, starting the radius schedule at `first_retry`
/// shrinks. Level zero uses the whole grid and never retries.
pub fn iterate_with(
    prog: &CopositiveProgram,
    state: &IterationState,
    cache: &GridCache,
    config: &GenConfig,
    first_retry: usize,
) -> Result<Step> {
    let m = state.m;
    let last = if m == 0 { 0 } else { config.max_retries };
    let mut reason = String::from("no attempt");
    for retry in first_retry..=last {
        let epsilon = if m == 0 { 0.0 } else { config.epsilon(cache, retry) };
        match attempt(prog, state, cache, config, epsilon, retry)? {
            Attempt::Done(step) => return Ok(step),
            Attempt::Retry(why) => {
                log::debug!("level {m}, epsilon {epsilon:e}: {why}");
                reason = why;
            }
        }
    }
    Err(Error::EpsilonExhausted { level: m, reason })
}

enum Attempt {
    Done(Step),
    Retry(String),
}

fn attempt(
    prog: &CopositiveProgram,
    state: &IterationState,
    cache: &GridCache,
    config: &GenConfig,
    epsilon: f64,
    retry: usize,
) -> Result<Attempt> {
    let m = state.m;
    let n = prog.n();
    let points = state.points();
    let restriction = match mu_problem(prog, cache, &points, epsilon, config.mu_bound) {
        Ok(r) => r,
        Err(Error::EmptyRestriction { .. }) => return Ok(Attempt::Retry("restricted grid is empty".into())),
        Err(e) => return Err(e),
    };
    let sol = solve_lp_with(&restriction.lp, &config.lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible { mu: f64::INFINITY }),
        LpStatus::Unbounded => {
            return Err(Error::InvalidArgument("restriction problem unbounded despite the slack box".into()))
        }
    }
    let mu = sol.value;
    if mu < -config.tau_mu {
        return Ok(Attempt::Done(Step::SlaterDetected { x: sol.y[..n].to_vec(), mu, epsilon, retry }));
    }
    if mu > config.tau_mu {
        return Err(Error::Infeasible { mu });
    }
    let stationarity = kkt_residuals(&restriction.lp, &sol).stationarity;
    if stationarity > STATIONARITY_WARN {
        log::warn!("level {m}: stationarity residual {stationarity:e}");
    }

    let (lambda_raw, weights) = restriction.split_duals(&sol.ineq_duals);
    let active: Vec<(usize, f64)> = restriction
        .grid_rows
        .iter()
        .zip(&weights)
        .filter(|(_, w)| **w > config.support_tol)
        .map(|(&k, &w)| (k, w))
        .collect();
    let total: f64 = active.iter().map(|(_, w)| w).sum();
    if active.is_empty() || !(total > 0.0) {
        return Ok(Attempt::Retry("no active grid multipliers".into()));
    }

    let mut known = state.known.clone();
    let mut delta = Vec::with_capacity(active.len());
    for &(k, w) in &active {
        let tau = cache.point(k).clone();
        if !points.is_empty() && dist_to_hull(&tau, &points)? <= HULL_REPEAT {
            return Ok(Attempt::Retry(format!("active point {:?} repeats an earlier index", tau.coords())));
        }
        let check = verify_immobile(prog, &tau, cache, config, &known)?;
        if !check.immobile {
            return Ok(Attempt::Retry(format!("point {:?} is not immobile ({:e})", tau.coords(), check.max_value)));
        }
        known.push(tau.clone());
        delta.push(DeltaItem { tau, gamma: w / total });
    }

    // λ^m = λ^{m-1} + λ̂ on I_{m-1}, λ̂ on ΔI_{m-1}
    let base: Vec<BaseItem> = state
        .indices
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut lambda: Vec<f64> = lambda_raw[i].iter().map(|v| clamp(*v / total)).collect();
            if let Some(prev) = state.lambdas.get(i) {
                for (l, p) in lambda.iter_mut().zip(prev) {
                    *l += p;
                }
            }
            BaseItem { tau: e.tau.clone(), lambda, gamma: e.gamma }
        })
        .collect();
    let data = DataSet::new(delta, base)?;
    let outcome = run_dam(&data, None)?;
    let mut supports = Vec::new();
    for (d, before) in outcome.data.delta.iter().zip(&data.delta) {
        if d.tau != before.tau {
            let check = verify_immobile(prog, &d.tau, cache, config, &known)?;
            if !check.immobile {
                return Ok(Attempt::Retry(format!("rewritten point {:?} is not immobile", d.tau.coords())));
            }
            known.push(d.tau.clone());
        }
        supports.push(d.tau.support());
    }
    for b in &outcome.data.base {
        let pb = b.tau.support();
        if let Some(s) = supports.iter().find(|s| pb.iter().all(|k| s.contains(k))) {
            return Err(Error::SupportRepeat(format!("level {m}: support {pb:?} is contained in new support {s:?}")));
        }
    }

    let mut indices: Vec<IndexEntry> = outcome
        .data
        .base
        .iter()
        .zip(&state.indices)
        .map(|(b, e)| IndexEntry { tau: b.tau.clone(), gamma: b.gamma, level: e.level })
        .collect();
    indices.extend(outcome.data.delta.iter().map(|d| IndexEntry { tau: d.tau.clone(), gamma: d.gamma, level: m }));
    let lambdas: Vec<Vec<f64>> = outcome.data.base.iter().map(|b| b.lambda.clone()).collect();
    let betas: Vec<f64> = indices.iter().map(|e| e.gamma.sqrt()).collect();
    let p = prog.p();
    let v_next = scaled_columns(p, indices.iter().map(|e| (&e.tau, e.gamma.sqrt())))?;

    let mut levels = state.levels.clone();
    let w_m = match &state.v_current {
        Some(v) => {
            let l = lambda_factor(p, &lambdas, &state.betas)?;
            let w = v.mul_transpose(&l)?;
            levels.push(DualLevel { v: v.clone(), l });
            w
        }
        None => Mat::zeros(p, p),
    };
    let equality_residuals = prog
        .matrices()
        .iter()
        .map(|a| Ok(factor_inner(&v_next, a)? + trace_inner_general(a, &w_m)?))
        .collect::<Result<Vec<f64>>>()?;

    let mut trace = state.trace.clone();
    if m > 0 && outcome.steps.is_empty() {
        log::info!("level {m}: data modification made no step (isolated immobile indices)");
    }
    trace.push(LevelTrace {
        level: m,
        mu,
        delta_count: outcome.data.delta.len(),
        epsilon,
        retries: retry,
        dam_steps: outcome.steps.len(),
        hull_flags: outcome.hull_flags,
        equality_residuals,
        stationarity,
        gamma_sum: data.delta.iter().map(|d| d.gamma).sum::<f64>(),
        supports,
        raw_points: data.delta.iter().map(|d| d.tau.coords().to_vec()).collect(),
    });
    Ok(Attempt::Done(Step::Continue(Box::new(IterationState {
        m: m + 1,
        indices,
        lambdas,
        betas,
        levels,
        v_current: Some(v_next),
        epsilon,
        known,
        trace,
    }))))
}

fn clamp(v: f64) -> f64 {
    if v < -CLAMP_WARN {
        log::warn!("clamping multiplier {v:e} to zero");
    }
    v.max(0.0)
}

/// Columns `β τ`.
pub(super) fn scaled_columns<'a>(p: usize, cols: impl Iterator<Item = (&'a SimplexPoint, f64)>) -> Result<Mat> {
    let columns: Vec<Vec<f64>> = cols.map(|(t, b)| t.coords().iter().map(|v| v * b).collect()).collect();
    Mat::from_columns(p, &columns)
}

/// Columns `λ(i) / β(i)`.
pub(super) fn lambda_factor(p: usize, lambdas: &[Vec<f64>], betas: &[f64]) -> Result<Mat> {
    if lambdas.len() != betas.len() {
        return Err(Error::DimensionMismatch { expected: betas.len(), found: lambdas.len() });
    }
    let columns: Vec<Vec<f64>> = lambdas.iter().zip(betas).map(|(l, b)| l.iter().map(|v| v / b).collect()).collect();
    Mat::from_columns(p, &columns)
}
