//! Level-by-level construction of the extended dual.
//!
//! Each level solves a grid restriction of the constraint with a slack `μ`.
//! While the optimal slack is zero, the active grid points are new immobile
//! indices; their multipliers, after data modification, give the factors of
//! the next level. Once a negative slack appears the restricted problem has
//! a Slater point, and the final cost problem supplies the top block.

mod assemble;
mod immobile;
mod iterate;
mod restriction;
mod solution;

use serde::{Deserialize, Serialize};

pub use assemble::{final_step, FinalOutcome, FinalResult, FinalTrace};
pub use immobile::{verify_immobile, ImmobileCheck};
pub use iterate::{iterate, iterate_with, IndexEntry, IterationState, LevelTrace, Step};
pub use restriction::{cost_problem, mu_problem, GridCache, Restriction};
pub use solution::{DualLevel, EqualityResiduals, ExtendedDualSolution};

use crate::cones::{DEFAULT_GRID, DEFAULT_REFINE_ROUNDS};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOptions};
use crate::model::CopositiveProgram;
use crate::symcore::{simplex_grid_with_cap, SimplexPoint, DEFAULT_GRID_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    /// Grid resolution `k`.
    pub grid: usize,
    /// Local refinement rounds of the final feasibility check.
    pub refine_rounds: usize,
    /// `μ*` below `-tau_mu` means a Slater point; within `±tau_mu` means zero.
    pub tau_mu: f64,
    /// First restriction radius; `None` means four grid cell diameters.
    pub eps_init: Option<f64>,
    pub eps_shrink: f64,
    pub max_retries: usize,
    /// Box `‖x‖∞ ≤ R` of the immobility probe.
    pub box_radius: f64,
    pub max_iterations: usize,
    /// Multipliers at or below this are treated as zero.
    pub support_tol: f64,
    pub immobile_tol: f64,
    pub mu_bound: f64,
    /// Relative feasibility slack for the primal point of the final step.
    pub feas_tol: f64,
    /// Relative duality gap accepted by the final step.
    pub gap_tol: f64,
    pub lp: LpOptions,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            grid: DEFAULT_GRID,
            refine_rounds: DEFAULT_REFINE_ROUNDS,
            tau_mu: 1e-7,
            eps_init: None,
            eps_shrink: 0.5,
            max_retries: 6,
            box_radius: 1e3,
            max_iterations: 64,
            support_tol: 1e-10,
            immobile_tol: 1e-7,
            mu_bound: 1e6,
            feas_tol: 1e-7,
            gap_tol: 1e-6,
            lp: LpOptions::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau_mu", self.tau_mu),
            ("eps_shrink", self.eps_shrink),
            ("box_radius", self.box_radius),
            ("support_tol", self.support_tol),
            ("immobile_tol", self.immobile_tol),
            ("mu_bound", self.mu_bound),
            ("feas_tol", self.feas_tol),
            ("gap_tol", self.gap_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.eps_shrink >= 1.0 {
            return Err(Error::InvalidArgument("eps_shrink must be below 1".into()));
        }
        if let Some(e) = self.eps_init {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::InvalidArgument(format!("eps_init must be positive, got {e}")));
            }
        }
        if self.grid == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidArgument("grid and max_iterations must be positive".into()));
        }
        Ok(())
    }

    /// `ε` after `retry` shrinks.
    pub fn epsilon(&self, cache: &GridCache, retry: usize) -> f64 {
        let init = self.eps_init.unwrap_or(4.0 * cache.grid.cell_diameter());
        init * self.eps_shrink.powi(retry as i32)
    }

    /// Level cap `min(max_iterations, 2ᵖ - 1)`.
    pub fn level_cap(&self, p: usize) -> usize {
        let bound = if p >= usize::BITS as usize { usize::MAX } else { (1usize << p) - 1 };
        self.max_iterations.min(bound)
    }
}

pub fn grid_cache(prog: &CopositiveProgram, config: &GenConfig) -> Result<GridCache> {
    config.validate()?;
    Ok(GridCache::new(prog, simplex_grid_with_cap(prog.p(), config.grid, DEFAULT_GRID_CAP)?))
}

/// The restriction LP of the current level, in variables `(x, μ)`.
pub fn restriction_problem(
    prog: &CopositiveProgram,
    state: &IterationState,
    cache: &GridCache,
    config: &GenConfig,
) -> Result<LinearProgram> {
    Ok(mu_problem(prog, cache, &state.points(), state.epsilon, config.mu_bound)?.lp)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildOutput {
    pub solution: ExtendedDualSolution,
    pub x0: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `cᵀx⁰ - dual value`.
    pub gap: f64,
    pub m0: usize,
    /// Whether the final checks passed within tolerance.
    pub converged: bool,
    /// Immobile indices found at each level, after data modification.
    pub immobile: Vec<Vec<SimplexPoint>>,
    pub trace: Vec<LevelTrace>,
    pub final_trace: FinalTrace,
    /// Levels at which data modification made no step.
    pub dam_noop_levels: Vec<usize>,
}

/// Runs levels until a Slater point appears, then the final step. A final
/// step whose checks fail re-runs its level with a smaller radius; after
/// the last retry the result is returned with `converged = false`.
pub fn build_dual(prog: &CopositiveProgram, config: &GenConfig) -> Result<BuildOutput> {
    let cache = grid_cache(prog, config)?;
    build_dual_with_cache(prog, config, &cache)
}

pub fn build_dual_with_cache(prog: &CopositiveProgram, config: &GenConfig, cache: &GridCache) -> Result<BuildOutput> {
    let cap = config.level_cap(prog.p());
    let mut state = IterationState::initial();
    let mut retry = 0;
    loop {
        match iterate_with(prog, &state, cache, config, retry)? {
            Step::Continue(next) => {
                if next.m > cap {
                    return Err(Error::IterationCap { cap });
                }
                state = *next;
                retry = 0;
            }
            Step::SlaterDetected { epsilon, retry: used, .. } => {
                let outcome = final_step(prog, &state, cache, config, epsilon)?;
                let can_retry = state.m > 0 && used < config.max_retries;
                match outcome {
                    FinalOutcome::Solved(res) if res.trace.passed || !can_retry => {
                        if !res.trace.passed {
                            log::warn!("final checks failed after {used} retries; reporting gap {:e}", res.gap);
                        }
                        return Ok(finish(state, *res));
                    }
                    FinalOutcome::Unbounded if !can_retry => return Err(Error::Unbounded),
                    _ => retry = used + 1,
                }
            }
        }
    }
}

fn finish(state: IterationState, res: FinalResult) -> BuildOutput {
    let mut immobile: Vec<Vec<SimplexPoint>> = vec![Vec::new(); state.m];
    for e in &state.indices {
        immobile[e.level].push(e.tau.clone());
    }
    let dam_noop_levels = state.trace.iter().filter(|t| t.level > 0 && t.dam_steps == 0).map(|t| t.level).collect();
    BuildOutput {
        m0: res.solution.m0,
        converged: res.trace.passed,
        solution: res.solution,
        x0: res.x0,
        primal_value: res.primal_value,
        dual_value: res.dual_value,
        gap: res.gap,
        immobile,
        trace: state.trace,
        final_trace: res.trace,
        dam_noop_levels,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImmobileReport {
    /// Number of levels before a Slater point appeared.
    pub levels: usize,
    /// Indices grouped by the level that found them.
    pub by_level: Vec<Vec<SimplexPoint>>,
    /// Every verified immobile point, including points rewritten by data
    /// modification.
    pub verified: Vec<SimplexPoint>,
    /// Slack of the Slater point of the last level.
    pub slater_mu: f64,
    pub trace: Vec<LevelTrace>,
}

/// Runs the levels without the final step.
pub fn detect_immobile(prog: &CopositiveProgram, config: &GenConfig) -> Result<ImmobileReport> {
    let cache = grid_cache(prog, config)?;
    let cap = config.level_cap(prog.p());
    let mut state = IterationState::initial();
    loop {
        match iterate(prog, &state, &cache, config)? {
            Step::Continue(next) => {
                if next.m > cap {
                    return Err(Error::IterationCap { cap });
                }
                state = *next;
            }
            Step::SlaterDetected { mu, .. } => {
                let mut by_level: Vec<Vec<SimplexPoint>> = vec![Vec::new(); state.m];
                for e in &state.indices {
                    by_level[e.level].push(e.tau.clone());
                }
                return Ok(ImmobileReport {
                    levels: state.m,
                    by_level,
                    verified: state.known,
                    slater_mu: mu,
                    trace: state.trace,
                });
            }
        }
    }
}
