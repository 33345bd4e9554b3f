//! A posteriori immobility test for candidate indices.

use serde::{Deserialize, Serialize};

use super::restriction::GridCache;
use super::GenConfig;
use crate::error::{Error, Result};
use crate::lp::{solve_lp_with, LinearProgram, LpStatus};
use crate::model::CopositiveProgram;
use crate::symcore::{quad_form, SimplexPoint};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImmobileCheck {
    pub immobile: bool,
    /// Largest `τᵀ𝒜(x)τ` found over the relaxed feasible set.
    pub max_value: f64,
    /// Smallest entry of `𝒜(x̂)τ` at the maximizer `x̂`.
    pub min_product: f64,
}

/// Maximizes `τᵀ𝒜(x)τ` over the grid relaxation of the feasible set,
/// intersected with `‖x‖∞ ≤ R` and with `𝒜(x)κ ≥ 0` for each already
/// verified immobile point `κ` in `known`. The relaxation contains the
/// feasible set, so a maximum at or below the tolerance shows that `τ` is
/// immobile.
pub fn verify_immobile(
    prog: &CopositiveProgram,
    tau: &SimplexPoint,
    cache: &GridCache,
    config: &GenConfig,
    known: &[SimplexPoint],
) -> Result<ImmobileCheck> {
    let n = prog.n();
    let q: Vec<f64> = prog.matrices().iter().map(|a| quad_form(a, tau.coords())).collect::<Result<_>>()?;
    let scale = prog.matrices().iter().fold(1.0_f64, |acc, a| acc.max(a.max_abs()));
    let tol = config.immobile_tol * scale;

    let mut lp = LinearProgram::new(q[1..].iter().map(|v| -v).collect());
    for j in 0..n {
        lp.set_bounds(j, -config.box_radius, config.box_radius);
    }
    for kappa in known {
        let prods: Vec<Vec<f64>> = prog.matrices().iter().map(|a| a.mul_vec(kappa.coords())).collect::<Result<_>>()?;
        for k in 0..prog.p() {
            lp.add_ineq(prods[1..].iter().map(|v| v[k]).collect(), -prods[0][k]);
        }
    }
    for k in 0..cache.len() {
        let qk = cache.quads(k);
        lp.add_ineq(qk[1..].to_vec(), -qk[0]);
    }
    let sol = solve_lp_with(&lp, &config.lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible { mu: f64::INFINITY }),
        LpStatus::Unbounded => return Err(Error::InvalidArgument("immobility probe unbounded despite the box".into())),
    }
    let max_value = q[0] - sol.value;
    let a_hat = prog.constraint_matrix(&sol.y)?;
    let min_product = a_hat.mul_vec(tau.coords())?.into_iter().fold(f64::INFINITY, f64::min);
    let immobile = max_value <= tol;
    if immobile && min_product < -tol {
        log::warn!("immobile candidate {:?} has 𝒜(x̂)τ entry {min_product:e} < 0", tau.coords());
    }
    Ok(ImmobileCheck { immobile, max_value, min_product })
}
