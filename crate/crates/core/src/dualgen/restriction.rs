//! Discretized restriction problems as linear programs.

use crate::error::{Error, Result};
use crate::lp::LinearProgram;
use crate::model::CopositiveProgram;
use crate::symcore::{dist_to_hull, quad_form_unchecked, SimplexGrid, SimplexPoint};

/// Quadratic forms `tᵀAⱼt`, `j = 0..n`, at every grid point.
#[derive(Clone, Debug)]
pub struct GridCache {
    pub grid: SimplexGrid,
    width: usize,
    quads: Vec<f64>,
}

impl GridCache {
    pub fn new(prog: &CopositiveProgram, grid: SimplexGrid) -> Self {
        let width = prog.n() + 1;
        let quads = grid
            .points()
            .iter()
            .flat_map(|t| prog.matrices().iter().map(move |a| quad_form_unchecked(a, t.coords())))
            .collect();
        GridCache { grid, width, quads }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn point(&self, k: usize) -> &SimplexPoint {
        &self.grid.points()[k]
    }

    /// `(tᵀA₀t, tᵀA₁t, …)` at grid point `k`.
    pub fn quads(&self, k: usize) -> &[f64] {
        &self.quads[k * self.width..(k + 1) * self.width]
    }

    /// Grid points at distance at least `epsilon` from `conv(hull)`; all
    /// points when `hull` is empty.
    pub fn filtered(&self, hull: &[SimplexPoint], epsilon: f64) -> Result<Vec<usize>> {
        if hull.is_empty() {
            return Ok((0..self.len()).collect());
        }
        let dists = self.distances(hull)?;
        Ok((0..self.len()).filter(|&k| dists[k] >= epsilon).collect())
    }

    #[cfg(feature = "parallel")]
    fn distances(&self, hull: &[SimplexPoint]) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        self.grid.points().par_iter().map(|t| dist_to_hull(t, hull)).collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn distances(&self, hull: &[SimplexPoint]) -> Result<Vec<f64>> {
        self.grid.points().iter().map(|t| dist_to_hull(t, hull)).collect()
    }
}

/// An LP together with the meaning of its inequality rows.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub lp: LinearProgram,
    /// Points whose componentwise rows `𝒜(x)τ ≥ 0` come first, `p` rows each.
    pub immobile_points: Vec<SimplexPoint>,
    /// Grid index of each quadratic row, in row order after the componentwise rows.
    pub grid_rows: Vec<usize>,
}

impl Restriction {
    pub fn componentwise_row_count(&self) -> usize {
        self.immobile_points.len() * self.immobile_points.first().map_or(0, SimplexPoint::dim)
    }

    /// Row multipliers split into per-point `p`-vectors and grid weights.
    pub fn split_duals(&self, duals: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let p = self.immobile_points.first().map_or(0, SimplexPoint::dim);
        let k = self.componentwise_row_count();
        let lambdas = (0..self.immobile_points.len()).map(|i| duals[i * p..(i + 1) * p].to_vec()).collect();
        (lambdas, duals[k..].to_vec())
    }
}

/// Appends the rows `(Aⱼτ)_k` (`j ≥ 1`) `>= -(A₀τ)_k` for every point and
/// component, padding each row with `pad` trailing zeros.
fn push_componentwise_rows(
    lp: &mut LinearProgram,
    prog: &CopositiveProgram,
    points: &[SimplexPoint],
    pad: usize,
) -> Result<()> {
    let p = prog.p();
    for tau in points {
        let prods: Vec<Vec<f64>> = prog.matrices().iter().map(|a| a.mul_vec(tau.coords())).collect::<Result<_>>()?;
        for k in 0..p {
            let mut row: Vec<f64> = prods[1..].iter().map(|v| v[k]).collect();
            row.extend(std::iter::repeat_n(0.0, pad));
            lp.add_ineq(row, -prods[0][k]);
        }
    }
    Ok(())
}

/// `min μ` over `(x, μ)` s.t. `𝒜(x)τ ≥ 0` for `τ` in `immobile`, and
/// `tᵀ𝒜(x)t + μ ≥ 0` for grid points at distance `≥ epsilon` from
/// `conv(immobile)`; `|μ| ≤ mu_bound`. With no immobile points this is the
/// plain grid problem over the whole simplex.
pub fn mu_problem(
    prog: &CopositiveProgram,
    cache: &GridCache,
    immobile: &[SimplexPoint],
    epsilon: f64,
    mu_bound: f64,
) -> Result<Restriction> {
    let n = prog.n();
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::new(obj);
    lp.set_bounds(n, -mu_bound, mu_bound);
    push_componentwise_rows(&mut lp, prog, immobile, 1)?;
    let grid_rows = cache.filtered(immobile, epsilon)?;
    if grid_rows.is_empty() {
        return Err(Error::EmptyRestriction { epsilon });
    }
    for &k in &grid_rows {
        let q = cache.quads(k);
        let mut row = q[1..].to_vec();
        row.push(1.0);
        lp.add_ineq(row, -q[0]);
    }
    Ok(Restriction { lp, immobile_points: immobile.to_vec(), grid_rows })
}

/// `min cᵀx` s.t. `𝒜(x)τ ≥ 0` for `τ` in `immobile` and `tᵀ𝒜(x)t ≥ 0`
/// on the filtered grid.
pub fn cost_problem(
    prog: &CopositiveProgram,
    cache: &GridCache,
    immobile: &[SimplexPoint],
    epsilon: f64,
) -> Result<Restriction> {
    let mut lp = LinearProgram::new(prog.c().to_vec());
    push_componentwise_rows(&mut lp, prog, immobile, 0)?;
    let grid_rows = cache.filtered(immobile, epsilon)?;
    if grid_rows.is_empty() {
        return Err(Error::EmptyRestriction { epsilon });
    }
    for &k in &grid_rows {
        let q = cache.quads(k);
        lp.add_ineq(q[1..].to_vec(), -q[0]);
    }
    Ok(Restriction { lp, immobile_points: immobile.to_vec(), grid_rows })
}
