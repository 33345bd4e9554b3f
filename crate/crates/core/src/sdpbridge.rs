//! Semidefinite extended duals and the conversion to the reduced form.
//!
//! The full form keeps a `2p x 2p` PSD block `[[U_m, W_m], [W_mᵀ, D_m]]`
//! per level. The reduced form fixes `D_m = I`, so each block is PSD
//! exactly when `Ũ_m - W̃_m W̃_mᵀ` is. Scaling level `m` by
//! `ρ(m) = max(1, ρ(m+1)² μmax(D_m))` maps one form onto the other while
//! keeping every equality and the objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cones::is_psd;
use crate::error::{Error, Result};
use crate::model::SdpProgram;
use crate::symcore::{dot, max_eigenvalue, quad_form, trace_inner, trace_inner_general, Mat, SymMatrix};

/// Default equality tolerance.
pub const EQ_TOL: f64 = 1e-7;
/// Default PSD tolerance, relative to the block scale.
pub const PSD_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdLevel {
    pub u: SymMatrix,
    pub w: Mat,
    pub d: SymMatrix,
}

/// Full-form dual: levels `1..=m0` and the top matrix `U`; `W₀ = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdSolution {
    pub p: usize,
    pub m0: usize,
    pub levels: Vec<EdLevel>,
    pub u: SymMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdrLevel {
    pub u: SymMatrix,
    pub w: Mat,
}

/// Reduced-form dual with the scaling factors that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdrSolution {
    pub p: usize,
    pub m0: usize,
    pub levels: Vec<EdrLevel>,
    pub u: SymMatrix,
    /// `rho[m-1] = ρ(m)`; empty when the solution was not converted.
    pub rho: Vec<f64>,
}

/// Signed factors `(V_m, L_m)` give `U_m = VVᵀ`, `W_m = VLᵀ`, `D_m = LLᵀ`,
/// a PSD block by construction.
impl EdSolution {
    pub fn from_factors(factors: &[(Mat, Mat)], top: &Mat) -> Result<Self> {
        let p = top.rows();
        let mut levels = Vec::with_capacity(factors.len());
        for (v, l) in factors {
            if v.rows() != p || l.rows() != p {
                return Err(Error::DimensionMismatch { expected: p, found: v.rows().max(l.rows()) });
            }
            levels.push(EdLevel { u: v.gram(), w: v.mul_transpose(l)?, d: l.gram() });
        }
        Ok(EdSolution { p, m0: levels.len(), levels, u: top.gram() })
    }

    fn w(&self, m: usize) -> Mat {
        if m == 0 {
            Mat::zeros(self.p, self.p)
        } else {
            self.levels[m - 1].w.clone()
        }
    }

    pub fn dual_value(&self, sdp: &SdpProgram) -> Result<f64> {
        Ok(-(trace_inner(&self.u, sdp.a(0))? + trace_inner_general(sdp.a(0), &self.w(self.m0))?))
    }

    /// `(U_m + W_{m-1}) • A_j` per level, then `(U + W_{m0}) • A_j - c_j`.
    pub fn equality_residuals(&self, sdp: &SdpProgram) -> Result<Vec<f64>> {
        let pairs: Vec<(&SymMatrix, Mat)> = self.levels.iter().enumerate().map(|(i, lv)| (&lv.u, self.w(i))).collect();
        residuals(sdp, self.p, self.m0, self.levels.len(), &pairs, &self.u, &self.w(self.m0))
    }
}

impl EdrSolution {
    fn w(&self, m: usize) -> Mat {
        if m == 0 {
            Mat::zeros(self.p, self.p)
        } else {
            self.levels[m - 1].w.clone()
        }
    }

    pub fn dual_value(&self, sdp: &SdpProgram) -> Result<f64> {
        Ok(-(trace_inner(&self.u, sdp.a(0))? + trace_inner_general(sdp.a(0), &self.w(self.m0))?))
    }

    pub fn equality_residuals(&self, sdp: &SdpProgram) -> Result<Vec<f64>> {
        let pairs: Vec<(&SymMatrix, Mat)> = self.levels.iter().enumerate().map(|(i, lv)| (&lv.u, self.w(i))).collect();
        residuals(sdp, self.p, self.m0, self.levels.len(), &pairs, &self.u, &self.w(self.m0))
    }
}

fn residuals(
    sdp: &SdpProgram,
    p: usize,
    m0: usize,
    stored: usize,
    pairs: &[(&SymMatrix, Mat)],
    u: &SymMatrix,
    w_top: &Mat,
) -> Result<Vec<f64>> {
    if sdp.p() != p {
        return Err(Error::DimensionMismatch { expected: sdp.p(), found: p });
    }
    if stored != m0 {
        return Err(Error::DimensionMismatch { expected: m0, found: stored });
    }
    let mut out = Vec::new();
    for (um, w_prev) in pairs {
        for a in sdp.matrices() {
            out.push(trace_inner(um, a)? + trace_inner_general(a, w_prev)?);
        }
    }
    for (j, cj) in sdp.c().iter().enumerate() {
        let a = sdp.a(j + 1);
        out.push(trace_inner(u, a)? + trace_inner_general(a, w_top)? - cj);
    }
    Ok(out)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

fn eq_scale(sdp: &SdpProgram) -> f64 {
    sdp.matrices().iter().fold(1.0_f64, |a, m| a.max(m.max_abs()))
}

/// Scales the levels of a full-form dual into the reduced form. Only the
/// equalities are checked here; PSD defects of the input surface in
/// [`edr_feasible`] on the result.
pub fn ed_to_edr(sdp: &SdpProgram, ed: &EdSolution) -> Result<EdrSolution> {
    let res = max_abs(&ed.equality_residuals(sdp)?);
    if res > EQ_TOL * eq_scale(sdp) {
        return Err(Error::DualInfeasible(format!("equality residual {res:e}")));
    }
    let m0 = ed.m0;
    let mut rho = vec![1.0; m0];
    for m in (1..=m0).rev() {
        let mu = max_eigenvalue(&ed.levels[m - 1].d).max(0.0);
        rho[m - 1] = if m == m0 { mu.max(1.0) } else { (rho[m] * rho[m] * mu).max(1.0) };
    }
    let levels = (1..=m0)
        .map(|m| {
            let lv = &ed.levels[m - 1];
            // W̃_m = ρ(m+1) W_m below the top, W̃_{m0} = W_{m0}
            let wscale = if m == m0 { 1.0 } else { rho[m] };
            EdrLevel { u: lv.u.scaled(rho[m - 1]), w: lv.w.scaled(wscale) }
        })
        .collect();
    Ok(EdrSolution { p: ed.p, m0, levels, u: ed.u.clone(), rho })
}

/// Embeds a reduced-form dual with `D_m = I`.
pub fn edr_to_ed(edr: &EdrSolution) -> EdSolution {
    EdSolution {
        p: edr.p,
        m0: edr.m0,
        levels: edr
            .levels
            .iter()
            .map(|lv| EdLevel { u: lv.u.clone(), w: lv.w.clone(), d: SymMatrix::identity(edr.p) })
            .collect(),
        u: edr.u.clone(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpFeasibility {
    pub max_equality_residual: f64,
    /// Smallest eigenvalue of each level's PSD test matrix.
    pub level_min_eigs: Vec<f64>,
    pub u_min_eig: f64,
    pub equalities_hold: bool,
    pub psd_holds: bool,
    pub feasible: bool,
}

/// Equalities to `eq_tol`; `Ũ_m - W̃_mW̃_mᵀ` and `Ũ` PSD to `psd_tol`
/// relative to their scale.
pub fn edr_feasible(sdp: &SdpProgram, edr: &EdrSolution, eq_tol: f64, psd_tol: f64) -> Result<SdpFeasibility> {
    let res = max_abs(&edr.equality_residuals(sdp)?);
    let mut level_min_eigs = Vec::new();
    let mut psd_holds = true;
    for lv in &edr.levels {
        let schur = lv.u.sub(&SymMatrix::symmetric_part(&lv.w.mul_transpose(&lv.w)?)?)?;
        let scale = 1.0_f64.max(lv.u.max_abs());
        level_min_eigs.push(schur.min_eigenvalue());
        psd_holds &= is_psd(&schur, psd_tol * scale);
    }
    let u_min_eig = edr.u.min_eigenvalue();
    psd_holds &= is_psd(&edr.u, psd_tol * 1.0_f64.max(edr.u.max_abs()));
    let equalities_hold = res <= eq_tol * eq_scale(sdp);
    Ok(SdpFeasibility {
        max_equality_residual: res,
        level_min_eigs,
        u_min_eig,
        equalities_hold,
        psd_holds,
        feasible: equalities_hold && psd_holds,
    })
}

/// Same checks for the full form, on the assembled `2p x 2p` blocks.
pub fn ed_feasible(sdp: &SdpProgram, ed: &EdSolution, eq_tol: f64, psd_tol: f64) -> Result<SdpFeasibility> {
    let res = max_abs(&ed.equality_residuals(sdp)?);
    let p = ed.p;
    let mut level_min_eigs = Vec::new();
    let mut psd_holds = true;
    for lv in &ed.levels {
        let mut block = SymMatrix::zeros(2 * p);
        for i in 0..p {
            for j in 0..p {
                block.set_sym(i, j, lv.u.get(i, j));
                block.set_sym(p + i, p + j, lv.d.get(i, j));
                block.set_sym(i, p + j, lv.w.get(i, j));
            }
        }
        let scale = 1.0_f64.max(block.max_abs());
        level_min_eigs.push(block.min_eigenvalue());
        psd_holds &= is_psd(&block, psd_tol * scale);
    }
    let u_min_eig = ed.u.min_eigenvalue();
    psd_holds &= is_psd(&ed.u, psd_tol * 1.0_f64.max(ed.u.max_abs()));
    let equalities_hold = res <= eq_tol * eq_scale(sdp);
    Ok(SdpFeasibility {
        max_equality_residual: res,
        level_min_eigs,
        u_min_eig,
        equalities_hold,
        psd_holds,
        feasible: equalities_hold && psd_holds,
    })
}

/// Checks `tᵀQt ≤ μmax(Q) tᵀt + 1e-9` on `samples` random vectors.
pub fn psd_bound_check(q: &SymMatrix, samples: usize, seed: u64) -> Result<bool> {
    let mu = max_eigenvalue(q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let t: Vec<f64> = (0..q.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if quad_form(q, &t)? > mu * dot(&t, &t) + 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A random program with `n` constraints and a feasible full-form dual with
/// `m0` levels: random signed factors, constraint matrices projected away
/// from every level direction `sym(U_m + W_{m-1})`, and costs read off the
/// top equalities.
pub fn random_feasible_ed(p: usize, n: usize, m0: usize, seed: u64) -> Result<(SdpProgram, EdSolution)> {
    if p == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_mat = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
        Mat::from_row_major(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
    };
    let mut factors = Vec::with_capacity(m0);
    for _ in 0..m0 {
        let k = rng.gen_range(1..=p);
        factors.push((rand_mat(p, k, &mut rng)?, rand_mat(p, k, &mut rng)?));
    }
    let k = rng.gen_range(1..=p);
    let top = rand_mat(p, k, &mut rng)?;
    let ed = EdSolution::from_factors(&factors, &top)?;

    // orthonormal basis of the level directions in the trace inner product
    let mut basis: Vec<SymMatrix> = Vec::new();
    for m in 1..=m0 {
        let mut d = ed.levels[m - 1].u.add(&SymMatrix::symmetric_part(&ed.w(m - 1))?)?;
        for b in &basis {
            let coef = -trace_inner(&d, b)?;
            d.axpy(coef, b)?;
        }
        let norm = d.frobenius_norm();
        if norm > 1e-10 {
            basis.push(d.scaled(1.0 / norm));
        }
    }
    let mut a = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let raw = rand_mat(p, p, &mut rng)?;
        let mut s = SymMatrix::symmetric_part(&raw)?;
        for b in &basis {
            let coef = -trace_inner(&s, b)?;
            s.axpy(coef, b)?;
        }
        a.push(s);
    }
    let w_top = ed.w(m0);
    let c = a[1..]
        .iter()
        .map(|aj| Ok(trace_inner(&ed.u, aj)? + trace_inner_general(aj, &w_top)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok((SdpProgram::new(a, c)?, ed))
}
