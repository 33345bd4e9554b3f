//! Extended dual solutions stored as nonnegative factors.

use serde::{Deserialize, Serialize};

use crate::cones::{check_nonnegative, cp_block};
use crate::error::{Error, Result};
use crate::model::CopositiveProgram;
use crate::symcore::{trace_inner_general, Mat, SymMatrix};

/// Factors of one level: `U_m = V Vᵀ`, `W_m = V Lᵀ`, `D_m = L Lᵀ`, so the
/// level block `[[U_m, W_m], [W_mᵀ, D_m]]` is the Gram matrix of `V`
/// stacked over `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualLevel {
    pub v: Mat,
    pub l: Mat,
}

/// A feasible point of the extended dual with `m0` levels; `W₀ = 0` and
/// `U = final_v final_vᵀ`. With `m0 = 0` this is a plain completely
/// positive dual `U • Aⱼ = cⱼ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedDualSolution {
    pub p: usize,
    pub m0: usize,
    pub levels: Vec<DualLevel>,
    pub final_v: Mat,
}

/// Residuals of the dual equalities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EqualityResiduals {
    /// `levels[m-1][j] = (U_m + W_{m-1}) • A_j`, `j = 0..n`.
    pub levels: Vec<Vec<f64>>,
    /// `top[j-1] = (U + W_{m0}) • A_j - c_j`, `j = 1..n`.
    pub top: Vec<f64>,
}

impl EqualityResiduals {
    pub fn max_abs(&self) -> f64 {
        self.levels.iter().flatten().chain(&self.top).fold(0.0_f64, |a, v| a.max(v.abs()))
    }
}

impl ExtendedDualSolution {
    pub fn check_shapes(&self) -> Result<()> {
        if self.levels.len() != self.m0 {
            return Err(Error::DimensionMismatch { expected: self.m0, found: self.levels.len() });
        }
        for lv in &self.levels {
            for m in [&lv.v, &lv.l] {
                if m.rows() != self.p {
                    return Err(Error::DimensionMismatch { expected: self.p, found: m.rows() });
                }
            }
            if lv.v.cols() != lv.l.cols() {
                return Err(Error::DimensionMismatch { expected: lv.v.cols(), found: lv.l.cols() });
            }
        }
        if self.final_v.rows() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, found: self.final_v.rows() });
        }
        Ok(())
    }

    /// Re-validates that every factor is entrywise nonnegative.
    pub fn check_factors(&self) -> Result<()> {
        for lv in &self.levels {
            check_nonnegative(&lv.v)?;
            check_nonnegative(&lv.l)?;
        }
        check_nonnegative(&self.final_v)
    }

    fn level(&self, m: usize) -> &DualLevel {
        assert!(m >= 1 && m <= self.m0, "level {m} outside 1..={}", self.m0);
        &self.levels[m - 1]
    }

    /// `U_m`, `1 <= m <= m0`.
    pub fn u_level(&self, m: usize) -> SymMatrix {
        self.level(m).v.gram()
    }

    /// `W_m`, with `W₀ = 0`.
    pub fn w_level(&self, m: usize) -> Mat {
        if m == 0 {
            return Mat::zeros(self.p, self.p);
        }
        let lv = self.level(m);
        lv.v.mul_transpose(&lv.l).expect("level factors share a width")
    }

    /// `D_m`, `1 <= m <= m0`.
    pub fn d_level(&self, m: usize) -> SymMatrix {
        self.level(m).l.gram()
    }

    pub fn u(&self) -> SymMatrix {
        self.final_v.gram()
    }

    /// The `2p x 2p` block of level `m`.
    pub fn block(&self, m: usize) -> Result<SymMatrix> {
        let lv = self.level(m);
        cp_block(&lv.v, &lv.l)
    }

    /// `-(U + W_{m0}) • A₀`.
    pub fn dual_value(&self, prog: &CopositiveProgram) -> Result<f64> {
        Ok(-self.top_inner(prog.a(0))?)
    }

    /// `(U + W_{m0}) • A`.
    pub fn top_inner(&self, a: &SymMatrix) -> Result<f64> {
        Ok(factor_inner(&self.final_v, a)? + trace_inner_general(a, &self.w_level(self.m0))?)
    }

    pub fn equality_residuals(&self, prog: &CopositiveProgram) -> Result<EqualityResiduals> {
        self.check_shapes()?;
        if prog.p() != self.p {
            return Err(Error::DimensionMismatch { expected: prog.p(), found: self.p });
        }
        let mut out = EqualityResiduals::default();
        for m in 1..=self.m0 {
            let w_prev = self.w_level(m - 1);
            let row = prog
                .matrices()
                .iter()
                .map(|a| Ok(factor_inner(&self.level(m).v, a)? + trace_inner_general(a, &w_prev)?))
                .collect::<Result<Vec<f64>>>()?;
            out.levels.push(row);
        }
        for (j, cj) in prog.c().iter().enumerate() {
            out.top.push(self.top_inner(prog.a(j + 1))? - cj);
        }
        Ok(out)
    }

    /// Smallest factor entry; `+inf` when every factor is empty.
    pub fn min_factor_entry(&self) -> f64 {
        self.levels.iter().flat_map(|lv| [lv.v.min_entry(), lv.l.min_entry()]).fold(self.final_v.min_entry(), f64::min)
    }
}

/// `(B Bᵀ) • A = Σ_k b_kᵀ A b_k` over the columns of `B`.
pub(crate) fn factor_inner(b: &Mat, a: &SymMatrix) -> Result<f64> {
    let mut acc = 0.0;
    for k in 0..b.cols() {
        acc += crate::symcore::quad_form(a, &b.column(k))?;
    }
    Ok(acc)
}
