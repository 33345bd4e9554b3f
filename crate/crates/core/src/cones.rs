//! Membership tests for the copositive and PSD cones, and completely
//! positive matrices represented by nonnegative factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{check_dim, quad_form_unchecked, simplex_grid, SimplexGrid, SimplexPoint, SymMatrix};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_GRID: usize = 16;
pub const DEFAULT_REFINE_ROUNDS: usize = 3;

/// Number of best grid points refined locally.
const REFINE_CENTERS: usize = 5;
/// Resolution of the local grid laid around each center.
const LOCAL_RESOLUTION: usize = 4;
/// Upper bound on refinement rounds when waiting for the minimum to settle.
const MAX_EXTRA_ROUNDS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopositivityStatus {
    Copositive,
    NotCopositive,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CopositivityVerdict {
    pub status: CopositivityStatus,
    pub min_value: f64,
    pub witness: SimplexPoint,
    /// Best value after the grid pass and after each refinement round.
    pub history: Vec<f64>,
}

/// Result of [`min_quad_over_simplex`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadMin {
    pub value: f64,
    pub argmin: SimplexPoint,
    /// `history[0]` is the grid minimum, `history[r]` the minimum after round `r`.
    pub history: Vec<f64>,
}

/// Minimizes `tᵀDt` over the simplex: exhaustive grid pass, then local
/// re-gridding around the best few points with a patch that halves each round.
pub fn min_quad_over_simplex(d: &SymMatrix, grid: &SimplexGrid, refine_rounds: usize) -> Result<QuadMin> {
    check_dim(d.dim(), grid.dim())?;
    let pts = grid.points();
    let values = evaluate(d, pts);
    let mut ranked: Vec<(f64, SimplexPoint)> =
        best_indices(&values, REFINE_CENTERS).into_iter().map(|i| (values[i], pts[i].clone())).collect();
    let mut history = vec![ranked[0].0];
    let p = d.dim();
    if p > 1 {
        let local = simplex_grid(p, LOCAL_RESOLUTION)?;
        let mut h = 1.0 / grid.resolution() as f64;
        for _ in 0..refine_rounds {
            let mut candidates: Vec<SimplexPoint> = Vec::new();
            for (_, c) in &ranked {
                candidates.extend(local_patch(c, &local, h));
            }
            let vals = evaluate(d, &candidates);
            for (v, t) in vals.into_iter().zip(candidates) {
                ranked.push((v, t));
            }
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
            ranked.dedup_by(|a, b| a.1.linf_distance(&b.1) <= 1e-15);
            ranked.truncate(REFINE_CENTERS);
            history.push(ranked[0].0);
            h *= 0.5;
        }
    } else {
        history.extend(std::iter::repeat_n(ranked[0].0, refine_rounds));
    }
    let (value, argmin) = ranked.swap_remove(0);
    Ok(QuadMin { value, argmin, history })
}

/// Points `c + h (g - e/p)` for `g` in the local grid, kept when nonnegative.
fn local_patch(c: &SimplexPoint, local: &SimplexGrid, h: f64) -> Vec<SimplexPoint> {
    let p = c.dim();
    let center = 1.0 / p as f64;
    local
        .points()
        .iter()
        .filter_map(|g| {
            let mut coords: Vec<f64> =
                c.coords().iter().zip(g.coords()).map(|(ci, gi)| ci + h * (gi - center)).collect();
            if coords.iter().any(|v| *v < -1e-15) {
                return None;
            }
            for v in coords.iter_mut() {
                *v = v.max(0.0);
            }
            SimplexPoint::normalized(coords).ok()
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn evaluate(d: &SymMatrix, pts: &[SimplexPoint]) -> Vec<f64> {
    use rayon::prelude::*;
    pts.par_iter().map(|t| quad_form_unchecked(d, t.coords())).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate(d: &SymMatrix, pts: &[SimplexPoint]) -> Vec<f64> {
    pts.iter().map(|t| quad_form_unchecked(d, t.coords())).collect()
}

/// Indices of the `q` smallest values; ties go to the lower index.
fn best_indices(values: &[f64], q: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx.truncate(q.max(1));
    idx
}

/// Grid-and-refine copositivity test with the default number of rounds.
pub fn is_copositive(d: &SymMatrix, tol: f64, grid_resolution: usize) -> Result<CopositivityVerdict> {
    is_copositive_with_rounds(d, tol, grid_resolution, DEFAULT_REFINE_ROUNDS)
}

/// Like [`is_copositive`]; if the minimum has not settled after `rounds`
/// refinement rounds, keeps refining up to a fixed cap.
///
/// The minimum counts as settled once the last round moved it by less than
/// `tol/10`, or when it stays above `-tol` with a margin of twice the last move.
pub fn is_copositive_with_rounds(
    d: &SymMatrix,
    tol: f64,
    grid_resolution: usize,
    rounds: usize,
) -> Result<CopositivityVerdict> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let grid = simplex_grid(d.dim(), grid_resolution)?;
    let mut rounds = rounds.max(1);
    loop {
        let res = min_quad_over_simplex(d, &grid, rounds)?;
        let n = res.history.len();
        let last_move = (res.history[n - 2] - res.history[n - 1]).abs();
        let status = if res.value < -tol {
            CopositivityStatus::NotCopositive
        } else if last_move < tol / 10.0 || res.value - 2.0 * last_move >= -tol {
            CopositivityStatus::Copositive
        } else if rounds < MAX_EXTRA_ROUNDS {
            rounds += 1;
            continue;
        } else {
            CopositivityStatus::Inconclusive
        };
        return Ok(CopositivityVerdict { status, min_value: res.value, witness: res.argmin, history: res.history });
    }
}

/// True iff the smallest eigenvalue of `q` is at least `-tol`.
pub fn is_psd(q: &SymMatrix, tol: f64) -> bool {
    q.min_eigenvalue() >= -tol
}

/// A `p x k` entrywise nonnegative factor `B`, standing for the completely
/// positive matrix `B Bᵀ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::symcore::Mat", into = "crate::symcore::Mat")]
pub struct CpFactor(crate::symcore::Mat);

impl CpFactor {
    pub fn new(b: crate::symcore::Mat) -> Result<Self> {
        check_nonnegative(&b)?;
        Ok(CpFactor(b))
    }

    pub fn matrix(&self) -> &crate::symcore::Mat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn width(&self) -> usize {
        self.0.cols()
    }

    pub fn gram(&self) -> SymMatrix {
        self.0.gram()
    }
}

impl TryFrom<crate::symcore::Mat> for CpFactor {
    type Error = Error;

    fn try_from(m: crate::symcore::Mat) -> Result<Self> {
        CpFactor::new(m)
    }
}

impl From<CpFactor> for crate::symcore::Mat {
    fn from(f: CpFactor) -> Self {
        f.0
    }
}

pub fn cp_gram(f: &CpFactor) -> SymMatrix {
    f.gram()
}

/// `[[VVᵀ, VLᵀ], [LVᵀ, LLᵀ]]`, the Gram matrix of `V` stacked over `L`.
pub fn cp_block(v: &crate::symcore::Mat, l: &crate::symcore::Mat) -> Result<SymMatrix> {
    check_dim(v.rows(), l.rows())?;
    check_dim(v.cols(), l.cols())?;
    check_nonnegative(v)?;
    check_nonnegative(l)?;
    Ok(v.vstack(l)?.gram())
}

pub(crate) fn check_nonnegative(b: &crate::symcore::Mat) -> Result<()> {
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            let v = b.get(i, j);
            if !(v >= 0.0) {
                return Err(Error::NegativeFactorEntry { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// The 5x5 Horn matrix: copositive, neither PSD nor entrywise nonnegative.
pub fn horn_matrix() -> SymMatrix {
    let r = |s: [f64; 5]| s.to_vec();
    SymMatrix::from_rows(&[
        r([1.0, -1.0, 1.0, 1.0, -1.0]),
        r([-1.0, 1.0, -1.0, 1.0, 1.0]),
        r([1.0, -1.0, 1.0, -1.0, 1.0]),
        r([1.0, 1.0, -1.0, 1.0, -1.0]),
        r([-1.0, 1.0, 1.0, -1.0, 1.0]),
    ])
    .expect("Horn matrix is symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{quad_form, Mat};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn quad_min_examples() {
        let g = simplex_grid(2, 16).unwrap();
        let r = min_quad_over_simplex(&SymMatrix::identity(2), &g, 3).unwrap();
        assert!(r.value >= 0.5 - 1e-15);
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-12);
        let r = min_quad_over_simplex(&SymMatrix::zeros(3), &simplex_grid(3, 4).unwrap(), 2).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.argmin, SimplexPoint::vertex(3, 0));
    }

    #[test]
    fn horn_minimum_near_zero() {
        let g = simplex_grid(5, 20).unwrap();
        let r = min_quad_over_simplex(&horn_matrix(), &g, 3).unwrap();
        assert!(r.value >= -1e-6 && r.value <= 1e-3, "value {}", r.value);
    }

    #[test]
    fn verdict_examples() {
        let v = is_copositive(&SymMatrix::identity(4), DEFAULT_TOL, DEFAULT_GRID).unwrap();
        assert_eq!(v.status, CopositivityStatus::Copositive);
        let v = is_copositive(&m(&[&[1.0, -2.0], &[-2.0, 1.0]]), DEFAULT_TOL, DEFAULT_GRID).unwrap();
        assert_eq!(v.status, CopositivityStatus::NotCopositive);
        assert_abs_diff_eq!(v.min_value, -0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(v.witness.coords()[0], 0.5, epsilon = 1e-6);
        let v = is_copositive(&horn_matrix(), DEFAULT_TOL, 40).unwrap();
        assert_eq!(v.status, CopositivityStatus::Copositive);
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&SymMatrix::identity(3), 1e-12));
        assert!(!is_psd(&SymMatrix::diag(&[1.0, -1.0]), 1e-12));
        assert!(is_psd(&SymMatrix::outer(&[1.0, 2.0, 3.0]), 1e-9));
    }

    #[test]
    fn gram_examples() {
        let f = CpFactor::new(Mat::identity(2)).unwrap();
        assert_eq!(cp_gram(&f), SymMatrix::identity(2));
        let f = CpFactor::new(Mat::from_rows(&[vec![1.0], vec![1.0]]).unwrap()).unwrap();
        assert_eq!(cp_gram(&f), m(&[&[1.0, 1.0], &[1.0, 1.0]]));
        let f = CpFactor::new(Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap()).unwrap();
        assert_eq!(cp_gram(&f), SymMatrix::diag(&[1.0, 4.0]));
        assert!(CpFactor::new(Mat::from_rows(&[vec![-1.0]]).unwrap()).is_err());
    }

    #[test]
    fn block_examples() {
        let one = Mat::identity(1);
        assert_eq!(cp_block(&one, &one).unwrap(), m(&[&[1.0, 1.0], &[1.0, 1.0]]));
        let v = Mat::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let b = cp_block(&v, &Mat::zeros(2, 2)).unwrap();
        let vv = v.gram();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i < 2 && j < 2 { vv.get(i, j) } else { 0.0 };
                assert_eq!(b.get(i, j), expect);
            }
        }
        let v = Mat::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let l = Mat::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(cp_block(&v, &l).unwrap(), SymMatrix::outer(&[1.0, 0.0, 0.0, 1.0]));
        let neg = Mat::from_rows(&[vec![-0.5], vec![1.0]]).unwrap();
        assert!(matches!(cp_block(&neg, &l), Err(Error::NegativeFactorEntry { .. })));
    }

    fn arb_factor() -> impl Strategy<Value = Mat> {
        (1usize..5, 1usize..6).prop_flat_map(|(p, k)| {
            proptest::collection::vec(0.0..3.0f64, p * k).prop_map(move |v| Mat::from_row_major(p, k, v).unwrap())
        })
    }

    fn arb_square(p: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0..2.0f64, p * p)
    }

    proptest! {
        #[test]
        fn gram_is_psd_and_nonnegative(b in arb_factor()) {
            let g = cp_gram(&CpFactor::new(b).unwrap());
            prop_assert!(is_psd(&g, 1e-9));
            prop_assert!(g.min_entry() >= -1e-12);
        }

        #[test]
        fn refinement_is_monotone(v in arb_square(3)) {
            let d = SymMatrix::symmetric_part(&Mat::from_row_major(3, 3, v).unwrap()).unwrap();
            let g = simplex_grid(3, 6).unwrap();
            let r = min_quad_over_simplex(&d, &g, 4).unwrap();
            for w in r.history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            let r2 = min_quad_over_simplex(&d, &g, 2).unwrap();
            prop_assert!(r.value <= r2.value + 1e-12);
        }

        #[test]
        fn negative_verdicts_carry_witness(v in arb_square(4)) {
            let d = SymMatrix::symmetric_part(&Mat::from_row_major(4, 4, v).unwrap()).unwrap();
            let verdict = is_copositive(&d, DEFAULT_TOL, 8).unwrap();
            if verdict.status == CopositivityStatus::NotCopositive {
                let q = quad_form(&d, verdict.witness.coords()).unwrap();
                prop_assert!(q < -DEFAULT_TOL);
                prop_assert!((q - verdict.min_value).abs() <= 1e-12);
            }
        }
    }
}
